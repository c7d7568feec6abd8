#!/usr/bin/env python3
# The gap-closing metric on reference few-shot / augmented / full-data numbers.

from reaugment.forecaster import EvalReport
from reaugment.pipeline import f_metric

rows = {
    # (MAE, MSE): few-shot, few-shot + augmentation, full training set
    "ETTh1": ((0.434, 0.411), (0.422, 0.403), (0.405, 0.387)),
    "Traffic": ((0.318, 0.466), (0.293, 0.429), (0.269, 0.392)),
    "Exchange": ((0.228, 0.103), (0.224, 0.097), (0.206, 0.086)),
}
for name, (few, aug, std) in rows.items():
    fm = f_metric(EvalReport(*few, 0), EvalReport(*aug, 0), EvalReport(*std, 0))
    print("%-9s F_MAE %6.1f%%   F_MSE %6.1f%%" % (name, 100 * fm.f_mae, 100 * fm.f_mse))

# 0 when augmentation does nothing, 1 when it matches the full data, negative when it hurts
few, std = EvalReport(0.5, 0.4, 0), EvalReport(0.3, 0.2, 0)
print(f_metric(few, few, std).f_mae, f_metric(few, std, std).f_mae, round(f_metric(few, EvalReport(0.6, 0.5, 0), std).f_mae, 3))
