from reaugment.pipeline import RunConfig


def small_config(**overrides):
    """A pipeline configuration that runs in a couple of seconds."""
    base = dict(
        synthetic={"kind": "multi_sinusoid", "T": 1200, "C": 2, "seed": 0},
        partition=(600, 200, 300), fewshot_fraction=0.5, lookback=24, horizon=24,
        hidden=16, feature_dim=16, d_z=4, vmae_epochs=5, reinforce_steps=10,
        forecaster_epochs=5, batch_size=16,
    )
    base.update(overrides)
    return RunConfig(**base)
