#!/usr/bin/env python3
# Hand-rolled MLP: forward, backward, and a finite-difference spot check.

import numpy as np

from reaugment.numeric import Adam, DiagonalGaussian, gaussian_log_prob, init_mlp, kl_diag_gaussians
from reaugment.numeric import mlp_backward, mlp_forward, parameters, gradient_arrays

rng = np.random.default_rng(0)
net = init_mlp(rng, [4, 8, 1], hidden_activation="tanh")
x = rng.standard_normal((16, 4))
y = np.sin(x.sum(axis=1, keepdims=True))

out, cache = mlp_forward(net, x)
print("output shape", out.shape)

# loss = mean squared error, so upstream grad is 2 (out - y) / n
grads, dx = mlp_backward(cache, 2 * (out - y) / len(y))
g = gradient_arrays(grads)

# nudge one weight and compare
W = net[0].weights
h = 1e-5
W[0, 0] += h
up = np.mean((mlp_forward(net, x)[0] - y) ** 2)
W[0, 0] -= 2 * h
down = np.mean((mlp_forward(net, x)[0] - y) ** 2)
W[0, 0] += h
print("analytic", g[0][0, 0], " numeric", (up - down) / (2 * h))

# a few hundred Adam steps
opt = Adam(learning_rate=1e-2)
for step in range(300):
    out, cache = mlp_forward(net, x)
    grads, _ = mlp_backward(cache, 2 * (out - y) / len(y))
    opt.step(parameters(net), gradient_arrays(grads))
print("train mse after Adam", np.mean((mlp_forward(net, x)[0] - y) ** 2))

# Gaussians
q = DiagonalGaussian(np.array([1.0]), np.array([0.0]))
p = DiagonalGaussian(np.array([0.0]), np.array([0.0]))
print("KL(N(1,1) || N(0,1)) =", kl_diag_gaussians(q, p))
logp, d_mu, d_ls = gaussian_log_prob(p, np.array([1.0]))
print("log N(1; 0, 1) =", logp, " d/dmu =", d_mu)
