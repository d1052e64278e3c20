"""Pure-numpy crossbar kernels.

Operation order mirrors ``_ckernels.pyx`` exactly (column-sequential
accumulation, same clip/round sequence) so both backends agree bit for bit.
"""
import numpy as np


def _rail_steps(w, g_min, g_max, n_steps, compensate):
    if compensate:
        frac = w
    else:
        target = np.minimum(np.maximum(w * g_max, g_min), g_max)
        frac = (target - g_min) / (g_max - g_min)
    n = np.floor(frac * n_steps + 0.5)
    return np.minimum(np.maximum(n, 0.0), float(n_steps)).astype(np.int64)


def _rail_conductance(n, draw, levels, g_min, g_max, n_steps, noise_scale, per_pulse):
    g = levels[n]
    if noise_scale != 0.0:
        if per_pulse:
            scale = noise_scale * np.sqrt(n / float(n_steps))
        else:
            scale = noise_scale
        g = np.minimum(np.maximum(g + draw * scale, g_min), g_max)
    return g


def program(A, noise, levels, g_min, g_max, noise_scale, per_pulse, compensate):
    """Program differential rails for a batch of matrices.

    A: (T, rows, cols) in [-1, 1]; noise: (T, 2, rows, cols) standard normals.
    Returns (g_plus, g_minus, n_plus, n_minus).
    """
    n_steps = levels.shape[0] - 1
    w_plus = np.maximum(A, 0.0)
    w_minus = np.maximum(-A, 0.0)
    n_plus = _rail_steps(w_plus, g_min, g_max, n_steps, compensate)
    n_minus = _rail_steps(w_minus, g_min, g_max, n_steps, compensate)
    g_plus = _rail_conductance(n_plus, noise[:, 0], levels, g_min, g_max, n_steps,
                               noise_scale, per_pulse)
    g_minus = _rail_conductance(n_minus, noise[:, 1], levels, g_min, g_max, n_steps,
                                noise_scale, per_pulse)
    return g_plus, g_minus, n_plus, n_minus


def column_sum(weights, x):
    """sum_i x[..., i] * weights[..., j, i], accumulated column by column."""
    out = np.zeros(weights.shape[:-1])
    xe = x[..., None, :]
    for i in range(weights.shape[-1]):
        out += xe[..., i] * weights[..., i]
    return out


def simulate(A, x, noise, levels, g_min, g_max, noise_scale, per_pulse, compensate):
    """Decoded crossbar outputs y_hat, shape (T, rows)."""
    g_plus, g_minus, _, _ = program(A, noise, levels, g_min, g_max, noise_scale,
                                    per_pulse, compensate)
    s = column_sum(g_plus - g_minus, x)
    return s / ((g_max - g_min) if compensate else g_max)


_LOG_SQRT_2PI = 0.9189385332046727


def em_step(x, w, m, s):
    """One EM iteration for a 1-D normal mixture.

    Returns (log-likelihood at the input parameters, nk, means, variances),
    with the last three being the M-step update.
    """
    lr = np.log(w) - np.log(s) - _LOG_SQRT_2PI - 0.5 * ((x[:, None] - m) / s) ** 2
    mx = lr.max(axis=1, keepdims=True)
    e = np.exp(lr - mx)
    tot = e.sum(axis=1)
    ll = float((mx[:, 0] + np.log(tot)).sum())
    resp = e / tot[:, None]
    nk = resp.sum(axis=0)
    mu = (resp * x[:, None]).sum(axis=0) / nk
    var = (resp * (x[:, None] - mu) ** 2).sum(axis=0) / nk
    return ll, nk, mu, var
