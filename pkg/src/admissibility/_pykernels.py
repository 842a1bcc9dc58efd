"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Path scans are vectorised across replications with numpy; the sequential
forecaster loops are plain Python.  Signatures and return values match the
compiled versions exactly.
"""

from __future__ import annotations

import numpy as np


def eprocess_scan(xs, theta0, a, b, log_threshold, monitor):
    xs = np.asarray(xs, dtype=np.uint8)
    monitor = np.asarray(monitor, dtype=bool)
    n_paths, horizon = xs.shape
    logv = np.zeros(n_paths)
    logsup = np.zeros(n_paths)
    s = np.zeros(n_paths)
    first = np.full(n_paths, -1, dtype=np.int64)
    log_up = -np.log(theta0)
    log_down = -np.log(1.0 - theta0)
    for t in range(horizon):
        p = (s + a) / (t + a + b)
        hit = xs[:, t].astype(bool)
        logv += np.where(hit, np.log(p) + log_up, np.log(1.0 - p) + log_down)
        s += hit
        if monitor[t]:
            np.maximum(logsup, logv, out=logsup)
            first[(first < 0) & (logv >= log_threshold)] = t + 1
    return logv, logsup, first


def gaussian_eprocess_scan(xs, mu0, sigma, tau, log_threshold):
    xs = np.asarray(xs, dtype=np.float64)
    n_paths, horizon = xs.shape
    s2, t2 = sigma * sigma, tau * tau
    logv = np.zeros(n_paths)
    logsup = np.zeros(n_paths)
    total = np.zeros(n_paths)
    first = np.full(n_paths, -1, dtype=np.int64)
    for t in range(horizon):
        mu_hat = (t2 * total + s2 * mu0) / (t * t2 + s2)
        x = xs[:, t]
        d0 = x - mu0
        d1 = x - mu_hat
        logv += (d0 * d0 - d1 * d1) / (2.0 * s2)
        total += x
        np.maximum(logsup, logv, out=logsup)
        first[(first < 0) & (logv >= log_threshold)] = t + 1
    return logv, logsup, first


def defensive_run(source, adversarial):
    source = np.asarray(source, dtype=np.int8)
    horizon = source.shape[0]
    preds = np.empty(horizon)
    outcomes = np.empty(horizon, dtype=np.int8)
    deficits = np.empty(horizon)
    d = 0.0
    for t in range(horizon):
        p = 1.0 if d > 0.0 else (0.0 if d < 0.0 else 0.5)
        x = (0 if p >= 0.5 else 1) if adversarial else int(source[t])
        d += x - p
        preds[t] = p
        outcomes[t] = x
        deficits[t] = d
    return preds, outcomes, deficits


def set_adversary_run(horizon, alpha, a, b):
    misses = np.empty(horizon, dtype=np.int8)
    s = 0.0
    for t in range(horizon):
        p = (s + a) / (t + a + b)
        has0 = not (p > 0.5 and p >= 1.0 - alpha)
        has1 = not (p < 0.5 and p <= alpha)
        if has0 and not has1:
            x = 1
        elif has1 and not has0:
            x = 0
        else:
            x = 1 if p >= 0.5 else 0
        misses[t] = (x == 1 and not has1) or (x == 0 and not has0)
        s += x
    return misses
