"""Lehmer means and their modulated generalizations.

For a strictly positive sample vector x = (x_1 .. x_m) and a modulator f
(see :mod:`smartdca.modulators`):

    lehmer_mean(x, rho)                sum x^rho / sum x^(rho-1)
    quasi_lehmer_out(x, rho, f)        sum x * f(x)^rho   / sum f(x)^rho
    quasi_lehmer_in(x, rho, f)         sum x * f(x^rho)   / sum f(x^rho)
    quasi_lehmer_moment(x, rho, xi, f) sum x^xi * f(x)^rho / sum f(x)^rho
    quasi_lehmer_expectation(x, rho, g, f)
                                       sum g(x) * f(x)^rho / sum f(x)^rho
    quasi_gini(x, rho, gamma, f)       (sum x * f(x)^rho / sum f(x)^gamma)
                                           ^ (1 / (rho + 1 - gamma))

With f = identity the out/in variants both collapse to
lehmer_mean(x, rho + 1). The familiar special cases of the Lehmer mean are
rho = 0 (harmonic), 1 (arithmetic), 2 (contraharmonic), and the rho -> inf
limit is max(x).

Every power sum is evaluated in the log domain with a max-shifted
log-sum-exp, so |rho| up to ~300 on samples spanning [1e-6, 1e6] neither
overflows nor underflows. Summation order is fixed (index order, numpy
pairwise), making results deterministic across runs and threads. All
functions are pure.

The *_grid variants evaluate one sample vector across a whole array of
exponents in a single pass; the scalar functions are one-point grids, so
there is exactly one code path to trust.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .modulators import Modulator

__all__ = [
    "as_sample_vector",
    "lehmer_mean",
    "lehmer_mean_grid",
    "quasi_lehmer_out",
    "quasi_lehmer_out_grid",
    "quasi_lehmer_in",
    "quasi_lehmer_in_grid",
    "quasi_lehmer_moment",
    "quasi_lehmer_moment_grid",
    "quasi_lehmer_expectation",
    "quasi_gini",
]


def as_sample_vector(x) -> np.ndarray:
    """Validate and return a 1-D float array of strictly positive samples."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError("sample vector must be one-dimensional with length >= 1")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample values must be finite")
    if np.any(arr <= 0.0):
        bad = float(arr[arr <= 0.0][0])
        raise DomainError(f"sample values must be > 0, got {bad}")
    return arr


_as_samples = as_sample_vector


def _as_rhos(rho) -> np.ndarray:
    arr = np.asarray(rho, dtype=float)
    if arr.ndim != 1:
        raise DomainError("exponent grid must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError("exponents must be finite")
    return arr


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-shifted log(sum(exp(a))) along ``axis``; deterministic order."""
    amax = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - amax), axis=axis))
    return out + np.squeeze(amax, axis=axis)


def _log_weights(f: Modulator, log_x: np.ndarray) -> np.ndarray:
    logf = f.log_eval_from_log(log_x)
    if not np.all(np.isfinite(np.atleast_1d(logf))):
        bad_idx = int(np.argmax(~np.isfinite(np.atleast_1d(logf))))
        raise DomainError(
            f"modulator {f.name} is not positive at sample value "
            f"{float(np.exp(np.atleast_1d(log_x).flat[bad_idx]))}"
        )
    return logf


def _ratio_of_power_sums(log_num_terms: np.ndarray, log_den_terms: np.ndarray) -> np.ndarray:
    return np.exp(_logsumexp(log_num_terms) - _logsumexp(log_den_terms))


def lehmer_mean_grid(x, rhos) -> np.ndarray:
    """lehmer_mean of one vector at every exponent in ``rhos``."""
    v = _as_samples(x)
    r = _as_rhos(rhos)
    log_x = np.log(v)
    num = r[:, None] * log_x[None, :]
    den = (r - 1.0)[:, None] * log_x[None, :]
    return _ratio_of_power_sums(num, den)


def lehmer_mean(x, rho: float) -> float:
    """Lehmer mean of order ``rho``: sum x^rho / sum x^(rho-1)."""
    return float(lehmer_mean_grid(x, [rho])[0])


def quasi_lehmer_out_grid(x, rhos, f: Modulator) -> np.ndarray:
    v = _as_samples(x)
    r = _as_rhos(rhos)
    log_x = np.log(v)
    log_f = _log_weights(f, log_x)
    w = r[:, None] * log_f[None, :]
    return _ratio_of_power_sums(w + log_x[None, :], w)


def quasi_lehmer_out(x, rho: float, f: Modulator) -> float:
    """Modulator-weighted mean sum x*f(x)^rho / sum f(x)^rho.

    Reduces to lehmer_mean(x, rho + 1) when f is the identity.
    """
    return float(quasi_lehmer_out_grid(x, [rho], f)[0])


def quasi_lehmer_in_grid(x, rhos, f: Modulator) -> np.ndarray:
    v = _as_samples(x)
    r = _as_rhos(rhos)
    log_x = np.log(v)
    # Weight f(x^rho): hand rho*log(x) straight to the modulator's log path
    # so x^rho never has to be representable.
    w = _log_weights(f, r[:, None] * log_x[None, :])
    return _ratio_of_power_sums(w + log_x[None, :], w)


def quasi_lehmer_in(x, rho: float, f: Modulator) -> float:
    """Power-inside variant sum x*f(x^rho) / sum f(x^rho).

    Also collapses to lehmer_mean(x, rho + 1) for identity f, but unlike the
    out variant it is not monotonic in rho in general: on vectors lying
    entirely below e^(-1/rho) it can decrease as rho grows.
    """
    return float(quasi_lehmer_in_grid(x, [rho], f)[0])


def quasi_lehmer_moment_grid(x, rhos, xi: float, f: Modulator) -> np.ndarray:
    v = _as_samples(x)
    r = _as_rhos(rhos)
    if not np.isfinite(xi):
        raise DomainError("moment order xi must be finite")
    if xi < 1.0:
        raise DomainError(f"moment order xi must be >= 1, got {xi}")
    log_x = np.log(v)
    log_f = _log_weights(f, log_x)
    w = r[:, None] * log_f[None, :]
    return _ratio_of_power_sums(w + xi * log_x[None, :], w)


def quasi_lehmer_moment(x, rho: float, xi: float, f: Modulator) -> float:
    """Higher moment sum x^xi * f(x)^rho / sum f(x)^rho (xi >= 1)."""
    return float(quasi_lehmer_moment_grid(x, [rho], xi, f)[0])


def quasi_lehmer_expectation(x, rho: float, g, f: Modulator) -> float:
    """Generalized expectation sum g(x)*f(x)^rho / sum f(x)^rho.

    ``g`` must be monotonic increasing; it may be a Modulator or any plain
    callable (it is evaluated directly, so it need not be positive). Equals
    quasi_lehmer_out when g is the identity.
    """
    v = _as_samples(x)
    r = _as_rhos([rho])
    log_x = np.log(v)
    log_f = _log_weights(f, log_x)
    w = (r[:, None] * log_f[None, :])[0]
    # Normalized weights keep this stable without requiring g > 0.
    norm = np.exp(w - _logsumexp(w))
    gv = np.asarray(g(v), dtype=float)
    if gv.shape != v.shape or not np.all(np.isfinite(gv)):
        raise DomainError("g must map the samples to finite values elementwise")
    return float(np.sum(gv * norm))


def quasi_gini(x, rho: float, gamma: float, f: Modulator, variant: str = "out") -> float:
    """Two-exponent mean (sum x*W_rho / sum W_gamma)^(1/(rho+1-gamma)).

    The weights are W_t = f(x)^t for the out variant and W_t = f(x^t) for
    the in variant. As gamma -> rho this tends to the corresponding
    quasi-Lehmer mean; gamma = rho + 1 is an exponent singularity and is
    rejected.
    """
    v = _as_samples(x)
    if not (np.isfinite(rho) and np.isfinite(gamma)):
        raise DomainError("exponents must be finite")
    if rho + 1.0 == gamma:
        raise DomainError(f"quasi-Gini exponent singularity: rho+1 == gamma == {gamma}")
    if variant not in ("in", "out"):
        raise DomainError(f"variant must be 'in' or 'out', got {variant!r}")
    log_x = np.log(v)
    if variant == "out":
        log_f = _log_weights(f, log_x)
        log_num = rho * log_f + log_x
        log_den = gamma * log_f
    else:
        log_num = _log_weights(f, rho * log_x) + log_x
        log_den = _log_weights(f, gamma * log_x)
    log_ratio = _logsumexp(log_num) - _logsumexp(log_den)
    return float(np.exp(log_ratio / (rho + 1.0 - gamma)))
