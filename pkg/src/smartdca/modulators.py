"""Catalog of modulator functions.

A modulator is a positive, monotonic non-decreasing function on (0, inf)
used to damp the cash amount a strategy invests. The catalog:

    identity          f(x) = x
    tanh              f(x) = tanh(x)
    sigmoid           f(x) = 1 / (1 + e^-x)
    sin1              f(x) = sin(pi/2 * x) for x <= 1, else 1
    adaptive_sigmoid  f(x) = 1 / (1 + e^-((x - x0) / lambda))

All bounded kinds map (0, inf) into (0, 1]. Every kind also exposes a
numerically stable log-domain evaluation, ``log_eval_from_log``, which takes
log(x) and returns log(f(x)); strategies and means use it so that extreme
exponents never overflow or spuriously hit f(0) = 0 through underflow.

``calibrate_sig_plus`` fits the adaptive sigmoid to a window of historical
prices: with y_i = 1/p_i the center is x0 = (y_max + y_min) / 2 and the slope
scale is lambda = (y_max - y_min) / 8, so the sigmoid traverses its sensitive
band exactly across the inverse-price range seen in the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

KINDS = ("identity", "tanh", "sigmoid", "sin1", "adaptive_sigmoid")

# Aliases accepted when parsing a modulator name from config/CLI.
_NAME_TO_KIND = {
    "identity": "identity",
    "tanh": "tanh",
    "sigmoid": "sigmoid",
    "sin1": "sin1",
    "sin-1": "sin1",
    "sig+": "adaptive_sigmoid",
    "adaptive_sigmoid": "adaptive_sigmoid",
}

_HALF_PI = math.pi / 2.0
_LOG_HALF_PI = math.log(_HALF_PI)
# Below this log-argument, log f(x) == log x to double precision for the
# kinds that vanish linearly at 0 (tanh, sin1 up to the pi/2 factor).
_SMALL_LOG = -18.0


@dataclass(frozen=True)
class Modulator:
    """An immutable, thread-safe modulator value.

    ``x0`` and ``lam`` are only meaningful for kind ``adaptive_sigmoid``
    (center and slope scale, both in inverse-price units).
    """

    kind: str
    x0: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown modulator kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "adaptive_sigmoid":
            if not (math.isfinite(self.x0) and math.isfinite(self.lam)):
                raise DomainError("adaptive_sigmoid parameters must be finite")
            if self.lam <= 0:
                raise DomainError(f"adaptive_sigmoid lambda must be > 0, got {self.lam}")

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    @property
    def name(self) -> str:
        """Short name used in configs, reports and CSV columns."""
        return "sig+" if self.kind == "adaptive_sigmoid" else self.kind

    def __call__(self, x):
        """Evaluate f(x) for x > 0 (scalar or array)."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if not np.all(np.isfinite(arr)):
            raise DomainError("modulator argument must be finite")
        if np.any(arr <= 0.0):
            bad = float(arr[arr <= 0.0][0])
            raise DomainError(f"modulator argument must be > 0, got {bad}")
        out = self._eval(arr)
        return float(out[0]) if scalar else out

    def _eval(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return x
        if self.kind == "tanh":
            return np.tanh(x)
        if self.kind == "sigmoid":
            return 1.0 / (1.0 + np.exp(-x))
        if self.kind == "sin1":
            return np.sin(_HALF_PI * np.minimum(x, 1.0))
        # adaptive_sigmoid; the argument can sit far on either side of x0,
        # so use the overflow-free two-sided form.
        z = (x - self.x0) / self.lam
        pos = z >= 0
        out = np.empty_like(z)
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out

    def log_eval_from_log(self, log_x):
        """Return log f(exp(log_x)) without forming exp(log_x) destructively.

        Accepts any finite real log_x (scalar or array), covering arguments
        far outside double range, e.g. x^rho for |rho| up to several hundred.
        """
        L = np.asarray(log_x, dtype=float)
        scalar = L.ndim == 0
        L = np.atleast_1d(L)
        if not np.all(np.isfinite(L)):
            raise DomainError("log-domain modulator argument must be finite")
        out = self._log_eval(L)
        return float(out[0]) if scalar else out

    def _log_eval(self, L: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return L.copy()
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            u = np.exp(L)
            if self.kind == "tanh":
                # Three zones: below e^-18, log tanh(u) == log u to double
                # precision; up to ~0.14 the ratio form log u + log(tanh(u)/u)
                # avoids the 1 - e^-2u cancellation; above that the exact
                # log1p pair is stable.
                t = np.exp(-2.0 * u)
                val = np.where(
                    L <= -2.0,
                    L + np.log(np.tanh(np.minimum(u, 1.0)) / np.minimum(u, 1.0)),
                    np.log1p(-t) - np.log1p(t),
                )
                return np.where(L < _SMALL_LOG, L, val)
            if self.kind == "sigmoid":
                # log sigmoid(u) = -log1p(e^-u); u >= 0 here so never overflows.
                return -np.log1p(np.exp(-u))
            if self.kind == "sin1":
                val = np.log(np.sin(_HALF_PI * np.minimum(u, 1.0)))
                val = np.where(L < _SMALL_LOG, _LOG_HALF_PI + L, val)
                return np.where(u >= 1.0, 0.0, val)
            # adaptive_sigmoid: log sigmoid(z) = min(z, 0) - log1p(e^-|z|)
            z = (u - self.x0) / self.lam
            return np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))


IDENTITY = Modulator("identity")
TANH = Modulator("tanh")
SIGMOID = Modulator("sigmoid")
SIN1 = Modulator("sin1")


def adaptive_sigmoid(x0: float, lam: float) -> Modulator:
    return Modulator("adaptive_sigmoid", x0=float(x0), lam=float(lam))


def from_name(name: str, x0: float | None = None, lam: float | None = None) -> Modulator:
    """Build a modulator from its config name (identity|tanh|sigmoid|sin1|sig+)."""
    kind = _NAME_TO_KIND.get(str(name).strip().lower())
    if kind is None:
        raise DomainError(
            f"unknown modulator name {name!r}; expected one of {sorted(set(_NAME_TO_KIND))}"
        )
    if kind == "adaptive_sigmoid":
        if x0 is None or lam is None:
            raise DomainError("modulator 'sig+' needs explicit x0 and lambda parameters")
        return Modulator(kind, x0=float(x0), lam=float(lam))
    return Modulator(kind)


def calibrate_sig_plus(prev_prices) -> Modulator:
    """Fit the adaptive sigmoid to the inverse prices of a past window.

    ``prev_prices`` is a positive price array (or anything with a ``prices``
    attribute, e.g. a PriceSeries). Returns the adaptive sigmoid with
    x0 = (y_max + y_min) / 2 and lambda = (y_max - y_min) / 8 over y = 1/p.
    A constant-price window makes the slope formula degenerate; lambda is
    then floored to max(1e-12, |x0| * 1e-9), which keeps a near-step sigmoid
    centered on the single observed inverse price.
    """
    p = np.asarray(getattr(prev_prices, "prices", prev_prices), dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("calibration window must contain at least one price")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise DomainError("calibration window prices must be positive and finite")
    y = 1.0 / p
    y_max = float(np.max(y))
    y_min = float(np.min(y))
    x0 = (y_max + y_min) / 2.0
    lam = (y_max - y_min) / 8.0
    if lam <= 0.0:
        lam = max(1e-12, abs(x0) * 1e-9)
    return Modulator("adaptive_sigmoid", x0=x0, lam=lam)


def sig_plus_lambda_floored(prev_prices) -> bool:
    """True when the window is constant-priced and the lambda floor applies."""
    p = np.asarray(getattr(prev_prices, "prices", prev_prices), dtype=float)
    return p.size > 0 and float(np.max(p)) == float(np.min(p))
