"""Mixing-distribution transforms for random coefficients.

Each family maps structural parameters plus quasi-random draws to coefficient
realizations, elementwise over a [person, draw] grid:

    fixed        beta = value
    normal       beta = mu + sigma * z                  (z standard normal)
    uniform      beta = a + b * u                       (u uniform, support [a, a+b])
    triangular   beta = a + b * (u1 + u2)               (support [a, a+2b])
    lognormal    beta = -exp(mu + sigma * z)            (strictly negative)
    loguniform   beta = -exp(a + b * u)                 (strictly negative)
    at           single-draw inverse CDF of the asymmetric triangle on [a, b]
                 with mode (a + b)/2 + c
    fm2 / fm3    beta = mu + sum_{p=1..P} s_p * u**p    (polynomial in a uniform)

The negative direction of the log families can be reversed per coefficient
with ``sign_flip`` for attributes whose preference runs the other way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .draws import STD_NORMAL, UNIFORM01
from .errors import ArityMismatch, DegenerateSupport, ModeOutOfSupport, WrongDrawKind

FIXED = "fixed"
NORMAL = "normal"
UNIFORM = "uniform"
TRIANGULAR = "triangular"
LOGNORMAL = "lognormal"
LOGUNIFORM = "loguniform"
AT = "at"
FM2 = "fm2"
FM3 = "fm3"

FAMILIES = (FIXED, NORMAL, UNIFORM, TRIANGULAR, LOGNORMAL, LOGUNIFORM, AT, FM2, FM3)

_PARAM_LABELS = {
    FIXED: ("value",),
    NORMAL: ("mu", "sigma"),
    UNIFORM: ("a", "b"),
    TRIANGULAR: ("a", "b"),
    LOGNORMAL: ("mu", "sigma"),
    LOGUNIFORM: ("a", "b"),
    AT: ("a", "b", "c"),
    FM2: ("mu", "s1", "s2"),
    FM3: ("mu", "s1", "s2", "s3"),
}

# Triangular and AT reserve two uniform dimensions (two distinct draws per
# coefficient); AT's inverse-CDF sampler consumes only the first of its pair.
_DRAW_DIMS = {
    FIXED: 0,
    NORMAL: 1,
    UNIFORM: 1,
    TRIANGULAR: 2,
    LOGNORMAL: 1,
    LOGUNIFORM: 1,
    AT: 2,
    FM2: 1,
    FM3: 1,
}

_NORMAL_KIND = {NORMAL, LOGNORMAL}


def param_labels(family: str) -> tuple[str, ...]:
    return _PARAM_LABELS[family]


def draw_dims(family: str) -> int:
    return _DRAW_DIMS[family]


def draw_kind(family: str) -> str | None:
    if family == FIXED:
        return None
    return STD_NORMAL if family in _NORMAL_KIND else UNIFORM01


@dataclass(frozen=True)
class MixingSpec:
    """Distributional assumption for one coefficient."""

    name: str
    family: str
    sign_flip: bool = False
    pin_c_zero: bool = True  # only meaningful for the "at" family

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ArityMismatch(f"unknown mixing family {self.family!r}")

    @property
    def arity(self) -> int:
        return len(_PARAM_LABELS[self.family])

    def free_labels(self) -> tuple[str, ...]:
        """Labels of the parameters that are actually estimated."""
        labels = _PARAM_LABELS[self.family]
        if self.family == AT and self.pin_c_zero:
            return labels[:2]
        return labels

    def full_params(self, params) -> np.ndarray:
        """Expand an estimated parameter slice to the family's full arity.

        Accepts either the free parameters (pinned values filled in) or an
        already-full vector.
        """
        params = np.asarray(params, dtype=float)
        if self.family == AT and self.pin_c_zero and params.size == 2:
            return np.array([params[0], params[1], 0.0])
        if params.size != self.arity:
            raise ArityMismatch(
                f"{self.name}: family {self.family} takes {self.arity} parameters, "
                f"got {params.size}")
        return params


def at_inverse_cdf(a: float, b: float, c: float, u):
    """Sample the asymmetric triangle on [a, b], mode (a+b)/2 + c, from one uniform.

    The single draw is split at F(mode): values below it are rescaled into the
    lower-branch quantile, values above into the upper branch, so each draw
    yields exactly one realization with the correct branch weight.
    """
    if not a < b:
        raise DegenerateSupport(f"need a < b, got a={a}, b={b}")
    mode = (a + b) / 2.0 + c
    if not (a < mode < b):
        raise ModeOutOfSupport(f"mode {mode} outside ({a}, {b})")
    u = np.asarray(u, dtype=float)
    f_mode = (mode - a) / (b - a)
    lower = a + (mode - a) * np.sqrt(np.minimum(u, f_mode) / f_mode)
    upper = b - (b - mode) * np.sqrt(np.minimum(1.0 - u, 1.0 - f_mode) / (1.0 - f_mode))
    out = np.where(u <= f_mode, lower, upper)
    return out if out.ndim else float(out)


def realize(spec: MixingSpec, params, values: np.ndarray, kind: str) -> np.ndarray:
    """Map draws to per-(person, draw) coefficient values.

    ``values`` carries the coefficient's reserved draw dimensions in its last
    axis; ``kind`` must match the family (normal families consume std_normal
    draws, all others uniform01).
    """
    params = spec.full_params(np.asarray(params, dtype=float))
    family = spec.family

    expected = draw_kind(family)
    if expected is not None and kind != expected:
        raise WrongDrawKind(f"{spec.name}: family {family} needs {expected} draws, got {kind}")
    if values.shape[-1] < draw_dims(family):
        raise ArityMismatch(
            f"{spec.name}: family {family} needs {draw_dims(family)} draw dimensions, "
            f"got {values.shape[-1]}")

    if family == FIXED:
        out = np.full(values.shape[:-1], params[0])
    elif family == NORMAL:
        out = params[0] + params[1] * values[..., 0]
    elif family == UNIFORM:
        out = params[0] + params[1] * values[..., 0]
    elif family == TRIANGULAR:
        out = params[0] + params[1] * (values[..., 0] + values[..., 1])
    elif family == LOGNORMAL:
        out = -np.exp(params[0] + params[1] * values[..., 0])
    elif family == LOGUNIFORM:
        out = -np.exp(params[0] + params[1] * values[..., 0])
    elif family == AT:
        out = at_inverse_cdf(params[0], params[1], params[2], values[..., 0])
    else:  # fm2 / fm3
        u = values[..., 0]
        out = np.full(u.shape, params[0])
        power = u.copy()
        for p in range(1, params.size):
            out = out + params[p] * power
            if p + 1 < params.size:
                power = power * u
    return -out if spec.sign_flip else out


def analytic_moments(spec: MixingSpec, params) -> tuple[float, float]:
    """Population mean and standard deviation implied by the parameters.

    Estimated scale parameters are unconstrained during optimization, so the
    reported standard deviation uses their absolute value.
    """
    params = spec.full_params(np.asarray(params, dtype=float))
    family = spec.family

    if family == FIXED:
        mean, sd = params[0], 0.0
    elif family == NORMAL:
        mean, sd = params[0], abs(params[1])
    elif family == UNIFORM:
        a, b = params
        mean, sd = a + b / 2.0, abs(b) / np.sqrt(12.0)
    elif family == TRIANGULAR:
        a, b = params
        mean, sd = a + b, abs(b) / np.sqrt(6.0)
    elif family == LOGNORMAL:
        mu, sigma = params
        scale = np.exp(mu + sigma ** 2 / 2.0)
        mean, sd = -scale, scale * np.sqrt(np.exp(sigma ** 2) - 1.0)
    elif family == LOGUNIFORM:
        a, b = params
        if b == 0.0:
            mean, sd = -np.exp(a), 0.0
        else:
            mean = -(np.exp(a + b) - np.exp(a)) / b
            second = (np.exp(2 * a + 2 * b) - np.exp(2 * a)) / (2 * b)
            sd = np.sqrt(max(second - mean ** 2, 0.0))
    elif family == AT:
        a, b, c = params
        mode = (a + b) / 2.0 + c
        mean = (a + b + mode) / 3.0
        var = (a * a + b * b + mode * mode - a * b - a * mode - b * mode) / 18.0
        sd = np.sqrt(max(var, 0.0))
    else:  # fm2 / fm3
        mu, sigmas = params[0], params[1:]
        mean = mu + sum(s / (p + 2) for p, s in enumerate(sigmas))
        var = 0.0
        for p, sp in enumerate(sigmas, start=1):
            for q, sq in enumerate(sigmas, start=1):
                var += sp * sq * (1.0 / (p + q + 1) - 1.0 / ((p + 1) * (q + 1)))
        sd = np.sqrt(max(var, 0.0))
    return (-mean, sd) if spec.sign_flip else (float(mean), float(sd))
