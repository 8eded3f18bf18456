"""Radial Fourier-multiplier symbols m(|zeta|) driving the gSQG velocity.

A symbol is a positive nondecreasing radial function r -> m(r).  The velocity
of the flow is u = perp-grad Lambda^(beta-2) m(Lambda) theta, so the growth of
m at high frequency controls how singular the velocity is.  The structural
facts the rest of the package relies on are:

  (A1) m > 0, nondecreasing, smooth away from 0;
  (A2) Mikhlin bounds  r^k |m^(k)(r)| <= b0 m(r)  for k = 1..5;
  (A3) r m'(r) <= alpha m(r) for r >= b1 (growth order at most alpha there);
  (A4) b2^-1 <= m(r)/r^lambda_low <= b2 for r <= 1 (low-frequency order);
  (A5) the strict variant of (A3), valid for every r > 0;
  and, for the log-growth family, b3^-1 <= m(r) <= b3 (log r)^mu for r >= b3.

`check_assumptions` measures all of these on a grid and reports worst ratios;
nothing here is a symbolic proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, GridError, PreconditionError, RangeError

KINDS = ("identity", "power", "power_log", "log_power", "tabulated")

# integer codes shared with the kernel backends
KIND_CODES = {"identity": 0, "power": 1, "power_log": 2, "log_power": 3, "tabulated": 4}


@dataclass(frozen=True)
class MultiplierSpec:
    """A radial symbol together with its declared structural constants.

    Instances are immutable; all evaluation methods are pure, so a spec can be
    shared freely between threads.

    kind-specific parameters:
      power      -- m(r) = r**a
      power_log  -- m(r) = r**a * log(shift + r)
      log_power  -- m(r) = max(1/b3, log(base_shift + r)**mu)
      tabulated  -- monotone piecewise-cubic interpolation of (r, m) samples
    """

    kind: str = "identity"
    a: float = 0.0              # power exponent (power, power_log)
    shift: float = 1.0          # additive shift inside the log (power_log, log_power)
    mu: float = 1.0             # log-growth exponent (log_power)
    alpha: float = 0.5          # declared growth exponent of (A3)/(A5)
    lambda_low: float = 0.0     # declared low-frequency exponent of (A4)
    b0: float = 5.0
    b1: float = 1.0
    b2: float = 1.0
    b3: float = 1.0
    strict: bool = False        # (A5) asserted for all r > 0
    table_r: Optional[np.ndarray] = field(default=None, repr=False)
    table_m: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown multiplier kind {self.kind!r}")
        if self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            m = np.asarray(self.table_m, dtype=float)
            if r.ndim != 1 or r.shape != m.shape or r.size < 2:
                raise GridError("tabulated multiplier needs matching 1-d r and m samples")
            if not np.all(np.diff(r) > 0):
                raise GridError("tabulated r samples must be strictly increasing")
            if np.any(m <= 0):
                raise DomainError("tabulated m samples must be positive")
            object.__setattr__(self, "table_r", r)
            object.__setattr__(self, "table_m", m)
            from scipy.interpolate import PchipInterpolator

            interp = PchipInterpolator(r, m, extrapolate=False)
            object.__setattr__(self, "_interp", interp)
            object.__setattr__(self, "_interp_d", interp.derivative())

    # ---------------------------------------------------------------- builders

    @classmethod
    def identity(cls, **kw):
        kw.setdefault("alpha", 0.05)
        return cls(kind="identity", strict=True, **kw)

    @classmethod
    def power(cls, a, **kw):
        if not 0.0 < a < 1.0:
            raise PreconditionError("power exponent must lie in (0, 1)")
        kw.setdefault("alpha", a)
        kw.setdefault("lambda_low", a)
        return cls(kind="power", a=a, strict=True, **kw)

    @classmethod
    def power_log(cls, a, shift=1.0, **kw):
        # r m'/m = a + r/((shift+r) log(shift+r)) <= a + 1/log(shift+b1),
        # so the default b1 makes the default alpha hold beyond it.
        alpha = kw.pop("alpha", min(a + 0.25, 0.95))
        kw.setdefault("b1", max(1.0, math.exp(1.0 / (alpha - a)) - shift))
        kw.setdefault("lambda_low", a)
        return cls(kind="power_log", a=a, shift=shift, alpha=alpha, **kw)

    @classmethod
    def log_power(cls, mu, base_shift=1.0, **kw):
        if not 0.0 <= mu <= 1.0:
            raise PreconditionError("log exponent mu must lie in [0, 1]")
        alpha = kw.pop("alpha", 0.25)
        kw.setdefault("b1", max(1.0, math.exp(mu / alpha) - base_shift))
        return cls(kind="log_power", mu=mu, shift=base_shift, alpha=alpha, **kw)

    @classmethod
    def tabulated(cls, r, m, **kw):
        return cls(kind="tabulated", table_r=np.asarray(r, float),
                   table_m=np.asarray(m, float), **kw)

    @classmethod
    def from_config(cls, cfg):
        """Build a spec from its run-configuration dictionary."""
        cfg = dict(cfg)
        kind = cfg.pop("kind")
        if kind == "identity":
            return cls.identity(**cfg)
        if kind == "power":
            return cls.power(**cfg)
        if kind == "power_log":
            return cls.power_log(**cfg)
        if kind == "log_power":
            return cls.log_power(**cfg)
        if kind == "tabulated":
            path = cfg.pop("csv", None)
            if path is not None:
                data = np.loadtxt(path, delimiter=",", dtype=float)
                if data.ndim != 2 or data.shape[1] != 2:
                    raise GridError(f"{path}: expected a two-column (r, m) CSV")
                return cls.tabulated(data[:, 0], data[:, 1], **cfg)
            return cls.tabulated(cfg.pop("r"), cfg.pop("m"), **cfg)
        raise PreconditionError(f"unknown multiplier kind {kind!r}")

    def to_config(self):
        cfg = {"kind": self.kind, "alpha": self.alpha, "lambda_low": self.lambda_low,
               "b0": self.b0, "b1": self.b1, "b2": self.b2, "b3": self.b3,
               "strict": self.strict}
        if self.kind == "power":
            cfg["a"] = self.a
        elif self.kind == "power_log":
            cfg.update(a=self.a, shift=self.shift)
        elif self.kind == "log_power":
            cfg.update(mu=self.mu, shift=self.shift)
        elif self.kind == "tabulated":
            cfg.update(r=self.table_r.tolist(), m=self.table_m.tolist())
        return cfg

    # -------------------------------------------------------------- evaluation

    def __call__(self, r):
        return self.eval_m(r)

    def eval_m(self, r):
        """Evaluate m(r) for scalar or array r > 0."""
        scalar = np.isscalar(r)
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("multiplier argument must be positive")
        if self.kind == "identity":
            out = np.ones_like(r)
        elif self.kind == "power":
            out = r ** self.a
        elif self.kind == "power_log":
            out = r ** self.a * np.log(self.shift + r)
        elif self.kind == "log_power":
            out = np.maximum(1.0 / self.b3, np.log(self.shift + r) ** self.mu)
        else:
            out = self._interp(r)
            if np.any(np.isnan(out)):
                raise RangeError("tabulated multiplier queried outside its table")
        return float(out) if scalar else out

    def eval_m_prime(self, r):
        """Analytic m'(r) for builtin kinds; centered differences for tables."""
        scalar = np.isscalar(r)
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("multiplier argument must be positive")
        if self.kind == "identity":
            out = np.zeros_like(r)
        elif self.kind == "power":
            out = self.a * r ** (self.a - 1.0)
        elif self.kind == "power_log":
            out = self.a * r ** (self.a - 1.0) * np.log(self.shift + r) \
                + r ** self.a / (self.shift + r)
        elif self.kind == "log_power":
            lg = np.log(self.shift + r)
            out = np.where(lg ** self.mu <= 1.0 / self.b3, 0.0,
                           self.mu * lg ** (self.mu - 1.0) / (self.shift + r))
        else:
            h = 1e-6 * r
            lo, hi = r - h, r + h
            lo = np.maximum(lo, self.table_r[0])
            hi = np.minimum(hi, self.table_r[-1])
            out = (self._interp(hi) - self._interp(lo)) / (hi - lo)
            if np.any(np.isnan(out)):
                raise RangeError("tabulated multiplier queried outside its table")
        return float(out) if scalar else out

    def eval_m_deriv(self, r, k):
        """k-th derivative, analytic for identity/power, finite differences else.

        Only used by the advisory Mikhlin check, so 4th-order central stencils
        on the natural scale are accurate enough.
        """
        if k == 0:
            return self.eval_m(r)
        if k == 1 and self.kind != "tabulated":
            return self.eval_m_prime(r)
        if self.kind == "identity":
            return np.zeros_like(np.asarray(r, float))
        if self.kind == "power":
            r = np.asarray(r, float)
            coeff = 1.0
            for i in range(k):
                coeff *= self.a - i
            return coeff * r ** (self.a - k)
        # 4th-order central difference of the (k-1)-th derivative, recursively
        r = np.asarray(r, float)
        h = np.maximum(1e-2 * r, 1e-8)
        if self.kind == "tabulated":
            h = np.minimum(h, (self.table_r[-1] - self.table_r[0]) / 16.0)
        f = lambda x: self.eval_m_deriv(x, k - 1)
        return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)

    def kernel_params(self):
        """(kind_code, p1, p2, floor) quartet consumed by the kernel backends."""
        code = KIND_CODES[self.kind]
        if self.kind == "power":
            return code, self.a, 0.0, 0.0
        if self.kind == "power_log":
            return code, self.a, self.shift, 0.0
        if self.kind == "log_power":
            return code, self.mu, self.shift, 1.0 / self.b3
        return code, 0.0, 0.0, 0.0


# ------------------------------------------------------------------ reporting


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    worst_ratio: float
    worst_r: float
    detail: str = ""


@dataclass
class AssumptionReport:
    checks: dict
    crossover_r: Optional[float] = None   # smallest grid r beyond which (A3) holds

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, name):
        return self.checks[name]


def check_assumptions(spec: MultiplierSpec, r_grid, k_max: int = 5) -> AssumptionReport:
    """Measure (A1)-(A5) and the log-growth envelope on a log-spaced grid.

    The Mikhlin ratios r^k |m^(k)| / m are estimated by repeated
    differentiation; they are advisory, not rigorous.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.size == 0 or np.any(np.diff(r) <= 0):
        raise GridError("r_grid must be nonempty and strictly increasing")
    if r[0] > 1e-4 or r[-1] < 1e4:
        raise GridError("r_grid must span at least [1e-4, 1e4]")
    if not 1 <= k_max <= 5:
        raise PreconditionError("k_max must lie in 1..5")

    m = spec.eval_m(r)
    checks = {}

    # (A1): positivity and monotonicity
    mono = np.all(np.diff(m) >= -1e-12 * np.abs(m[:-1]))
    pos = np.all(m > 0)
    worst_step = float(np.min(np.diff(m) / np.maximum(np.abs(m[:-1]), 1e-300))) if r.size > 1 else 0.0
    checks["A1"] = AssumptionCheck("A1", bool(mono and pos), worst_step,
                                   float(r[np.argmin(np.diff(m))]) if r.size > 1 else r[0],
                                   "min relative increment")

    # (A2): Mikhlin ratios for k = 1..k_max
    worst = 0.0
    worst_r = r[0]
    for k in range(1, k_max + 1):
        dk = np.abs(spec.eval_m_deriv(r, k))
        ratio = r ** k * dk / m
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, worst_r = float(ratio[i]), float(r[i])
    checks["A2"] = AssumptionCheck("A2", bool(worst <= spec.b0 * (1 + 1e-9)), worst, worst_r,
                                   f"sup_k r^k|m^(k)|/m over k<=({k_max})")

    # (A3)/(A5): growth ratio r m'/m
    ratio = r * spec.eval_m_prime(r) / m
    high = r >= spec.b1
    if np.any(high):
        i = int(np.argmax(np.where(high, ratio, -np.inf)))
        checks["A3"] = AssumptionCheck("A3", bool(ratio[high].max() <= spec.alpha + 1e-9),
                                       float(ratio[i]), float(r[i]), f"r >= b1 = {spec.b1:g}")
    else:
        checks["A3"] = AssumptionCheck("A3", True, 0.0, float(r[-1]), "grid below b1")
    i = int(np.argmax(ratio))
    checks["A5"] = AssumptionCheck("A5", bool(ratio.max() <= spec.alpha + 1e-9),
                                   float(ratio[i]), float(r[i]), "all r > 0")
    # smallest grid radius beyond which the (A3) ratio stays admissible
    ok = ratio <= spec.alpha + 1e-9
    crossover = None
    if ok[-1]:
        j = len(ok) - 1
        while j > 0 and ok[j - 1]:
            j -= 1
        crossover = float(r[j])

    # (A4): low-frequency envelope
    low = r <= 1.0
    if np.any(low):
        env = m[low] / r[low] ** spec.lambda_low
        worst4 = float(max(env.max() / spec.b2, (1.0 / spec.b2) / env.min()))
        i = int(np.argmax(env))
        checks["A4"] = AssumptionCheck("A4", bool(env.max() <= spec.b2 * (1 + 1e-9)
                                                  and env.min() >= (1 - 1e-9) / spec.b2),
                                       worst4, float(r[low][i]), "m/r^lambda on r <= 1")
    else:
        checks["A4"] = AssumptionCheck("A4", True, 1.0, float(r[0]), "grid above 1")

    # log-growth envelope for the log_power family
    if spec.kind == "log_power":
        tail = r >= spec.b3
        if np.any(tail):
            mt = m[tail]
            env_hi = mt / np.log(r[tail]) ** spec.mu
            ok_mcd = bool(mt.min() >= (1 - 1e-9) / spec.b3 and env_hi.max() <= spec.b3 * (1 + 1e-9))
            checks["mcd1"] = AssumptionCheck("mcd1", ok_mcd, float(env_hi.max()),
                                             float(r[tail][int(np.argmax(env_hi))]),
                                             "b3^-1 <= m <= b3 (log r)^mu on r >= b3")

    return AssumptionReport(checks=checks, crossover_r=crossover)


def monotone_factor_check(spec: MultiplierSpec, rho: float, r_grid):
    """Check that r -> r^rho m(1/r) is nondecreasing on the grid.

    Valid on (0, 1/b1] under (A3) and on every r > 0 under (A5); requires
    rho >= alpha, the hypothesis of the underlying monotonicity fact.
    Returns (passed, worst_violation) with the violation measured relatively.
    """
    if rho < spec.alpha:
        raise PreconditionError(f"rho = {rho} < alpha = {spec.alpha}")
    r = np.asarray(r_grid, dtype=float)
    if r.size < 2 or np.any(np.diff(r) <= 0):
        raise GridError("r_grid must be strictly increasing with >= 2 points")
    if not spec.strict and r[-1] > 1.0 / spec.b1 + 1e-12:
        raise PreconditionError("without (A5), the grid must stay in (0, 1/b1]")
    vals = r ** rho * spec.eval_m(1.0 / r)
    rel = np.diff(vals) / np.maximum(np.abs(vals[:-1]), 1e-300)
    worst = float(rel.min())
    return bool(worst >= -1e-10), worst
