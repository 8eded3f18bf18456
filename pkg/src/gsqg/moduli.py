"""Moduli of continuity preserved by gSQG flows, and their constant ledgers.

Three stationary shapes, all concave and nondecreasing with omega(0+) = 0:

  holder_log  -- a sigma-Hoelder cusp up to the breakpoint delta, then the
                 slow log-type growth  kappa/m(1/delta) + gamma * integral of
                 1/(eta m(1/eta));
  capped      -- the same, frozen to a constant beyond the cap point 1/(2 b1)
                 (used when the symbol only satisfies the local growth bound);
  appendix    -- xi - xi^(3/2) up to delta then constant, together with the
                 two-parameter rescaling  omega_lambda(xi) =
                 lambda^(2-alpha-beta) omega(lambda xi).

The time-dependent family grafts a tangent line onto the stationary shape at
a shrinking front xi0(t) that solves  dxi0/dt = -rho xi0^(1-beta), so
xi0(t) = (A0^beta - rho beta t)^(1/beta) hits zero at t1 = A0^beta/(beta rho)
and the family collapses onto the stationary modulus.

The admissible-constant solvers return every constant at HALF its ledger
bound so each strict inequality holds with a quantifiable margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _layout as L
from . import backend
from .errors import DomainError, GridError, PreconditionError
from .multiplier import MultiplierSpec

DELTA_SUP_APPENDIX = 4.0 / 9.0   # xi - xi^(3/2) stops increasing at 4/9

VARIANTS = ("holder_log", "capped", "appendix")
VARIANT_CODES = {"holder_log": L.V_HOLDER_LOG, "capped": L.V_CAPPED, "appendix": L.V_APPENDIX}


def gamma_integral(spec: MultiplierSpec, delta: float, x: float, tol: float = 1e-12) -> float:
    """Integral of 1/(eta m(1/eta)) from delta to x; closed form for powers."""
    if x <= delta:
        return 0.0
    if spec.kind == "identity":
        return math.log(x / delta)
    if spec.kind == "power":
        a = spec.a
        return (x ** a - delta ** a) / a
    val, _ = backend.quadrature(lambda u: 1.0 / spec.eval_m(math.exp(-u)),
                                math.log(delta), math.log(x), tol)
    return val


@dataclass(frozen=True)
class StationaryModulus:
    """A stationary modulus of continuity omega(xi)."""

    variant: str
    multiplier: MultiplierSpec
    kappa: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    sigma: float = 0.0
    cap_point: float = 0.0        # capped variant only, = 1/(2 b1)
    lambda_scale: float = 1.0     # appendix variant only
    alpha: float = 0.0            # appendix scaling exponents
    beta: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise PreconditionError(f"unknown modulus variant {self.variant!r}")
        if self.delta <= 0.0:
            raise PreconditionError("breakpoint delta must be positive")
        if self.variant == "appendix":
            if not self.delta < DELTA_SUP_APPENDIX:
                raise PreconditionError("appendix modulus needs delta < 4/9")
            if self.lambda_scale <= 0.0:
                raise PreconditionError("lambda scale must be positive")
        else:
            if self.kappa <= 0.0 or self.gamma <= 0.0:
                raise PreconditionError("kappa and gamma must be positive")
            if not 0.0 < self.sigma < 1.0:
                raise PreconditionError("sigma must lie in (0, 1)")
            if self.variant == "capped" and not self.delta < self.cap_point:
                raise PreconditionError("capped variant needs delta < cap point")

    # ------------------------------------------------------------- builders

    @classmethod
    def holder_log(cls, multiplier, kappa, gamma, delta, sigma):
        return cls("holder_log", multiplier, kappa=kappa, gamma=gamma,
                   delta=delta, sigma=sigma)

    @classmethod
    def capped(cls, multiplier, kappa, gamma, delta, sigma, cap_point=None):
        cap = 1.0 / (2.0 * multiplier.b1) if cap_point is None else cap_point
        return cls("capped", multiplier, kappa=kappa, gamma=gamma,
                   delta=delta, sigma=sigma, cap_point=cap)

    @classmethod
    def appendix(cls, multiplier, delta, alpha, beta, lambda_scale=1.0):
        return cls("appendix", multiplier, delta=delta, alpha=alpha, beta=beta,
                   lambda_scale=lambda_scale)

    @property
    def concavity_ok(self) -> bool:
        """gamma <= sigma kappa makes the one-sided slopes at delta decrease."""
        if self.variant == "appendix":
            return True
        return self.gamma <= self.sigma * self.kappa * (1.0 + 1e-12)

    def breakpoints(self):
        if self.variant == "appendix":
            return [self.delta / self.lambda_scale]
        if self.variant == "capped":
            return [self.delta, self.cap_point]
        return [self.delta]

    # ----------------------------------------------------------- evaluation

    def eval(self, xi: float) -> float:
        if xi <= 0.0:
            raise DomainError("modulus argument must be positive")
        m = self.multiplier
        if self.variant == "appendix":
            lam = self.lambda_scale
            s = lam * xi
            scale = lam ** (2.0 - self.alpha - self.beta)
            s_eff = min(s, self.delta)
            return scale * (s_eff - s_eff ** 1.5)
        mid = m.eval_m(1.0 / self.delta)
        xi_eff = min(xi, self.cap_point) if self.variant == "capped" else xi
        if xi_eff <= self.delta:
            return (self.kappa / mid) * (xi_eff / self.delta) ** self.sigma
        return self.kappa / mid + self.gamma * gamma_integral(m, self.delta, xi_eff)

    def d_xi(self, xi: float, side: str = "right") -> float:
        """One-sided derivative; at a breakpoint the requested side is taken."""
        if xi <= 0.0:
            raise DomainError("modulus argument must be positive")
        sgn = -1 if side == "left" else 1
        in_left = (lambda b: xi <= b) if sgn < 0 else (lambda b: xi < b)
        m = self.multiplier
        if self.variant == "appendix":
            lam = self.lambda_scale
            if in_left(self.delta / lam):
                return lam ** (3.0 - self.alpha - self.beta) * (1.0 - 1.5 * math.sqrt(lam * xi))
            return 0.0
        mid = m.eval_m(1.0 / self.delta)
        if self.variant == "capped" and not in_left(self.cap_point):
            return 0.0
        if in_left(self.delta):
            return self.sigma * self.kappa / mid * self.delta ** (-self.sigma) \
                * xi ** (self.sigma - 1.0)
        return self.gamma / (xi * m.eval_m(1.0 / xi))

    def d_xixi(self, xi: float) -> float:
        """Second derivative on the smooth piece containing xi."""
        if xi <= 0.0:
            raise DomainError("modulus argument must be positive")
        m = self.multiplier
        if self.variant == "appendix":
            lam = self.lambda_scale
            if lam * xi < self.delta:
                return -0.75 * lam ** (4.0 - self.alpha - self.beta) / math.sqrt(lam * xi)
            return 0.0
        if self.variant == "capped" and xi >= self.cap_point:
            return 0.0
        mid = m.eval_m(1.0 / self.delta)
        if xi < self.delta:
            return self.sigma * (self.sigma - 1.0) * self.kappa / mid \
                * self.delta ** (-self.sigma) * xi ** (self.sigma - 2.0)
        r = 1.0 / xi
        mv = m.eval_m(r)
        return -(self.gamma / (xi * xi * mv)) * (1.0 - r * m.eval_m_prime(r) / mv)

    # ------------------------------------------------------------- kernels

    def descriptor(self) -> np.ndarray:
        """Pack into the flat layout consumed by the kernel backends."""
        d = np.zeros(L.DESC_SIZE)
        d[L.VARIANT] = VARIANT_CODES[self.variant]
        d[L.KAPPA] = self.kappa
        d[L.GAMMA] = self.gamma
        d[L.DELTA] = self.delta if self.variant != "appendix" else self.delta
        d[L.SIGMA] = self.sigma
        d[L.CAP] = self.cap_point
        d[L.LAM] = self.lambda_scale
        d[L.A_EXP] = self.alpha
        d[L.B_EXP] = self.beta
        d[L.QTOL] = 1e-12
        _pack_multiplier(d, self.multiplier)
        if self.variant != "appendix":
            d[L.M_INV_DELTA] = self.multiplier.eval_m(1.0 / self.delta)
        if self.variant == "capped":
            d[L.OMEGA_CAP] = self.eval(self.cap_point)
        return d

    def to_config(self):
        cfg = {"variant": self.variant, "delta": self.delta}
        if self.variant == "appendix":
            cfg.update(alpha=self.alpha, beta=self.beta, lambda_scale=self.lambda_scale)
        else:
            cfg.update(kappa=self.kappa, gamma=self.gamma, sigma=self.sigma)
            if self.variant == "capped":
                cfg["cap_point"] = self.cap_point
        return cfg


@dataclass(frozen=True)
class CustomModulus:
    """An arbitrary concave modulus given by callables, for experiments and
    counterexample scans outside the built-in family.

    `gamma_tail` must upper-bound eta * w'(eta) * m(1/eta) at large eta so the
    far-field drift envelope stays valid (0 for eventually constant shapes).
    """

    fn: object
    dfn: object = None
    d2fn: object = None
    kinks: tuple = ()
    multiplier: MultiplierSpec = field(default_factory=MultiplierSpec.identity)
    gamma_tail: float = 0.0
    kappa: Optional[float] = None
    gamma: Optional[float] = None
    concavity_ok: bool = True

    def eval(self, xi):
        if xi <= 0.0:
            raise DomainError("modulus argument must be positive")
        return self.fn(xi)

    def d_xi(self, xi, side="right"):
        if self.dfn is not None:
            return self.dfn(xi)
        h = 1e-7 * xi
        if side == "left":
            return (self.fn(xi) - self.fn(xi - h)) / h
        return (self.fn(xi + h) - self.fn(xi)) / h

    def d_xixi(self, xi):
        if self.d2fn is not None:
            return self.d2fn(xi)
        h = 1e-5 * xi
        return (self.fn(xi + h) + self.fn(xi - h) - 2.0 * self.fn(xi)) / (h * h)

    def breakpoints(self):
        return list(self.kinks)

    def to_config(self):
        return {"variant": "custom", "kinks": list(self.kinks)}


_TAB_COUNTER = [0]


def _pack_multiplier(d, spec: MultiplierSpec):
    code, p1, p2, floor = spec.kernel_params()
    d[L.M_KIND] = code
    d[L.M_P1] = p1
    d[L.M_P2] = p2
    d[L.M_FLOOR] = floor
    if spec.kind == "tabulated":
        # python-backend escape hatch: the registry id rides in the p1 slot
        from . import _core_py

        if not hasattr(_core_py, "_TABULATED"):
            _core_py._TABULATED = {}
        _TAB_COUNTER[0] += 1
        _core_py._TABULATED[_TAB_COUNTER[0]] = (spec.eval_m, spec.eval_m_prime)
        d[L.M_P1] = float(_TAB_COUNTER[0])


@dataclass(frozen=True)
class TimeDependentModulus:
    """The family omega(xi, xi0) with shrinking front xi0(t)."""

    base: StationaryModulus
    A0: float
    rho: float
    beta: float
    family_variant: str = "eventual"   # or "log_supercritical"

    def __post_init__(self):
        if self.base.variant == "appendix":
            raise PreconditionError("the family is built on holder_log or capped bases")
        if self.family_variant not in ("eventual", "log_supercritical"):
            raise PreconditionError(f"unknown family variant {self.family_variant!r}")
        if self.family_variant == "log_supercritical" and self.base.variant != "capped":
            raise PreconditionError("the log-supercritical family needs a capped base")
        if not (self.A0 > 0.0 and self.rho > 0.0 and 0.0 < self.beta <= 1.0):
            raise PreconditionError("need A0 > 0, rho > 0 and beta in (0, 1]")

    # -------------------------------------------------------------- the front

    def t1(self) -> float:
        return self.A0 ** self.beta / (self.beta * self.rho)

    def xi0_at(self, t: float) -> float:
        if t < 0.0:
            raise DomainError("time must be nonnegative")
        rem = self.A0 ** self.beta - self.rho * self.beta * t
        return rem ** (1.0 / self.beta) if rem > 0.0 else 0.0

    # ------------------------------------------------------------ evaluation

    def eval(self, xi: float, xi0: float) -> float:
        if xi <= 0.0:
            raise DomainError("modulus argument must be positive")
        if xi0 < 0.0:
            raise DomainError("the front position must be nonnegative")
        if xi0 == 0.0:
            return self.base.eval(xi)
        b = self.base
        m = b.multiplier
        if self.family_variant == "log_supercritical" and xi >= b.cap_point:
            xi = b.cap_point
        mid = m.eval_m(1.0 / b.delta)
        if xi0 > b.delta:
            mi0 = m.eval_m(1.0 / xi0)
            gi0 = gamma_integral(m, b.delta, xi0)
            if xi <= b.delta:
                return ((1.0 - b.sigma) * b.kappa / mid + b.gamma * gi0
                        - b.gamma * (xi0 - b.delta) / (xi0 * mi0)
                        + b.sigma * b.kappa * xi / (b.delta * mid))
            if xi <= xi0:
                return (b.kappa / mid + b.gamma * gi0 - b.gamma / mi0
                        + b.gamma * xi / (xi0 * mi0))
            return b.kappa / mid + b.gamma * gamma_integral(m, b.delta, xi)
        if xi <= xi0:
            return (b.kappa / mid) * b.delta ** (-b.sigma) * xi0 ** (b.sigma - 1.0) \
                * ((1.0 - b.sigma) * xi0 + b.sigma * xi)
        if xi <= b.delta:
            return (b.kappa / mid) * (xi / b.delta) ** b.sigma
        return b.kappa / mid + b.gamma * gamma_integral(m, b.delta, xi)

    def d_xi(self, xi: float, xi0: float, side: str = "right") -> float:
        if xi0 == 0.0:
            return self.base.d_xi(xi, side)
        b = self.base
        m = b.multiplier
        sgn = -1 if side == "left" else 1
        in_left = (lambda p: xi <= p) if sgn < 0 else (lambda p: xi < p)
        if self.family_variant == "log_supercritical" and not in_left(b.cap_point):
            return 0.0
        mid = m.eval_m(1.0 / b.delta)
        if xi0 > b.delta:
            if in_left(b.delta):
                return b.sigma * b.kappa / (b.delta * mid)
            if in_left(xi0):
                return b.gamma / (xi0 * m.eval_m(1.0 / xi0))
            return b.gamma / (xi * m.eval_m(1.0 / xi))
        if in_left(xi0):
            return b.sigma * b.kappa / mid * b.delta ** (-b.sigma) * xi0 ** (b.sigma - 1.0)
        if in_left(b.delta):
            return b.sigma * b.kappa / mid * b.delta ** (-b.sigma) * xi ** (b.sigma - 1.0)
        return b.gamma / (xi * m.eval_m(1.0 / xi))

    def case_label(self, xi: float, xi0: float) -> int:
        """The five-way split of the breakdown analysis."""
        b = self.base
        if xi0 > b.delta:
            if xi <= b.delta:
                return 1
            return 2 if xi <= xi0 else 3
        return 4 if xi <= xi0 else 5

    def d_xi0_upper(self, xi: float, xi0: float) -> float:
        """Per-case upper bound for the xi0-derivative (what the certificate
        uses on the shrinking-front term), not the exact derivative."""
        if xi0 <= 0.0:
            raise DomainError("the front position must be positive")
        b = self.base
        m = b.multiplier
        case = self.case_label(xi, xi0)
        if case == 1:
            return b.gamma / (xi0 * m.eval_m(1.0 / xi0))
        if case == 2:
            return 2.0 * b.gamma / (xi0 * m.eval_m(1.0 / xi0))
        if case == 4:
            mid = m.eval_m(1.0 / b.delta)
            return b.sigma * (1.0 - b.sigma) * b.kappa / mid * b.delta ** (-b.sigma) \
                * xi0 ** (b.sigma - 1.0) * (1.0 - xi / xi0)
        return 0.0   # cases 3 and 5: omega does not depend on xi0 there

    def d_xixi(self, xi: float, xi0: float) -> float:
        if xi0 == 0.0:
            return self.base.d_xixi(xi)
        return backend.omega_dxixi(self.descriptor(xi0), xi)

    def breakpoints(self, xi0: float):
        b = self.base
        pts = [p for p in (xi0, b.delta) if p > 0.0]
        if self.family_variant == "log_supercritical":
            pts.append(b.cap_point)
        return sorted(set(pts))

    def descriptor(self, xi0: float) -> np.ndarray:
        d = self.base.descriptor()
        d[L.VARIANT] = L.V_FAMILY_LOG if self.family_variant == "log_supercritical" \
            else L.V_FAMILY
        d[L.XI0] = xi0
        if xi0 > self.base.delta:
            d[L.GI_XI0] = gamma_integral(self.base.multiplier, self.base.delta, xi0)
            d[L.M_INV_XI0] = self.base.multiplier.eval_m(1.0 / xi0)
        if self.family_variant == "log_supercritical":
            d[L.CAP] = self.base.cap_point
            d[L.OMEGA_CAP] = self.eval(self.base.cap_point, xi0)
        return d

    def to_config(self):
        return {"base": self.base.to_config(), "A0": self.A0, "rho": self.rho,
                "beta": self.beta, "family_variant": self.family_variant}


# --------------------------------------------------------- constant ledgers


def c_alpha(alpha: float) -> float:
    """(2^alpha - 1)/alpha, which lies in (log 2, 1) for alpha in (0, 1)."""
    return math.expm1(alpha * math.log(2.0)) / alpha


def c_alpha_prime(alpha: float) -> float:
    """sup over x >= 1 of x^(alpha-1) log x, attained at x = e^(1/(1-alpha))."""
    return 1.0 / (math.e * (1.0 - alpha))


def c_bar(alpha: float) -> float:
    ca = c_alpha(alpha)
    return (1.0 + ca) / (2.0 * ca)


def n_split(alpha: float) -> int:
    """Smallest integer N with 1 - N^(-alpha) >= 2 alpha/(1 + alpha)."""
    return int(math.floor(((1.0 + alpha) / (1.0 - alpha)) ** (1.0 / alpha))) + 1


def _case_sign(alpha, beta, tol=1e-12):
    s = alpha + beta - 1.0
    if abs(s) <= tol:
        return 0
    return -1 if s < 0 else 1


def b_case(alpha, beta, C0=1.0):
    sign = _case_sign(alpha, beta)
    if sign < 0:
        return 5.0 / (1.0 - alpha - beta)
    if sign == 0:
        return 4.0 * C0 / beta + c_alpha_prime(alpha)
    return 4.0 / (alpha + beta - 1.0)


def b_bar_case(alpha, beta, C0=1.0):
    sign = _case_sign(alpha, beta)
    if sign < 0:
        return 3.0 / (1.0 - alpha - beta) + 3.0 / beta
    if sign == 0:
        return C0 + 5.0 / beta
    return 6.0 / (alpha + beta - 1.0)


def k_case(alpha, beta, sigma, C0=1.0):
    sign = _case_sign(alpha, beta)
    if sign < 0:
        return 1.0 / (1.0 - alpha - beta) + 2.0 / (alpha + beta - sigma)
    if sign == 0:
        return C0 + 2.0 / (1.0 - sigma)
    return 3.0 / (alpha + beta - 1.0)


@dataclass(frozen=True)
class AdmissibleConstants:
    """Solved amplitude/rate constants plus every auxiliary constant they use."""

    alpha: float
    beta: float
    sigma: float
    C0: float
    C1: float
    C2: float
    C_alpha: float
    C_alpha_prime: float
    C_bar: float
    B_case: float
    B_bar_case: float
    K_case: float
    N: int
    kappa_max: float
    gamma_max: float
    kappa: float
    gamma: float
    rho_max: float = 0.0
    rho: float = 0.0

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "alpha", "beta", "sigma", "C0", "C1", "C2", "C_alpha", "C_alpha_prime",
            "C_bar", "B_case", "B_bar_case", "K_case", "N",
            "kappa_max", "gamma_max", "kappa", "gamma", "rho_max", "rho")}
        return out


def _check_sigma(alpha, beta, sigma):
    hi = min(alpha + beta, 1.0)
    if not alpha < sigma < hi:
        raise PreconditionError(
            f"sigma = {sigma} must lie in (alpha, min(alpha+beta, 1)) = ({alpha}, {hi})")


def solve_constants_stationary(C1, C2, alpha, beta, sigma, C0=1.0) -> AdmissibleConstants:
    """Amplitudes (kappa, gamma) under which the stationary modulus is preserved.

    kappa is returned at half the bound min{C1 (1-sigma)(alpha+beta-sigma)
    /(16 C2), 1/(2 C2 sigma)}; gamma at half its own four-way bound evaluated
    at the returned kappa, so gamma < sigma kappa holds strictly.
    """
    _check_sigma(alpha, beta, sigma)
    ca = c_alpha(alpha)
    kappa_max = min(C1 * (1.0 - sigma) * (alpha + beta - sigma) / (16.0 * C2),
                    1.0 / (2.0 * C2 * sigma))
    kappa = 0.5 * kappa_max
    gamma_max = min(1.0 / (2.0 * C2),
                    sigma * kappa,
                    0.5 * (1.0 - ca) ** alpha * kappa,
                    C1 * beta * ca * (1.0 - ca) / (12.0 * C2))
    gamma = 0.5 * gamma_max
    return AdmissibleConstants(
        alpha=alpha, beta=beta, sigma=sigma, C0=C0, C1=C1, C2=C2,
        C_alpha=ca, C_alpha_prime=c_alpha_prime(alpha), C_bar=c_bar(alpha),
        B_case=b_case(alpha, beta, C0), B_bar_case=b_bar_case(alpha, beta, C0),
        K_case=k_case(alpha, beta, sigma, C0), N=n_split(alpha),
        kappa_max=kappa_max, gamma_max=gamma_max, kappa=kappa, gamma=gamma)


def stationary_bounds_ok(consts: AdmissibleConstants, kappa, gamma) -> bool:
    """Do (kappa, gamma) satisfy the stationary smallness ledger strictly?"""
    ca = consts.C_alpha
    C1, C2 = consts.C1, consts.C2
    a, b, s = consts.alpha, consts.beta, consts.sigma
    k_ok = kappa < min(C1 * (1 - s) * (a + b - s) / (16 * C2), 1.0 / (2 * C2 * s))
    g_ok = gamma < min(1.0 / (2 * C2), s * kappa, 0.5 * (1 - ca) ** a * kappa,
                       C1 * b * ca * (1 - ca) / (12 * C2))
    return bool(k_ok and g_ok)


def solve_constants_eventual(C1, C, alpha, beta, sigma=None, C0=1.0,
                             variant="eventual") -> AdmissibleConstants:
    """Rate and amplitudes (rho, kappa, gamma) for the time-dependent family.

    Each value is half its ledger bound; the kappa bound switches on the sign
    of alpha + beta - 1.  The log-supercritical variant defaults sigma to
    min{alpha + beta/2, (alpha+1)/2} and uses the weaker last gamma entry.
    """
    if variant not in ("eventual", "log_supercritical"):
        raise PreconditionError(f"unknown constants variant {variant!r}")
    if sigma is None:
        if variant != "log_supercritical":
            raise PreconditionError("sigma is only defaulted on the log-supercritical path")
        sigma = min(alpha + beta / 2.0, (alpha + 1.0) / 2.0)
    _check_sigma(alpha, beta, sigma)
    ca = c_alpha(alpha)
    cap = c_alpha_prime(alpha)
    rho_max = (C1 / C) * min((1.0 - alpha) / beta, (1.0 - sigma) / (beta * sigma))
    sign = _case_sign(alpha, beta)
    if sign < 0:
        kappa_max = C1 * beta * (1.0 - sigma) ** 2 / C \
            * min(1.0 - alpha - beta, alpha + beta - sigma)
    elif sign == 0:
        kappa_max = C1 * beta * (1.0 - sigma) / C * min(1.0 / cap, (1.0 - sigma) ** 2)
    else:
        kappa_max = C1 * beta * (1.0 - sigma) ** 2 * (alpha + beta - 1.0) / C
    kappa = 0.5 * kappa_max
    last = C1 * (1.0 - ca) * (beta if variant == "log_supercritical" else beta ** 2)
    gamma_max = (1.0 / C) * min(sigma * kappa, (1.0 - ca) ** alpha * kappa,
                                (1.0 - sigma) * (1.0 - alpha) * kappa, last)
    gamma = 0.5 * gamma_max
    return AdmissibleConstants(
        alpha=alpha, beta=beta, sigma=sigma, C0=C0, C1=C1, C2=C0 / beta,
        C_alpha=ca, C_alpha_prime=cap, C_bar=c_bar(alpha),
        B_case=b_case(alpha, beta, C0), B_bar_case=b_bar_case(alpha, beta, C0),
        K_case=k_case(alpha, beta, sigma, C0), N=n_split(alpha),
        kappa_max=kappa_max, gamma_max=gamma_max, kappa=kappa, gamma=gamma,
        rho_max=rho_max, rho=0.5 * rho_max)


def eventual_bounds_ok(consts: AdmissibleConstants, rho, kappa, gamma, C=1.0,
                       variant="eventual") -> bool:
    ref = solve_constants_eventual(consts.C1, C, consts.alpha, consts.beta,
                                   consts.sigma, consts.C0, variant)
    return bool(rho <= ref.rho_max and kappa <= ref.kappa_max
                and gamma <= 2.0 * ref.gamma_max)


# ------------------------------------------------------- entry-scale selection


@dataclass(frozen=True)
class EntrySelection:
    A0: float
    delta: float
    a0_large: bool = False   # the A0 < 1 convention failed (warning, not error)


def select_A0_delta(gamma, alpha, beta, t_prime, theta0_L2, C_beta,
                    spec: MultiplierSpec, path="eventual", rho=None,
                    mu=None) -> EntrySelection:
    """Starting front A0 and breakpoint delta meeting the entry condition.

    eventual path: A0 = (4 C_beta m(1) alpha |theta0|_L2 / ((1-alpha) gamma
    t'^(1/beta)))^(1/alpha) and delta = A0 / 4^(1/alpha).

    log-supercritical path: A0 = min{(beta rho t'/4)^(1/beta), 1/(2 b1),
    1/b3} with delta shrunk far enough below A0 that the log-type growth of
    the modulus beats the smoothing-time sup bound; here t_prime plays the
    role of the halved smoothing time.
    """
    if min(gamma, beta, t_prime, C_beta) <= 0.0 or theta0_L2 < 0.0:
        raise PreconditionError("all entry-selection inputs must be positive")
    m1 = spec.eval_m(1.0)
    if path == "eventual":
        if not 0.0 < alpha < 1.0:
            raise PreconditionError("alpha must lie in (0, 1)")
        bracket = 4.0 * C_beta * m1 * alpha * theta0_L2 \
            / ((1.0 - alpha) * gamma * t_prime ** (1.0 / beta))
        A0 = bracket ** (1.0 / alpha)
        delta = (bracket / 4.0) ** (1.0 / alpha)
        return EntrySelection(A0=A0, delta=delta, a0_large=not A0 < 1.0)
    if path != "log_supercritical":
        raise PreconditionError(f"unknown selection path {path!r}")
    if rho is None:
        raise PreconditionError("the log-supercritical path needs rho")
    if mu is None:
        if spec.kind != "log_power":
            raise PreconditionError("mu is required unless the symbol is log_power")
        mu = spec.mu
    b1, b3 = spec.b1, spec.b3
    A0 = min((beta * rho * t_prime / 4.0) ** (1.0 / beta), 1.0 / (2.0 * b1), 1.0 / b3)
    sup_term = C_beta * t_prime ** (-1.0 / beta) * theta0_L2
    if mu < 1.0:
        c_mu = 2.0 ** (mu / (1.0 - mu)) if mu > 0.0 else 1.0
        inner = (3.0 * sup_term * b3 * (1.0 - mu) / gamma + b3 * (1.0 - mu) / m1) \
            ** (1.0 / (1.0 - mu))
        delta = A0 ** c_mu * math.exp(-c_mu * inner)
    else:
        delta = A0 ** math.exp(3.0 * sup_term * b3 / gamma + b3 / m1)
    return EntrySelection(A0=A0, delta=delta, a0_large=not A0 < 1.0)


def appendix_lambda(theta0_Linf, grad_theta0_Linf, delta, alpha, beta) -> float:
    """The rescaling lambda making the appendix modulus dominate the data."""
    if not 0.0 < delta < DELTA_SUP_APPENDIX:
        raise PreconditionError("appendix selection needs 0 < delta < 4/9")
    if theta0_Linf < 0.0 or grad_theta0_Linf < 0.0:
        raise PreconditionError("norms must be nonnegative")
    h = delta / 2.0
    denom = h - h ** 1.5
    first = (4.0 * theta0_Linf / denom) ** (1.0 / (2.0 - alpha - beta))
    second = delta * grad_theta0_Linf / (2.0 * theta0_Linf) if theta0_Linf > 0.0 else 0.0
    return max(first, second, 1.0)


# --------------------------------------------------------- empirical moduli


@dataclass(frozen=True)
class EmpiricalModulus:
    """Measured increment table r -> sup |f(x) - f(y)| over |x-y| <= r."""

    r: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, float)
        s = np.asarray(self.sup, float)
        if r.size == 0 or r.shape != s.shape:
            raise GridError("empirical modulus needs matching nonempty tables")
        if np.any(np.diff(r) <= 0):
            raise GridError("empirical r grid must be strictly increasing")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "sup", np.maximum.accumulate(s))


@dataclass(frozen=True)
class ObeysVerdict:
    obeys: bool
    first_violation_r: Optional[float] = None
    min_margin: float = math.inf   # min over the grid of omega(r) - measured(r)

    def __bool__(self):
        return self.obeys


def field_obeys(empirical: EmpiricalModulus, modulus, xi0: Optional[float] = None) -> ObeysVerdict:
    """Strict pointwise comparison of a measured increment table to a modulus."""
    ev = (lambda r: modulus.eval(r, xi0)) if xi0 is not None else modulus.eval
    first = None
    min_margin = math.inf
    for r, s in zip(empirical.r, empirical.sup):
        margin = ev(float(r)) - float(s)
        min_margin = min(min_margin, margin)
        if margin <= 0.0 and first is None:
            first = float(r)
    return ObeysVerdict(obeys=first is None, first_violation_r=first, min_margin=min_margin)
