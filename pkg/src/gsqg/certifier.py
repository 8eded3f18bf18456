"""Numerical certificates for the nonlocal maximum principle.

Each certificate evaluates, on a parameter grid, the dissipation upper bound

  D(xi) <= C1 [ int_0^(xi/2) (w(xi+2e)+w(xi-2e)-2w(xi)) e^(-1-beta) de
              + int_(xi/2)^inf (w(2e+xi)-w(2e-xi)-2w(xi)) e^(-1-beta) de ]

and one of the drift upper bounds

  singular:   Omega <= -C2 xi m(1/xi) D + C2 xi int_xi^inf w m(1/e) e^(-1-b) de
                       + C2 xi^(1-b) m(1/xi) w(xi)
  classical:  Omega <= C [ int_0^xi w m(1/e) e^(-b) de
                         + xi int_xi^inf w m(1/e) e^(-1-b) de ],

then checks the per-point breakdown inequality (stationary, time-dependent or
appendix form) with explicit tail remainders.  Infinite integrals are
truncated at H = h_factor * max(xi, largest breakpoint); the dropped tail is
replaced by its analytic upper envelope and its magnitude is carried into the
report, so a certificate is self-validating up to floating point.

These are floating-point evidence with remainder bookkeeping, not interval
proofs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import backend
from . import _layout as L
from .errors import BreakpointError, DomainError, GridError, PreconditionError
from .moduli import (
    AdmissibleConstants, StationaryModulus, TimeDependentModulus,
    eventual_bounds_ok, stationary_bounds_ok,
)
from .multiplier import MultiplierSpec

DELTA_SUP_APPENDIX = 4.0 / 9.0


@dataclass(frozen=True)
class QuadSettings:
    """Quadrature accuracy knobs; `refined` is the precision-doubling oracle
    (tolerance divided by ten, node budget doubled)."""

    tol: float = 1e-12
    budget: int = 600          # max Gauss-Kronrod panels per integral
    h_factor: float = 1e8      # truncation radius over the largest scale
    margin_floor: float = 1e-14   # relative to the magnitude of the terms

    def refined(self, tol_factor=0.1, budget_factor=2):
        return QuadSettings(tol=self.tol * tol_factor,
                            budget=self.budget * budget_factor,
                            h_factor=self.h_factor,
                            margin_floor=self.margin_floor)


def _impl_for(desc):
    if int(desc[L.M_KIND]) == 4:
        return backend.PYTHON_IMPL
    return backend


class _Machine:
    """Uniform quadrature interface over descriptor-backed and custom moduli."""

    def __init__(self, modulus, xi0=None):
        if isinstance(modulus, TimeDependentModulus):
            if xi0 is None:
                raise PreconditionError("a family modulus needs an explicit xi0")
            self.desc = modulus.descriptor(xi0)
        elif hasattr(modulus, "descriptor"):
            self.desc = modulus.descriptor()
        else:
            self.desc = None
        if self.desc is not None:
            impl = _impl_for(self.desc)
            self.omega = lambda x: impl.omega(self.desc, x)
            self.dxi_right = lambda x: impl.omega_dxi(self.desc, x, 1)
            self.m = lambda r: impl.m_eval(self.desc, r)
            self.kinks = impl.breakpoints(self.desc)
            self._impl = impl
            self.gamma_tail = _gamma_tail_rate(self.desc)
        else:
            py = backend.PYTHON_IMPL
            w = (lambda x: modulus.eval(x, xi0)) if xi0 is not None else modulus.eval
            self.omega = w
            if xi0 is not None:
                self.dxi_right = lambda x: modulus.d_xi(x, xi0, "right")
            else:
                self.dxi_right = lambda x: modulus.d_xi(x, "right")
            self.m = modulus.multiplier.eval_m
            self.kinks = sorted(modulus.breakpoints())
            self._impl = py
            self.gamma_tail = getattr(modulus, "gamma_tail", 0.0)

    def dparts(self, xi, beta, hcap, quad):
        if self.desc is not None:
            return self._impl.dissipation_parts(self.desc, xi, beta, hcap,
                                                quad.tol, quad.budget)
        return backend.PYTHON_IMPL.dissipation_parts_fn(
            self.omega, self.kinks, xi, beta, hcap, quad.tol, quad.budget)

    def dtail(self, xi, beta, hcap, quad):
        if self.desc is not None:
            return self._impl.drift_tail(self.desc, xi, beta, hcap,
                                         quad.tol, quad.budget)
        return backend.PYTHON_IMPL.drift_tail_fn(
            self.omega, self.m, self.kinks, xi, beta, hcap, quad.tol, quad.budget)

    def dlocal(self, xi, beta, quad):
        if self.desc is not None:
            return self._impl.drift_local(self.desc, xi, beta, quad.tol, quad.budget)
        return backend.PYTHON_IMPL.drift_local_fn(
            self.omega, self.m, self.kinks, xi, beta, quad.tol, quad.budget)


def log_grid(lo: float, hi: float, n: int, avoid=(), rel_excl: float = 1e-6) -> np.ndarray:
    """Log-spaced grid on [lo, hi] with breakpoint neighbourhoods excluded."""
    if not 0.0 < lo < hi:
        raise GridError("need 0 < lo < hi")
    g = np.geomspace(lo, hi, n)
    for b in avoid:
        near = np.abs(g - b) < 2.0 * rel_excl * b
        g[near & (g <= b)] = b * (1.0 - 2.0 * rel_excl)
        g[near & (g > b)] = b * (1.0 + 2.0 * rel_excl)
    return np.unique(g)


# ------------------------------------------------------------ bound evaluators


@dataclass(frozen=True)
class BoundValue:
    value: float
    tail_bound: float   # remainder magnitude: truncated tails + quadrature error


def _gamma_tail_rate(desc) -> float:
    """gamma if the modulus keeps growing at infinity, 0 if it is capped."""
    v = int(desc[L.VARIANT])
    if v in (L.V_CAPPED, L.V_APPENDIX, L.V_FAMILY_LOG):
        return 0.0
    return desc[L.GAMMA]


def _guard_breakpoint(mach, xi):
    for b in mach.kinks:
        if abs(xi - b) <= 1e-6 * xi:
            raise BreakpointError(
                f"xi = {xi} sits within 1e-6 of the breakpoint {b}; perturb the grid")


_H_MAX = 1e250


def _grow_hcap(hcap, env, budget, beta):
    """Enlarge the truncation radius until the analytic tail envelope fits the
    declared tolerance (envelopes decay like H^-beta, so one step suffices)."""
    if env > budget > 0.0:
        hcap = min(hcap * (env / budget) ** (1.0 / beta) * 1.01, _H_MAX)
    return hcap


def dissipation_bound(modulus, xi, beta, C1, xi0=None, quad=QuadSettings()) -> BoundValue:
    """Upper bound for the dissipation term at separation xi (nonpositive for
    concave moduli).

    The far-field integrand beyond H is enclosed by concavity,

      -2 w(xi) <= w(2e+xi) - w(2e-xi) - 2 w(xi) <= 2 xi w'(2H-xi) - 2 w(xi),

    whose exact -2 w(xi) part is integrated in closed form; only the
    derivative sliver enters the remainder, so H never has to reach the
    float-cancellation zone of the difference w(2e+xi) - w(2e-xi).
    """
    if xi <= 0.0:
        raise DomainError("xi must be positive")
    if C1 <= 0.0:
        raise PreconditionError("C1 must be positive")
    mach = _Machine(modulus, xi0)
    _guard_breakpoint(mach, xi)
    w_xi = mach.omega(xi)
    hcap = quad.h_factor * max([xi] + mach.kinks)
    sliver = 2.0 * xi * mach.dxi_right(2.0 * hcap - xi) / (beta * hcap ** beta)
    hcap = _grow_hcap(hcap, sliver, quad.tol, beta)
    sliver = 2.0 * xi * mach.dxi_right(2.0 * hcap - xi) / (beta * hcap ** beta)
    inner, outer, err = mach.dparts(xi, beta, hcap, quad)
    tail_up = sliver - 2.0 * w_xi / (beta * hcap ** beta)
    return BoundValue(value=C1 * (inner + outer + tail_up),
                      tail_bound=C1 * (sliver + err))


def drift_bound(modulus, xi, beta, C2, variant, D_value=None, xi0=None,
                quad=QuadSettings()) -> BoundValue:
    """Upper bound for the velocity increment at separation xi.

    variant 'singular_full' is the bound valid for every xi under the strict
    growth assumption; 'singular_local' is the same expression restricted to
    xi <= 1/(2 b1); 'classical' is the two-integral bound with constant C2.
    The singular variants consume the dissipation bound D_value.
    """
    if xi <= 0.0:
        raise DomainError("xi must be positive")
    mach = _Machine(modulus, xi0)
    _guard_breakpoint(mach, xi)

    def q_env(h):
        return mach.omega(h) * mach.m(1.0 / h) / (beta * h ** beta) \
            + mach.gamma_tail / (beta * beta * h ** beta)

    hcap = quad.h_factor * max([xi] + mach.kinks)
    # the envelope decays a touch slower than H^-beta when omega still grows,
    # so iterate the enlargement twice
    hcap = _grow_hcap(hcap, q_env(hcap) * xi, quad.tol, beta)
    hcap = _grow_hcap(hcap, q_env(hcap) * xi, quad.tol, beta)
    q_val, q_err = mach.dtail(xi, beta, hcap, quad)
    q_tail = q_env(hcap)
    if variant == "classical":
        loc, loc_err = mach.dlocal(xi, beta, quad)
        return BoundValue(value=C2 * (loc + xi * (q_val + q_tail)),
                          tail_bound=C2 * (xi * (q_tail + q_err) + loc_err))
    if variant not in ("singular_full", "singular_local"):
        raise PreconditionError(f"unknown drift variant {variant!r}")
    mult = modulus.base.multiplier if isinstance(modulus, TimeDependentModulus) \
        else modulus.multiplier
    if variant == "singular_local" and xi > 1.0 / (2.0 * mult.b1) * (1.0 + 1e-12):
        raise PreconditionError(
            f"singular_local drift bound needs xi <= 1/(2 b1) = {1.0 / (2.0 * mult.b1)}")
    if D_value is None:
        raise PreconditionError("singular drift variants need the dissipation value")
    m_xi = mach.m(1.0 / xi)
    w_xi = mach.omega(xi)
    value = -C2 * xi * m_xi * D_value + C2 * xi * (q_val + q_tail) \
        + C2 * xi ** (1.0 - beta) * m_xi * w_xi
    return BoundValue(value=value, tail_bound=C2 * xi * (q_tail + q_err))


# ------------------------------------------------------------------- reports


@dataclass
class PointRecord:
    xi: float
    xi0: Optional[float]
    case: Optional[int]
    D_value: float
    Omega_bound: float
    front_term: float
    eps_term: float
    margin: float
    tail_bound: float
    floor: float

    def row(self):
        return [self.xi, self.xi0 if self.xi0 is not None else "",
                self.case if self.case is not None else "",
                self.D_value, self.Omega_bound, self.front_term,
                self.eps_term, self.margin, self.tail_bound]


@dataclass
class CertificateReport:
    kind: str
    params: dict
    settings: dict
    records: list = field(default_factory=list)
    admissible: bool = True
    admissibility_notes: list = field(default_factory=list)
    analytic: dict = field(default_factory=dict)

    @property
    def worst(self) -> PointRecord:
        return max(self.records, key=lambda r: r.margin)

    @property
    def margins_pass(self) -> bool:
        return all(r.margin < -r.floor for r in self.records)

    @property
    def verdict(self) -> str:
        ok = self.margins_pass
        if self.analytic and not self.analytic.get("condition_holds", True):
            ok = False
        if not ok:
            return "fail"
        return "pass" if self.admissible else "not_guaranteed"

    def to_dict(self) -> dict:
        w = self.worst
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "admissible": self.admissible,
            "admissibility_notes": self.admissibility_notes,
            "worst_margin": w.margin,
            "worst_location": {"xi": w.xi, "xi0": w.xi0},
            "n_points": len(self.records),
            "params": self.params,
            "settings": self.settings,
            "analytic": self.analytic,
            "records": [dict(zip(
                ("xi", "xi0", "case", "D_value", "Omega_bound", "front_term",
                 "eps_term", "margin", "tail_bound"),
                r.row())) for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)

    def margins_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["xi", "xi0", "case", "D_value", "Omega_bound", "front_term",
                    "eps_term", "margin", "tail_bound"])
        for r in self.records:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r.row()])
        return buf.getvalue()


def _floor_for(quad, *terms):
    return quad.margin_floor * sum(abs(t) for t in terms)


# ---------------------------------------------------------------- stationary


def certify_stationary(mod: StationaryModulus, beta, consts: AdmissibleConstants,
                       xi_grid=None, drift_variant=None,
                       quad=QuadSettings(), threads=1) -> CertificateReport:
    """Grid check of  Omega(xi) w'(xi) + D(xi) < 0  for a stationary modulus."""
    spec = mod.multiplier
    if drift_variant is None:
        variant = getattr(mod, "variant", "custom")
        drift_variant = "singular_local" if variant == "capped" else "singular_full"
    if xi_grid is None:
        hi = min(1.0 / (2.0 * spec.b1), 1e2) if drift_variant == "singular_local" else 1e2
        xi_grid = log_grid(1e-6 * getattr(mod, "delta", 1.0), hi, 200,
                           avoid=mod.breakpoints())
    notes = []
    if getattr(mod, "kappa", None) is None:
        notes.append("custom modulus: the smallness ledger does not apply")
    elif not stationary_bounds_ok(consts, mod.kappa, mod.gamma):
        notes.append("amplitudes violate the stationary smallness ledger")
    if not mod.concavity_ok:
        notes.append("gamma > sigma kappa: the modulus is not concave")
    if drift_variant == "singular_full" and not spec.strict:
        notes.append("full singular drift bound used without the strict growth flag")

    def point(xi):
        xi = float(xi)
        D = dissipation_bound(mod, xi, beta, consts.C1, quad=quad)
        om = drift_bound(mod, xi, beta, consts.C2, drift_variant, D.value, quad=quad)
        dxi = max(mod.d_xi(xi, "left"), mod.d_xi(xi, "right"))
        margin = om.value * dxi + D.value
        tail = om.tail_bound * dxi + D.tail_bound
        return PointRecord(xi, None, None, D.value, om.value, 0.0, 0.0, margin,
                           tail, _floor_for(quad, om.value * dxi, D.value))

    records = _sweep(point, xi_grid, threads)
    return CertificateReport(
        kind="stationary",
        params={"modulus": mod.to_config(), "multiplier": spec.to_config(),
                "beta": beta, "constants": consts.to_dict(),
                "drift_variant": drift_variant},
        settings=_settings_dict(quad, len(xi_grid)),
        records=records, admissible=not notes, admissibility_notes=notes)


def certify_time_dependent(fam: TimeDependentModulus, beta,
                           consts: AdmissibleConstants, epsilon, xi_grid,
                           xi0_grid, C=1.0, quad=QuadSettings(),
                           threads=1) -> CertificateReport:
    """Grid check of the shrinking-front inequality

      -d_xi0 w * xi0'(t) + Omega d_xi w + D + eps d_xixi w < 0

    over a (xi, xi0) grid, with the front term using the per-case upper bound
    for d_xi0 w and xi0' = -rho xi0^(1-beta)."""
    spec = fam.base.multiplier
    drift_variant = "singular_local" if fam.family_variant == "log_supercritical" \
        else "singular_full"
    notes = []
    if not eventual_bounds_ok(consts, fam.rho, fam.base.kappa, fam.base.gamma, C,
                              fam.family_variant):
        notes.append("(rho, kappa, gamma) violate the shrinking-front ledger")
    if not fam.base.concavity_ok:
        notes.append("gamma > sigma kappa: the base modulus is not concave")
    if drift_variant == "singular_full" and not spec.strict:
        notes.append("full singular drift bound used without the strict growth flag")
    if epsilon < 0.0:
        raise PreconditionError("epsilon must be nonnegative")

    def column(xi0):
        xi0 = float(xi0)
        out = []
        front_rate = fam.rho * xi0 ** (1.0 - beta)   # = -xi0'(t)
        for xi in xi_grid:
            xi = float(xi)
            if abs(xi - xi0) <= 1e-6 * xi:
                xi = xi0 * (1.0 + 2e-6)
            D = dissipation_bound(fam, xi, beta, consts.C1, xi0=xi0, quad=quad)
            om = drift_bound(fam, xi, beta, consts.C2, drift_variant, D.value,
                             xi0=xi0, quad=quad)
            dxi = max(fam.d_xi(xi, xi0, "left"), fam.d_xi(xi, xi0, "right"))
            front = fam.d_xi0_upper(xi, xi0) * front_rate
            eps_term = epsilon * fam.d_xixi(xi, xi0)
            margin = front + om.value * dxi + D.value + eps_term
            tail = om.tail_bound * dxi + D.tail_bound
            out.append(PointRecord(xi, xi0, fam.case_label(xi, xi0), D.value,
                                   om.value, front, eps_term, margin, tail,
                                   _floor_for(quad, front, om.value * dxi,
                                              D.value, eps_term)))
        return out

    columns = _sweep(column, xi0_grid, threads)
    records = [r for col in columns for r in col]
    return CertificateReport(
        kind="time_dependent",
        params={"family": fam.to_config(), "multiplier": spec.to_config(),
                "beta": beta, "epsilon": epsilon, "C": C,
                "constants": consts.to_dict(), "drift_variant": drift_variant},
        settings=_settings_dict(quad, len(xi_grid) * len(xi0_grid)),
        records=records, admissible=not notes, admissibility_notes=notes)


def certify_appendix(delta, alpha, beta, epsilon, spec: MultiplierSpec, C=1.0,
                     xi_grid=None, lambda_scale=1.0,
                     quad=QuadSettings(), threads=1) -> CertificateReport:
    """Check  Omega(xi) w'(xi) + eps w''(xi) < 0  for the capped-root modulus
    on (0, delta/2), with the classical drift bound.

    The report carries the closed sufficient condition
    C_case * delta^(5/2 - alpha - beta) < (3/4) eps and the largest delta
    satisfying it (clamped below 4/9, past which the shape stops increasing);
    the certificate passes only when both the grid margins and the closed
    condition hold, since the grid samples while the condition covers the
    whole interval.
    """
    if epsilon < 0.0:
        raise PreconditionError("epsilon must be nonnegative")
    mod = StationaryModulus.appendix(spec, delta=delta, alpha=alpha, beta=beta,
                                     lambda_scale=lambda_scale)
    if xi_grid is None:
        xi_grid = log_grid(1e-6 * delta, 0.5 * delta * (1.0 - 1e-9), 200,
                           avoid=mod.breakpoints())
    top = 0.5 * delta / lambda_scale
    if np.any(np.asarray(xi_grid) > top * (1.0 + 1e-12)):
        raise GridError("appendix grid must stay inside (0, delta / (2 lambda))")

    m1 = spec.eval_m(1.0)
    s = alpha + beta - 1.0
    c_case = C * m1 * (1.0 / abs(s) if abs(s) > 1e-12 else 1.0)
    expo = 2.5 - alpha - beta
    cond_value = c_case * delta ** expo - 0.75 * epsilon
    delta_max = min((0.75 * epsilon / c_case) ** (1.0 / expo) if epsilon > 0.0 else 0.0,
                    DELTA_SUP_APPENDIX)

    def point(xi):
        xi = float(xi)
        om = drift_bound(mod, xi, beta, C, "classical", quad=quad)
        dxi = max(mod.d_xi(xi, "left"), mod.d_xi(xi, "right"))
        eps_term = epsilon * mod.d_xixi(xi)
        margin = om.value * dxi + eps_term
        return PointRecord(xi, None, None, 0.0, om.value, 0.0, eps_term, margin,
                           om.tail_bound * dxi,
                           _floor_for(quad, om.value * dxi, eps_term))

    records = _sweep(point, xi_grid, threads)
    return CertificateReport(
        kind="appendix",
        params={"modulus": mod.to_config(), "multiplier": spec.to_config(),
                "beta": beta, "epsilon": epsilon, "C": C},
        settings=_settings_dict(quad, len(xi_grid)),
        records=records,
        analytic={"C_case": c_case, "exponent": expo, "condition_value": cond_value,
                  "condition_holds": bool(cond_value < 0.0 and epsilon > 0.0
                                          and delta < DELTA_SUP_APPENDIX),
                  "delta_max": delta_max})


def appendix_delta_max(alpha, beta, epsilon, spec, C=1.0) -> float:
    """Largest admissible appendix breakpoint from the closed condition."""
    rep = certify_appendix(min(0.1, DELTA_SUP_APPENDIX / 2), alpha, beta, epsilon,
                           spec, C, xi_grid=np.array([1e-3]))
    return rep.analytic["delta_max"]


def _settings_dict(quad, n_points):
    return {"tol": quad.tol, "budget": quad.budget, "h_factor": quad.h_factor,
            "margin_floor": quad.margin_floor, "n_points": n_points}


def _sweep(fn, grid, threads):
    """Apply fn to each grid value; results keep grid order regardless of
    parallelism, so reports are reproducible."""
    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, grid))
    return [fn(x) for x in grid]


# -------------------------------------------------- stable-kernel constant C1


def stable_kernel_density(beta: float, x: float) -> float:
    """Density at x of the unit-time fractional heat kernel in one dimension,
    (1/pi) * integral of exp(-s^beta) cos(s x) over s > 0.

    Evaluated on the rotated ray s = t e^(i pi/4), where the integrand decays
    like exp(-t^beta cos(pi beta / 4) - x t / sqrt(2)) and never oscillates.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0, 1]")
    if beta == 1.0:
        return 1.0 / (math.pi * (1.0 + x * x))
    from scipy.integrate import quad as _scipy_quad

    rot = complex(math.cos(math.pi / 4.0), math.sin(math.pi / 4.0))
    phase = complex(math.cos(math.pi * beta / 4.0), math.sin(math.pi * beta / 4.0))

    def f_re(t):
        z = -(t ** beta) * phase + 1j * x * t * rot
        return (rot * np.exp(z)).real

    def f_im(t):
        z = -(t ** beta) * phase + 1j * x * t * rot
        return (rot * np.exp(z)).imag

    t_max = (45.0 / math.cos(math.pi * beta / 4.0)) ** (1.0 / beta)
    pieces = np.geomspace(min(1e-3, 1.0 / (1.0 + x)), t_max, 24)
    pts = np.concatenate(([0.0], pieces))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        re, _ = _scipy_quad(f_re, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += re
    return total / math.pi


@lru_cache(maxsize=None)
def estimate_C1(beta: float) -> float:
    """Numerical lower bound for the dissipation constant: the infimum over x
    of (1 + |x|^(1+beta)) times the unit-time fractional heat kernel.

    The kernel is sampled on x in [0, 1e3]; beyond that the convergent tail
    series gives the envelope L - G(2b+1) sin(pi b) x^(-b) / (2 pi) with
    L = G(1+b) sin(pi b / 2) / pi, which is taken as the far-field floor.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError("beta must lie in (0, 1]")
    if beta == 1.0:
        return 1.0 / math.pi
    from scipy.special import gamma as _G

    xs = np.concatenate((np.linspace(0.0, 8.0, 81), np.geomspace(8.0, 1e3, 60)))
    best = math.inf
    for x in xs:
        p = stable_kernel_density(beta, float(x))
        if p <= 0.0:
            raise ArithmeticError(f"kernel quadrature lost positivity at x = {x}")
        best = min(best, (1.0 + abs(x) ** (1.0 + beta)) * p)
    x_max = 1e3
    lead = _G(1.0 + beta) * math.sin(math.pi * beta / 2.0) / math.pi
    corr = _G(1.0 + 2.0 * beta) * math.sin(math.pi * beta) / (2.0 * math.pi) \
        * x_max ** (-beta)
    best = min(best, lead - corr)
    if best <= 0.0:
        raise ArithmeticError("stable-kernel lower bound came out nonpositive")
    return float(best)
