"""Pure-Python kernel core: piecewise-modulus evaluation and the singular
quadratures behind the certificate engine.

This module is the reference implementation; `_core.pyx` is a compiled twin
selected at import when available.  Everything operates on the packed float64
descriptor documented in `_layout`, so the two backends share one calling
convention and can be cross-checked on random descriptors.

Numerical design notes:

  * quadrature is Gauss-Kronrod (G7/K15) with greedy worst-panel bisection
    under a global panel budget;
  * the inner dissipation integral uses eta = (xi/2) s^2 to concentrate
    nodes where the second difference of the modulus nearly vanishes, the
    outer one and the drift tail use eta = c e^u, and the local classical
    drift integral uses eta = xi s^3 to absorb its endpoint singularity;
  * panels are split at the images of the modulus breakpoints so each panel
    sees a smooth integrand;
  * first and second differences of the modulus are evaluated through
    per-piece stable forms (binomial series, expm1/log1p) because the raw
    differences lose all significance exactly where the dissipation
    integrals need them most.
"""

from __future__ import annotations

import heapq
import math

from ._layout import (
    A_EXP, B_EXP, CAP, DELTA, DESC_SIZE, GAMMA, GI_XI0, KAPPA, LAM, M_FLOOR,
    M_INV_DELTA, M_INV_XI0, M_KIND, M_P1, M_P2, OMEGA_CAP, QTOL, SIGMA,
    V_APPENDIX, V_CAPPED, V_FAMILY, V_FAMILY_LOG, V_HOLDER_LOG, VARIANT, XI0,
)

# G7/K15 nodes on [-1, 1] and weights (Kronrod points interleave the Gauss ones)
_XGK = (
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
)
_WGK = (
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
)
_WG = (0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469)


def _gk15(f, a, b):
    """Single Gauss-Kronrod panel; returns (K15, |K15 - G7|)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fc = f(c)
    resk = _WGK[7] * fc
    resg = _WG[3] * fc
    for j in range(7):
        x = h * _XGK[j]
        f1 = f(c - x)
        f2 = f(c + x)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    return resk * h, abs(resk - resg) * abs(h)


def _adapt_panels(f, points, tol, budget):
    """Greedy adaptive quadrature: repeatedly bisect the panel with the worst
    Gauss/Kronrod discrepancy until the total estimate fits the tolerance or
    the panel budget runs out.  Returns (integral, error_estimate)."""
    heap = []
    total = 0.0
    err_active = 0.0
    err_frozen = 0.0
    n = 0
    for i in range(len(points) - 1):
        a, b = points[i], points[i + 1]
        if b <= a:
            continue
        val, err = _gk15(f, a, b)
        total += val
        err_active += err
        heapq.heappush(heap, (-err, a, b, val))
        n += 1
    while heap and n < budget \
            and err_active + err_frozen > max(tol, 5e-15 * abs(total)):
        neg_e, a, b, val = heapq.heappop(heap)
        err_active += neg_e
        if (b - a) <= 1e-14 * (abs(a) + abs(b)):
            err_frozen += -neg_e
            continue
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        total += v1 + v2 - val
        err_active += e1 + e2
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        n += 1
    return total, err_active + err_frozen


def _adapt(f, a, b, tol, budget):
    return _adapt_panels(f, [a, b], tol, budget)


def quadrature(f, a, b, tol, budget=600):
    """General adaptive Gauss-Kronrod helper (used by diagnostics and tests)."""
    return _adapt(f, a, b, tol, budget)


# ------------------------------------------------------------- symbol kernels


def m_eval(d, r):
    kind = int(d[M_KIND])
    if kind == 0:
        return 1.0
    if kind == 1:
        return r ** d[M_P1]
    if kind == 2:
        return r ** d[M_P1] * math.log(d[M_P2] + r)
    if kind == 3:
        v = math.log(d[M_P2] + r) ** d[M_P1] if d[M_P2] + r > 1.0 else 0.0
        return v if v > d[M_FLOOR] else d[M_FLOOR]
    if kind == 4:
        return _TABULATED[int(d[M_P1])][0](r)
    raise ValueError(f"unknown symbol kind {kind}")


def m_prime(d, r):
    kind = int(d[M_KIND])
    if kind == 0:
        return 0.0
    if kind == 1:
        return d[M_P1] * r ** (d[M_P1] - 1.0)
    if kind == 2:
        return d[M_P1] * r ** (d[M_P1] - 1.0) * math.log(d[M_P2] + r) \
            + r ** d[M_P1] / (d[M_P2] + r)
    if kind == 3:
        lg = math.log(d[M_P2] + r) if d[M_P2] + r > 1.0 else 0.0
        if lg <= 0.0 or lg ** d[M_P1] <= d[M_FLOOR]:
            return 0.0
        return d[M_P1] * lg ** (d[M_P1] - 1.0) / (d[M_P2] + r)
    if kind == 4:
        return _TABULATED[int(d[M_P1])][1](r)
    raise ValueError(f"unknown symbol kind {kind}")


_TABULATED = {}   # registry for tabulated symbols (python backend only)


def _m_kink_eta(d):
    """eta at which m(1/eta) crosses the log_power floor; 0 when absent."""
    if int(d[M_KIND]) != 3 or d[M_FLOOR] <= 0.0:
        return 0.0
    r_star = math.exp(d[M_FLOOR] ** (1.0 / d[M_P1])) - d[M_P2]
    return 1.0 / r_star if r_star > 0.0 else 0.0


def _z(d, x):
    """Integrand 1/(x m(1/x)) of the slow-growth branch."""
    return 1.0 / (x * m_eval(d, 1.0 / x))


def _z_prime(d, x):
    r = 1.0 / x
    m = m_eval(d, r)
    return -(m - m_prime(d, r) * r) / (x * m) ** 2


def gamma_integral(d, x):
    """Integral of 1/(eta m(1/eta)) from delta to x (0 for x <= delta)."""
    delta = d[DELTA]
    if x <= delta:
        return 0.0
    kind = int(d[M_KIND])
    if kind == 0:
        return math.log(x / delta)
    if kind == 1:
        a = d[M_P1]
        return (x ** a - delta ** a) / a
    # log substitution u = log(eta): integrand 1/m(exp(-u))
    f = lambda u: 1.0 / m_eval(d, math.exp(-u))
    pts = [math.log(delta), math.log(x)]
    ek = _m_kink_eta(d)
    if ek > 0.0 and delta < ek < x:
        pts.insert(1, math.log(ek))
    val, _ = _adapt_panels(f, pts, d[QTOL], 200)
    return val


# ------------------------------------------------------------ modulus kernels


def omega(d, xi):
    """Evaluate the modulus at xi > 0."""
    v = int(d[VARIANT])
    if v == V_APPENDIX:
        lam = d[LAM]
        s = lam * xi
        scale = lam ** (2.0 - d[A_EXP] - d[B_EXP])
        delta = d[DELTA]
        if s <= delta:
            return scale * (s - s * math.sqrt(s))
        return scale * (delta - delta * math.sqrt(delta))
    kappa = d[KAPPA]
    gamma = d[GAMMA]
    delta = d[DELTA]
    sigma = d[SIGMA]
    mid = d[M_INV_DELTA]
    if v == V_CAPPED and xi >= d[CAP]:
        return d[OMEGA_CAP]
    if v == V_FAMILY_LOG:
        if xi >= d[CAP]:
            return d[OMEGA_CAP]
        v = V_FAMILY
    xi0 = d[XI0] if v == V_FAMILY else 0.0
    if xi0 > delta:
        if xi <= delta:
            return ((1.0 - sigma) * kappa / mid + gamma * d[GI_XI0]
                    - gamma * (xi0 - delta) / (xi0 * d[M_INV_XI0])
                    + sigma * kappa * xi / (delta * mid))
        if xi <= xi0:
            return (kappa / mid + gamma * d[GI_XI0] - gamma / d[M_INV_XI0]
                    + gamma * xi / (xi0 * d[M_INV_XI0]))
        return kappa / mid + gamma * gamma_integral(d, xi)
    if xi0 > 0.0:
        if xi <= xi0:
            return (kappa / mid) * delta ** (-sigma) * xi0 ** (sigma - 1.0) \
                * ((1.0 - sigma) * xi0 + sigma * xi)
        if xi <= delta:
            return (kappa / mid) * (xi / delta) ** sigma
        return kappa / mid + gamma * gamma_integral(d, xi)
    # stationary Hoelder-log modulus
    if xi <= delta:
        return (kappa / mid) * (xi / delta) ** sigma
    return kappa / mid + gamma * gamma_integral(d, xi)


def omega_dxi(d, xi, side):
    """One-sided derivative of the modulus; side < 0 is the left derivative."""
    left = (lambda b: xi <= b) if side < 0 else (lambda b: xi < b)
    v = int(d[VARIANT])
    if v == V_APPENDIX:
        lam = d[LAM]
        scale = lam ** (3.0 - d[A_EXP] - d[B_EXP])
        if left(d[DELTA] / lam):
            return scale * (1.0 - 1.5 * math.sqrt(lam * xi))
        return 0.0
    kappa = d[KAPPA]
    gamma = d[GAMMA]
    delta = d[DELTA]
    sigma = d[SIGMA]
    mid = d[M_INV_DELTA]
    if v == V_CAPPED and not left(d[CAP]):
        return 0.0
    if v == V_FAMILY_LOG:
        if not left(d[CAP]):
            return 0.0
        v = V_FAMILY
    xi0 = d[XI0] if v == V_FAMILY else 0.0
    if xi0 > delta:
        if left(delta):
            return sigma * kappa / (delta * mid)
        if left(xi0):
            return gamma / (xi0 * d[M_INV_XI0])
        return gamma * _z(d, xi)
    if xi0 > 0.0:
        if left(xi0):
            return sigma * kappa / mid * delta ** (-sigma) * xi0 ** (sigma - 1.0)
        if left(delta):
            return sigma * kappa / mid * delta ** (-sigma) * xi ** (sigma - 1.0)
        return gamma * _z(d, xi)
    if left(delta):
        return sigma * kappa / mid * delta ** (-sigma) * xi ** (sigma - 1.0)
    return gamma * _z(d, xi)


def omega_dxixi(d, xi):
    """Second derivative on the smooth piece containing xi (kinks excluded)."""
    v = int(d[VARIANT])
    if v == V_APPENDIX:
        lam = d[LAM]
        s = lam * xi
        if s < d[DELTA]:
            return -0.75 * lam ** (4.0 - d[A_EXP] - d[B_EXP]) / math.sqrt(s)
        return 0.0
    kappa = d[KAPPA]
    gamma = d[GAMMA]
    delta = d[DELTA]
    sigma = d[SIGMA]
    mid = d[M_INV_DELTA]
    if v == V_CAPPED and xi >= d[CAP]:
        return 0.0
    if v == V_FAMILY_LOG:
        if xi >= d[CAP]:
            return 0.0
        v = V_FAMILY
    xi0 = d[XI0] if v == V_FAMILY else 0.0
    if xi0 > delta:
        if xi < xi0:
            return 0.0
        return gamma * _z_prime(d, xi)
    if xi0 > 0.0 and xi < xi0:
        return 0.0
    if xi < delta:
        return sigma * (sigma - 1.0) * kappa / mid * delta ** (-sigma) * xi ** (sigma - 2.0)
    return gamma * _z_prime(d, xi)


def breakpoints(d):
    """Kink locations of the modulus (ascending), plus the symbol-floor kink."""
    v = int(d[VARIANT])
    pts = []
    if v == V_APPENDIX:
        pts.append(d[DELTA] / d[LAM])
    else:
        xi0 = d[XI0] if v in (V_FAMILY, V_FAMILY_LOG) else 0.0
        if xi0 > 0.0:
            pts.append(xi0)
        pts.append(d[DELTA])
        if v in (V_CAPPED, V_FAMILY_LOG):
            pts.append(d[CAP])
    ek = _m_kink_eta(d)
    if ek > 0.0:
        pts.append(ek)
    return sorted(set(p for p in pts if p > 0.0))


# ------------------------------------------------ stable difference evaluators

P_LIN, P_POW, P_LOGINT, P_CONST, P_APPX = 0, 1, 2, 3, 4


def _piece_of(d, x):
    """(piece type, power exponent) of the smooth piece containing x."""
    v = int(d[VARIANT])
    if v == V_APPENDIX:
        return (P_APPX, 1.5) if d[LAM] * x < d[DELTA] else (P_CONST, 0.0)
    delta = d[DELTA]
    if v == V_CAPPED and x >= d[CAP]:
        return P_CONST, 0.0
    if v == V_FAMILY_LOG:
        if x >= d[CAP]:
            return P_CONST, 0.0
        v = V_FAMILY
    xi0 = d[XI0] if v == V_FAMILY else 0.0
    if xi0 > delta:
        if x <= xi0:
            return P_LIN, 0.0
        return P_LOGINT, 0.0
    if xi0 > 0.0 and x <= xi0:
        return P_LIN, 0.0
    if x < delta:
        return P_POW, d[SIGMA]
    return P_LOGINT, 0.0


def _f2(p, u):
    """(1+u)^p + (1-u)^p - 2, stable for 0 <= u <= 1 (series below u = 1/2)."""
    if u > 0.5:
        return (1.0 + u) ** p + (1.0 - u) ** p - 2.0
    s = 0.0
    c = 1.0
    upow = 1.0
    for j in range(1, 80):
        c *= (p - j + 1.0) / j
        upow *= u
        if j % 2 == 0:
            t = c * upow
            s += t
            if abs(t) < 1e-18 * (abs(s) + 1e-300):
                break
    return 2.0 * s


def _expm1_pow(base, p, rel):
    """(base (1+rel))^p - base^p, stable for small rel (>= -1)."""
    return base ** p * math.expm1(p * math.log1p(rel))


def omega_sym_dd(d, xi, eta, bks=None):
    """w(xi+2 eta) + w(xi-2 eta) - 2 w(xi) without catastrophic cancellation,
    for 0 < eta <= xi/2."""
    lo = xi - 2.0 * eta
    hi = xi + 2.0 * eta
    if lo <= 0.0:
        lo = 1e-18 * xi
    if bks is None:
        bks = breakpoints(d)
    for b in bks:
        if lo < b < hi:
            return omega(d, hi) + omega(d, lo) - 2.0 * omega(d, xi)
    ptype, pexp = _piece_of(d, xi)
    if ptype in (P_LIN, P_CONST):
        return 0.0
    u = 2.0 * eta / xi
    if ptype == P_POW:
        return omega(d, xi) * _f2(pexp, u)     # pure power piece, no offset
    if ptype == P_APPX:
        lam = d[LAM]
        scale = lam ** (2.0 - d[A_EXP] - d[B_EXP])
        return -scale * (lam * xi) ** 1.5 * _f2(1.5, u)
    # slow-growth branch: second difference of the gamma-integral
    gamma = d[GAMMA]
    kind = int(d[M_KIND])
    if kind == 0:
        return gamma * math.log1p(-u * u)
    if kind == 1:
        a = d[M_P1]
        return gamma * (xi ** a / a) * _f2(a, u)
    if u <= 1e-4:
        return gamma * _z_prime(d, xi) * 4.0 * eta * eta
    f = lambda t: _z(d, xi + t) - _z(d, xi - t)
    val, _ = _adapt(f, 0.0, 2.0 * eta, d[QTOL], 200)
    return gamma * val


def omega_fwd_diff(d, a, step, bks=None):
    """w(a + step) - w(a) without cancellation, for a, step > 0."""
    if a <= 0.0:
        a = 1e-18 * step
    hi = a + step
    if bks is None:
        bks = breakpoints(d)
    for b in bks:
        if a < b < hi:
            return omega(d, hi) - omega(d, a)
    ptype, pexp = _piece_of(d, 0.5 * (a + hi))
    if ptype == P_CONST:
        return 0.0
    if ptype == P_LIN:
        return omega_dxi(d, a, 1) * step
    rel = step / a
    if ptype == P_POW:
        return omega(d, a) * math.expm1(pexp * math.log1p(rel))
    if ptype == P_APPX:
        lam = d[LAM]
        scale = lam ** (2.0 - d[A_EXP] - d[B_EXP])
        return scale * (lam * step - _expm1_pow(lam * a, 1.5, rel))
    gamma = d[GAMMA]
    kind = int(d[M_KIND])
    if kind == 0:
        return gamma * math.log1p(rel)
    if kind == 1:
        return gamma * _expm1_pow(a, d[M_P1], rel) / d[M_P1]
    if rel <= 1e-4:
        return gamma * step * _z(d, a + 0.5 * step)
    val, _ = _adapt(lambda t: _z(d, t), a, hi, d[QTOL], 200)
    return gamma * val


# ---------------------------------------------------------- certificate quads


def _insert_images(lo, hi, images):
    pts = [lo, hi]
    for p in images:
        if lo < p < hi:
            pts.append(p)
    return sorted(set(pts))


def _inner_images(bks, xi):
    out = []
    for b in bks:
        if xi < b < 2.0 * xi:            # kink of w(xi + 2 eta)
            out.append(math.sqrt((b - xi) / xi))
        if 0.0 < b < xi:                 # kink of w(xi - 2 eta)
            out.append(math.sqrt((xi - b) / xi))
    return out


def _outer_images(bks, xi):
    out = []
    for b in bks:
        for eta_k in ((b + xi) / 2.0, (b - xi) / 2.0):
            if eta_k > 0.5 * xi:
                out.append(math.log(eta_k / (0.5 * xi)))
    return out


def dissipation_parts(d, xi, beta, hcap, tol, budget=600):
    """The two singular dissipation integrals (without the C1 prefactor).

    Returns (inner, outer, err): the integral of the second difference of the
    modulus over (0, xi/2], the far-field integral over [xi/2, hcap], and the
    accumulated quadrature error estimate.
    """
    w_xi = omega(d, xi)
    half = 0.5 * xi
    bks = breakpoints(d)

    # inner integral, eta = (xi/2) s^2
    def f_inner(s):
        eta = half * s * s
        return omega_sym_dd(d, xi, eta, bks) * eta ** (-1.0 - beta) * xi * s

    s_cut = 1e-7
    pts = _insert_images(s_cut, 1.0, _inner_images(bks, xi))
    inner, err = _adapt_panels(f_inner, pts, tol, budget)
    err += abs(f_inner(s_cut)) * s_cut   # dropped (0, s_cut) sliver

    # outer integral, eta = (xi/2) e^u
    def f_outer(u):
        eta = half * math.exp(u)
        g = omega_fwd_diff(d, 2.0 * eta - xi, 2.0 * xi, bks) - 2.0 * w_xi
        return g * eta ** (-beta)

    pts = _insert_images(0.0, math.log(2.0 * hcap / xi), _outer_images(bks, xi))
    outer, err2 = _adapt_panels(f_outer, pts, tol, budget)
    return inner, outer, err + err2


def drift_tail(d, xi, beta, hcap, tol, budget=600):
    """Integral of omega(eta) m(1/eta) eta^(-1-beta) over [xi, hcap]."""

    def f(u):
        eta = xi * math.exp(u)
        return omega(d, eta) * m_eval(d, 1.0 / eta) * eta ** (-beta)

    images = [math.log(b / xi) for b in breakpoints(d) if b > xi]
    pts = _insert_images(0.0, math.log(hcap / xi), images)
    return _adapt_panels(f, pts, tol, budget)


def drift_local(d, xi, beta, tol, budget=600):
    """Integral of omega(eta) m(1/eta) eta^(-beta) over (0, xi]."""

    def f(s):
        eta = xi * s ** 3
        return omega(d, eta) * m_eval(d, 1.0 / eta) * eta ** (-beta) * 3.0 * xi * s * s

    images = [(b / xi) ** (1.0 / 3.0) for b in breakpoints(d) if b < xi]
    pts = _insert_images(1e-10, 1.0, images)
    return _adapt_panels(f, pts, tol, budget)


# -------------------------------------------- generic (callable) counterparts


def dissipation_parts_fn(w, bks, xi, beta, hcap, tol, budget=600):
    """Dissipation integrals for an arbitrary modulus callable w with kink
    list bks.  Raw differences are used, so deep tolerances may be limited by
    float cancellation; intended for experiments outside the built-in family.
    """
    w_xi = w(xi)
    half = 0.5 * xi

    def f_inner(s):
        eta = half * s * s
        lo = xi - 2.0 * eta
        if lo <= 0.0:
            lo = 1e-18 * xi
        g = w(xi + 2.0 * eta) + w(lo) - 2.0 * w_xi
        return g * eta ** (-1.0 - beta) * xi * s

    s_cut = 1e-7
    pts = _insert_images(s_cut, 1.0, _inner_images(bks, xi))
    inner, err = _adapt_panels(f_inner, pts, tol, budget)
    err += abs(f_inner(s_cut)) * s_cut

    def f_outer(u):
        eta = half * math.exp(u)
        lo = 2.0 * eta - xi
        if lo <= 0.0:
            lo = 1e-18 * xi
        g = w(2.0 * eta + xi) - w(lo) - 2.0 * w_xi
        return g * eta ** (-beta)

    pts = _insert_images(0.0, math.log(2.0 * hcap / xi), _outer_images(bks, xi))
    outer, err2 = _adapt_panels(f_outer, pts, tol, budget)
    return inner, outer, err + err2


def drift_tail_fn(w, mfn, bks, xi, beta, hcap, tol, budget=600):
    def f(u):
        eta = xi * math.exp(u)
        return w(eta) * mfn(1.0 / eta) * eta ** (-beta)

    images = [math.log(b / xi) for b in bks if b > xi]
    pts = _insert_images(0.0, math.log(hcap / xi), images)
    return _adapt_panels(f, pts, tol, budget)


def drift_local_fn(w, mfn, bks, xi, beta, tol, budget=600):
    def f(s):
        eta = xi * s ** 3
        return w(eta) * mfn(1.0 / eta) * eta ** (-beta) * 3.0 * xi * s * s

    images = [(b / xi) ** (1.0 / 3.0) for b in bks if b < xi]
    pts = _insert_images(1e-10, 1.0, images)
    return _adapt_panels(f, pts, tol, budget)
