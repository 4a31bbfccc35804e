"""Density-expansion kernels: target = base * sum_n c_n a_n, plus the identity suite.

Each registry id fixes a base density, a target density, a coefficient rule
c_n and a term family a_n.  All c_0 = 1.  Coefficient rules are exact on
rational parameters whenever the closed form is rational (the conditional
kernels cn_over_u / cn_over_k pick up a sqrt(1-q) factor on odd indices and
are returned as floats there).

:func:`expansion_eval` reconstructs the target density pointwise with either
a fixed truncation K or an adaptive one driven by sup-norm term bounds on
S(q); the q = 1 kernels (Gaussian case) have unbounded terms and fall back to
a pointwise stopping rule on the evaluated terms.
"""

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    NonConvergenceError,
    ParameterError,
    is_exact,
    q_factorial,
    q_pochhammer,
    q_pochhammer_inf,
    support,
    truncation_order,
)
from .polyfam import (
    ASC,
    BigB,
    ChebU,
    ClassicalHermite,
    Kesten,
    QHermite,
    Rogers,
    eval_all,
    v_growth,
    w_growth,
)
from . import polyfam
from .qcore import q_binomial
from .densities import (
    density_eval,
    fCN,
    fK,
    fN,
    fR,
    fU,
    pm_ratio,
    _fn_over_fu,
    _log_fac_sum,
)
from .connect import beta_coeff, gamma_coeff


EXPANSION_IDS = (
    "n_over_u",
    "u_over_n",
    "cn_over_n",
    "n_over_cn",
    "r_over_n",
    "n_over_r",
    "cn_over_k",
    "cn_over_u",
    "mehler_classical",
    "pm_q0",
)

#: Hard truncation cap for adaptive evaluation.
K_CAP = 500


class TruncationError(NonConvergenceError):
    """Adaptive truncation could not certify the requested tolerance."""


@dataclass(frozen=True)
class ExpansionSpec:
    id: str
    params: dict
    K: int = None


@dataclass(frozen=True)
class ExpansionResult:
    value: object  # reconstructed target density, same shape as x
    tail: object  # |base| * two-term lookahead bound on the dropped series
    n_terms: int  # number of terms summed


def _div(a, b):
    if is_exact(a, b):
        from fractions import Fraction

        return Fraction(a) / Fraction(b)
    return a / b


def _half(y):
    if is_exact(y):
        from fractions import Fraction

        return Fraction(y) / 2
    return y / 2


def expansion_coeff(id, n, **p):
    """Coefficient c_n of the registry expansion; exact on rational parameters."""
    if id not in EXPANSION_IDS:
        raise ParameterError("unknown expansion id %r" % (id,))
    if n < 0:
        raise ParameterError("coefficient index must be >= 0, got %r" % (n,))
    if id == "n_over_u":
        q = p["q"]
        if n % 2:
            return 0 * q
        k = n // 2
        return (-1) ** k * q ** (k * (k + 1) // 2)
    if id == "u_over_n":
        q = p["q"]
        if n % 2:
            return 0 * q
        k = n // 2
        num = q ** k * (1 - q) ** (k + 1)
        den = q_pochhammer(q, q, k) * q_pochhammer(q, q, k + 1)
        return _div(num, den)
    if id == "cn_over_n":
        rho, q = p["rho"], p["q"]
        return _div(rho ** n, q_factorial(n, q))
    if id == "n_over_cn":
        rho, q = p["rho"], p["q"]
        return _div(rho ** n, q_pochhammer(rho * rho, q, n) * q_factorial(n, q))
    if id == "r_over_n":
        beta, q = p["beta"], p["q"]
        if n % 2:
            return 0 * q
        k = n // 2
        return _div(beta ** k, q_factorial(k, q) * q_pochhammer(beta * q, q, k))
    if id == "n_over_r":
        g, q = p["gamma"], p["q"]
        if n % 2:
            return 0 * q
        k = n // 2
        num = (
            (-g) ** k
            * q ** (k * (k - 1) // 2)
            * q_pochhammer(g, q, k)
            * (1 - g * q ** (2 * k))
        )
        den = (1 - g) * q_factorial(k, q) * q_pochhammer(g * g, q, 2 * k)
        return _div(num, den)
    if id == "cn_over_k":
        return beta_coeff(n, p["y"], p["rho"], p["q"])
    if id == "cn_over_u":
        return gamma_coeff(n, p["y"], p["rho"], p["q"])
    if id == "mehler_classical":
        rho = p["rho"]
        return _div(rho ** n, math.factorial(n))
    if id == "pm_q0":
        rho, y = p["rho"], p["y"]
        return rho ** n * polyfam.eval(ChebU(), n, _half(y))
    raise AssertionError


def base_density(id, params, trunc_eps=1e-14):
    p = params
    if id in ("n_over_u", "cn_over_u"):
        return fU(p["q"], trunc_eps)
    if id in ("u_over_n", "cn_over_n", "r_over_n"):
        return fN(p["q"], trunc_eps)
    if id == "n_over_cn":
        return fCN(p["y"], p["rho"], p["q"], trunc_eps)
    if id == "n_over_r":
        return fR(p["gamma"], p["q"], trunc_eps)
    if id == "cn_over_k":
        return fK(p["y"], p["rho"], p["q"], trunc_eps)
    if id == "mehler_classical":
        return fN(1.0, trunc_eps)
    if id == "pm_q0":
        return fU(0.0, trunc_eps)
    raise ParameterError("unknown expansion id %r" % (id,))


def target_density(id, params, trunc_eps=1e-14):
    p = params
    if id == "u_over_n":
        return fU(p["q"], trunc_eps)
    if id in ("n_over_u", "n_over_cn", "n_over_r"):
        return fN(p["q"], trunc_eps)
    if id in ("cn_over_n", "cn_over_k", "cn_over_u"):
        return fCN(p["y"], p["rho"], p["q"], trunc_eps)
    if id == "r_over_n":
        return fR(p["beta"], p["q"], trunc_eps)
    if id == "mehler_classical":
        return fCN(p["y"], p["rho"], 1.0, trunc_eps)
    if id == "pm_q0":
        return fCN(p["y"], p["rho"], 0.0, trunc_eps)
    raise ParameterError("unknown expansion id %r" % (id,))


class _Lazy:
    """List extended on demand by rebuilding with doubled length."""

    def __init__(self, build):
        self._build = build
        self._vals = []
        self._hi = -1

    def __getitem__(self, n):
        if n > self._hi:
            hi = max(2 * self._hi, n, 15)
            self._vals = self._build(hi)
            self._hi = hi
        return self._vals[n]


def _maxabs(a):
    return float(np.max(np.abs(a)))


def _mixed(lhs, rhs):
    """Mixed residual max |lhs - rhs| / max(1, |lhs|); both sides can be huge
    near q -> 1 where absolute comparison would just measure float granularity."""
    lhs = np.asarray(lhs, dtype=float)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))


def _terms(id, p, x):
    """Generator of (c_n a_n(x), sup-norm bound of c_n a_n on S(q)) for n = 0, 1, ...

    Bounds use |U_n| <= n+1 on [-1,1], max |H_n| = W_n / (1-q)^{n/2} on S(q),
    the V-sum bound for Rogers (a heuristic outside 0 <= q < 1, where it is
    unproven) and |k_n(u|v,r)| <= (n+1) + |r v| n + r^2 (n-1) on [-2,2].
    For q = 1 kernels the "bound" is the max of the evaluated term, giving a
    pointwise stopping rule.
    """
    q = p.get("q", 1.0)
    zero = x * 0.0
    if id == "n_over_u":
        xh = x * math.sqrt(1.0 - q) / 2.0
        U = _Lazy(lambda m: eval_all(ChebU(), m, xh))
        n = 0
        while True:
            if n % 2:
                yield zero, 0.0
            else:
                k = n // 2
                c = (-1) ** k * q ** (k * (k + 1) // 2)
                yield c * U[n], abs(c) * (n + 1)
            n += 1
    elif id == "u_over_n":
        H = _Lazy(lambda m: eval_all(QHermite(q), m, x))
        W = _Lazy(lambda m: w_growth(m, q))
        n = 0
        while True:
            if n % 2:
                yield zero, 0.0
            else:
                c = float(expansion_coeff(id, n, **p))
                k = n // 2
                yield c * H[n], abs(c) * W[n] / (1.0 - q) ** k
            n += 1
    elif id == "cn_over_n":
        H = _Lazy(lambda m: eval_all(QHermite(q), m, x))
        Hy = _Lazy(lambda m: eval_all(QHermite(q), m, p["y"]))
        W = _Lazy(lambda m: w_growth(m, q))
        pointwise = q == 1.0
        n = 0
        while True:
            c = float(expansion_coeff(id, n, **p))
            term = c * Hy[n] * H[n]
            if pointwise:
                yield term, _maxabs(term)
            else:
                yield term, abs(c * Hy[n]) * W[n] / (1.0 - q) ** (n / 2.0)
            n += 1
    elif id == "n_over_cn":
        rho = p["rho"]
        P = _Lazy(lambda m: eval_all(ASC(p["y"], rho, q), m, x))
        By = _Lazy(lambda m: eval_all(BigB(q), m, p["y"]))
        W = _Lazy(lambda m: w_growth(m, q))
        pointwise = q == 1.0
        n = 0
        while True:
            c = float(expansion_coeff(id, n, **p))
            term = c * By[n] * P[n]
            if pointwise:
                yield term, _maxabs(term)
            else:
                # |P_n| <= sum_j [n j]_q |rho|^{n-j} |B_{n-j}(y)| W_j (1-q)^{-j/2}
                pb = 0.0
                for j in range(n + 1):
                    pb += (
                        float(q_binomial(n, j, q))
                        * abs(rho) ** (n - j)
                        * abs(By[n - j])
                        * W[j]
                        / (1.0 - q) ** (j / 2.0)
                    )
                yield term, abs(c * By[n]) * pb
            n += 1
    elif id == "r_over_n":
        H = _Lazy(lambda m: eval_all(QHermite(q), m, x))
        W = _Lazy(lambda m: w_growth(m, q))
        n = 0
        while True:
            if n % 2:
                yield zero, 0.0
            else:
                c = float(expansion_coeff(id, n, **p))
                yield c * H[n], abs(c) * W[n] / (1.0 - q) ** (n / 2.0)
            n += 1
    elif id == "n_over_r":
        g = p["gamma"]
        R = _Lazy(lambda m: eval_all(Rogers(g, q), m, x))
        V = _Lazy(lambda m: v_growth(m, q, g))
        QP = _Lazy(lambda m: [q_pochhammer(q, q, i) for i in range(m + 1)])
        n = 0
        while True:
            if n % 2:
                yield zero, 0.0
            else:
                c = float(expansion_coeff(id, n, **p))
                rbound = V[n] / (QP[n] * (1.0 - q) ** (n / 2.0))
                yield c * R[n], abs(c) * abs(rbound)
            n += 1
    elif id == "cn_over_k":
        rho = p["rho"]
        s = math.sqrt(1.0 - q)
        v = p["y"] * s
        Kf = _Lazy(lambda m: eval_all(Kesten(v, rho), m, x * s))
        Hy = _Lazy(lambda m: eval_all(QHermite(q), m, p["y"]))
        n = 0
        while True:
            c = float(beta_coeff(n, p["y"], rho, q, H=Hy))
            kb = (n + 1) + abs(rho * v) * n + rho * rho * max(n - 1, 0)
            yield c * Kf[n], abs(c) * kb
            n += 1
    elif id == "cn_over_u":
        rho = p["rho"]
        xh = x * math.sqrt(1.0 - q) / 2.0
        U = _Lazy(lambda m: eval_all(ChebU(), m, xh))
        Hy = _Lazy(lambda m: eval_all(QHermite(q), m, p["y"]))
        n = 0
        while True:
            c = float(gamma_coeff(n, p["y"], rho, q, H=Hy))
            yield c * U[n], abs(c) * (n + 1)
            n += 1
    elif id == "mehler_classical":
        H = _Lazy(lambda m: eval_all(ClassicalHermite(), m, x))
        Hy = _Lazy(lambda m: eval_all(ClassicalHermite(), m, p["y"]))
        n = 0
        while True:
            c = float(expansion_coeff(id, n, **p))
            term = c * Hy[n] * H[n]
            yield term, _maxabs(term)
            n += 1
    elif id == "pm_q0":
        U = _Lazy(lambda m: eval_all(ChebU(), m, x / 2.0))
        Uy = _Lazy(lambda m: eval_all(ChebU(), m, p["y"] / 2.0))
        rho = p["rho"]
        n = 0
        while True:
            c = rho ** n * Uy[n]
            yield c * U[n], abs(c) * (n + 1)
            n += 1
    else:
        raise ParameterError("unknown expansion id %r" % (id,))


def expansion_eval(spec, x, tol=1e-9):
    """Evaluate the expansion at x; returns ExpansionResult(value, tail, n_terms).

    With spec.K set, exactly K+1 terms are summed.  Otherwise terms are added
    until two consecutive sup-norm bounds fall below tol, capped at K_CAP
    (TruncationError past the cap).
    """
    if spec.id not in EXPANSION_IDS:
        raise ParameterError("unknown expansion id %r" % (spec.id,))
    p = {k: float(v) for k, v in spec.params.items()}
    q = p.get("q", 1.0)
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if q < 1.0:
        L = support(q).radius
        if np.any(np.abs(xa) > L):
            raise ParameterError("expansion evaluated outside S(q)")
    if spec.id == "n_over_cn" and q == 1.0 and not p["rho"] ** 2 < 0.5:
        raise ParameterError(
            "reciprocal Gaussian kernel converges only for rho^2 < 1/2"
        )
    base = density_eval(base_density(spec.id, p), xa)
    gen = _terms(spec.id, p, xa)
    acc = np.zeros_like(xa)
    fixed = spec.K is not None
    if fixed and spec.K < 0:
        raise ParameterError("K must be >= 0")
    small = 0
    n = -1
    while True:
        n += 1
        term, bound = next(gen)
        acc = acc + term
        if fixed:
            if n >= spec.K:
                break
        else:
            if bound <= tol:
                small += 1
                if small >= 2 and n >= 2:
                    break
            else:
                small = 0
            if n >= K_CAP:
                raise TruncationError(
                    "expansion %r did not reach tol=%g within %d terms"
                    % (spec.id, tol, K_CAP)
                )
    tail_series = next(gen)[1] + next(gen)[1]
    value = base * acc
    tail = np.abs(base) * tail_series
    if scalar:
        return ExpansionResult(float(value[0]), float(tail[0]), n + 1)
    return ExpansionResult(value, tail, n + 1)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    check_id: str
    params: dict
    residual: float
    tolerance: float
    passed: bool


_SERIES_STOP = 1e-16
_SERIES_CAP = 1500


def _sum_series(gen, stop=_SERIES_STOP, consecutive=2, cap=_SERIES_CAP):
    acc = None
    small = 0
    for n, (term, size) in enumerate(gen):
        acc = term if acc is None else acc + term
        if size <= stop:
            small += 1
            if small >= consecutive:
                return acc
        else:
            small = 0
        if n >= cap:
            raise NonConvergenceError("identity series did not settle")
    raise NonConvergenceError("identity series generator exhausted")


def _theta_series(q, signed, weighted):
    """sum_k s^k (2k+1 if weighted else 1) q^{k(k+1)/2} with s = -1 if signed."""
    acc = 0.0
    k = 0
    while True:
        t = q ** (k * (k + 1) // 2)
        w = (2 * k + 1) if weighted else 1
        term = ((-1) ** k if signed else 1) * w * t
        acc += term
        if abs(t) * w < 1e-18 and k > 2:
            return acc
        k += 1
        if k > 4000:
            raise NonConvergenceError("theta series did not settle")


def _grid(q, fractions=(-0.93, -0.51, 0.0, 0.37, 0.85)):
    L = support(q).radius
    return L * np.asarray(fractions)


def _i1(q, eps):
    xs = _grid(q)
    lhs = _fn_over_fu(xs, q, eps)
    xh = xs * math.sqrt(1.0 - q) / 2.0
    U = _Lazy(lambda m: eval_all(ChebU(), m, xh))

    def gen():
        k = 0
        while True:
            c = (-1) ** k * q ** (k * (k + 1) // 2)
            yield c * U[2 * k], abs(c) * (2 * k + 1)
            k += 1

    rhs = _sum_series(gen())
    return _mixed(lhs, rhs)


def _i2(q, eps):
    a = q_pochhammer_inf(q, q, eps) * q_pochhammer_inf(-q, q, eps) ** 2
    b = q_pochhammer_inf(-q, q, eps) * q_pochhammer_inf(q * q, q * q, eps)
    s = _theta_series(q, signed=False, weighted=False)
    return _mixed(a, s), _mixed(a, b)


def _i3(q, eps):
    lhs = q_pochhammer_inf(q, q, eps) ** 3
    return _mixed(lhs, _theta_series(q, signed=True, weighted=True))


def _i4(q, eps):
    xs = _grid(q)
    x2s = (1.0 - q) * xs * xs
    lhs = np.exp(-_log_fac_sum(x2s, q, eps))
    H = _Lazy(lambda m: eval_all(QHermite(q), m, xs))
    W = _Lazy(lambda m: w_growth(m, q))
    qinf = q_pochhammer_inf(q, q, eps)

    def gen():
        k = 0
        qp_k = 1.0  # (q;q)_k
        qp2_k = 1.0  # (q^2;q)_k
        while True:
            coeff = q ** k * (qinf / qp_k) * (1.0 - q) ** k / qp2_k
            yield coeff * H[2 * k], abs(coeff) * W[2 * k] / (1.0 - q) ** k
            k += 1
            qp_k *= 1.0 - q ** k
            qp2_k *= 1.0 - q ** (k + 1)

    res_grid = _mixed(lhs, _sum_series(gen()))

    # x = 0: 1/((q)_inf (-q)_inf^2) = 1 + sum (-1)^k q^k (1-q)^k [2k-1]_q!! / ((q)_k (q^2;q)_k)
    lhs0 = 1.0 / (qinf * q_pochhammer_inf(-q, q, eps) ** 2)
    acc = 0.0
    k = 0
    qp_k = 1.0
    qp2_k = 1.0
    ddf = 1.0
    while True:
        term = (-1) ** k * q ** k * (1.0 - q) ** k * ddf / (qp_k * qp2_k)
        acc += term
        if abs(term) < 1e-18 and k > 2:
            break
        k += 1
        qp_k *= 1.0 - q ** k
        qp2_k *= 1.0 - q ** (k + 1)
        ddf *= float(sum(q ** i for i in range(2 * k - 1)))  # [2k-1]_q
        if k > _SERIES_CAP:
            raise NonConvergenceError("i4 x=0 series did not settle")
    res_x0 = _mixed(lhs0, acc)

    # boundary: (q)_inf^{-3} = sum q^k W_{2k} / ((q)_k (q^2;q)_k)
    lhs_e = qinf ** -3.0
    acc = 0.0
    k = 0
    qp_k = 1.0
    qp2_k = 1.0
    while True:
        term = q ** k * W[2 * k] / (qp_k * qp2_k)
        acc += term
        if abs(term) < 1e-18 and k > 2:
            break
        k += 1
        qp_k *= 1.0 - q ** k
        qp2_k *= 1.0 - q ** (k + 1)
        if k > _SERIES_CAP:
            raise NonConvergenceError("i4 boundary series did not settle")
    res_edge = _mixed(lhs_e, acc)
    return res_grid, res_x0, res_edge


def _i5(q, rho, eps):
    xs = _grid(q)
    lhs = pm_ratio(xs, xs, rho, q, eps)
    H = _Lazy(lambda m: eval_all(QHermite(q), m, xs))
    W = _Lazy(lambda m: w_growth(m, q))

    def gen():
        n = 0
        fact = 1.0  # [n]_q!
        while True:
            c = rho ** n / fact
            yield c * H[n] * H[n], abs(c) * (W[n] / (1.0 - q) ** (n / 2.0)) ** 2
            n += 1
            fact *= float(sum(q ** i for i in range(n)))

    res_grid = _mixed(lhs, _sum_series(gen()))

    # x = 0: (rho^2 q; q^2)_inf / (rho^2; q^2)_inf
    lhs0 = q_pochhammer_inf(rho * rho * q, q * q, eps) / q_pochhammer_inf(
        rho * rho, q * q, eps
    )
    # rhs = 1 + sum_k rho^{2k} prod_{j=1}^k (1-q^{2j-1})/(1-q^{2j})
    acc = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= rho * rho * (1.0 - q ** (2 * k - 1)) / (1.0 - q ** (2 * k))
        acc += term
        if abs(term) < 1e-18 and k > 2:
            break
        if k > _SERIES_CAP:
            raise NonConvergenceError("i5 x=0 series did not settle")
    res_x0 = _mixed(lhs0, acc)

    # boundary: (rho^2;q)_inf / (rho;q)_inf^4 = sum rho^n W_n^2 / (q;q)_n
    lhs_e = q_pochhammer_inf(rho * rho, q, eps) / q_pochhammer_inf(rho, q, eps) ** 4
    acc = 0.0
    n = 0
    qp = 1.0
    while True:
        term = rho ** n * float(W[n]) ** 2 / qp
        acc += term
        if abs(term) < 1e-18 and n > 2:
            break
        n += 1
        qp *= 1.0 - q ** n
        if n > _SERIES_CAP:
            raise NonConvergenceError("i5 boundary series did not settle")
    res_edge = _mixed(lhs_e, acc)
    return res_grid, res_x0, res_edge


def _i6(q, rho, eps):
    # valid for (1-q) x^2 <= 2
    xs = math.sqrt(2.0 / (1.0 - q)) * np.asarray([-0.95, -0.4, 0.0, 0.55, 0.9])
    H = _Lazy(lambda m: eval_all(QHermite(q), m, xs))
    W = _Lazy(lambda m: w_growth(m, q))

    def gen_lhs():
        n = 0
        fact = 1.0
        while True:
            c = rho ** n / fact
            yield c * H[n] * H[n], abs(c) * (W[n] / (1.0 - q) ** (n / 2.0)) ** 2
            n += 1
            fact *= float(sum(q ** i for i in range(n)))

    def gen_rhs():
        n = 0
        fact = 1.0
        rq = 1.0  # (rho q; q)_n
        while True:
            c = rho ** n / (fact * rq)
            yield c * H[2 * n], abs(c) * W[2 * n] / (1.0 - q) ** n
            n += 1
            fact *= float(sum(q ** i for i in range(n)))
            rq *= 1.0 - rho * q ** n

    lhs = (1.0 - rho) * _sum_series(gen_lhs())
    rhs = _sum_series(gen_rhs())
    return _mixed(lhs, rhs)


def _i7(q, rho, eps):
    L = support(q).radius
    res_prod = 0.0
    res_useries = 0.0
    for frac in (0.0, 0.3, 0.62):
        y = L * frac
        Hy = _Lazy(lambda m: eval_all(QHermite(q), m, y))
        s = math.sqrt(1.0 - q)
        q3inf = q_pochhammer_inf(q ** 3, q ** 3, eps)

        # E1: (q^3;q^3)_inf sum_k (1-q)^{k/2} rho^k H_k(y) eta_k / (q;q)_k with
        # eta_{-1} = 0, eta_0 = 1, eta_{k+1} = eta_k - (1-q^k) eta_{k-1}
        acc = 0.0
        eta_prev, eta = 0.0, 1.0
        qp = 1.0
        small = 0
        k = 0
        while True:
            term = (s * rho) ** k * Hy[k] * eta / qp
            acc += term
            if abs(term) < 1e-17 * max(1.0, abs(acc)):
                small += 1
                if small >= 4:
                    break
            else:
                small = 0
            eta_prev, eta = eta, eta - (1.0 - q ** k) * eta_prev
            k += 1
            qp *= 1.0 - q ** k
            if k > _SERIES_CAP:
                raise NonConvergenceError("i7 eta series did not settle")
        e1 = q3inf * acc

        # E2: (rho^2;q)_inf (q^3;q^3)_inf / prod_k (1 - rho^2 q^{2k} + rho^4 q^{4k}
        #      - sqrt(1-q) rho y q^k (1 + rho^2 q^{2k}) + (1-q) rho^2 y^2 q^{2k})
        Kn = max(truncation_order(10.0 * abs(rho), q, eps), 1)
        prod = 1.0
        pk = 1.0
        for _ in range(Kn):
            r2 = rho * rho * pk * pk
            prod *= (
                1.0
                - r2
                + r2 * r2
                - s * rho * y * pk * (1.0 + r2)
                + (1.0 - q) * rho * rho * y * y * pk * pk
            )
            pk *= q
        e2 = q_pochhammer_inf(rho * rho, q, eps) * q3inf / prod

        # E3: sum_m (-1)^m (gamma_{3m} + gamma_{3m+1})
        acc = 0.0
        m = 0
        small = 0
        while True:
            g0 = float(gamma_coeff(3 * m, y, rho, q, H=Hy))
            g1 = float(gamma_coeff(3 * m + 1, y, rho, q, H=Hy))
            acc += (-1) ** m * (g0 + g1)
            if abs(g0) + abs(g1) < 1e-17:
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
            m += 1
            if m > _SERIES_CAP:
                raise NonConvergenceError("i7 gamma series did not settle")
        e3 = acc

        res_prod = max(res_prod, _mixed(e1, e2))
        res_useries = max(res_useries, _mixed(e1, e3))
    return res_prod, res_useries


def _i7_cube(q, eps):
    """(q;q)_inf prod_{k>=1} (1 + q^k + q^{2k}) = (q^3;q^3)_inf."""
    K = truncation_order(2.0, q, eps)
    prod = 1.0
    pk = 1.0
    for _ in range(1, K + 1):
        pk *= q
        prod *= 1.0 + pk + pk * pk
    lhs = q_pochhammer_inf(q, q, eps) * prod
    return _mixed(lhs, q_pochhammer_inf(q ** 3, q ** 3, eps))


def _i8(q, rho, eps):
    L = support(q).radius
    xs = L * np.asarray([-0.8, -0.35, 0.05, 0.4, 0.75])
    worst = 0.0
    for yf in (-0.7, -0.2, 0.1, 0.5, 0.8):
        y = L * yf
        lhs = pm_ratio(xs, y, rho, q, eps)
        spec = ExpansionSpec("n_over_cn", {"q": q, "rho": rho, "y": y})
        # series part of fN over fCN = (value / base)
        base = density_eval(base_density("n_over_cn", {"q": q, "rho": rho, "y": y}), xs)
        res = expansion_eval(spec, xs, tol=1e-13)
        series = res.value / base
        worst = max(worst, _maxabs(lhs * series - 1.0))
    return worst


def identity_suite(q_grid=(0.2, 0.5, 0.8), rho_grid=(0.3, 0.6), tol=1e-10, eps=1e-15):
    """Run the cross-check identity battery; returns a list of IdentityReport.

    Residuals are mixed absolute/relative: |lhs - rhs| / max(1, |lhs|).
    """
    reports = []

    def add(check_id, params, residual):
        reports.append(
            IdentityReport(check_id, params, float(residual), tol, residual <= tol)
        )

    for q in q_grid:
        add("i1:grid", {"q": q}, _i1(q, eps))
        r_series, r_prods = _i2(q, eps)
        add("i2:series", {"q": q}, r_series)
        add("i2:products", {"q": q}, r_prods)
        add("i3:series", {"q": q}, _i3(q, eps))
        g, x0, edge = _i4(q, eps)
        add("i4:grid", {"q": q}, g)
        add("i4:x0", {"q": q}, x0)
        add("i4:edge", {"q": q}, edge)
        add("i7:cube", {"q": q}, _i7_cube(q, eps))
        for rho in rho_grid:
            g, x0, edge = _i5(q, rho, eps)
            add("i5:grid", {"q": q, "rho": rho}, g)
            add("i5:x0", {"q": q, "rho": rho}, x0)
            add("i5:edge", {"q": q, "rho": rho}, edge)
            add("i6:grid", {"q": q, "rho": rho}, _i6(q, rho, eps))
            rp, ru = _i7(q, rho, eps)
            add("i7:product", {"q": q, "rho": rho}, rp)
            add("i7:u-series", {"q": q, "rho": rho}, ru)
            add("i8:grid", {"q": q, "rho": rho}, _i8(q, rho, eps))
    return reports
