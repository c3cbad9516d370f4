"""Voiculescu functions Phi_omega, the Omega_q membership test, and character
tables chi_omega^(q)(z_lambda) extracted from the generating-function identity

    prod_{i in I} Phi(q^{-2(i-1)} z_i) / Phi(q^{-2(i-1)})
        = sum_lambda chi(z_lambda)/d_q(lambda) * s_lambda(q^{n-1} z_{i_1}, ..., q^{1-n} z_{i_n}).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping

from . import config
from .errors import DomainError, MembershipError
from .partitions import (
    Interval,
    MonomialSeries,
    Signature,
    enumerate_signatures,
    lr_product,
    quantum_dimension,
    vandermonde,
)

__all__ = [
    "VoiculescuParams",
    "LaurentSeries",
    "CharacterTable",
    "MembershipReport",
    "MultiplicativityReport",
    "phi_eval",
    "phi_series",
    "validate_omega_q",
    "character_table",
    "multiplicativity_residual",
]

_KEYS = ("alpha_plus", "beta_plus", "alpha_minus", "beta_minus", "gamma_plus", "gamma_minus")


def _check_list(name: str, values) -> tuple:
    vals = tuple(float(v) for v in values)
    if any(not math.isfinite(v) or v < 0 for v in vals):
        raise DomainError(f"{name} entries must be finite and nonnegative: {vals}")
    if any(a < b for a, b in zip(vals, vals[1:])):
        raise DomainError(f"{name} must be nonincreasing: {vals}")
    return tuple(v for v in vals if v > 0)


@dataclass(frozen=True)
class VoiculescuParams:
    """omega = (alpha+, beta+, alpha-, beta-, gamma+, gamma-) with finite lists.

    Zero entries are dropped on construction, so ``alpha_plus=(0.0,)`` and
    ``alpha_plus=()`` denote the same parameter.
    """

    alpha_plus: tuple = ()
    beta_plus: tuple = ()
    alpha_minus: tuple = ()
    beta_minus: tuple = ()
    gamma_plus: float = 0.0
    gamma_minus: float = 0.0

    def __post_init__(self):
        for name in _KEYS[:4]:
            object.__setattr__(self, name, _check_list(name, getattr(self, name)))
        for name in _KEYS[4:]:
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")
            object.__setattr__(self, name, v)
        if any(b > 1 + config.BETA_SUM_TOL for b in self.beta_plus + self.beta_minus):
            raise DomainError("beta entries must not exceed 1")
        if self.beta_sum > 1 + config.BETA_SUM_TOL:
            raise DomainError(f"beta+_1 + beta-_1 = {self.beta_sum} exceeds 1")

    @property
    def beta_sum(self) -> float:
        b1 = self.beta_plus[0] if self.beta_plus else 0.0
        b2 = self.beta_minus[0] if self.beta_minus else 0.0
        return b1 + b2

    def is_one_sided(self) -> bool:
        return not self.alpha_minus and not self.beta_minus and self.gamma_minus == 0

    def is_zero(self) -> bool:
        return self.is_one_sided() and not self.alpha_plus and not self.beta_plus and not self.gamma_plus

    def mirrored(self) -> "VoiculescuParams":
        """Parameters of z -> Phi(1/z)."""
        return VoiculescuParams(
            self.alpha_minus, self.beta_minus, self.alpha_plus, self.beta_plus,
            self.gamma_minus, self.gamma_plus,
        )

    def to_json(self) -> dict:
        return {
            "alpha_plus": list(self.alpha_plus),
            "beta_plus": list(self.beta_plus),
            "alpha_minus": list(self.alpha_minus),
            "beta_minus": list(self.beta_minus),
            "gamma_plus": self.gamma_plus,
            "gamma_minus": self.gamma_minus,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "VoiculescuParams":
        unknown = set(data) - set(_KEYS)
        if unknown:
            raise DomainError(f"unknown Voiculescu parameter keys: {sorted(unknown)}")
        kwargs = {}
        for k in _KEYS[:4]:
            if k in data:
                kwargs[k] = tuple(data[k])
        for k in _KEYS[4:]:
            if k in data:
                kwargs[k] = data[k]
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# Phi_omega


def _factors(omega: VoiculescuParams, z: complex) -> list:
    """Individual factors of Phi(z) (exponential first)."""
    out = [cmath.exp(omega.gamma_plus * (z - 1) + omega.gamma_minus * (1 / z - 1))]
    for b in omega.beta_plus:
        out.append(1 + b * (z - 1))
    for b in omega.beta_minus:
        out.append(1 + b * (1 / z - 1))
    for a in omega.alpha_plus:
        den = 1 - a * (z - 1)
        if abs(den) < config.POLE_TOL:
            raise DomainError(f"z={z} is at the pole 1 + 1/{a}")
        out.append(1 / den)
    for a in omega.alpha_minus:
        den = 1 - a * (1 / z - 1)
        if abs(den) < config.POLE_TOL:
            raise DomainError(f"1/z={1 / z} is at the pole 1 + 1/{a}")
        out.append(1 / den)
    return out


def phi_eval(omega: VoiculescuParams, z) -> complex:
    """Pointwise value of Phi_omega(z)."""
    z = complex(z)
    if z == 0:
        raise DomainError("Phi_omega is not defined at z = 0")
    value = 1 + 0j
    for f in _factors(omega, z):
        value *= f
    return value


def _phi_real(omega: VoiculescuParams, x: float) -> float:
    """Phi at a positive real point, as a float."""
    return phi_eval(omega, x).real


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated Laurent series ``sum_k coefficients[k] z^k``, ``-neg_cut <= k <= pos_cut``."""

    coefficients: dict
    pos_cut: int
    neg_cut: int = 0

    def __post_init__(self):
        kept = {
            int(k): v for k, v in self.coefficients.items()
            if -self.neg_cut <= k <= self.pos_cut and v != 0
        }
        object.__setattr__(self, "coefficients", kept)

    def __getitem__(self, k: int):
        return self.coefficients.get(k, 0.0)

    def evaluate(self, z) -> complex:
        return sum(c * z**k for k, c in self.coefficients.items())

    def scaled(self, c: float) -> "LaurentSeries":
        """Series of z -> f(c z)."""
        return LaurentSeries(
            {k: v * c**k for k, v in self.coefficients.items()}, self.pos_cut, self.neg_cut
        )


def _one_sided_taylor(gamma: float, betas, alphas, degree: int) -> list:
    """Taylor coefficients 0..degree of e^{gamma(z-1)} prod(1+b(z-1)) / prod(1-a(z-1))."""
    n = degree + 1
    coeffs = [0.0] * n
    term = math.exp(-gamma)
    for k in range(n):
        coeffs[k] = term
        term *= gamma / (k + 1)

    def mul(a, b):
        out = [0.0] * n
        for i, x in enumerate(a):
            if x:
                for j in range(n - i):
                    out[i + j] += x * b[j]
        return out

    for b in betas:
        factor = [0.0] * n
        factor[0] = 1 - b
        if n > 1:
            factor[1] = b
        coeffs = mul(coeffs, factor)
    for a in alphas:
        r = a / (1 + a)
        factor = [(1 / (1 + a)) * r**k for k in range(n)]
        coeffs = mul(coeffs, factor)
    return coeffs


def phi_series(
    omega: VoiculescuParams, pos_cut: int, neg_cut: int = 0, pad: int = 80
) -> LaurentSeries:
    """Laurent coefficients of Phi_omega with exponents in ``[-neg_cut, pos_cut]``.

    Phi is a product P(z) N(1/z) of two power series.  Each Laurent
    coefficient is an infinite convolution sum_m P[k+m] N[m]; it is truncated
    after ``pad`` extra terms, which is exact for one-sided omega.
    """
    if pos_cut < 0 or neg_cut < 0:
        raise ValueError("cuts must be nonnegative")
    one_sided_neg = not omega.alpha_minus and not omega.beta_minus and omega.gamma_minus == 0
    extra = 0 if one_sided_neg else pad
    P = _one_sided_taylor(omega.gamma_plus, omega.beta_plus, omega.alpha_plus, pos_cut + extra)
    N = _one_sided_taylor(omega.gamma_minus, omega.beta_minus, omega.alpha_minus, neg_cut + extra)
    coeffs = {}
    for k in range(-neg_cut, pos_cut + 1):
        total = 0.0
        for m in range(max(0, -k), len(N)):
            if k + m >= len(P):
                break
            total += P[k + m] * N[m]
        coeffs[k] = total
    return LaurentSeries(coeffs, pos_cut, neg_cut)


# ---------------------------------------------------------------------------
# Omega_q membership


@dataclass(frozen=True)
class MembershipReport:
    verdict: str  # "member" | "non-member" | "undecided"
    q: float
    reasons: tuple = ()

    @property
    def ok(self) -> bool:
        return self.verdict == "member"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "q": self.q, "reasons": list(self.reasons)}


def validate_omega_q(omega: VoiculescuParams, q: float) -> MembershipReport:
    """Decide whether omega lies in Omega_q by a sufficient criterion.

    For q = 1 every omega qualifies.  For q < 1 the points q^{-2i} run off to
    infinity, so any alpha+ pole 1 + 1/alpha+ is eventually passed and the
    power series stops converging there: alpha+ must be empty.  Every
    remaining factor is positive on [1, inf), which is checked numerically on
    the first sample points as well.
    """
    q = float(q)
    if not (0 < q <= 1):
        raise DomainError(f"q must lie in (0, 1], got {q}")
    reasons = []
    if omega.beta_sum > 1:
        reasons.append(
            f"beta+_1 + beta-_1 = {omega.beta_sum!r} exceeds 1 by less than the tolerance"
        )
        return MembershipReport("undecided", q, tuple(reasons))
    if q == 1:
        return MembershipReport("member", q, ("q = 1: every omega in Omega qualifies",))
    if omega.alpha_plus:
        pole = 1 + 1 / omega.alpha_plus[0]
        i = math.ceil(math.log(pole) / (-2 * math.log(q)))
        reasons.append(
            f"alpha+ nonempty: pole at z={pole:.6g} is exceeded by q^(-2i) from i={i} on, "
            "so the expansion does not converge at every q^(-2i)"
        )
        return MembershipReport("non-member", q, tuple(reasons))
    for i in range(config.OMEGA_Q_MAX_INDEX + 1):
        log_z = -2 * i * math.log(q)
        if log_z > 700:  # exp overflows; signs of the factors below are what matter
            log_z = 700.0
        z = math.exp(log_z)
        signs_ok = all(1 + b * (z - 1) > 0 for b in omega.beta_plus) and all(
            1 + b * (1 / z - 1) > 0 for b in omega.beta_minus
        ) and all(1 - a * (1 / z - 1) > 0 for a in omega.alpha_minus)
        if not signs_ok:
            reasons.append(f"Phi(q^(-2*{i})) is not positive")
            return MembershipReport("non-member", q, tuple(reasons))
    reasons.append(
        "alpha+ empty: Phi is entire in z away from 0; every factor is positive on [1, inf) "
        f"(sampled q^(-2i), i <= {config.OMEGA_Q_MAX_INDEX}; large-z sign fixed by "
        "e^(gamma+ z) prod(1 + beta+(z-1)) > 0)"
    )
    return MembershipReport("member", q, tuple(reasons))


# ---------------------------------------------------------------------------
# Character tables


@dataclass(frozen=True)
class CharacterTable:
    """Values chi_omega^(q)(z_lambda) for all stored lambda on one interval."""

    q: float
    omega: VoiculescuParams
    interval: Interval
    weight_cut: int
    values: dict = field(default_factory=dict)  # parts tuple -> float
    neg_depth: int = 0

    @property
    def mass(self) -> float:
        return math.fsum(self.values.values())

    @property
    def tail(self) -> float:
        """Probability left outside the table, ``max(0, 1 - mass)``."""
        return max(0.0, 1.0 - self.mass)

    def __getitem__(self, lam) -> float:
        return self.value(lam)

    def value(self, lam) -> float:
        if isinstance(lam, Signature):
            if lam.interval != self.interval:
                raise DomainError(f"signature on {lam.interval}, table on {self.interval}")
            lam = lam.parts
        return self.values.get(tuple(lam), 0.0)

    def signatures(self) -> list[Signature]:
        sigs = [Signature(self.interval, p) for p in self.values]
        sigs.sort(key=Signature.sort_key)
        return sigs

    def items(self):
        for s in self.signatures():
            yield s, self.values[s.parts]

    def with_value(self, lam, value: float) -> "CharacterTable":
        """Copy with one entry replaced (used for negative controls)."""
        parts = lam.parts if isinstance(lam, Signature) else tuple(lam)
        vals = dict(self.values)
        vals[parts] = float(value)
        return CharacterTable(self.q, self.omega, self.interval, self.weight_cut, vals, self.neg_depth)

    def to_json(self) -> dict:
        data = {
            "q": self.q,
            "omega": self.omega.to_json(),
            "interval": self.interval.to_json(),
            "cut": self.weight_cut,
            "mass": self.mass,
            "values": [{"parts": list(s.parts), "value": v} for s, v in self.items()],
        }
        if self.neg_depth:
            data["neg_depth"] = self.neg_depth
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "CharacterTable":
        return cls(
            float(data["q"]),
            VoiculescuParams.from_json(data["omega"]),
            Interval.from_json(data["interval"]),
            int(data["cut"]),
            {tuple(e["parts"]): float(e["value"]) for e in data["values"]},
            int(data.get("neg_depth", 0)),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, CharacterTable):
            return NotImplemented
        return (
            self.q == other.q and self.omega == other.omega and self.interval == other.interval
            and self.weight_cut == other.weight_cut and self.values == other.values
            and self.neg_depth == other.neg_depth
        )


def _site_series(omega, q, i, j, n, lo_exp, hi_exp, pad) -> dict:
    """Coefficients of w -> Phi(c w) / Phi(c0) for site i (the j-th of n)."""
    c0 = q ** (-2 * (i - 1))
    c = c0 * q ** (-(n + 1 - 2 * j))
    norm = _phi_real(omega, c0)
    if not norm > 0:
        raise MembershipError(f"Phi(q^(-2({i}-1))) = {norm} is not positive")
    series = phi_series(omega, max(hi_exp, 0), max(-lo_exp, 0), pad)
    return {k: series[k] * c**k / norm for k in range(lo_exp, hi_exp + 1)}


def character_table(
    omega: VoiculescuParams,
    q: float,
    interval: Interval,
    weight_cut: int,
    neg_depth: int | None = None,
    pad: int = 80,
) -> CharacterTable:
    """Character values for all signatures with ``0 <= |lambda| <= weight_cut``.

    Per site the normalized factor is expanded; the substitution
    z_{i_j} = q^{-(n+1-2j)} w_j turns the right-hand side into
    sum chi/d_q * s_lambda(w).  The product of the site series is a
    :class:`MonomialSeries` in w; multiplying by the alternant a_delta and
    reading the coefficient at lambda + delta gives chi/d_q.

    Two-sided omega requires ``neg_depth``: signatures then have parts down to
    ``-neg_depth``, weights down to ``-neg_depth * n``, and site series are
    truncated at w^{-neg_depth - n + 1}.  Values near that boundary carry
    truncation error recorded only through ``mass``.
    """
    if weight_cut < 0:
        raise DomainError("weight_cut must be nonnegative")
    report = validate_omega_q(omega, q)
    if not report.ok:
        raise MembershipError(f"omega not accepted for q={q}: {'; '.join(report.reasons)}")
    q = float(q)
    if not omega.is_one_sided() and neg_depth is None:
        raise DomainError("two-sided omega needs an explicit neg_depth truncation")
    depth = int(neg_depth or 0)
    if depth < 0:
        raise DomainError("neg_depth must be nonnegative")
    n = len(interval)
    if n == 0:
        return CharacterTable(q, omega, interval, weight_cut, {(): 1.0}, depth)

    if depth == 0:
        bounds = {"min_exp": (0,) * n, "max_degree": weight_cut}
        lo_exp, hi_exp = 0, weight_cut
        sigs = enumerate_signatures(interval, 0, weight_cut, weight_cut)
    else:
        span = weight_cut + depth * (n - 1)
        lo_exp, hi_exp = -depth - (n - 1), span + (n - 1)
        bounds = {"min_exp": (lo_exp,) * n, "max_exp": (hi_exp,) * n}
        sigs = [
            s for s in enumerate_signatures(interval, -depth, span, weight_cut)
            if s.weight >= -depth * n
        ]

    F = MonomialSeries.constant(1.0, n, **bounds)
    for j, i in enumerate(interval, start=1):
        coeffs = _site_series(omega, q, i, j, n, lo_exp, hi_exp, pad)
        F = F * MonomialSeries.univariate(coeffs, j - 1, n, **bounds)
    # read only the coefficients we need rather than forming F * a_delta
    alt = vandermonde(n).terms
    delta = tuple(range(n - 1, -1, -1))
    values = {}
    for lam in sigs:
        target = tuple(p + d for p, d in zip(lam.parts, delta))
        b = 0.0
        for e, sign in alt.items():
            b += sign * F.coefficient(tuple(t - k for t, k in zip(target, e)))
        values[lam.parts] = b * quantum_dimension(lam, q)
    return CharacterTable(q, omega, interval, weight_cut, values, depth)


# ---------------------------------------------------------------------------
# Multiplicativity


@dataclass(frozen=True)
class MultiplicativityReport:
    residual: float
    tail_bound: float
    argmax: tuple | None = None  # (lambda parts, mu parts)
    pairs: int = 0

    @property
    def ok(self) -> bool:
        return self.residual <= self.tail_bound + config.MULT_TOL

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "tail_bound": self.tail_bound,
            "argmax": None if self.argmax is None else [list(self.argmax[0]), list(self.argmax[1])],
            "pairs": self.pairs,
            "ok": self.ok,
        }


def multiplicativity_residual(
    table_I: CharacterTable, table_J: CharacterTable, table_IJ: CharacterTable
) -> MultiplicativityReport:
    """max over stored (lambda, mu) of |sum_nu chi(z_nu) w(nu; lambda, mu) - chi(z_lambda) chi(z_mu)|.

    Signatures nu missing from ``table_IJ`` count as zero, so pairs whose
    products fall beyond the joint cut contribute at most the joint tail,
    reported as ``tail_bound``.
    """
    from .repring import numeric_structure_weight  # repring consumes this module's tables

    tabs = (table_I, table_J, table_IJ)
    if len({t.q for t in tabs}) != 1 or len({t.omega for t in tabs}) != 1:
        raise DomainError("tables must share q and omega")
    I, J, IJ = table_I.interval, table_J.interval, table_IJ.interval
    try:
        joined = I.join(J)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    if joined != IJ:
        raise DomainError(f"joint table is on {IJ}, expected {joined}")
    q = table_IJ.q
    worst, arg, count = 0.0, None, 0
    for lam, a in table_I.items():
        for mu, b in table_J.items():
            lhs = 0.0
            for nu, c in lr_product(lam, mu, IJ).items():
                v = table_IJ.values.get(nu.parts)
                if v:
                    lhs += v * numeric_structure_weight(nu, lam, mu, q, c)
            r = abs(lhs - a * b)
            count += 1
            if arg is None or r > worst:
                worst, arg = r, (lam.parts, mu.parts)
    return MultiplicativityReport(worst, table_IJ.tail, arg, count)
