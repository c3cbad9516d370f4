"""The representation ring: direct sum of local centers with the q-weighted
product z_lambda * z_mu = sum_nu w(nu; lambda, mu) z_nu, the shift
endomorphism, and states induced by character tables.

The weight is
    w(nu; lambda, mu) = c^nu_{lambda,mu} q^{|lambda||J| - |mu||I|} d_q(lambda) d_q(mu) / d_q(nu),
i.e. the value of the block state chi_{z_nu} on z_lambda z_mu.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping

from .errors import DomainError
from .partitions import Interval, Signature, lr_coefficient, lr_product, quantum_dimension
from .qpoly import RationalFunction

__all__ = [
    "CenterVector",
    "RingElement",
    "structure_weight",
    "numeric_structure_weight",
    "ring_multiply",
    "shift_raise",
    "canonicalize",
    "state_apply",
    "joint_interval",
]


def _is_formal(q) -> bool:
    return q is None or q == "formal"


def _weight_exponent(lam: Signature, mu: Signature) -> int:
    return lam.weight * len(mu) - mu.weight * len(lam)


@lru_cache(maxsize=None)
def _formal_weight(nu: tuple, lam: tuple, mu: tuple, c: int) -> RationalFunction:
    L, M, N = Signature.of(lam), Signature.of(mu), Signature.of(nu)
    return (
        c
        * RationalFunction.q_power(_weight_exponent(L, M))
        * quantum_dimension(L)
        * quantum_dimension(M)
        / quantum_dimension(N)
    )


def _check_sizes(nu: Signature, lam: Signature, mu: Signature):
    if len(lam) + len(mu) != len(nu):
        raise ValueError(
            f"weight needs |I| + |J| = |I v J|, got {len(lam)} + {len(mu)} != {len(nu)}"
        )


def structure_weight(nu: Signature, lam: Signature, mu: Signature, q=None):
    """Exact weight ``w(nu; lam, mu)``; a RationalFunction for formal q."""
    _check_sizes(nu, lam, mu)
    c = lr_coefficient(lam, mu, nu)
    if _is_formal(q):
        if not c:
            return RationalFunction(0)
        return _formal_weight(nu.parts, lam.parts, mu.parts, c)
    if c == 0:
        return 0 * q
    return numeric_structure_weight(nu, lam, mu, q, c)


def numeric_structure_weight(nu: Signature, lam: Signature, mu: Signature, q, c=None):
    """Weight at a numeric q; pass ``c`` when the LR coefficient is already known."""
    if c is None:
        _check_sizes(nu, lam, mu)
        c = lr_coefficient(lam, mu, nu)
    if not c:
        return 0 * q
    if isinstance(q, int):  # keep integer q exact under negative powers
        q = Fraction(q)
    return (
        c
        * q ** _weight_exponent(lam, mu)
        * quantum_dimension(lam, q)
        * quantum_dimension(mu, q)
        / quantum_dimension(nu, q)
    )


def joint_interval(I: Interval, J: Interval) -> Interval:
    """I v J: I followed by a copy of J placed directly to its right."""
    if I.is_empty():
        return J
    if J.is_empty():
        return I
    return Interval(I.lo, I.hi + len(J))


# ---------------------------------------------------------------------------
# Ring elements


def _coeff_to_json(c):
    if isinstance(c, RationalFunction):
        return c.to_json()
    if isinstance(c, Fraction):
        return {"num": [c.numerator], "den": [c.denominator]}
    return c


def _coeff_from_json(v):
    if isinstance(v, Mapping):
        return RationalFunction.from_json(v)
    return v


def _nonzero(c) -> bool:
    if isinstance(c, RationalFunction):
        return not c.is_zero()
    return c != 0


@dataclass(frozen=True)
class CenterVector:
    """Finite combination sum_lambda coeffs[lambda] z_lambda in the center of M_I."""

    interval: Interval
    coeffs: dict = field(default_factory=dict)  # Signature -> scalar

    def __post_init__(self):
        kept = {}
        for sig, c in self.coeffs.items():
            if not isinstance(sig, Signature):
                sig = Signature(self.interval, tuple(sig))
            if sig.interval != self.interval:
                raise DomainError(f"signature {sig} does not live on {self.interval}")
            if _nonzero(c):
                kept[sig] = c
        object.__setattr__(self, "coeffs", kept)

    @classmethod
    def basis(cls, lam: Signature, coeff=1) -> "CenterVector":
        return cls(lam.interval, {lam: coeff})

    def relabel(self, interval: Interval) -> "CenterVector":
        if len(interval) != len(self.interval):
            raise ValueError("relabeling must preserve the interval size")
        return CenterVector(interval, {s.relabel(interval): c for s, c in self.coeffs.items()})

    def __add__(self, other: "CenterVector") -> "CenterVector":
        if other.interval != self.interval:
            raise DomainError("cannot add center vectors on different intervals")
        out = dict(self.coeffs)
        for s, c in other.coeffs.items():
            out[s] = out[s] + c if s in out else c
        return CenterVector(self.interval, out)

    def scaled(self, k) -> "CenterVector":
        return CenterVector(self.interval, {s: k * c for s, c in self.coeffs.items()})

    def to_json(self) -> dict:
        items = sorted(self.coeffs.items(), key=lambda kv: kv[0].sort_key())
        return {
            "interval": self.interval.to_json(),
            "coeffs": [{"parts": list(s.parts), "value": _coeff_to_json(c)} for s, c in items],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CenterVector":
        interval = Interval.from_json(data["interval"])
        return cls(
            interval,
            {
                Signature(interval, tuple(e["parts"])): _coeff_from_json(e["value"])
                for e in data["coeffs"]
            },
        )


@dataclass(frozen=True)
class RingElement:
    """Element of the algebraic direct sum of local centers, one component per interval."""

    components: dict = field(default_factory=dict)  # Interval -> CenterVector

    def __post_init__(self):
        kept = {}
        for I, v in self.components.items():
            if v.interval != I:
                raise DomainError(f"component keyed by {I} lives on {v.interval}")
            if v.coeffs:
                kept[I] = v
        object.__setattr__(self, "components", kept)

    @classmethod
    def unit(cls) -> "RingElement":
        """1_emptyset."""
        return cls.basis(Signature.empty())

    @classmethod
    def basis(cls, lam: Signature, coeff=1) -> "RingElement":
        return cls({lam.interval: CenterVector.basis(lam, coeff)})

    @classmethod
    def from_vectors(cls, vectors: Iterable[CenterVector]) -> "RingElement":
        comps: dict = {}
        for v in vectors:
            comps[v.interval] = comps[v.interval] + v if v.interval in comps else v
        return cls(comps)

    def __add__(self, other: "RingElement") -> "RingElement":
        return RingElement.from_vectors(list(self.components.values()) + list(other.components.values()))

    def scaled(self, k) -> "RingElement":
        return RingElement({I: v.scaled(k) for I, v in self.components.items()})

    def terms(self):
        """Iterate ``(signature, coefficient)`` over all components."""
        for v in self.components.values():
            yield from v.coeffs.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.components == other.components

    def to_json(self) -> dict:
        comps = sorted(self.components.values(), key=lambda v: (len(v.interval), v.interval.lo))
        return {"components": [v.to_json() for v in comps]}

    @classmethod
    def from_json(cls, data: Mapping) -> "RingElement":
        if "components" not in data:
            # a bare center vector is accepted as a one-component element
            return cls.from_vectors([CenterVector.from_json(data)])
        return cls.from_vectors(CenterVector.from_json(c) for c in data["components"])


def _basis_product(lam: Signature, mu: Signature, q) -> CenterVector:
    I = lam.interval
    IJ = joint_interval(I, mu.interval)
    if I.is_empty():
        return CenterVector.basis(mu.relabel(IJ), RationalFunction(1) if _is_formal(q) else 1)
    out = {}
    for nu, c in lr_product(lam, mu, IJ).items():
        if _is_formal(q):
            out[nu] = _formal_weight(nu.parts, lam.parts, mu.parts, c)
        else:
            out[nu] = numeric_structure_weight(nu, lam, mu, q, c)
    return CenterVector(IJ, out)


def ring_multiply(a: RingElement, b: RingElement, q=None) -> RingElement:
    """Bilinear extension of the basis product; formal q by default."""
    if not _is_formal(q) and not (isinstance(q, Number) and q > 0):
        raise DomainError(f"q must be positive or 'formal', got {q!r}")
    vectors = []
    for lam, x in a.terms():
        for mu, y in b.terms():
            vectors.append(_basis_product(lam, mu, q).scaled(x * y))
    return RingElement.from_vectors(vectors)


def shift_raise(a: RingElement, k: int = 1) -> RingElement:
    """Move every component from I to I + k."""
    return RingElement.from_vectors(v.relabel(I.shift(k)) for I, v in a.components.items())


def canonicalize(a: RingElement) -> RingElement:
    """Representative of the shift class: every component moved onto ``[1..n]``."""
    return RingElement.from_vectors(
        v.relabel(Interval.base(len(I))) for I, v in a.components.items()
    )


def _scalar(c, q):
    if isinstance(c, RationalFunction):
        return float(c(Fraction(q))) if isinstance(q, float) else c(q)
    return c


def state_apply(tables, a: RingElement):
    """omega_chi(a) = sum over components of sum_lambda coeff * chi(z_lambda).

    A component on I uses the table on exactly I; a table on another interval
    of the same size is accepted only at q = 1, where characters are shift
    invariant.
    """
    tables = list(tables)
    total = 0
    for I, v in a.components.items():
        if I.is_empty():
            total = total + sum(_scalar(c, 1) for c in v.coeffs.values())
            continue
        table = next((t for t in tables if t.interval == I), None)
        if table is None:
            table = next((t for t in tables if len(t.interval) == len(I) and t.q == 1), None)
        if table is None:
            raise DomainError(f"no character table available for component on {I}")
        for sig, c in v.coeffs.items():
            total = total + _scalar(c, table.q) * table.value(sig.parts)
    return total
