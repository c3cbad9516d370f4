"""Signatures, Schur (Laurent) polynomials, Littlewood-Richardson coefficients
and principal specializations.

Everything here is exact: integer/`Fraction` arithmetic for evaluations and
:class:`~qchar.qpoly.RationalFunction` for formal quantum dimensions.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping, Sequence

from .errors import DomainError
from .qpoly import RationalFunction

__all__ = [
    "Interval",
    "Signature",
    "MonomialSeries",
    "RationalFunction",
    "enumerate_signatures",
    "schur_expand",
    "schur_eval",
    "quantum_dimension",
    "lr_coefficient",
    "lr_coefficient_bruteforce",
    "lr_product",
    "branching_residual",
    "vandermonde",
]


@dataclass(frozen=True, order=True)
class Interval:
    """Finite integer interval ``{lo, ..., hi}``; every empty interval is ``Interval(1, 0)``."""

    lo: int = 1
    hi: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))
        if self.hi < self.lo:
            object.__setattr__(self, "lo", 1)
            object.__setattr__(self, "hi", 0)

    @classmethod
    def empty(cls) -> "Interval":
        return cls(1, 0)

    @classmethod
    def base(cls, n: int) -> "Interval":
        """The interval ``[1..n]`` (empty for n = 0)."""
        return cls(1, n)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse ``"a..b"`` (inclusive) or a bare integer ``"a"``."""
        text = text.strip()
        if not text:
            return cls.empty()
        if ".." in text:
            lo, hi = text.split("..", 1)
            return cls(int(lo), int(hi))
        k = int(text)
        return cls(k, k)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def __len__(self) -> int:
        return self.size

    def is_empty(self) -> bool:
        return self.size == 0

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, i) -> bool:
        return self.lo <= i <= self.hi

    def shift(self, k: int) -> "Interval":
        if self.is_empty():
            return self
        return Interval(self.lo + k, self.hi + k)

    def join(self, other: "Interval") -> "Interval":
        """Disjoint union of two adjacent intervals, ``self`` on the left."""
        if self.is_empty():
            return other
        if other.is_empty():
            return self
        if self.hi + 1 != other.lo:
            raise ValueError(f"intervals {self} and {other} are not adjacent")
        return Interval(self.lo, other.hi)

    def to_json(self) -> list:
        return [self.lo, self.hi]

    @classmethod
    def from_json(cls, data) -> "Interval":
        lo, hi = data
        return cls(lo, hi)

    def __str__(self) -> str:
        return "[]" if self.is_empty() else f"[{self.lo}..{self.hi}]"


@dataclass(frozen=True)
class Signature:
    """Nonincreasing integer tuple attached to an interval (a highest weight of U(I))."""

    interval: Interval
    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if len(parts) != len(self.interval):
            raise ValueError(
                f"signature {parts} has {len(parts)} parts but interval {self.interval} "
                f"has size {len(self.interval)}"
            )
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"signature parts {parts} are not nonincreasing")

    @classmethod
    def of(cls, parts: Iterable[int], lo: int = 1) -> "Signature":
        parts = tuple(parts)
        return cls(Interval(lo, lo + len(parts) - 1), parts)

    @classmethod
    def empty(cls) -> "Signature":
        return cls(Interval.empty(), ())

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def is_partition(self) -> bool:
        return not self.parts or self.parts[-1] >= 0

    @property
    def last(self) -> int:
        return self.parts[-1] if self.parts else 0

    def shifted(self, c: int) -> "Signature":
        """Uniform shift ``lambda + c*(1,...,1)``."""
        return Signature(self.interval, tuple(p + c for p in self.parts))

    def relabel(self, interval: Interval) -> "Signature":
        return Signature(interval, self.parts)

    def sort_key(self) -> tuple:
        return (self.weight, self.parts)

    def to_json(self) -> dict:
        return {"interval": self.interval.to_json(), "parts": list(self.parts)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Signature":
        return cls(Interval.from_json(data["interval"]), tuple(data["parts"]))

    def __str__(self) -> str:
        return f"({','.join(map(str, self.parts))})@{self.interval}"


def enumerate_signatures(
    interval: Interval, min_part: int, max_part: int, max_weight: int
) -> list[Signature]:
    """All signatures on ``interval`` with parts in ``[min_part, max_part]`` and
    weight at most ``max_weight``.

    Output is in graded lexicographic order: by weight, then by the parts tuple
    compared lexicographically.
    """
    if min_part > max_part:
        raise ValueError("min_part must not exceed max_part")
    n = len(interval)
    if n == 0:
        return [Signature.empty()]
    out = []

    def rec(prefix: list, upper: int):
        k = len(prefix)
        if k == n:
            if sum(prefix) <= max_weight:
                out.append(tuple(prefix))
            return
        slots_after = n - k - 1
        for p in range(min_part, upper + 1):
            # cheapest completion uses min_part for all remaining slots
            if sum(prefix) + p + slots_after * min_part > max_weight:
                break
            prefix.append(p)
            rec(prefix, p)
            prefix.pop()

    rec([], max_part)
    sigs = [Signature(interval, p) for p in out]
    sigs.sort(key=Signature.sort_key)
    return sigs


# ---------------------------------------------------------------------------
# Monomial series


@dataclass(frozen=True)
class MonomialSeries:
    """Finitely supported (Laurent) series in ``n_vars`` variables.

    ``terms`` maps exponent tuples to coefficients.  Optional bounds truncate:
    any term outside ``[min_exp, max_exp]`` componentwise, or of total degree
    above ``max_degree``, is dropped on construction and after products.
    """

    n_vars: int
    terms: dict = field(default_factory=dict)
    min_exp: tuple | None = None
    max_exp: tuple | None = None
    max_degree: int | None = None

    def __post_init__(self):
        kept = {}
        for e, c in self.terms.items():
            e = tuple(e)
            if len(e) != self.n_vars:
                raise ValueError(f"exponent {e} has wrong length for {self.n_vars} variables")
            if c != 0 and self._admits(e):
                kept[e] = c
        object.__setattr__(self, "terms", kept)

    def _admits(self, e: tuple) -> bool:
        if self.max_degree is not None and sum(e) > self.max_degree:
            return False
        if self.min_exp is not None and any(a < b for a, b in zip(e, self.min_exp)):
            return False
        if self.max_exp is not None and any(a > b for a, b in zip(e, self.max_exp)):
            return False
        return True

    @classmethod
    def constant(cls, c, n_vars: int, **bounds) -> "MonomialSeries":
        return cls(n_vars, {(0,) * n_vars: c}, **bounds)

    @classmethod
    def univariate(cls, coeffs: Mapping[int, object], var: int, n_vars: int, **bounds):
        """Embed ``sum_k coeffs[k] x_var^k`` into ``n_vars`` variables."""
        terms = {}
        for k, c in coeffs.items():
            e = [0] * n_vars
            e[var] = k
            terms[tuple(e)] = c
        return cls(n_vars, terms, **bounds)

    def _bounds_with(self, other: "MonomialSeries") -> dict:
        def pick(a, b, fn):
            if a is None:
                return b
            if b is None:
                return a
            return tuple(fn(x, y) for x, y in zip(a, b))

        deg = [d for d in (self.max_degree, other.max_degree) if d is not None]
        return {
            "min_exp": pick(self.min_exp, other.min_exp, max),
            "max_exp": pick(self.max_exp, other.max_exp, min),
            "max_degree": min(deg) if deg else None,
        }

    def __add__(self, other: "MonomialSeries") -> "MonomialSeries":
        if self.n_vars != other.n_vars:
            raise ValueError("variable count mismatch")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return MonomialSeries(self.n_vars, terms, **self._bounds_with(other))

    def __mul__(self, other):
        if not isinstance(other, MonomialSeries):
            return MonomialSeries(
                self.n_vars,
                {e: c * other for e, c in self.terms.items()},
                self.min_exp,
                self.max_exp,
                self.max_degree,
            )
        if self.n_vars != other.n_vars:
            raise ValueError("variable count mismatch")
        bounds = self._bounds_with(other)
        probe = MonomialSeries(self.n_vars, {}, **bounds)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if probe._admits(e):
                    terms[e] = terms.get(e, 0) + c1 * c2
        return MonomialSeries(self.n_vars, terms, **bounds)

    __rmul__ = __mul__

    def coefficient(self, e: Sequence[int]):
        return self.terms.get(tuple(e), 0)

    def evaluate(self, point: Sequence):
        if len(point) != self.n_vars:
            raise ValueError("point has wrong number of coordinates")
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def permuted(self, perm: Sequence[int]) -> "MonomialSeries":
        """Substitute ``x_i -> x_perm[i]``."""
        terms = {}
        for e, c in self.terms.items():
            new = [0] * self.n_vars
            for i, k in enumerate(e):
                new[perm[i]] = k
            terms[tuple(new)] = c
        return MonomialSeries(self.n_vars, terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonomialSeries):
            return NotImplemented
        return self.n_vars == other.n_vars and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)


def vandermonde(n: int) -> MonomialSeries:
    """The alternant ``a_delta = prod_{i<j} (x_i - x_j) = det(x_j^{n-i})``."""
    terms = {}
    delta = tuple(range(n - 1, -1, -1))
    for perm in itertools.permutations(range(n)):
        e = tuple(delta[perm[j]] for j in range(n))
        terms[e] = terms.get(e, 0) + _perm_sign(perm)
    return MonomialSeries(n, terms)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# Schur polynomials


def _interlacing(parts: tuple):
    """Signatures mu of length n-1 with parts[i] >= mu[i] >= parts[i+1]."""
    ranges = [range(parts[i + 1], parts[i] + 1) for i in range(len(parts) - 1)]
    return itertools.product(*ranges)


@lru_cache(maxsize=None)
def _ssyt_terms(parts: tuple) -> tuple:
    """Monomial expansion of s_parts for a partition, as sorted (exponent, count) pairs.

    Semistandard tableaux with entries <= n are enumerated as chains of
    interlacing shapes: removing the cells holding n leaves a tableau with
    entries <= n-1 whose shape interlaces ``parts``.
    """
    n = len(parts)
    if n == 0:
        return (((), 1),)
    if n == 1:
        return (((parts[0],), 1),)
    out: Counter = Counter()
    total = sum(parts)
    for mu in _interlacing(parts):
        last = total - sum(mu)
        for e, c in _ssyt_terms(tuple(mu)):
            out[e + (last,)] += c
    return tuple(sorted(out.items()))


def schur_expand(lam: Signature, n_vars: int) -> MonomialSeries:
    """Monomial expansion of the Schur (Laurent) polynomial ``s_lam``."""
    if n_vars != len(lam):
        raise ValueError(f"schur_expand: n_vars={n_vars} but signature has {len(lam)} parts")
    c = lam.last
    base = tuple(p - c for p in lam.parts)
    terms = {tuple(k + c for k in e): cnt for e, cnt in _ssyt_terms(base)}
    return MonomialSeries(n_vars, terms)


def _det(rows: list[list]):
    """Determinant by Gaussian elimination (exact for Fraction entries)."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    exact = all(isinstance(x, (int, Fraction)) for r in m for x in r)
    det = 1
    for col in range(n):
        if exact:
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(m[r][col]))
            if m[piv][col] == 0:
                piv = None
        if piv is None:
            return 0 * det
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f != 0:
                row_r, row_c = m[r], m[col]
                for k in range(col, n):
                    row_r[k] = row_r[k] - f * row_c[k]
    return det


def _exactify(x):
    return Fraction(x) if isinstance(x, int) else x


def schur_eval(lam: Signature, point: Sequence):
    """Evaluate ``s_lam`` at ``point``.

    Uses the bialternant ``det(x_j^{lam_i + n - i}) / det(x_j^{n - i})``; when
    two coordinates coincide the determinant ratio is 0/0, so the tableau
    expansion is substituted instead.
    """
    n = len(lam)
    if len(point) != n:
        raise ValueError(f"point has {len(point)} coordinates, signature has {n} parts")
    if n == 0:
        return 1
    pt = [_exactify(x) for x in point]
    c = lam.last
    if c < 0 and any(x == 0 for x in pt):
        raise DomainError("zero coordinate with negative signature parts")
    base = Signature(lam.interval, tuple(p - c for p in lam.parts))
    confluent = len(set(pt)) < n
    if confluent:
        value = schur_expand(base, n).evaluate(pt)
    else:
        top = [[x ** (base.parts[i] + n - 1 - i) for x in pt] for i in range(n)]
        bottom = [[x ** (n - 1 - i) for x in pt] for i in range(n)]
        value = _det(top) / _det(bottom)
    if c:
        prod = 1
        for x in pt:
            prod = prod * x
        value = value * prod**c
    return value


# ---------------------------------------------------------------------------
# Quantum dimensions


@lru_cache(maxsize=None)
def _qdim_terms(parts: tuple) -> tuple:
    """Laurent expansion of s_parts(q^{n-1}, q^{n-3}, ..., q^{1-n}) as (exp, coeff) pairs."""
    n = len(parts)
    weights = [n + 1 - 2 * j for j in range(1, n + 1)]
    out: Counter = Counter()
    c = parts[-1] if parts else 0
    for e, cnt in _ssyt_terms(tuple(p - c for p in parts)):
        out[sum((k + c) * w for k, w in zip(e, weights))] += cnt
    return tuple(sorted((k, v) for k, v in out.items() if v))


@lru_cache(maxsize=None)
def _qdim_formal(parts: tuple) -> RationalFunction:
    return RationalFunction.from_laurent(dict(_qdim_terms(parts)))


def quantum_dimension(lam: Signature, q=None):
    """Principal specialization ``d_q(lam) = s_lam(q^{n-1}, q^{n-3}, ..., q^{1-n})``.

    With ``q=None`` (or ``"formal"``) the result is an exact
    :class:`RationalFunction` in q; with a numeric ``q > 0`` it is a number
    (exact for ``int``/``Fraction`` input).
    """
    if q is None or q == "formal":
        return _qdim_formal(lam.parts)
    if not isinstance(q, Number) or isinstance(q, complex) or q <= 0:
        raise DomainError(f"quantum_dimension needs q > 0, got {q!r}")
    q = _exactify(q)
    return sum(c * q**k for k, c in _qdim_terms(lam.parts))


# ---------------------------------------------------------------------------
# Littlewood-Richardson coefficients


def _lr_count(nu: tuple, lam: tuple, mu: tuple) -> int:
    """Count LR tableaux of skew shape nu/lam and content mu (all partitions)."""
    rows = len(nu)
    lam = tuple(lam) + (0,) * (rows - len(lam))
    mu = tuple(p for p in mu if p > 0)
    if any(l > v for l, v in zip(lam, nu)):
        return 0
    cells = [(r, c) for r in range(rows) for c in range(nu[r] - 1, lam[r] - 1, -1)]
    if len(cells) != sum(mu):
        return 0
    if not cells:
        return 1
    fill = [[0] * (nu[r] if rows else 0) for r in range(rows)]
    counts = [0] * (len(mu) + 1)
    k_max = len(mu)

    def rec(idx: int) -> int:
        if idx == len(cells):
            return 1
        r, c = cells[idx]
        hi = min(k_max, r + 1)
        if c + 1 < nu[r]:
            hi = min(hi, fill[r][c + 1])
        lo = 1
        if r > 0 and c >= lam[r - 1]:
            lo = fill[r - 1][c] + 1
        total = 0
        for v in range(lo, hi + 1):
            if counts[v] >= mu[v - 1]:
                continue
            if v > 1 and counts[v] >= counts[v - 1]:
                continue
            counts[v] += 1
            fill[r][c] = v
            total += rec(idx + 1)
            counts[v] -= 1
        fill[r][c] = 0
        return total

    return rec(0)


def _check_lr_sizes(lam: Signature, mu: Signature, nu: Signature):
    if len(lam) + len(mu) != len(nu):
        raise ValueError(
            f"LR size mismatch: |I|={len(lam)}, |J|={len(mu)}, |I u J|={len(nu)}"
        )


def _common_shift(*sigs: Signature) -> int:
    return -min([0] + [s.last for s in sigs if len(s)])


def lr_coefficient(lam: Signature, mu: Signature, nu: Signature) -> int:
    """Littlewood-Richardson coefficient ``c^nu_{lam,mu}`` by the lattice-word rule.

    Signatures with negative parts are first shifted uniformly to partitions.
    """
    _check_lr_sizes(lam, mu, nu)
    if lam.weight + mu.weight != nu.weight:
        return 0
    c = _common_shift(lam, mu, nu)
    return _lr_cached(
        tuple(p + c for p in nu.parts),
        tuple(p + c for p in lam.parts),
        tuple(p + c for p in mu.parts),
    )


@lru_cache(maxsize=None)
def _lr_cached(nu: tuple, lam: tuple, mu: tuple) -> int:
    return _lr_count(nu, lam, mu)


@lru_cache(maxsize=None)
def _alternant_product(lam: tuple, mu: tuple, n: int) -> MonomialSeries:
    pad = lambda t: Signature.of(t + (0,) * (n - len(t)))
    return schur_expand(pad(lam), n) * schur_expand(pad(mu), n) * vandermonde(n)


def lr_coefficient_bruteforce(
    lam: Signature, mu: Signature, nu: Signature, n_vars: int | None = None
) -> int:
    """Independent oracle: expand ``s_lam * s_mu`` in ``n_vars`` variables
    (default ``|nu|``) and read the Schur coefficient at ``nu`` through the
    alternant (coefficient of ``x^{nu+delta}`` in ``s_lam s_mu a_delta``).

    After shifting to partitions, trailing zero rows are dropped, so any
    ``n_vars`` at least the number of nonzero rows of each argument gives the
    same answer.
    """
    _check_lr_sizes(lam, mu, nu)
    if lam.weight + mu.weight != nu.weight:
        return 0
    c = _common_shift(lam, mu, nu)
    strip = lambda s: tuple(p + c for p in s.parts if p + c)
    l, m, v = strip(lam), strip(mu), strip(nu)
    n = len(nu) if n_vars is None else n_vars
    if max(len(l), len(m), len(v)) > n:
        raise ValueError(f"{n} variables cannot carry the nonzero rows of the arguments")
    prod = _alternant_product(l, m, n)
    v = v + (0,) * (n - len(v))
    return int(prod.coefficient(tuple(p + n - 1 - i for i, p in enumerate(v))))


@lru_cache(maxsize=None)
def _lr_product_cached(lam: tuple, mu: tuple, interval: Interval) -> tuple:
    n_rows = len(interval)
    c = -min([0] + [t[-1] for t in (lam, mu) if t])
    lp = tuple(p + c for p in lam) + (0,) * (n_rows - len(lam))
    mp = tuple(p + c for p in mu) + (0,) * (n_rows - len(mu))
    total = sum(p + c for p in lam) + sum(p + c for p in mu)
    lower = [max(a, b) for a, b in zip(lp, mp)]
    upper = (lp[0] if lp else 0) + (mp[0] if mp else 0)
    out = []

    def rec(prefix: list, cap: int, left: int):
        k = len(prefix)
        if k == n_rows:
            if left == 0:
                out.append(tuple(prefix))
            return
        for p in range(min(cap, left), lower[k] - 1, -1):
            # remaining rows must still reach their lower bounds
            if sum(lower[k + 1:]) > left - p:
                continue
            prefix.append(p)
            rec(prefix, p, left - p)
            prefix.pop()

    if n_rows:
        rec([], upper, total)
    elif total == 0:
        out.append(())
    result = []
    lam_s = tuple(p + c for p in lam)
    mu_s = tuple(p + c for p in mu)
    for nu in out:
        coeff = _lr_cached(nu, lam_s, mu_s)
        if coeff:
            result.append((tuple(p - c for p in nu), coeff))
    return tuple(result)


def lr_product(lam: Signature, mu: Signature, interval: Interval | None = None) -> dict:
    """All ``nu`` on ``interval`` (default ``[1..|I|+|J|]``) with ``c^nu_{lam,mu} > 0``."""
    if interval is None:
        interval = Interval.base(len(lam) + len(mu))
    if len(interval) != len(lam) + len(mu):
        raise ValueError("target interval size must be |I| + |J|")
    return {
        Signature(interval, nu): c
        for nu, c in _lr_product_cached(lam.parts, mu.parts, interval)
    }


def branching_residual(nu: Signature, sizes: tuple[int, int], sample_points: Iterable):
    """Max over points of ``|s_nu(x) - sum c^nu_{lam,mu} s_lam(x_I) s_mu(x_J)|``.

    Exact for rational points, so a holding identity returns exactly zero.
    """
    a, b = sizes
    if a < 0 or b < 0 or a + b != len(nu):
        raise ValueError(f"sizes {sizes} do not split a signature of length {len(nu)}")
    I, J = Interval.base(a), Interval(a + 1, a + b)
    lo, hi = (nu.last, nu.parts[0]) if len(nu) else (0, 0)
    pairs = []
    for lam in enumerate_signatures(I, lo, hi, nu.weight - lo * b):
        for mu in enumerate_signatures(J, lo, hi, nu.weight - lam.weight):
            if lam.weight + mu.weight != nu.weight:
                continue
            c = lr_coefficient(lam, mu, nu)
            if c:
                pairs.append((lam, mu, c))
    worst = 0
    for pt in sample_points:
        pt = list(pt)
        lhs = schur_eval(nu, pt)
        rhs = sum(c * schur_eval(l, pt[:a]) * schur_eval(m, pt[a:]) for l, m, c in pairs)
        worst = max(worst, abs(lhs - rhs))
    return worst
