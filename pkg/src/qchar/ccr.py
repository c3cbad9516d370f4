"""Covariance forms of a shift-invariant product state, quasi-free (Gaussian)
moments on the Weyl CCR algebra, and the Wick pair-partition formula.

Conventions: the kernel K(x, y) = sum_k (chi(x gamma_k(y)) - chi(x) chi(y))
splits as K = s - i sigma; Weyl operators satisfy
w(x) w(y) = e^{i sigma(x, y)} w(x + y) and phi(w(x)) = e^{-s(x, x)/2}; the
field b(x) is the generator w(t x) = e^{i t b(x)}, so
phi(b(x) b(y)) = K(x, y).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import mpmath
import numpy as np

from . import config
from .errors import DomainError

__all__ = [
    "CovarianceData",
    "covariance",
    "pair_partitions",
    "double_factorial",
    "wick_moment",
    "weyl_moment",
    "wick_moment_fd",
    "kernel_psd_check",
]


@dataclass(frozen=True, eq=False)
class CovarianceData:
    """Symmetric form ``s`` and antisymmetric form ``sigma`` over labeled observables."""

    labels: tuple
    s: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        if len(set(labels)) != len(labels):
            raise DomainError("observable labels must be distinct")
        n = len(labels)
        s = np.asarray(self.s, dtype=float).reshape(n, n)
        sig = np.asarray(self.sigma, dtype=float).reshape(n, n)
        scale = max(1.0, float(np.max(np.abs(s), initial=0.0)), float(np.max(np.abs(sig), initial=0.0)))
        if np.max(np.abs(s - s.T), initial=0.0) > 1e-12 * scale:
            raise DomainError("s must be symmetric")
        if np.max(np.abs(sig + sig.T), initial=0.0) > 1e-12 * scale:
            raise DomainError("sigma must be antisymmetric")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "_pos", {l: i for i, l in enumerate(labels)})

    def index(self, label) -> int:
        try:
            return self._pos[str(label)]
        except KeyError:
            raise DomainError(f"unknown observable id {label!r}") from None

    def kernel(self) -> np.ndarray:
        """Hermitian matrix s - i sigma."""
        return self.s - 1j * self.sigma

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "s": self.s.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "CovarianceData":
        n = len(data["labels"])
        s = np.array(data["s"], dtype=float).reshape(n, n)
        sig = np.array(data["sigma"], dtype=float).reshape(n, n)
        return cls(tuple(data["labels"]), s, sig)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CovarianceData):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.sigma, other.sigma)
        )


def covariance(chain, observables: Sequence, labels: Sequence[str] | None = None) -> CovarianceData:
    """Covariance forms from a product chain state.

    ``chain`` must provide ``expect(obs)`` and ``correlation(x, y, k)``
    (= chi(x gamma_k(y))) and ``overlap_shifts(x, y)``, the finitely many k for
    which the supports of x and gamma_k(y) meet.  All other terms vanish
    exactly by multiplicativity.  Only the upper triangle is computed; the
    lower one is its conjugate mirror, since K(y, x) = conj K(x, y) for
    self-adjoint observables.
    """
    obs = list(observables)
    for x in obs:
        if not getattr(x, "self_adjoint", True):
            raise DomainError("covariance forms are defined on self-adjoint observables")
    if labels is None:
        labels = [getattr(x, "label", None) or f"x{i}" for i, x in enumerate(obs)]
    n = len(obs)
    means = [chain.expect(x) for x in obs]
    K = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            total = 0j
            for k in chain.overlap_shifts(obs[i], obs[j]):
                total += chain.correlation(obs[i], obs[j], k) - means[i] * means[j]
            K[i, j] = total
            K[j, i] = np.conj(total)
    K[np.diag_indices(n)] = K.diagonal().real
    return CovarianceData(tuple(labels), K.real.copy(), -K.imag.copy())


def pair_partitions(n: int) -> Iterator[tuple]:
    """All pairings of ``range(n)`` as tuples of (earlier, later) position pairs."""
    if n % 2:
        return
    def rec(rest: tuple):
        if not rest:
            yield ()
            return
        first = rest[0]
        for idx in range(1, len(rest)):
            partner = rest[idx]
            remaining = rest[1:idx] + rest[idx + 1:]
            for tail in rec(remaining):
                yield ((first, partner),) + tail
    yield from rec(tuple(range(n)))


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def wick_moment(cov: CovarianceData, word: Sequence) -> complex:
    """phi(b(x_1) ... b(x_k)): zero for odd k, else a sum over pair partitions
    where each pair contributes K(x_earlier, x_later)."""
    idx = [cov.index(w) for w in word]
    if len(idx) % 2:
        return 0j
    K = cov.kernel()
    total = 0j
    for pairing in pair_partitions(len(idx)):
        term = 1 + 0j
        for a, b in pairing:
            term *= K[idx[a], idx[b]]
        total += term
    return complex(total)


def _parse_weyl_word(cov: CovarianceData, word) -> list:
    out = []
    for item in word:
        if isinstance(item, str):
            out.append((cov.index(item), 1))
        else:
            label, scale = item
            out.append((cov.index(label), scale))
    return out


def weyl_moment(cov: CovarianceData, word) -> complex:
    """phi(w(t_1 x_1) ... w(t_k x_k)) for a word of (label, scale) pairs.

    Scales may be mpmath numbers, in which case the computation is carried
    out at mpmath precision and an ``mpc`` is returned.
    """
    items = _parse_weyl_word(cov, word)
    use_mp = any(isinstance(t, (mpmath.mpf, mpmath.mpc)) for _, t in items)
    zero = mpmath.mpf(0) if use_mp else 0.0
    phase, quad = zero, zero
    for a, (i, ti) in enumerate(items):
        for b, (j, tj) in enumerate(items):
            quad += ti * tj * float(cov.s[i, j])
            if a < b:
                phase += ti * tj * float(cov.sigma[i, j])
    if use_mp:
        return mpmath.exp(1j * phase) * mpmath.exp(-quad / 2)
    return complex(np.exp(1j * phase) * np.exp(-quad / 2))


def wick_moment_fd(
    cov: CovarianceData, word: Sequence, step: float | None = None, dps: int | None = None
) -> complex:
    """The moment of ``word`` recovered from the Weyl generating function:
    (-i)^k d^k/dt_1...dt_k phi(w(t_1 x_1) ... w(t_k x_k)) at t = 0, by central
    differences with step ``step``.

    The 2^k-point stencil divides by (2h)^k, so function values are computed
    with ``dps`` decimal digits to keep round-off far below the O(h^2)
    truncation error.
    """
    h = config.FD_STEP if step is None else step
    dps = config.FD_DPS if dps is None else dps
    k = len(word)
    with mpmath.workdps(dps):
        hh = mpmath.mpf(h)
        total = mpmath.mpc(0)
        for signs in itertools.product((1, -1), repeat=k):
            sub = [(label, hh * e) for label, e in zip(word, signs)]
            total += math.prod(signs) * weyl_moment(cov, sub)
        deriv = total / (2 * hh) ** k
        value = (-1j) ** k * deriv
        return complex(value)


def kernel_psd_check(cov: CovarianceData) -> float:
    """Smallest eigenvalue of the Hermitian kernel s - i sigma."""
    if len(cov.labels) == 0:
        return 0.0
    return float(np.linalg.eigvalsh(cov.kernel()).min())
