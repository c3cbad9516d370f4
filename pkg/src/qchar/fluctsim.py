"""Exact product-state spin chains: local fluctuations F_I(x), their joint
characteristic functions, convergence reports against the quasi-free limit,
and the block-partition diagnostics behind the Gaussian limit theorem.

Sites are numbered 1..n_sites.  An observable with support S is shifted by
gamma_j to S + j.  Fluctuations are taken over I_n = [1..n] unless another
interval is passed, so an observable supported on [0..w-1] needs
n + w - 1 sites.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import config
from .ccr import covariance, weyl_moment
from .errors import DegeneratePartitionError, DomainError, ResourceLimitError
from .partitions import Interval

__all__ = [
    "QuasiLocalChain",
    "LocalObservable",
    "BlockPartitionParams",
    "fluctuation_operator",
    "fluctuation_charfn",
    "clt_report",
    "CLTReport",
    "block_partition",
    "explicit_partition",
    "decay_report",
    "DecayRow",
    "ergodic_residual",
    "block_sum",
    "lie_defect",
    "commutator_sum",
    "double_commutator_sum",
]


def _matrix_to_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _matrix_from_json(data) -> np.ndarray:
    if isinstance(data, Mapping):
        return np.array(data["re"], dtype=float) + 1j * np.array(data.get("im", 0.0), dtype=float)
    return np.array(data, dtype=complex)


def _scalar_of(m: np.ndarray):
    """c if m == c * identity exactly, else None."""
    d = m.shape[0]
    c = m[0, 0]
    if np.array_equal(m, c * np.eye(d)):
        return c
    return None


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """Matrix acting on the sites of ``support`` (tensor order left to right)."""

    support: Interval
    matrix: np.ndarray
    self_adjoint: bool = True
    label: str | None = None

    def __post_init__(self):
        if self.support.is_empty():
            raise DomainError("an observable needs a nonempty support")
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("observable matrix must be square")
        d = round(m.shape[0] ** (1 / len(self.support)))
        if d ** len(self.support) != m.shape[0]:
            raise DomainError(f"matrix size {m.shape[0]} is not a power matching support {self.support}")
        if self.self_adjoint and not np.allclose(m, m.conj().T, atol=1e-12):
            raise DomainError("observable flagged self-adjoint but matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def width(self) -> int:
        return len(self.support)

    @property
    def site_dim(self) -> int:
        return round(self.matrix.shape[0] ** (1 / self.width))

    def shifted(self, k: int) -> "LocalObservable":
        return LocalObservable(self.support.shift(k), self.matrix, self.self_adjoint, self.label)

    @property
    def scalar(self):
        return _scalar_of(self.matrix)

    def scaled(self, t: float) -> "LocalObservable":
        return LocalObservable(self.support, t * self.matrix, self.self_adjoint, self.label)

    @classmethod
    def identity(cls, site_dim: int, c: float = 1.0, site: int = 0, label=None) -> "LocalObservable":
        return cls(Interval(site, site), c * np.eye(site_dim), True, label)

    def to_json(self) -> dict:
        data = {
            "support": self.support.to_json(),
            "matrix": _matrix_to_json(self.matrix),
            "self_adjoint": self.self_adjoint,
        }
        if self.label is not None:
            data["label"] = self.label
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "LocalObservable":
        return cls(
            Interval.from_json(data["support"]),
            _matrix_from_json(data["matrix"]),
            bool(data.get("self_adjoint", True)),
            data.get("label"),
        )


def _embed(obs: LocalObservable, window: Interval, d: int, sparse: bool = False):
    """Operator of ``obs`` on the sites of ``window``."""
    left = obs.support.lo - window.lo
    right = window.hi - obs.support.hi
    if left < 0 or right < 0:
        raise DomainError(f"support {obs.support} is not inside window {window}")
    if sparse:
        return sp.kron(
            sp.kron(sp.identity(d**left, format="csr"), sp.csr_matrix(obs.matrix)),
            sp.identity(d**right, format="csr"),
            format="csr",
        )
    return np.kron(np.kron(np.eye(d**left), obs.matrix), np.eye(d**right))


@dataclass(frozen=True, eq=False)
class QuasiLocalChain:
    """Spin chain with the shift-invariant product state rho^{(x) n_sites}."""

    site_dim: int
    site_density: np.ndarray
    n_sites: int

    def __post_init__(self):
        if self.site_dim < 1 or self.n_sites < 1:
            raise DomainError("site_dim and n_sites must be positive")
        rho = np.asarray(self.site_density, dtype=complex)
        if rho.shape != (self.site_dim, self.site_dim):
            raise DomainError("site density has the wrong shape")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise DomainError("site density must be Hermitian")
        ev = np.linalg.eigvalsh(rho)
        if ev.min() < -1e-12:
            raise DomainError("site density must be positive semidefinite")
        if abs(np.trace(rho).real - 1) > 1e-12:
            raise DomainError("site density must have trace 1")
        object.__setattr__(self, "site_density", rho)

    @property
    def sites(self) -> Interval:
        return Interval(1, self.n_sites)

    def with_sites(self, n_sites: int) -> "QuasiLocalChain":
        return QuasiLocalChain(self.site_dim, self.site_density, n_sites)

    def is_pure(self) -> bool:
        return np.linalg.eigvalsh(self.site_density).max() > 1 - 1e-12

    def is_tracial(self) -> bool:
        return np.allclose(self.site_density, np.eye(self.site_dim) / self.site_dim, atol=1e-14)

    def site_vector(self) -> np.ndarray:
        if not self.is_pure():
            raise DomainError("site density is not pure")
        w, v = np.linalg.eigh(self.site_density)
        return v[:, np.argmax(w)]

    def density(self, n_sites: int) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for _ in range(n_sites):
            out = np.kron(out, self.site_density)
        return out

    def state_of(self, op: np.ndarray, n_sites: int) -> complex:
        """Tr(rho^{(x) n} op) without forming the product density."""
        d = self.site_dim
        t = np.asarray(op).reshape((d,) * (2 * n_sites))
        for _ in range(n_sites):
            # contract the leading ket/bra pair with rho (index order: kets then bras)
            k = t.ndim // 2
            t = np.tensordot(self.site_density, t, axes=([1, 0], [0, k]))
        return complex(t)

    def expect(self, obs: LocalObservable) -> complex:
        c = obs.scalar
        if c is not None:
            return complex(c)
        return self.state_of(obs.matrix, obs.width)

    def overlap_shifts(self, x: LocalObservable, y: LocalObservable) -> range:
        """The k for which supports of x and gamma_k(y) intersect."""
        return range(x.support.lo - y.support.hi, x.support.hi - y.support.lo + 1)

    def correlation(self, x: LocalObservable, y: LocalObservable, k: int) -> complex:
        """chi(x gamma_k(y))."""
        if x.scalar is not None or y.scalar is not None:
            return self.expect(x) * self.expect(y)
        ys = y.shifted(k)
        lo = min(x.support.lo, ys.support.lo)
        hi = max(x.support.hi, ys.support.hi)
        if hi - lo + 1 > x.width + ys.width:
            # disjoint supports: the product state factorizes
            return self.expect(x) * self.expect(ys)
        window = Interval(lo, hi)
        d = self.site_dim
        return self.state_of(_embed(x, window, d) @ _embed(ys, window, d), len(window))

    def centered(self, obs: LocalObservable) -> np.ndarray:
        """x - chi(x) 1 (exactly zero for scalar x)."""
        if obs.scalar is not None:
            return np.zeros_like(obs.matrix)
        return obs.matrix - self.expect(obs) * np.eye(obs.matrix.shape[0])

    def to_json(self) -> dict:
        return {
            "site_dim": self.site_dim,
            "n_sites": self.n_sites,
            "site_density": _matrix_to_json(self.site_density),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QuasiLocalChain":
        return cls(int(data["site_dim"]), _matrix_from_json(data["site_density"]), int(data["n_sites"]))

    @classmethod
    def qubit(cls, n_sites: int, p: float = 0.5) -> "QuasiLocalChain":
        """Diagonal qubit state diag(p, 1 - p)."""
        return cls(2, np.diag([p, 1 - p]), n_sites)

    @classmethod
    def pure_qubit(cls, n_sites: int, theta: float, phi: float = 0.0) -> "QuasiLocalChain":
        """Product of cos(theta)|0> + e^{i phi} sin(theta)|1>."""
        v = np.array([math.cos(theta), np.exp(1j * phi) * math.sin(theta)])
        return cls(2, np.outer(v, v.conj()), n_sites)


# ---------------------------------------------------------------------------
# Fluctuation operators


def _default_interval(n) -> Interval:
    return n if isinstance(n, Interval) else Interval(1, int(n))


def _window(chain: QuasiLocalChain, observables: Sequence[LocalObservable], I_n: Interval) -> Interval:
    lo = min(I_n.lo + x.support.lo for x in observables)
    hi = max(I_n.hi + x.support.hi for x in observables)
    if lo < 1 or hi > chain.n_sites:
        raise DomainError(
            f"chain with {chain.n_sites} sites cannot host the shifts over {I_n}: "
            f"sites {lo}..{hi} are needed"
        )
    return Interval(lo, hi)


def _check_dim(d: int, sites: int, bound: int, what: str):
    if d**sites > bound:
        raise ResourceLimitError(f"{what} needs dimension {d}^{sites} > {bound}")


def block_sum(chain, x: LocalObservable, positions, norm: float, window: Interval, sparse=False):
    """(1/sqrt(norm)) sum_{j in positions} (gamma_j(x) - chi(x)) on ``window``."""
    d = chain.site_dim
    c = LocalObservable(x.support, chain.centered(x), x.self_adjoint)
    dim = d ** len(window)
    total = sp.csr_matrix((dim, dim), dtype=complex) if sparse else np.zeros((dim, dim), dtype=complex)
    if x.scalar is not None:
        return total
    for j in positions:
        total = total + _embed(c.shifted(j), window, d, sparse)
    return total / math.sqrt(norm)


def fluctuation_operator(chain, x: LocalObservable, I_n, window: Interval | None = None, sparse: bool = False):
    """F_I(x) on the enveloping sites (or on ``window``)."""
    I_n = _default_interval(I_n)
    env = _window(chain, [x], I_n)
    window = env if window is None else window
    if sparse:
        _check_dim(chain.site_dim, len(window), config.VECTOR_MAX_DIM, "sparse fluctuation operator")
    else:
        _check_dim(chain.site_dim, len(window), config.DENSE_MAX_DIM, "dense fluctuation operator")
    return block_sum(chain, x, I_n, len(I_n), window, sparse)


def _expih(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(i t h) for Hermitian h."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def _exph(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t h) for Hermitian h."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(t * w)) @ v.conj().T


def _product_path(chain, observables, n: int) -> complex:
    f = np.eye(chain.site_dim, dtype=complex)
    for x in observables:
        f = f @ _expih(chain.centered(x), 1 / math.sqrt(n))
    site = complex(np.trace(chain.site_density @ f))
    return site**n


def fluctuation_charfn(chain, observables: Sequence[LocalObservable], I_n, method: str = "auto") -> complex:
    """chi(e^{i F(x_1)} ... e^{i F(x_k)}).

    ``method``: ``"product"`` uses single-site factors (width-1 observables
    only, where all shifted terms commute), ``"vector"`` propagates a pure
    product state with sparse exponentials, ``"dense"`` exponentiates dense
    Hermitian eigendecompositions against the product density.
    """
    obs = list(observables)
    if not obs:
        return 1 + 0j
    for x in obs:
        if not x.self_adjoint:
            raise DomainError("fluctuation_charfn needs self-adjoint observables")
    I_n = _default_interval(I_n)
    window = _window(chain, obs, I_n)
    if all(x.scalar is not None for x in obs):
        return 1 + 0j
    if method == "auto":
        if all(x.width == 1 for x in obs):
            method = "product"
        elif chain.is_pure() and chain.site_dim ** len(window) <= config.VECTOR_MAX_DIM:
            method = "vector"
        else:
            method = "dense"
    if method == "product":
        if any(x.width != 1 for x in obs):
            raise DomainError("the product path needs width-1 observables")
        return _product_path(chain, obs, len(I_n))
    d, sites = chain.site_dim, len(window)
    if method == "vector":
        _check_dim(d, sites, config.VECTOR_MAX_DIM, "state-vector path")
        psi = np.ones(1, dtype=complex)
        site = chain.site_vector()
        for _ in range(sites):
            psi = np.kron(psi, site)
        v = psi
        dense = d**sites <= config.VECTOR_DENSE_CUTOFF
        for x in reversed(obs):
            F = block_sum(chain, x, I_n, len(I_n), window, sparse=not dense)
            v = _expih(F) @ v if dense else expm_multiply(1j * F, v, traceA=0.0)
        return complex(np.vdot(psi, v))
    if method == "dense":
        _check_dim(d, sites, config.DENSE_MAX_DIM, "dense path")
        U = np.eye(d**sites, dtype=complex)
        for x in obs:
            U = U @ _expih(block_sum(chain, x, I_n, len(I_n), window))
        return chain.state_of(U, sites)
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CLTRow:
    n: int
    simulated: complex
    limit: complex

    @property
    def abs_error(self) -> float:
        return abs(self.simulated - self.limit)


@dataclass(frozen=True)
class CLTReport:
    rows: tuple
    flags: tuple = ()

    @property
    def errors(self) -> list:
        return [r.abs_error for r in self.rows]

    @property
    def monotone(self) -> bool:
        return not self.flags

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "simulated_re", "simulated_im", "limit_re", "limit_im", "abs_error"])
        for r in self.rows:
            w.writerow([
                r.n, repr(r.simulated.real), repr(r.simulated.imag),
                repr(r.limit.real), repr(r.limit.imag), repr(r.abs_error),
            ])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "rows": [
                {
                    "n": r.n,
                    "simulated_re": r.simulated.real, "simulated_im": r.simulated.imag,
                    "limit_re": r.limit.real, "limit_im": r.limit.imag,
                    "abs_error": r.abs_error,
                }
                for r in self.rows
            ],
            "flags": list(self.flags),
        }


def clt_report(chain, observables: Sequence[LocalObservable], n_list: Sequence[int], method: str = "auto") -> CLTReport:
    """Simulated charfn against the quasi-free limit phi(w(x_1) ... w(x_k)) for each n."""
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("n_list must be strictly increasing")
    obs = list(observables)
    labels = [x.label or f"x{i}" for i, x in enumerate(obs)]
    cov = covariance(chain, obs, labels)
    limit = weyl_moment(cov, [(l, 1.0) for l in labels])
    rows, flags = [], []
    for n in ns:
        rows.append(CLTRow(n, fluctuation_charfn(chain, obs, Interval(1, n), method), limit))
    for a, b in zip(rows, rows[1:]):
        if b.abs_error > a.abs_error:
            flags.append(f"error grew from n={a.n} to n={b.n}")
    return CLTReport(tuple(rows), tuple(flags))


# ---------------------------------------------------------------------------
# Block partition


@dataclass(frozen=True)
class BlockPartitionParams:
    size: int
    p: int
    q: int
    m: int
    blocks: tuple  # (("J", Interval), ("L", Interval), ...) left to right
    log_base: str = "e"

    @property
    def J(self) -> list:
        return [b for k, b in self.blocks if k == "J"]

    @property
    def L(self) -> list:
        return [b for k, b in self.blocks if k == "L"]

    @property
    def remainder(self) -> int:
        return self.size - self.m * (self.p + self.q)

    @property
    def bound_factor(self) -> float:
        """(q m + p + q) / |I_n|, the factor in the commutator bounds."""
        return (self.q * self.m + self.p + self.q) / self.size

    def positions(self, kind: str) -> list:
        return [j for k, b in self.blocks if k == kind for j in b]

    def to_json(self) -> dict:
        return {
            "size": self.size, "p": self.p, "q": self.q, "m": self.m, "log_base": self.log_base,
            "blocks": [[k, b.to_json()] for k, b in self.blocks],
        }


def _layout(size: int, p: int, q: int, offset: int = 1) -> tuple:
    m = size // (p + q)
    blocks, pos = [], offset
    for _ in range(m):
        blocks.append(("J", Interval(pos, pos + p - 1)))
        pos += p
        blocks.append(("L", Interval(pos, pos + q - 1)))
        pos += q
    blocks.append(("L", Interval(pos, offset + size - 1)))
    return m, tuple(blocks)


def explicit_partition(size: int, p: int, q: int, offset: int = 1) -> BlockPartitionParams:
    """J/L layout of [offset..offset+size-1] with chosen block sizes."""
    if p < 1 or q < 1:
        raise DegeneratePartitionError(f"block sizes must be positive, got p={p}, q={q}")
    if size < p + q:
        raise DegeneratePartitionError(f"size {size} cannot hold one J and one L block")
    m, blocks = _layout(size, p, q, offset)
    return BlockPartitionParams(size, p, q, m, blocks, "explicit")


def block_partition(size: int, offset: int = 1) -> BlockPartitionParams:
    """p = floor(N^{1/4} ln N), q = floor(sqrt(N)/p), m = floor(N/(p+q)) and the layout."""
    size = int(size)
    if size < 2:
        raise DegeneratePartitionError(f"size {size} is too small for a block partition")
    p = math.floor(size**0.25 * math.log(size))
    if p < 1:
        raise DegeneratePartitionError(f"p = {p} at size {size}")
    q = math.floor(math.sqrt(size) / p)
    if q < 1:
        raise DegeneratePartitionError(
            f"q = floor(sqrt({size})/{p}) = 0; every size from 5476 on works"
        )
    m, blocks = _layout(size, p, q, offset)
    return BlockPartitionParams(size, p, q, m, blocks, "e")


# ---------------------------------------------------------------------------
# Commutator diagnostics


def _norm(m) -> float:
    """Operator norm; (anti-)Hermitian inputs, e.g. commutators, go through eigvalsh."""
    if not m.size:
        return 0.0
    mh = m.conj().T
    scale = max(1.0, float(np.abs(m).max()))
    if np.allclose(m, mh, rtol=0, atol=1e-13 * scale):
        return float(np.abs(np.linalg.eigvalsh(m)).max())
    if np.allclose(m, -mh, rtol=0, atol=1e-13 * scale):
        return float(np.abs(np.linalg.eigvalsh(1j * m)).max())
    return float(np.linalg.norm(m, 2))


def _comm(a, b):
    return a @ b - b @ a


def _pair_window(*obs: LocalObservable) -> Interval:
    return Interval(min(o.support.lo for o in obs), max(o.support.hi for o in obs))


def commutator_sum(x: LocalObservable, y: LocalObservable) -> float:
    """sum_k |[gamma_k(x), y]| (finitely many nonzero terms)."""
    d = x.site_dim
    total = 0.0
    for k in range(y.support.lo - x.support.hi, y.support.hi - x.support.lo + 1):
        xs = x.shifted(k)
        w = _pair_window(xs, y)
        total += _norm(_comm(_embed(xs, w, d), _embed(y, w, d)))
    return total


def double_commutator_sum(y: LocalObservable, z: LocalObservable, x: LocalObservable) -> float:
    """sum_{k1,k2} |[gamma_{k1}(y), [gamma_{k2}(z), x]]|."""
    d = x.site_dim
    total = 0.0
    for k2 in range(x.support.lo - z.support.hi, x.support.hi - z.support.lo + 1):
        zs = z.shifted(k2)
        inner_w = _pair_window(zs, x)
        for k1 in range(inner_w.lo - y.support.hi, inner_w.hi - y.support.lo + 1):
            ys = y.shifted(k1)
            w = _pair_window(ys, zs, x)
            inner = _comm(_embed(zs, w, d), _embed(x, w, d))
            total += _norm(_comm(_embed(ys, w, d), inner))
    return total


def lie_defect(a: np.ndarray, b: np.ndarray) -> float:
    """|e^{ia} e^{ib} - e^{i(a+b)} e^{-[a,b]/2}| for Hermitian a, b."""
    lhs = _expih(a) @ _expih(b)
    # -[a,b]/2 = i * (i[a,b]/2) with i[a,b] Hermitian
    rhs = _expih(a + b) @ _expih(0.5j * _comm(a, b))
    return _norm(lhs - rhs)


@dataclass(frozen=True)
class DecayRow:
    n: int
    partition: BlockPartitionParams
    bound_jl: float          # bound on |[s^J(x), s^L(y)]|
    bound_ljj: float         # bound on |[s^L(x), [s^J(y), s^J(z)]]|
    actual_jl: float | None = None
    actual_ljj: float | None = None
    lie_defect: float | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n, "p": self.partition.p, "q": self.partition.q, "m": self.partition.m,
            "log_base": self.partition.log_base,
            "bound_jl": self.bound_jl, "bound_ljj": self.bound_ljj,
            "actual_jl": self.actual_jl, "actual_ljj": self.actual_ljj,
            "lie_defect": self.lie_defect,
        }


def _small_partition(n: int) -> BlockPartitionParams:
    """Fallback J/L layout when the closed-form one degenerates (small n)."""
    p = max(1, math.isqrt(n) - 1)
    return explicit_partition(n, p, 1)


def decay_report(
    chain,
    x: LocalObservable,
    y: LocalObservable,
    n_list: Sequence[int],
    z: LocalObservable | None = None,
    partitions: Mapping[int, tuple] | None = None,
    dense: bool | None = None,
) -> list[DecayRow]:
    """Commutator bounds per n, with measured norms where a dense model fits.

    bound_jl  = (qm+p+q)/N * sum_k |[gamma_k(x), y]|
    bound_ljj = (qm+p+q)/N^{3/2} * (C(y,z) + C(z,y)), C(y,z) = sum |[gamma y, [gamma z, x]]|,
    the second from the Jacobi identity.  ``partitions`` maps n to explicit
    (p, q); otherwise the closed form is used, falling back to a small
    explicit layout where it degenerates.  The measured norms and the defect
    |L(F_n(x), F_n(y))| are computed when the chain hosts all shifts and the
    dimension fits the dense bound (or when ``dense`` is forced).
    """
    z = x if z is None else z
    c1 = commutator_sum(x, y)
    c2 = double_commutator_sum(y, z, x) + double_commutator_sum(z, y, x)
    rows = []
    for n in (int(v) for v in n_list):
        if partitions and n in partitions:
            part = explicit_partition(n, *partitions[n])
        else:
            try:
                part = block_partition(n)
            except DegeneratePartitionError:
                part = _small_partition(n)
        f = part.bound_factor
        b1 = f * c1
        b2 = (part.q * part.m + part.p + part.q) / n**1.5 * c2
        actual1 = actual2 = defect = None
        I_n = Interval(1, n)
        want_dense = dense
        if want_dense is None:
            try:
                win = _window(chain, [x, y, z], I_n)
                want_dense = chain.site_dim ** len(win) <= config.DENSE_MAX_DIM
            except DomainError:
                want_dense = False
        if want_dense:
            win = _window(chain, [x, y, z], I_n)
            _check_dim(chain.site_dim, len(win), config.DENSE_MAX_DIM, "decay dense path")
            J, L = part.positions("J"), part.positions("L")
            sJx = block_sum(chain, x, J, n, win)
            sLx = block_sum(chain, x, L, n, win)
            sJy = block_sum(chain, y, J, n, win)
            sLy = block_sum(chain, y, L, n, win)
            sJz = block_sum(chain, z, J, n, win)
            actual1 = _norm(_comm(sJx, sLy))
            actual2 = _norm(_comm(sLx, _comm(sJy, sJz)))
            defect = lie_defect(sJx + sLx, sJy + sLy)
        rows.append(DecayRow(n, part, b1, b2, actual1, actual2, defect))
    return rows


# ---------------------------------------------------------------------------
# Ergodic averages


def _resolve_x(x_spec, n: int):
    if x_spec is None or (isinstance(x_spec, str) and x_spec == "identity"):
        return None
    if callable(x_spec) and not isinstance(x_spec, LocalObservable):
        return x_spec(n)
    return x_spec


def ergodic_residual(chain, x_spec, y: LocalObservable, n: int) -> float:
    """|chi(x_n e^{(1/n) sum_{k in [1..n]} gamma_k(y)}) - chi(x_n) e^{chi(y)}|.

    ``x_spec`` is ``None``/``"identity"`` (x_n = 1), a fixed
    :class:`LocalObservable`, or a callable n -> LocalObservable.  The scalar
    part chi(y) is factored out exactly before exponentiating.
    """
    n = int(n)
    x = _resolve_x(x_spec, n)
    I_n = Interval(1, n)
    mean_y = chain.expect(y)
    y0 = chain.centered(y)
    scale = abs(np.exp(mean_y))
    if not np.any(y0):
        return 0.0
    chi_x = 1 + 0j if x is None else chain.expect(x)
    _window(chain, [y], I_n)
    if y.width == 1 and (x is None or x.width == 1):
        site_factor = _exph(y0, 1 / n)
        g = complex(np.trace(chain.site_density @ site_factor))
        if x is None:
            value = g**n
        else:
            site = x.support.lo
            if y.support.lo + 1 <= site <= y.support.lo + n:
                value = complex(np.trace(chain.site_density @ x.matrix @ site_factor)) * g ** (n - 1)
            else:
                value = chi_x * g**n
        return float(scale * abs(value - chi_x))
    lo = min([I_n.lo + y.support.lo] + ([x.support.lo] if x is not None else []))
    hi = max([I_n.hi + y.support.hi] + ([x.support.hi] if x is not None else []))
    if lo < 1 or hi > chain.n_sites:
        raise DomainError("chain too short for the ergodic average")
    window = Interval(lo, hi)
    _check_dim(chain.site_dim, len(window), config.DENSE_MAX_DIM, "ergodic dense path")
    d = chain.site_dim
    avg = np.zeros((d ** len(window),) * 2, dtype=complex)
    yc = LocalObservable(y.support, y0, y.self_adjoint)
    for k in I_n:
        avg += _embed(yc.shifted(k), window, d)
    avg /= n
    E = _exph(avg)
    X = np.eye(E.shape[0]) if x is None else _embed(x, window, d)
    value = chain.state_of(X @ E, len(window))
    return float(scale * abs(value - chi_x))
