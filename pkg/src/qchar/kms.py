"""Finite block models of local algebras with a modular flow.

A block carries the diagonal of its modular element rho.  The flow is
alpha_t = Ad(rho^{-it}), so alpha_{i beta}(y) = rho^beta y rho^{-beta} and the
unique KMS state at inverse temperature beta has density rho^beta / Tr rho^beta.
At beta = -1 this is Tr(rho^{-1} .)/d_q(lambda) on a quantum-group block.

The branching model realizes V_nu restricted to U(I) x U(J) as the direct sum
of V_lambda (x) V_mu (x) C^{c^nu_{lambda,mu}} with
rho_nu = q^{-(|lambda||J| - |mu||I|)} rho_lambda (x) rho_mu on each summand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.stats import unitary_group

from . import config
from .errors import DomainError, ResourceLimitError
from .partitions import Interval, Signature, enumerate_signatures, lr_product
from .partitions import _ssyt_terms
from .repring import CenterVector

__all__ = [
    "Block",
    "BlockAlgebra",
    "BranchingModel",
    "FactorizationReport",
    "gibbs_state",
    "kms_residual",
    "conditional_expectation",
    "center_element",
    "build_branching_model",
    "ocha_residual",
    "factorization_residual",
    "random_element",
    "element_norm",
]


def _weight_exponents(lam: Signature) -> np.ndarray:
    """Exponents k of the eigenvalues q^k of rho on V_lambda, one per tableau."""
    n = len(lam)
    c = lam.last
    coeff = np.array([2 * j - n - 1 for j in range(1, n + 1)], dtype=np.int64)
    out = []
    for content, count in _ssyt_terms(tuple(p - c for p in lam.parts)):
        k = int(np.dot(coeff, content)) if n else 0
        out.extend([k] * count)
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Block:
    """One matrix block with the diagonal of its modular element.

    In quantum-group mode ``exponents`` holds integers k with weights q^k.
    """

    label: Hashable
    modular_weights: np.ndarray
    exponents: np.ndarray | None = None
    q: float | None = None

    def __post_init__(self):
        w = np.asarray(self.modular_weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise DomainError("modular weights must be a nonempty vector")
        if not np.all(w > 0):
            raise DomainError("modular weights must be strictly positive")
        object.__setattr__(self, "modular_weights", w)

    @property
    def dim(self) -> int:
        return len(self.modular_weights)

    @classmethod
    def quantum(cls, lam: Signature, q: float) -> "Block":
        """The block of V_lambda for U_q(I), weights from the tableau contents."""
        if not q > 0:
            raise DomainError("q must be positive")
        ex = _weight_exponents(lam)
        return cls(lam, float(q) ** ex.astype(float), ex, float(q))

    def reweighted(self, weights) -> "Block":
        return Block(self.label, weights)


@dataclass(frozen=True, eq=False)
class BlockAlgebra:
    """Finite direct sum of matrix blocks; an element is a ``{label: matrix}`` mapping."""

    blocks: tuple
    beta: float = -1.0
    interval: Interval | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        labels = [b.label for b in self.blocks]
        if len(set(labels)) != len(labels):
            raise DomainError("block labels must be distinct")
        object.__setattr__(self, "_index", {b.label: b for b in self.blocks})

    def block(self, label) -> Block:
        return self._index[label]

    @property
    def labels(self) -> list:
        return [b.label for b in self.blocks]

    @property
    def total_dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def identity(self) -> dict:
        return {b.label: np.eye(b.dim) for b in self.blocks}


def gibbs_state(block: Block, beta: float) -> np.ndarray:
    """Diagonal of the density rho^beta / Tr rho^beta."""
    if block.exponents is not None and block.q is not None:
        # work with exponents to avoid overflow of q^k for large |k|
        logs = beta * block.exponents * np.log(block.q)
    else:
        logs = beta * np.log(block.modular_weights)
    w = np.exp(logs - logs.max())
    return w / w.sum()


def _rho_power(block: Block, beta: float) -> np.ndarray:
    if block.exponents is not None and block.q is not None:
        return np.exp(beta * block.exponents * np.log(block.q))
    return block.modular_weights ** beta


def kms_residual(block: Block, beta: float, x, y, density=None) -> float:
    """|chi(x alpha_{i beta}(y)) - chi(y x)| for the state with the given density.

    ``density`` defaults to the Gibbs density; passing another diagonal gives
    the negative control.
    """
    x, y = np.asarray(x), np.asarray(y)
    d = gibbs_state(block, beta) if density is None else np.asarray(density, dtype=float)
    r = _rho_power(block, beta)
    ay = (r[:, None] * y) / r[None, :]
    lhs = np.sum(d * np.einsum("ij,ji->i", x, ay))
    rhs = np.sum(d * np.einsum("ij,ji->i", y, x))
    return float(abs(lhs - rhs))


def block_state(block: Block, beta: float, x) -> complex:
    """chi_z(x) = Tr(D x) on a single block."""
    return complex(np.dot(gibbs_state(block, beta), np.diagonal(np.asarray(x))))


def conditional_expectation(alg: BlockAlgebra, x: Mapping):
    """Center-valued E(x) = sum_z chi_z(z x) z.

    Returns a :class:`CenterVector` when blocks are labeled by signatures on
    ``alg.interval``, otherwise a ``{label: coefficient}`` dict.
    """
    missing = set(x) - set(alg.labels)
    if missing:
        raise DomainError(f"element has blocks {missing} not in the algebra")
    coeffs = {}
    for b in alg.blocks:
        xb = x.get(b.label)
        if xb is None:
            continue
        xb = np.asarray(xb)
        if xb.shape != (b.dim, b.dim):
            raise DomainError(f"block {b.label!s} expects shape {(b.dim, b.dim)}, got {xb.shape}")
        v = block_state(b, alg.beta, xb)
        coeffs[b.label] = v.real if abs(v.imag) <= 1e-15 * max(1.0, abs(v.real)) else v
    if alg.interval is not None and all(isinstance(l, Signature) for l in coeffs):
        return CenterVector(alg.interval, coeffs)
    return coeffs


def center_element(alg: BlockAlgebra, coeffs) -> dict:
    """Embed center coefficients as the element sum_z c_z z."""
    if isinstance(coeffs, CenterVector):
        coeffs = coeffs.coeffs
    return {b.label: coeffs.get(b.label, 0) * np.eye(b.dim) for b in alg.blocks}


def random_element(alg: BlockAlgebra, rng: np.random.Generator, hermitian: bool = True) -> dict:
    out = {}
    for b in alg.blocks:
        m = rng.normal(size=(b.dim, b.dim)) + 1j * rng.normal(size=(b.dim, b.dim))
        out[b.label] = (m + m.conj().T) / 2 if hermitian else m
    return out


def element_norm(x: Mapping) -> float:
    """Operator norm of a block-diagonal element (max over blocks)."""
    return max((float(np.linalg.norm(m, 2)) for m in x.values()), default=0.0)


def _center_distance(a, b) -> float:
    a = a.coeffs if isinstance(a, CenterVector) else a
    b = b.coeffs if isinstance(b, CenterVector) else b
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0) - b.get(k, 0)) for k in keys), default=0.0)


# ---------------------------------------------------------------------------
# Branching model


@dataclass(frozen=True)
class Component:
    lam: Signature
    mu: Signature
    copy: int
    offset: int
    shift: int  # rho_nu = q^{-shift} rho_lam (x) rho_mu here


@dataclass(frozen=True, eq=False)
class BranchingModel:
    q: float
    sizes: tuple
    weight_cut: int
    left: BlockAlgebra
    right: BlockAlgebra
    joint: BlockAlgebra
    components: dict  # nu -> tuple[Component]
    bases: dict = field(default_factory=dict)  # nu -> unitary commuting with rho_nu

    @property
    def I(self) -> Interval:
        return self.left.interval

    @property
    def J(self) -> Interval:
        return self.right.interval

    def _embed(self, x: Mapping, side: str) -> dict:
        out = {}
        for nu, comps in self.components.items():
            d = self.joint.block(nu).dim
            m = np.zeros((d, d), dtype=complex)
            for c in comps:
                dl, dm = self.left.block(c.lam).dim, self.right.block(c.mu).dim
                if side == "left":
                    piece = np.kron(np.asarray(x[c.lam]), np.eye(dm))
                else:
                    piece = np.kron(np.eye(dl), np.asarray(x[c.mu]))
                m[c.offset:c.offset + dl * dm, c.offset:c.offset + dl * dm] = piece
            u = self.bases.get(nu)
            out[nu] = m if u is None else u @ m @ u.conj().T
        return out

    def embed_left(self, x: Mapping) -> dict:
        """x in M_I as an element of the joint algebra (x (x) 1)."""
        return self._embed(x, "left")

    def embed_right(self, y: Mapping) -> dict:
        return self._embed(y, "right")

    def product(self, a: Mapping, b: Mapping) -> dict:
        return {k: np.asarray(a[k]) @ np.asarray(b[k]) for k in a}

    def shifted(self, k: int) -> "BranchingModel":
        """Same model with all intervals moved by k (labels relabeled)."""
        def move(alg: BlockAlgebra) -> BlockAlgebra:
            I = alg.interval.shift(k)
            blocks = [Block(b.label.relabel(I), b.modular_weights, b.exponents, b.q) for b in alg.blocks]
            return BlockAlgebra(blocks, alg.beta, I)

        left, right, joint = move(self.left), move(self.right), move(self.joint)
        comps = {
            nu.relabel(joint.interval): tuple(
                Component(c.lam.relabel(left.interval), c.mu.relabel(right.interval), c.copy, c.offset, c.shift)
                for c in cs
            )
            for nu, cs in self.components.items()
        }
        bases = {nu.relabel(joint.interval): u for nu, u in self.bases.items()}
        return BranchingModel(self.q, self.sizes, self.weight_cut, left, right, joint, comps, bases)


def _algebra(interval: Interval, q: float, cut: int, beta: float) -> BlockAlgebra:
    sigs = enumerate_signatures(interval, 0, cut, cut)
    return BlockAlgebra([Block.quantum(s, q) for s in sigs], beta, interval)


def build_branching_model(
    q: float, sizes: Sequence[int], weight_cut: int, beta: float = -1.0, seed: int | None = None
) -> BranchingModel:
    """Block models of M_I, M_J (I = [1..a], J = [a+1..a+b]) and the joint algebra
    on [1..a+b], each truncated to partitions of weight at most ``weight_cut``.

    With ``seed`` the multiplicity spaces get a random orthonormal basis that
    still diagonalizes rho_nu; every state value is independent of that choice.
    """
    a, b = (int(s) for s in sizes)
    if a < 1 or b < 1:
        raise DomainError("both interval sizes must be positive")
    if weight_cut < 0:
        raise DomainError("weight_cut must be nonnegative")
    if not q > 0:
        raise DomainError("q must be positive")
    I, J, IJ = Interval(1, a), Interval(a + 1, a + b), Interval(1, a + b)
    joint_sigs = enumerate_signatures(IJ, 0, weight_cut, weight_cut)
    total = 0
    for nu in joint_sigs:
        total += sum(c for _, c in _ssyt_terms(nu.parts))
        if total > config.BRANCHING_MAX_DIM:
            raise ResourceLimitError(
                f"joint algebra dimension exceeds {config.BRANCHING_MAX_DIM} at cut {weight_cut}"
            )
    left, right = _algebra(I, q, weight_cut, beta), _algebra(J, q, weight_cut, beta)
    rng = np.random.default_rng(seed) if seed is not None else None
    blocks, comps, bases = [], {}, {}
    for nu in joint_sigs:
        pieces, exps, offset = [], [], 0
        for lam in left.labels:
            for mu in right.labels:
                if lam.weight + mu.weight != nu.weight:
                    continue
                c = lr_product(lam, mu, IJ).get(nu, 0)
                if not c:
                    continue
                shift = lam.weight * b - mu.weight * a
                bl, bm = left.block(lam), right.block(mu)
                ex = (bl.exponents[:, None] + bm.exponents[None, :]).ravel() - shift
                for k in range(c):
                    pieces.append(Component(lam, mu, k, offset, shift))
                    exps.append(ex)
                    offset += bl.dim * bm.dim
        ex = np.concatenate(exps)
        reference = _weight_exponents(nu)
        if Counter(ex.tolist()) != Counter(reference.tolist()):
            raise AssertionError(f"branching weights of {nu} do not match its tableau weights")
        blocks.append(Block(nu, float(q) ** ex.astype(float), ex, float(q)))
        comps[nu] = tuple(pieces)
        if rng is not None:
            u = np.zeros((len(ex), len(ex)), dtype=complex)
            for k in np.unique(ex):
                idx = np.flatnonzero(ex == k)
                u[np.ix_(idx, idx)] = (
                    unitary_group.rvs(len(idx), random_state=rng) if len(idx) > 1
                    else np.exp(2j * np.pi * rng.random())
                )
            bases[nu] = u
    joint = BlockAlgebra(blocks, beta, IJ)
    return BranchingModel(float(q), (a, b), weight_cut, left, right, joint, comps, bases)


def ocha_residual(model: BranchingModel, x: Mapping, y: Mapping) -> float:
    """Max-norm distance between E_joint(x y) and E_joint(E_I(x) E_J(y))."""
    xy = model.product(model.embed_left(x), model.embed_right(y))
    ex = center_element(model.left, conditional_expectation(model.left, x))
    ey = center_element(model.right, conditional_expectation(model.right, y))
    exy = model.product(model.embed_left(ex), model.embed_right(ey))
    return float(_center_distance(
        conditional_expectation(model.joint, xy), conditional_expectation(model.joint, exy)
    ))


@dataclass(frozen=True)
class FactorizationReport:
    residual: float
    tail_bound: float
    chi_xy: complex
    chi_x: complex
    chi_y: complex

    @property
    def ok(self) -> bool:
        return self.residual <= self.tail_bound + config.MULT_TOL


def induced_state(model: BranchingModel, table, a: Mapping) -> complex:
    """chi(a) = sum_nu table(nu) chi_{z_nu}(a_nu) on the joint algebra."""
    total = 0j
    for b in model.joint.blocks:
        t = table.value(b.label.parts)
        if t:
            total += t * block_state(b, model.joint.beta, a[b.label])
    return total


def factorization_residual(model: BranchingModel, table_IJ, x: Mapping, y: Mapping) -> FactorizationReport:
    """|chi(xy) - chi(x) chi(y)| for the state induced by ``table_IJ``.

    The truncated joint algebra misses the table mass outside it; that mass
    enters each of chi(xy), chi(x), chi(y) at most once, giving the bound
    3 |x| |y| (1 - kept mass).
    """
    if table_IJ.interval != model.joint.interval:
        raise DomainError(f"table on {table_IJ.interval}, model joint interval {model.joint.interval}")
    if abs(table_IJ.q - model.q) > 0:
        raise DomainError("table and model use different q")
    ex, ey = model.embed_left(x), model.embed_right(y)
    cxy = induced_state(model, table_IJ, model.product(ex, ey))
    cx = induced_state(model, table_IJ, ex)
    cy = induced_state(model, table_IJ, ey)
    kept = sum(table_IJ.value(b.label.parts) for b in model.joint.blocks)
    tail = 3 * element_norm(x) * element_norm(y) * max(0.0, 1.0 - kept)
    return FactorizationReport(float(abs(cxy - cx * cy)), tail, cxy, cx, cy)
