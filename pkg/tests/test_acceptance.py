"""Acceptance criteria AC1-AC13; conftest prints one PASS/FAIL line per criterion."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from qchar.ccr import covariance, kernel_psd_check, weyl_moment, wick_moment, wick_moment_fd
from qchar.characters import CharacterTable, VoiculescuParams, character_table, multiplicativity_residual
from qchar.fluctsim import (
    LocalObservable,
    QuasiLocalChain,
    block_partition,
    clt_report,
    decay_report,
)
from qchar.kms import (
    Block,
    build_branching_model,
    factorization_residual,
    kms_residual,
    ocha_residual,
    random_element,
)
from qchar.partitions import (
    Interval,
    Signature,
    branching_residual,
    enumerate_signatures,
    lr_coefficient,
    lr_coefficient_bruteforce,
    quantum_dimension,
)
from qchar.qpoly import Q, RationalFunction
from qchar.repring import structure_weight

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def partitions_of(weight, rows):
    return [s.parts for s in enumerate_signatures(Interval.base(rows), 0, weight, weight) if s.weight == weight]


def splits(max_total):
    return [(a, n - a) for n in range(2, max_total + 1) for a in range(1, n)]


def lr_pairs(nu, a, b):
    """All (lam, mu, c) with c^nu_{lam,mu} > 0 on I = [1..a], J = [a+1..a+b]."""
    I, J = Interval(1, a), Interval(a + 1, a + b)
    out = []
    for lam in enumerate_signatures(I, 0, nu.weight, nu.weight):
        for mu in enumerate_signatures(J, 0, nu.weight - lam.weight, nu.weight - lam.weight):
            if lam.weight + mu.weight == nu.weight:
                c = lr_coefficient(lam, mu, nu)
                if c:
                    out.append((lam, mu, c))
    return out


# ---------------------------------------------------------------- AC1


def test_ac1_lr_rule_matches_alternant_oracle():
    start = time.perf_counter()
    checked = mismatches = 0
    for n in range(9):
        for nu in partitions_of(n, 4):
            V = Signature.of(nu + (0,) * 4)
            for k in range(n + 1):
                for lam in partitions_of(k, 4):
                    for mu in partitions_of(n - k, 4):
                        L, M = Signature.of(lam), Signature.of(mu, lo=5)
                        checked += 1
                        if lr_coefficient(L, M, V) != lr_coefficient_bruteforce(L, M, V, n_vars=4):
                            mismatches += 1
    elapsed = time.perf_counter() - start
    print(f"AC1: {checked} triples, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert checked > 4000
    assert elapsed < 60


# ---------------------------------------------------------------- AC2


def test_ac2_branching_identity_exact():
    rnd = random.Random(7)
    cases = 0
    for a, b in splits(4):
        n = a + b
        for w in range(7):
            for nu in partitions_of(w, n):
                pts = [[Fraction(rnd.randint(-9, 9), rnd.randint(1, 9)) for _ in range(n)] for _ in range(5)]
                assert branching_residual(Signature.of(nu), (a, b), pts) == 0
                cases += 1
    print(f"AC2: {cases} (nu, split) cases, residual exactly 0")


# ---------------------------------------------------------------- AC3


def test_ac3_q_dimension_identity_formal():
    cases = 0
    for a, b in splits(4):
        for w in range(7):
            for parts in partitions_of(w, a + b):
                nu = Signature.of(parts)
                rhs = RationalFunction(0)
                for lam, mu, c in lr_pairs(nu, a, b):
                    rhs = rhs + c * Q ** (lam.weight * b - mu.weight * a) * quantum_dimension(lam) * quantum_dimension(mu)
                assert rhs == quantum_dimension(nu)
                cases += 1
    print(f"AC3: {cases} identities exact in Q(q)")


# ---------------------------------------------------------------- AC4


def test_ac4_weight_normalization_formal():
    one = RationalFunction(1)
    cases = 0
    for a, b in splits(4):
        for w in range(7):
            for parts in partitions_of(w, a + b):
                nu = Signature.of(parts)
                total = RationalFunction(0)
                for lam, mu, _ in lr_pairs(nu, a, b):
                    total = total + structure_weight(nu, lam, mu)
                assert total == one
                cases += 1
    print(f"AC4: {cases} normalizations exact in Q(q)")


# ---------------------------------------------------------------- AC5


def test_ac5_character_tables():
    zero = VoiculescuParams()
    for q in (1.0, 0.6):
        for I in (Interval(1, 1), Interval(1, 3), Interval(2, 3)):
            t = character_table(zero, q, I, 5)
            for parts, v in t.values.items():
                assert v == (1.0 if not any(parts) else 0.0)
    t = character_table(VoiculescuParams(gamma_plus=1.0), 1.0, Interval(1, 1), 12)
    worst = max(abs(t.value((k,)) - math.exp(-1) / math.factorial(k)) for k in range(11))
    print(f"AC5: Plancherel max error {worst:.2e}, mass at cut 12 = {t.mass:.12f}")
    assert worst <= 1e-12
    assert t.mass >= 0.999


# ---------------------------------------------------------------- AC6


@pytest.mark.parametrize("q", [1.0, 0.6])
@pytest.mark.parametrize("name", ["plancherel", "beta"])
def test_ac6_multiplicativity(name, q):
    omega = VoiculescuParams(gamma_plus=1.0) if name == "plancherel" else VoiculescuParams(beta_plus=(0.5,))
    for cut in range(1, 9):
        tabs = [character_table(omega, q, I, cut) for I in (Interval(1, 1), Interval(2, 2), Interval(1, 2))]
        rep = multiplicativity_residual(*tabs)
        assert rep.residual <= rep.tail_bound + 1e-8, (cut, rep)
    print(f"AC6 {name} q={q}: cut 8 residual {rep.residual:.2e}, tail {rep.tail_bound:.2e}")


@pytest.mark.parametrize("q", [1.0, 0.6])
@pytest.mark.parametrize("name", ["plancherel", "beta"])
def test_ac6_negative_control(name, q):
    omega = VoiculescuParams(gamma_plus=1.0) if name == "plancherel" else VoiculescuParams(beta_plus=(0.5,))
    tI, tJ, tIJ = (character_table(omega, q, I, 8) for I in (Interval(1, 1), Interval(2, 2), Interval(1, 2)))
    delta = 10 * (tIJ.tail + 1e-5)
    bad = tIJ.with_value((1, 0), tIJ.value((1, 0)) + delta)
    rep = multiplicativity_residual(tI, tJ, bad)
    assert rep.residual > 1e-5
    assert not rep.ok


# ---------------------------------------------------------------- AC7


def test_ac7_kms_identity_random_blocks():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        d = int(rng.integers(1, 7))
        beta = (-1.0, -0.5, 0.0)[i % 3]
        block = Block(f"b{i}", rng.uniform(0.05, 5.0, size=d))
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        worst = max(worst, kms_residual(block, beta, x, y))
    print(f"AC7: worst KMS residual {worst:.2e}")
    assert worst <= 1e-12


@pytest.mark.parametrize("q", [0.5, 0.7, 1.0])
def test_ac7_conditional_expectation_on_branching_models(q):
    rng = np.random.default_rng(int(q * 10))
    worst = 0.0
    for sizes in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)]:
        model = build_branching_model(q, sizes, 4, seed=11)
        for _ in range(5):
            x = random_element(model.left, rng, hermitian=False)
            y = random_element(model.right, rng, hermitian=False)
            worst = max(worst, ocha_residual(model, x, y))
    print(f"AC7 q={q}: worst E_IJ(xy) - E(E_I(x)E_J(y)) residual {worst:.2e}")
    assert worst <= 1e-12


# ---------------------------------------------------------------- AC8


def test_ac8_induced_state_factorizes():
    model = build_branching_model(1.0, (2, 1), 8, seed=0)
    table = character_table(VoiculescuParams(gamma_plus=1.0), 1.0, model.joint.interval, 8)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        x, y = random_element(model.left, rng), random_element(model.right, rng)
        rep = factorization_residual(model, table, x, y)
        worst = max(worst, rep.residual)
        assert rep.residual <= rep.tail_bound + 1e-8
    print(f"AC8: worst |chi(xy) - chi(x)chi(y)| = {worst:.2e}")


def test_ac8_negative_control_mixture():
    """A mixture of two characters is not multiplicative and must be flagged."""
    model = build_branching_model(1.0, (1, 1), 12, seed=0)
    a = character_table(VoiculescuParams(gamma_plus=1.0), 1.0, model.joint.interval, 12)
    b = character_table(VoiculescuParams(beta_plus=(0.5,)), 1.0, model.joint.interval, 12)
    mix = CharacterTable(1.0, a.omega, a.interval, 12, {k: 0.5 * a.values[k] + 0.5 * b.value(k) for k in a.values})
    rng = np.random.default_rng(9)
    flagged = 0
    for _ in range(20):
        x, y = random_element(model.left, rng), random_element(model.right, rng)
        flagged += not factorization_residual(model, mix, x, y).ok
    assert flagged >= 15


# ---------------------------------------------------------------- AC9


def _covariances():
    chains = [
        QuasiLocalChain.qubit(4, 0.3),
        QuasiLocalChain.pure_qubit(4, math.pi / 6, math.pi / 4),
        QuasiLocalChain(2, np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]]), 4),
    ]
    observables = [
        LocalObservable(Interval(0, 0), Z, label="a"),
        LocalObservable(Interval(0, 0), 0.7 * X + 0.2 * Y, label="b"),
        LocalObservable(Interval(0, 1), 0.5 * np.kron(X, X), label="c"),
        LocalObservable(Interval(0, 1), 0.5 * np.kron(Y, Z) + 0.5 * np.kron(Z, Y), label="d"),
    ]
    return [covariance(ch, observables) for ch in chains]


def test_ac9_wick_weyl_consistency():
    rnd = random.Random(9)
    worst = 0.0
    for cov in _covariances():
        assert kernel_psd_check(cov) >= -1e-10
        scale = max(1.0, float(np.abs(cov.kernel()).max()))
        words = [[l] for l in cov.labels]
        words += [[rnd.choice(cov.labels) for _ in range(k)] for k in (2, 3, 4) for _ in range(6)]
        for w in words:
            m = wick_moment(cov, w)
            if len(w) % 2:
                assert m == 0
            fd = wick_moment_fd(cov, w)
            rel = abs(fd - m) / max(abs(m), scale ** (len(w) / 2))
            worst = max(worst, rel)
    print(f"AC9: worst relative FD-vs-Wick gap {worst:.2e}")
    assert worst <= 1e-6


# ---------------------------------------------------------------- AC10


def test_ac10_commuting_regime():
    start = time.perf_counter()
    chain = QuasiLocalChain.qubit(10**4 + 1, 0.3)
    x = LocalObservable(Interval(0, 0), Z + 0.5 * X, label="x")
    rep = clt_report(chain, [x], [10**2, 10**3, 10**4], method="product")
    scaled = [r.abs_error * math.sqrt(r.n) for r in rep.rows]
    elapsed = time.perf_counter() - start
    print(f"AC10: errors {rep.errors}, error*sqrt(n) {scaled}, {elapsed:.2f}s")
    assert rep.rows[-1].abs_error < 1e-2
    assert max(scaled) <= 2 * min(scaled)
    assert elapsed < 60


# ---------------------------------------------------------------- AC11


def test_ac11_noncommutative_regime():
    # documented pair: x = XX/2, y = YY/2 on a pure product state; F_14 of a
    # width-2 observable occupies 15 sites
    chain = QuasiLocalChain.pure_qubit(15, math.pi / 6, math.pi / 4)
    x = LocalObservable(Interval(0, 1), 0.5 * np.kron(X, X), label="x")
    y = LocalObservable(Interval(0, 1), 0.5 * np.kron(Y, Y), label="y")
    cov = covariance(chain, [x, y])
    assert abs(cov.sigma[0, 1]) > 1e-3
    rep = clt_report(chain, [x, y], [6, 14])
    e6, e14 = rep.errors
    print(f"AC11: sigma(x,y) = {cov.sigma[0, 1]:.4f}, error n=6 {e6:.4f}, n=14 {e14:.4f}")
    assert e14 < e6
    assert e14 < 0.1


# ---------------------------------------------------------------- AC12


def test_ac12_block_partition_and_bounds():
    bp = block_partition(10**4)
    assert (bp.p, bp.q, bp.m) == (92, 1, 107)
    x = LocalObservable(Interval(0, 1), 0.5 * np.kron(X, X), label="x")
    y = LocalObservable(Interval(0, 1), 0.5 * np.kron(Y, Y), label="y")
    chain = QuasiLocalChain.pure_qubit(10, math.pi / 6, math.pi / 4)
    large = decay_report(chain, x, y, [10**k for k in range(4, 9)])
    for a, b in zip(large, large[1:]):
        assert b.bound_jl < a.bound_jl
        assert b.bound_ljj < a.bound_ljj
    dense = decay_report(chain, x, y, range(3, 9))
    for r in dense:
        assert r.actual_jl is not None
        assert r.actual_jl <= r.bound_jl
        assert r.actual_ljj <= r.bound_ljj
    defects = [r.lie_defect for r in dense]
    print(f"AC12: bounds {[(r.bound_jl, r.bound_ljj) for r in large]}, defects {defects}")
    assert all(b < a for a, b in zip(defects, defects[1:]))


# ---------------------------------------------------------------- AC13


def test_ac13_tracial_states_have_no_symplectic_part():
    rng = np.random.default_rng(13)
    chains = [QuasiLocalChain.qubit(6, 0.5), QuasiLocalChain(3, np.eye(3) / 3, 6)]
    worst_sigma = worst_imag = 0.0
    for chain in chains:
        d = chain.site_dim
        obs = []
        for i in range(4):
            w = 1 + i % 2
            m = rng.normal(size=(d**w, d**w)) + 1j * rng.normal(size=(d**w, d**w))
            obs.append(LocalObservable(Interval(0, w - 1), (m + m.conj().T) / 2, label=f"o{i}"))
        cov = covariance(chain, obs)
        worst_sigma = max(worst_sigma, float(np.abs(cov.sigma).max()))
        for _ in range(20):
            k = int(rng.integers(1, 5))
            word = [(cov.labels[int(j)], float(t)) for j, t in zip(rng.integers(0, 4, size=k), rng.normal(size=k))]
            worst_imag = max(worst_imag, abs(weyl_moment(cov, word).imag))
    print(f"AC13: max |sigma| {worst_sigma:.2e}, max |Im phi(w...)| {worst_imag:.2e}")
    assert worst_sigma <= 1e-12
    assert worst_imag <= 1e-12
    # control: a non-tracial state does carry a symplectic part
    pure = QuasiLocalChain.pure_qubit(4, math.pi / 6, math.pi / 4)
    xx = LocalObservable(Interval(0, 1), 0.5 * np.kron(X, X), label="x")
    yy = LocalObservable(Interval(0, 1), 0.5 * np.kron(Y, Y), label="y")
    assert abs(covariance(pure, [xx, yy]).sigma[0, 1]) > 1e-3
