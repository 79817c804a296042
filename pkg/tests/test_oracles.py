import numpy as np
import pytest

from shadowkit import dense
from shadowkit.oracles import (
    GENUINE_TRIPARTITE_THRESHOLD,
    GHZ_CLASS_THRESHOLD,
    DenseOracle,
    MixtureOracle,
    StabilizerOracle,
    WitnessSpec,
    measure_after_clifford,
    measure_in_bases,
    noisy_ghz,
    parse_state_descriptor,
    rotated_ghz_state,
    rotated_ghz_witness,
    singlet_chain,
)
from shadowkit.tableau import CliffordTableau, StabilizerState, ghz_state, random_clifford

from conftest import born_probs_product_basis, dense_ghz


def test_noisy_ghz_endpoints():
    pure = noisy_ghz(4, 0.0)
    rho = pure.dense_rho()
    assert abs(dense.fidelity_with_pure(rho, dense_ghz(4)) - 1.0) < 1e-9
    flipped = noisy_ghz(4, 1.0)
    rho = flipped.dense_rho()
    assert abs(dense.fidelity_with_pure(rho, dense_ghz(4))) < 1e-9


def test_noisy_ghz_half():
    rho = noisy_ghz(3, 0.5).dense_rho()
    assert abs(dense.fidelity_with_pure(rho, dense_ghz(3)) - 0.5) < 1e-9


def test_noisy_ghz_bad_p():
    with pytest.raises(ValueError):
        noisy_ghz(3, 1.5)


def test_singlet_chain_facts():
    sc = singlet_chain(2)
    rho = sc.dense_rho()
    assert abs(dense.purity(rho) - 1.0) < 1e-9
    site = dense.partial_trace(rho, [0], 2)
    assert np.abs(site - np.eye(2) / 2).max() < 1e-9
    sc10 = singlet_chain(10)
    assert sc10.pairing == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
    with pytest.raises(ValueError):
        singlet_chain(5)
    with pytest.raises(ValueError):
        singlet_chain(4, [(0, 1), (1, 2)])


def test_measure_in_bases_trivial():
    zero = StabilizerOracle(StabilizerState.zero(1))
    rng = np.random.default_rng(0)
    assert measure_in_bases(zero, "Z", rng)[0] == 0
    draws = np.array([measure_in_bases(zero, "X", np.random.default_rng(i))[0] for i in range(400)])
    assert abs(draws.mean() - 0.5) < 3 * np.sqrt(0.25 / 400)


def test_measure_in_bases_ghz_zzz():
    g = StabilizerOracle(ghz_state(3))
    rng = np.random.default_rng(5)
    outs = g.sample_bases_batch(np.full((4000, 3), 3, dtype=np.uint8), rng)
    sums = outs.sum(axis=1)
    assert set(np.unique(sums)) <= {0, 3}
    assert abs((sums == 0).mean() - 0.5) < 3 * np.sqrt(0.25 / 4000)


def _tv_distance(oracle, rho, n, shots, seed):
    rng = np.random.default_rng(seed)
    mixed = "".join(np.random.default_rng(0).choice(list("XYZ"), n))
    worst = 0.0
    for bases in ("Z" * n, "X" * n, mixed):
        codes = np.array([{"X": 1, "Y": 2, "Z": 3}[c] for c in bases], dtype=np.uint8)
        outs = oracle.sample_bases_batch(np.tile(codes, (shots, 1)), rng)
        idx = outs @ (1 << np.arange(n - 1, -1, -1))
        counts = np.bincount(idx, minlength=2**n) / shots
        probs = born_probs_product_basis(rho, bases)
        worst = max(worst, 0.5 * np.abs(counts - probs).sum())
    return worst


@pytest.mark.parametrize(
    "make",
    [
        lambda: StabilizerOracle(ghz_state(4)),
        lambda: noisy_ghz(3, 0.35),
        lambda: singlet_chain(4),
        lambda: DenseOracle(np.linalg.qr(np.random.default_rng(7).normal(size=(8, 8)) * (1 + 0j))[0][:, 0]),
    ],
)
def test_every_kind_matches_dense_born(make):
    oracle = make()
    rho = oracle.dense_rho()
    tv = _tv_distance(oracle, rho, oracle.n, 100_000, seed=11)
    assert tv < 0.02, tv


def test_mixture_component_frequencies():
    zero = StabilizerOracle(StabilizerState.zero(1))
    one = _basis_one()
    mix = MixtureOracle([(0.3, zero), (0.7, one)], "mix")
    rng = np.random.default_rng(13)
    outs = mix.sample_bases_batch(np.full((20_000, 1), 3, dtype=np.uint8), rng)
    frac_one = outs.mean()
    assert abs(frac_one - 0.7) < 3 * np.sqrt(0.3 * 0.7 / 20_000)


def _basis_one():
    from shadowkit.tableau import basis_state

    return StabilizerOracle(basis_state(np.array([1], dtype=np.uint8)))


def test_haar_average_is_maximally_mixed():
    rng = np.random.default_rng(17)
    acc = np.zeros((2, 2), dtype=complex)
    draws = 10_000
    for _ in range(draws):
        v = dense.haar_unitary_2x2(rng)
        acc += v @ np.array([[1, 0], [0, 0]]) @ v.conj().T
    assert np.abs(acc / draws - np.eye(2) / 2).max() < 0.02


def test_measure_after_clifford_identity():
    zero = StabilizerOracle(StabilizerState.zero(4))
    out = measure_after_clifford(zero, CliffordTableau.identity(4), np.random.default_rng(0))
    assert np.array_equal(out, np.zeros(4, dtype=np.uint8))


def test_measure_after_clifford_hadamards_uniform():
    from shadowkit.tableau import basis_rotation_tableau

    zero = StabilizerOracle(StabilizerState.zero(4))
    h4 = basis_rotation_tableau("XXXX")
    rng = np.random.default_rng(3)
    counts = np.zeros(16)
    shots = 16_000
    rows = h4.rows
    from shadowkit.tableau import PauliRows

    stack = PauliRows(4, np.repeat(rows.x[None], shots, 0), np.repeat(rows.z[None], shots, 0), np.repeat(rows.phase[None], shots, 0))
    outs = zero.sample_clifford_batch(stack, rng)
    idx = outs @ (1 << np.arange(3, -1, -1))
    counts = np.bincount(idx, minlength=16)
    chi2 = (((counts - shots / 16) ** 2) / (shots / 16)).sum()
    assert chi2 < 50  # 15 dof; >50 would be a gross violation


def test_measure_after_clifford_large_stabilizer():
    g = StabilizerOracle(ghz_state(20))
    u = random_clifford(20, np.random.default_rng(9))
    out = measure_after_clifford(g, u, np.random.default_rng(10))
    assert out.shape == (20,)


def test_dense_clifford_sampling_matches_dense():
    rng = np.random.default_rng(23)
    psi = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0][:, 0]
    oracle = DenseOracle(psi)
    u = random_clifford(2, rng)
    u_dense = u.unitary()
    probs = np.abs(u_dense @ psi) ** 2
    shots = 40_000
    from shadowkit.tableau import PauliRows

    stack = PauliRows(
        2,
        np.repeat(u.rows.x[None], shots, 0),
        np.repeat(u.rows.z[None], shots, 0),
        np.repeat(u.rows.phase[None], shots, 0),
    )
    outs = oracle.sample_clifford_batch(stack, np.random.default_rng(31))
    idx = outs @ np.array([2, 1])
    counts = np.bincount(idx, minlength=4) / shots
    assert np.abs(counts - probs).max() < 0.01


def test_witness_same_rotation_gives_one():
    rng = np.random.default_rng(41)
    oracle, us = rotated_ghz_state(rng)
    spec = WitnessSpec(*us)
    assert abs(spec.value(oracle.dense_rho()) - 1.0) < 1e-9


def test_witness_thresholds():
    assert GENUINE_TRIPARTITE_THRESHOLD == 0.5
    assert GHZ_CLASS_THRESHOLD == 0.75


def test_witness_average_matches_monte_carlo_reference():
    # reference: same expectation computed with an independent dense sampler
    ref_rng = np.random.default_rng(1001)

    def haar(rng):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(g)
        return q * (np.diag(r) / np.abs(np.diag(r)))

    ghz = dense_ghz(3)
    ref_vals = []
    for _ in range(3000):
        state = np.kron(np.kron(haar(ref_rng), haar(ref_rng)), haar(ref_rng)) @ ghz
        w = np.kron(np.kron(haar(ref_rng), haar(ref_rng)), haar(ref_rng)) @ ghz
        ref_vals.append(abs(np.vdot(w, state)) ** 2)
    rng = np.random.default_rng(57)
    vals = []
    for _ in range(3000):
        oracle, spec = rotated_ghz_witness(rng)
        vals.append(spec.value(oracle.dense_rho()))
    assert abs(np.mean(vals) - np.mean(ref_vals)) < 0.01


def test_witness_rejects_nonunitary():
    with pytest.raises(ValueError):
        WitnessSpec(np.eye(2) * 2, np.eye(2), np.eye(2))


def test_parse_state_descriptors():
    assert parse_state_descriptor("ghz:4").n == 4
    assert parse_state_descriptor("ghz-noisy:3:0.25").n == 3
    assert parse_state_descriptor("toric:2x2").n == 8
    assert parse_state_descriptor("singlets:6").n == 6
    assert parse_state_descriptor("zero:5").n == 5
    with pytest.raises(ValueError):
        parse_state_descriptor("bogus:3")
    with pytest.raises(ValueError):
        parse_state_descriptor("ghz:notanumber")


def test_dense_oracle_validation():
    with pytest.raises(ValueError):
        DenseOracle(np.array([1.0, 1.0]))  # not normalized
    with pytest.raises(ValueError):
        DenseOracle(np.zeros(2**15), cap=14)  # over cap (also unnormalized)


def test_mixture_validation():
    zero = StabilizerOracle(StabilizerState.zero(1))
    with pytest.raises(ValueError):
        MixtureOracle([(0.5, zero), (0.4, zero)])
    with pytest.raises(ValueError):
        MixtureOracle([])
