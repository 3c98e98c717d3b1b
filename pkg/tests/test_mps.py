import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from qumulus.errors import NumericalGuardError
from qumulus.mps import MPO, MPSState, chain_bs_circuit, run_fock_mps, run_qubit_mps, tfim_quench
from qumulus.photonic import QumodeCircuit
from qumulus.qubit import QubitCircuit

CNOT_RING_SHAPES = [(1, 2, 2), (2, 2, 4), (4, 2, 7)] + [(7, 2, 7)] * 14 + [(7, 2, 4), (4, 2, 2), (2, 2, 1)]
BS_CHAIN_SHAPES = [(1, 4, 3)] + [(3, 4, 3)] * 18 + [(3, 4, 1)]


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_circuit(rng, n, ngate):
    """Random circuit with non-adjacent two-qubit gates, plus its oracle state."""
    cir = QubitCircuit(n)
    v = O.zero(n)
    for _ in range(ngate):
        w = int(rng.integers(n))
        o = int(rng.choice([x for x in range(n) if x != w]))
        kind = rng.integers(3)
        if kind == 0:
            a = rng.uniform(-3, 3, 2)
            cir.ry(w, a[0])
            cir.rz(w, a[1])
            v = O.embed(n, O.rot(O.Z, a[1]) @ O.rot(O.Y, a[0]), [w]) @ v
        elif kind == 1:
            cir.cnot(o, w)
            v = O.embed(n, O.X, [w], [o]) @ v
        else:
            a = rng.uniform(-3, 3)
            cir.rzz([o, w], a)
            v = O.embed(n, O.expm_herm(np.kron(O.Z, O.Z), a / 2), [o, w]) @ v
    return cir, v


# -------------------------------------------------------------- construction
def test_product_state_bonds_are_one():
    assert MPSState.from_dense(np.eye(8)[2]).bond_dims() == [1, 1]
    assert MPSState.basis([0, 1, 0]).bond_dims() == [1, 1]


def test_ghz_schmidt_values():
    g = np.zeros(16)
    g[0] = g[-1] = 1 / np.sqrt(2)
    m = MPSState.from_dense(g, chi=2)
    assert m.bond_dims() == [2, 2, 2]
    assert np.allclose(m.schmidt_values(2), [1 / np.sqrt(2)] * 2)
    assert O.fidelity(m.to_dense(), g) > 1 - 1e-12
    for k in range(4):
        assert m.expectation_local(O.Z, k) == pytest.approx(0, abs=1e-12)
    assert m.entropy(2) == pytest.approx(np.log(2))


@pytest.mark.parametrize("n", [1, 4, 8, 10])
def test_dense_round_trip(n):
    v = random_state(n, n)
    m = MPSState.from_dense(v)
    assert O.fidelity(m.to_dense(), v) > 1 - 1e-10
    assert max(m.bond_dims(), default=1) <= 2 ** (n // 2)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 8), seed=st.integers(0, 2**31 - 1), chi=st.integers(1, 8))
def test_truncated_construction_invariants(n, seed, chi):
    v = random_state(n, seed)
    m = MPSState.from_dense(v, chi=chi)
    assert max(m.bond_dims()) <= chi
    assert 1 - m.norm() ** 2 <= m.truncation_error + 1e-10
    for b in range(1, n):
        assert m.entropy(b) <= np.log(m.bond_dims()[b - 1]) + 1e-10


def test_from_dense_rejects_zero():
    with pytest.raises(NumericalGuardError):
        MPSState.from_dense(np.zeros(4))


def test_constructor_validation():
    with pytest.raises(ValueError, match="boundary"):
        MPSState([np.ones((2, 2, 1))])
    with pytest.raises(ValueError, match="bond mismatch"):
        MPSState([np.ones((1, 2, 2)), np.ones((3, 2, 1))])
    with pytest.raises(ValueError):
        MPSState.basis([2], d=2)


# ---------------------------------------------------------------------- gates
def test_single_site_gate_keeps_bonds():
    m = MPSState.from_dense(random_state(6, 1))
    before = m.bond_dims()
    m.apply_gate(O.H, [3])
    assert m.bond_dims() == before


def test_cnot_ring_shapes():
    c = QubitCircuit(20)
    c.cnot_ring()
    assert run_qubit_mps(c, chi=7).shapes() == CNOT_RING_SHAPES


def test_bs_chain_shapes():
    assert run_fock_mps(chain_bs_circuit(), chi=3).shapes() == BS_CHAIN_SHAPES


def test_fock_chain_matches_tensor_backend():
    cir = chain_bs_circuit(4, cutoff=5)
    psi = run_fock_mps(cir).to_dense()
    ref = QumodeCircuit(4, [1, 1, 1, 1], cutoff=5)
    for i in range(3):
        ref.bs([i, i + 1])
    assert np.max(abs(psi - ref.run().tensor.reshape(-1))) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 6), ngate=st.integers(1, 25))
def test_exact_mps_matches_oracle(seed, n, ngate):
    cir, ref = random_circuit(np.random.default_rng(seed), n, ngate)
    psi = run_qubit_mps(cir)
    assert O.fidelity(psi.to_dense(), ref) > 1 - 1e-10
    assert max(psi.isometry_errors()) < 1e-8


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fidelity_non_decreasing_in_chi(seed):
    cir, ref = random_circuit(np.random.default_rng(seed), 10, 60)
    fids = []
    for chi in (2, 4, 8, 16):
        psi = run_qubit_mps(cir, chi=chi)
        assert max(psi.bond_dims()) <= chi
        assert max(psi.isometry_errors()) < 1e-8
        assert 1 - psi.norm() ** 2 <= psi.truncation_error + 1e-10
        fids.append(O.fidelity(psi.to_dense(), ref) / psi.norm() ** 2)
    assert all(b >= a - 1e-9 for a, b in zip(fids, fids[1:]))


def test_site_out_of_range():
    m = MPSState.basis([0, 0])
    with pytest.raises(IndexError):
        m.apply_gate(O.X, [2])


def test_two_site_expectation():
    c = QubitCircuit(3)
    c.h(0)
    c.cnot(0, 1)
    psi = run_qubit_mps(c)
    assert psi.expectation_local(np.kron(O.Z, O.Z), [0, 1]) == pytest.approx(1)
    assert psi.expectation_local(np.kron(O.X, O.X), [0, 1]) == pytest.approx(1)


def test_mpo_expectation_and_application():
    v = random_state(4, 5)
    psi = MPSState.from_dense(v)
    mpo = MPO.from_local(4, {1: O.X, 3: O.Z})
    full = O.pauli_string(4, [1, 3], "xz")
    assert mpo.expectation(psi) == pytest.approx(np.vdot(v, full @ v), abs=1e-12)
    assert np.allclose(mpo.to_dense(), full)
    assert np.allclose(mpo.apply(psi).to_dense(), full @ v, atol=1e-12)


# ----------------------------------------------------------------------- TFIM
def test_tfim_zero_step_and_dt_zero():
    r = tfim_quench(6, dt=0.0, steps=3)
    assert r["magnetization"] == pytest.approx([1.0] * 4)


def test_tfim_matches_dense_at_12_sites():
    mps = tfim_quench(12, J=1.0, h=1.2, dt=0.1, steps=20, chi=64)["magnetization"]
    ref = O.tfim_magnetization(12, 1.0, 1.2, 0.1, 20)
    assert max(abs(a - b) for a, b in zip(mps, ref)) < 1e-6


@pytest.mark.slow
def test_tfim_relaxation_at_16_sites():
    m = tfim_quench(16, J=1.0, h=1.2, dt=0.1, steps=40, chi=128)["magnetization"]
    assert abs(m[30] - m[40]) < abs(m[0] - m[10])


# ----------------------------------------------------------------- checkpoint
def test_checkpoint_round_trip(tmp_path):
    c = QubitCircuit(8)
    c.cnot_ring()
    c.rx(3, 0.4)
    psi = run_qubit_mps(c, chi=4)
    path = tmp_path / "state.npz"
    psi.save(path)
    back = MPSState.load(path)
    assert back.shapes() == psi.shapes()
    assert back.truncation_error == psi.truncation_error
    assert back.chi_max == 4
    assert np.array_equal(back.to_dense(), psi.to_dense())


def test_checkpoint_rejects_foreign_files(tmp_path):
    path = tmp_path / "x.npz"
    np.savez(path, a=np.ones(2))
    with pytest.raises(ValueError, match="not an MPS checkpoint"):
        MPSState.load(path)
