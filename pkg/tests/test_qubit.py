import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from qumulus.errors import UnsupportedGateError
from qumulus.qubit import CHANNELS, GATES, Observable, QubitCircuit, sample_counts, zero_state
from qumulus.qubit.state import amplitude_damping, depolarizing

ONE_QUBIT = ["id", "x", "y", "z", "h", "s", "sdg", "t", "tdg", "rx", "ry", "rz", "p", "u3"]
TWO_QUBIT = ["swap", "rxx", "ryy", "rzz"]


def textbook(name, p):
    """Gate matrices written out independently of the library."""
    c = lambda t: np.cos(t / 2)  # noqa: E731
    s = lambda t: np.sin(t / 2)  # noqa: E731
    table = {
        "id": lambda: O.I2,
        "x": lambda: O.X,
        "y": lambda: O.Y,
        "z": lambda: O.Z,
        "h": lambda: O.H,
        "s": lambda: np.diag([1, 1j]),
        "sdg": lambda: np.diag([1, -1j]),
        "t": lambda: np.diag([1, np.exp(1j * np.pi / 4)]),
        "tdg": lambda: np.diag([1, np.exp(-1j * np.pi / 4)]),
        "rx": lambda: O.rot(O.X, p[0]),
        "ry": lambda: O.rot(O.Y, p[0]),
        "rz": lambda: O.rot(O.Z, p[0]),
        "p": lambda: np.diag([1, np.exp(1j * p[0])]),
        "u3": lambda: np.array(
            [[c(p[0]), -np.exp(1j * p[2]) * s(p[0])], [np.exp(1j * p[1]) * s(p[0]), np.exp(1j * (p[1] + p[2])) * c(p[0])]]
        ),
        "swap": lambda: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
        "rxx": lambda: O.rot(np.kron(O.X, O.X), p[0]),
        "ryy": lambda: O.rot(np.kron(O.Y, O.Y), p[0]),
        "rzz": lambda: O.rot(np.kron(O.Z, O.Z), p[0]),
    }
    return np.asarray(table[name](), dtype=complex)


def random_gate(rng, n, allow_controls=True):
    names = ONE_QUBIT + (TWO_QUBIT if n >= 2 else [])
    name = names[rng.integers(len(names))]
    k = GATES[name].ntarget
    perm = [int(x) for x in rng.permutation(n)]
    wires = perm[:k]
    nctrl = int(rng.integers(0, min(2, n - k) + 1)) if allow_controls else 0
    controls = perm[k : k + nctrl]
    params = rng.uniform(-np.pi, np.pi, GATES[name].nparam)
    return name, wires, controls, params


# ------------------------------------------------------------------ gate table
@pytest.mark.parametrize("name", ONE_QUBIT + TWO_QUBIT)
def test_gate_matrices_match_textbook(name):
    p = np.array([0.37, -1.1, 2.4])[: GATES[name].nparam]
    m = GATES[name].matrix(p)
    assert np.allclose(m, textbook(name, p), atol=1e-14)
    assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12)


@pytest.mark.parametrize("name", [g for g in ONE_QUBIT + TWO_QUBIT if GATES[g].nparam])
def test_gate_derivatives_match_finite_differences(name):
    spec = GATES[name]
    p = np.array([0.37, -1.1, 2.4])[: spec.nparam]
    for k in range(spec.nparam):
        e = np.zeros_like(p)
        e[k] = 1e-6
        fd = (spec.matrix(p + e) - spec.matrix(p - e)) / 2e-6
        assert np.allclose(spec.derivative(p, k), fd, atol=1e-8)


def test_unknown_gate_raises():
    with pytest.raises(UnsupportedGateError):
        QubitCircuit(1).gate("foo", 0)


# ---------------------------------------------------------------- application
def test_h_on_zero():
    c = QubitCircuit(1)
    c.h(0)
    assert np.allclose(c.run()[0], [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_bell_pair():
    c = QubitCircuit(2)
    c.h(0)
    c.cnot(0, 1)
    assert np.allclose(c.run()[0], [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])


def test_toffoli_on_110():
    c = QubitCircuit(3)
    c.x(0)
    c.x(1)
    c.toffoli(0, 1, 2)
    assert np.argmax(abs(c.run()[0])) == 0b111


def test_empty_circuit_keeps_initial_state():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    assert np.allclose(QubitCircuit(3).run(state=psi)[0], psi)


def test_wire_zero_is_most_significant():
    c = QubitCircuit(2)
    c.x(0)
    assert np.argmax(abs(c.run()[0])) == 2
    assert c.measure(10) == [{"10": 10}]


def test_out_of_range_and_repeated_wires():
    c = QubitCircuit(2)
    with pytest.raises(ValueError, match="out of range"):
        c.x(2)
    with pytest.raises(ValueError, match="repeated"):
        c.cnot(1, 1)


def test_custom_unitary_gate():
    c = QubitCircuit(2)
    c.h(0)
    c.any(O.X, [1], [0])
    assert np.allclose(c.run()[0], [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
    with pytest.raises(ValueError, match="not unitary"):
        c.any(np.ones((2, 2)), [0])
    with pytest.raises(ValueError, match="does not act"):
        c.any(np.eye(4), [0])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_striding_matches_dense_oracle(n, seed):
    rng = np.random.default_rng(seed)
    c = QubitCircuit(n)
    full = np.eye(2**n, dtype=complex)
    for _ in range(8):
        name, wires, controls, params = random_gate(rng, n)
        c.gate(name, wires, controls, params, trainable=False)
        full = O.embed(n, textbook(name, params), wires, controls) @ full
    assert np.max(abs(c.run()[0] - full[:, 0])) < 1e-12
    assert np.max(abs(c.unitary() - full)) < 1e-12


def test_norm_preserved_over_1000_gates():
    rng = np.random.default_rng(7)
    c = QubitCircuit(5)
    for _ in range(1000):
        name, wires, controls, params = random_gate(rng, 5)
        c.gate(name, wires, controls, params, trainable=False)
    assert abs(np.linalg.norm(c.run()[0]) - 1) < 1e-10


# ------------------------------------------------------------------- encoding
def encoded_circuit():
    c = QubitCircuit(3)
    c.hlayer()
    c.rylayer(encode=True)
    c.cnot_ring()
    c.rylayer()
    c.observable(0, "z")
    c.init_params(np.random.default_rng(1))
    return c


def test_batch_rows_match_single_runs():
    c = encoded_circuit()
    data = np.random.default_rng(2).uniform(0, np.pi, (4, 3))
    out = c.run(data)
    assert out.shape == (4, 8)
    for i in range(4):
        assert np.allclose(out[i], c.run(data[i])[0], atol=1e-14)


def test_data_length_must_match_exactly():
    c = encoded_circuit()
    with pytest.raises(ValueError, match="exactly 3"):
        c.run([1.0, 2.0])
    with pytest.raises(ValueError, match="exactly 3"):
        c.run([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(ValueError, match="no data"):
        c.run()


def test_layered_circuit_matches_dense_oracle():
    c = QubitCircuit(3)
    c.h(0)
    c.cnot(0, 1)
    c.cnot(1, 2)
    c.rylayer(encode=True)
    c.cnot_ring()
    c.rylayer()  # zero-initialised variational parameters
    data = [1.0, 2.0, 3.0]
    u = O.embed(3, O.H, [0])
    u = O.embed(3, O.X, [1], [0]) @ u
    u = O.embed(3, O.X, [2], [1]) @ u
    u = O.kron_all([O.rot(O.Y, a) for a in data]) @ u
    for i in range(3):
        u = O.embed(3, O.X, [(i + 1) % 3], [i]) @ u
    psi = u[:, 0]
    p0 = float(np.sum(abs(psi[:4]) ** 2))
    got = c.run(data)
    assert c.probabilities([0])[0, 0] == pytest.approx(p0, abs=1e-12)
    assert np.allclose(got[0], psi, atol=1e-12)


# ------------------------------------------------------------------- readout
def w_state():
    c = QubitCircuit(3)
    psi = np.zeros(8)
    psi[[1, 2, 4]] = 1 / np.sqrt(3)
    c.run(state=psi)
    return c


def test_w_state_marginal():
    c = w_state()
    assert c.probabilities([0])[0, 0] == pytest.approx(O.W3_P0)
    assert c.probabilities([2, 0])[0].tolist() == pytest.approx([1 / 3, 1 / 3, 1 / 3, 0])


def test_measure_zero_state_and_with_prob():
    c = QubitCircuit(1)
    c.run()
    assert c.measure(100) == [{"0": 100}]
    b = QubitCircuit(2)
    b.h(0)
    b.cnot(0, 1)
    res = b.measure(1000, wires=[0], with_prob=True, seed=3)[0]
    assert set(res) <= {"0", "1"}
    assert all(v[1] == pytest.approx(0.5) for v in res.values())
    assert sum(v[0] for v in res.values()) == 1000


def test_measure_is_seeded():
    b = QubitCircuit(2)
    b.h(0)
    b.cnot(0, 1)
    assert b.measure(500, seed=11) == b.measure(500, seed=11)
    assert set(b.measure(500, seed=11)[0]) == {"00", "11"}


def test_sampling_frequencies_within_5_sigma():
    c = QubitCircuit(2)
    c.ry(0, 1.0)
    c.ry(1, 2.2)
    probs = c.probabilities()[0]
    shots = 10**6
    counts = sample_counts(probs[None], shots, 2, np.random.default_rng(0))[0]
    for i, p in enumerate(probs):
        k = counts.get(format(i, "02b"), 0)
        sigma = np.sqrt(shots * p * (1 - p))
        assert abs(k - shots * p) < 5 * sigma


def test_expectations_hand_values():
    c = QubitCircuit(1)
    c.observable(0, "z")
    assert c.expectation()[0, 0] == pytest.approx(1)
    c = QubitCircuit(1)
    c.h(0)
    c.observable(0, "x")
    assert c.expectation()[0, 0] == pytest.approx(1)
    g = QubitCircuit(3)
    g.h(0)
    g.cnot(0, 1)
    g.cnot(1, 2)
    g.observable([0, 1, 2], "zzz")
    g.observable([0, 1, 2], "xxx")
    assert np.allclose(g.expectation()[0], [0, 1], atol=1e-12)


def test_observable_validation():
    with pytest.raises(ValueError):
        Observable((0, 1), "xyz")
    with pytest.raises(ValueError):
        Observable((0,), "q")
    with pytest.raises(ValueError, match="no observables"):
        QubitCircuit(1).expectation()


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_expectation_matches_dense_pauli_string(n, seed):
    rng = np.random.default_rng(seed)
    c = QubitCircuit(n)
    for _ in range(6):
        name, wires, controls, params = random_gate(rng, n)
        c.gate(name, wires, controls, params, trainable=False)
    k = int(rng.integers(1, n + 1))
    wires = [int(w) for w in rng.permutation(n)[:k]]
    basis = "".join(rng.choice(list("xyz"), k))
    c.observable(wires, basis)
    psi = c.run()[0]
    want = np.vdot(psi, O.pauli_string(n, wires, basis) @ psi).real
    assert c.expectation()[0, 0] == pytest.approx(want, abs=1e-12)


# ------------------------------------------------------------------- channels
def test_channel_promotes_to_density_matrix():
    c = QubitCircuit(1)
    c.x(0)
    c.channel("amplitude_damping", 0, 1.0)
    assert c.mixed
    rho = c.run()[0]
    assert np.allclose(rho, [[1, 0], [0, 0]])


def test_full_depolarizing_gives_maximally_mixed_marginal():
    c = QubitCircuit(2, mixed=True)
    c.h(0)
    c.cnot(0, 1)
    c.ry(1, 0.4)
    c.channel("depolarizing", 1, 1.0)
    rho = c.run()[0].reshape(2, 2, 2, 2)
    reduced = np.einsum("abac->bc", rho)
    assert np.allclose(reduced, np.eye(2) / 2, atol=1e-12)


def test_identity_channel_is_noop():
    c = QubitCircuit(1, mixed=True)
    c.h(0)
    before = c.run()[0].copy()
    c.channel("identity", 0, kraus=[np.eye(2)])
    assert np.allclose(c.run()[0], before)


def test_invalid_kraus_set_rejected():
    with pytest.raises(ValueError, match="trace preserving"):
        QubitCircuit(1, mixed=True).channel("bad", 0, kraus=[np.eye(2) * 0.5])


@pytest.mark.parametrize("name", sorted(CHANNELS))
@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_channels_trace_preserving_and_completely_positive(name, p):
    kraus = CHANNELS[name](p)
    acc = sum(k.conj().T @ k for k in kraus)
    assert np.allclose(acc, np.eye(2), atol=1e-10)
    # Choi matrix sum_k vec(K) vec(K)^dag is PSD
    choi = sum(np.outer(k.reshape(-1), k.reshape(-1).conj()) for k in kraus)
    assert np.linalg.eigvalsh(choi).min() > -1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(0, 1))
def test_density_matrix_stays_physical(seed, p):
    rng = np.random.default_rng(seed)
    c = QubitCircuit(3, mixed=True)
    for _ in range(5):
        name, wires, controls, params = random_gate(rng, 3)
        c.gate(name, wires, controls, params, trainable=False)
        c.channel(["depolarizing", "amplitude_damping", "phase_flip"][int(rng.integers(3))], int(rng.integers(3)), p)
    rho = c.run()[0]
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-9


def test_kraus_helpers_shape():
    assert len(depolarizing(0.1)) == 4
    assert len(amplitude_damping(0.1)) == 2
    assert zero_state(2, 3).shape == (3, 4)
    assert zero_state(2, 1, mixed=True).shape == (1, 4, 4)


# ------------------------------------------------------------------ gradients
def test_ry_gradient_is_minus_sin():
    for theta in [0.0, 0.3, 1.7, -2.5]:
        c = QubitCircuit(1)
        c.ry(0, theta)
        c.gates[0].trainable = True
        c.observable(0, "z")
        g = c.adjoint_gradient()
        assert g.expvals[0, 0] == pytest.approx(np.cos(theta), abs=1e-12)
        assert abs(g.params[0, 0, 0] + np.sin(theta)) < 1e-10


def random_variational(rng, n, nlayer):
    c = QubitCircuit(n)
    c.rxlayer(encode=True)
    for _ in range(nlayer):
        c.rylayer()
        c.rzlayer()
        c.cnot_ring()
    c.u3(0)
    c.cry(0, n - 1)
    c.observable(0, "z")
    c.observable(list(range(n)), "x" * n)
    c.init_params(rng)
    return c


def gradients_by_finite_differences(c, data, h=1e-5):
    base = c.params.copy()

    def f_params(p):
        c.params = p
        c.run(data)
        return c.expectation()[0]

    gp = O.finite_difference(f_params, base, h)
    c.params = base

    def f_data(x):
        c.run(x)
        return c.expectation()[0]

    gd = O.finite_difference(f_data, np.asarray(data, float), h)
    return gp, gd


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    c = random_variational(rng, n, 2)
    data = rng.uniform(0, np.pi, n)
    g = c.adjoint_gradient(data)
    gp, gd = gradients_by_finite_differences(c, data)
    scale = max(1.0, np.max(abs(gp)))
    assert np.max(abs(g.params[0] - gp)) / scale < 1e-5
    assert np.max(abs(g.data[0] - gd)) / scale < 1e-5


def test_adjoint_batch_shapes():
    rng = np.random.default_rng(9)
    c = random_variational(rng, 3, 1)
    data = rng.uniform(0, 1, (5, 3))
    g = c.adjoint_gradient(data)
    assert g.expvals.shape == (5, 2)
    assert g.params.shape == (5, 2, c.n_params)
    assert g.data.shape == (5, 2, 3)
    for b in range(5):
        single = c.adjoint_gradient(data[b])
        assert np.allclose(single.params[0], g.params[b])


def test_adjoint_rejects_mixed():
    c = QubitCircuit(1, mixed=True)
    c.ry(0)
    c.observable(0, "z")
    with pytest.raises(ValueError, match="pure"):
        c.adjoint_gradient()


def test_params_setter_validates_length():
    c = QubitCircuit(2)
    c.rylayer()
    with pytest.raises(ValueError, match="expected 2"):
        c.params = [1.0]
