import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from qumulus.distributed import (
    DistributedQubitCircuit,
    DistributedQumodeCircuit,
    check_world,
    ordered_partners,
    qft_circuit,
    run_threads,
)
from qumulus.errors import TransportError
from qumulus.photonic import QumodeCircuit

ONE = ["x", "y", "z", "h", "s", "t", "rx", "ry", "rz", "p", "u3"]


def random_distributed(rng, n, ngate, world_size, **kw):
    c = DistributedQubitCircuit(n, world_size=world_size, **kw)
    for _ in range(ngate):
        k = rng.integers(4)
        w = [int(x) for x in rng.permutation(n)[:3]]
        if k == 0:
            c.gate(ONE[rng.integers(len(ONE))], [w[0]], (), None)
        elif k == 1:
            c.cnot(w[0], w[1])
        elif k == 2:
            c.rzz([w[0], w[1]], float(rng.normal()))
        elif n >= 3:
            c.toffoli(w[0], w[1], w[2])
        else:
            c.cp(w[0], w[1], 0.3)
    return c


# ------------------------------------------------------------------ states
@pytest.mark.parametrize("block", range(4))
def test_random_circuits_match_single_rank(block):
    rng = np.random.default_rng(100 + block)
    for _ in range(25):
        n = int(rng.integers(3, 13))
        world = int(rng.choice([2, 4, 8]))
        c = random_distributed(rng, n, 25, world)
        ref = c.as_qubit_circuit().run()[0]
        assert np.max(abs(c.run()[0] - ref)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 5), world=st.sampled_from([2, 4]))
def test_distributed_matches_kron_oracle(seed, n, world):
    rng = np.random.default_rng(seed)
    c = DistributedQubitCircuit(n, world_size=world)
    v = O.zero(n)
    for _ in range(12):
        a, b = (int(x) for x in rng.permutation(n)[:2])
        theta = float(rng.uniform(-3, 3))
        if rng.random() < 0.5:
            c.ry(a, theta)
            v = O.embed(n, O.rot(O.Y, theta), [a]) @ v
        else:
            c.cnot(a, b)
            v = O.embed(n, O.X, [b], [a]) @ v
    assert np.max(abs(c.run()[0] - v)) < 1e-12


def test_qft_at_12_qubits():
    basis = 37
    q = DistributedQubitCircuit(12, world_size=4)
    for w in range(12):
        if (basis >> (11 - w)) & 1:
            q.x(w)
    q.ops.extend(qft_circuit(12).ops)
    got = q.run()[0]
    assert np.max(abs(got - q.as_qubit_circuit().run()[0])) < 1e-12
    assert np.max(abs(got - O.qft_column(12, basis))) < 1e-12
    plain = qft_circuit(12, world_size=8)
    assert np.max(abs(plain.run()[0] - O.qft_column(12, 0))) < 1e-12


# ------------------------------------------------------------ communication
def test_local_gate_sends_no_messages():
    c = DistributedQubitCircuit(4, world_size=2)
    c.x(3)
    c.h(1)
    c.cnot(1, 2)
    c.run()
    for rep in c.last_reports:
        assert rep.gate_messages == [0, 0, 0]


def test_global_gate_triggers_one_exchange():
    c = DistributedQubitCircuit(4, world_size=2)
    c.x(0)
    c.run()
    assert [r.gate_messages for r in c.last_reports] == [[1], [1]]
    empty = DistributedQubitCircuit(4, world_size=2)
    empty.run()
    assert [a + 1 for a in empty.message_counts()] == c.message_counts()


def test_threads_per_rank_and_debug_norm_checks():
    c = DistributedQubitCircuit(12, world_size=2, threads_per_rank=4, debug=True)
    c.hlayer()
    c.cnot_ring()
    c.rxlayer(inputs=np.linspace(0, 1, 12))
    assert np.max(abs(c.run()[0] - c.as_qubit_circuit().run()[0])) < 1e-12


def test_world_size_validation():
    with pytest.raises(ValueError, match="power of two"):
        check_world(3, 4)
    with pytest.raises(ValueError, match="exceeds"):
        DistributedQubitCircuit(2, world_size=8)
    c = DistributedQubitCircuit(2, world_size=2)
    with pytest.raises(ValueError):
        c.run(state=O.zero(2))


@pytest.mark.slow
def test_process_transport():
    c = DistributedQubitCircuit(6, world_size=2, transport="process")
    c.h(0)
    c.cnot(0, 5)
    amps = c.run()[0]
    assert abs(amps[0]) == pytest.approx(1 / np.sqrt(2))
    assert abs(amps[33]) == pytest.approx(1 / np.sqrt(2))


def test_unknown_transport():
    c = DistributedQubitCircuit(2, world_size=2, transport="carrier-pigeon")
    with pytest.raises(ValueError, match="unknown transport"):
        c.run()


# -------------------------------------------------------------- collectives
def _collectives(tr):
    total = tr.allreduce(tr.rank + 1)
    got = tr.gather(tr.rank * 10)
    b = tr.bcast("hello" if tr.rank == 0 else None)
    partner = tr.rank ^ 1
    swapped = tr.exchange(partner, tr.rank)
    tr.barrier()
    return total, got, b, swapped


def test_thread_collectives():
    out = run_threads(4, _collectives)
    assert [o[0] for o in out] == [10] * 4
    assert out[0][1] == [0, 10, 20, 30]
    assert all(o[1] is None for o in out[1:])
    assert [o[2] for o in out] == ["hello"] * 4
    assert [o[3] for o in out] == [1, 0, 3, 2]


def _stuck(tr):
    if tr.rank == 0:
        return tr.recv(1)
    return None


def test_receive_timeout_raises_transport_error():
    with pytest.raises(TransportError):
        run_threads(2, _stuck, timeout=0.3)


def test_ordered_partners():
    assert ordered_partners(2, [3, 0, 2, 1]) == [0, 1, 3]


# -------------------------------------------------------- observables / grads
def variational(world_size, seed):
    d = DistributedQubitCircuit(5, world_size=world_size)
    d.rxlayer()
    d.cnot_ring()
    d.rylayer()
    d.observable(0, "z")
    d.observable([1, 3], "xz")
    d.init_params(np.random.default_rng(seed))
    return d


@pytest.mark.parametrize("world", [2, 4])
def test_distributed_expectation_and_gradient(world):
    d = variational(world, 3)
    single = d.as_qubit_circuit()
    gd = d.adjoint_gradient()
    gs = single.adjoint_gradient()
    assert np.max(abs(gd.params - gs.params)) < 1e-12
    assert np.allclose(d.expectation(), gs.expvals, atol=1e-12)

    theta0 = single.params.copy()

    def f(theta):
        single.params = theta
        single.run()
        return single.expectation()[0]

    fd = O.finite_difference(f, theta0)
    single.params = theta0
    assert np.allclose(gd.params[0], fd, rtol=1e-5, atol=1e-8)


def test_seeded_histogram_matches_single_rank():
    b = DistributedQubitCircuit(2, world_size=2)
    b.h(0)
    b.cnot(0, 1)
    assert b.measure(1000, seed=7) == b.as_qubit_circuit().measure(1000, seed=7)


def test_probabilities_gathered():
    b = DistributedQubitCircuit(3, world_size=4)
    b.h(0)
    assert np.allclose(b.probabilities()[0], [0.5, 0, 0, 0, 0.5, 0, 0, 0])


# --------------------------------------------------------------------- fock
@pytest.mark.parametrize("world", [1, 2, 3])
def test_distributed_fock_matches_tensor(world):
    qc = QumodeCircuit(3, [1, 1, 0], cutoff=4)
    qc.bs([0, 1])
    qc.bs([1, 2], [0.3, 0.2])
    qc.ps(2, 0.4)
    qc.bs([0, 2])
    dq = DistributedQumodeCircuit(qc, world)
    r = dq.run()
    assert np.max(abs(r.tensor - qc.run().tensor)) < 1e-12
    local = [m for op, m in zip(qc.ops, dq.op_messages) if 0 not in op.wires]
    assert local and all(m == 0 for m in local)


def test_distributed_fock_validation():
    with pytest.raises(ValueError):
        DistributedQumodeCircuit(QumodeCircuit(2, [1, 0]), 2)
    with pytest.raises(ValueError):
        DistributedQumodeCircuit(QumodeCircuit(2, [1, 0], cutoff=2), 4)
