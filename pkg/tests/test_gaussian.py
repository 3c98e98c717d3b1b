import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

import oracles as O
from qumulus.errors import UnsupportedGateError
from qumulus.photonic import (
    GaussianCircuit,
    GaussianState,
    QumodeCircuit,
    gbs,
    gbs_from_graph,
    measure_homodyne,
    prob_pnrd,
    prob_threshold,
    sample_detection,
)
from qumulus.photonic.gaussian import apply_loss, homodyne_condition, homodyne_marginal, psd_sqrt, symplectic_of


def random_squeezed(m, seed, loss=None, rmax=0.6):
    rng = np.random.default_rng(seed)
    g = GaussianCircuit(m)
    for i in range(m):
        g.s(i, float(rng.uniform(0.1, rmax)), float(rng.uniform(-np.pi, np.pi)))
    if m > 1:
        g.interferometer(unitary_group.rvs(m, random_state=seed))
    if loss is not None:
        g.loss(0, loss)
    return g


# ------------------------------------------------------------------- states
def test_vacuum_squeeze_closed_form():
    r = 0.8
    st_ = GaussianCircuit(1).s(0, r).run()
    assert np.allclose(st_.cov, np.diag([np.exp(-2 * r), np.exp(2 * r)]))  # hbar/2 = 1
    assert st_.mean_photon(0) == pytest.approx(np.sinh(r) ** 2)
    assert st_.is_pure()


def test_displacement_mean():
    st_ = GaussianCircuit(1).d(0, 0.5, 0.3).run()
    x, p = st_.quadrature_means(0)
    assert x == pytest.approx(2 * 0.5 * np.cos(0.3))
    assert p == pytest.approx(2 * 0.5 * np.sin(0.3))
    assert st_.mean_photon(0) == pytest.approx(0.25)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 4.0])
def test_epr_difference_variance_vanishes(r):
    # with bs = [[c, -s], [s, c]], x0 - x1 = -sqrt(2) x1_in and p0 + p1 = sqrt(2) p0_in
    g = GaussianCircuit(2).s(0, -r).s(1, r).bs([0, 1])
    v = g.run().cov
    var_diff = v[0, 0] + v[1, 1] - 2 * v[0, 1]
    var_sum_p = v[2, 2] + v[3, 3] + 2 * v[2, 3]
    assert var_diff == pytest.approx(2 * np.exp(-2 * r))
    assert var_sum_p == pytest.approx(2 * np.exp(-2 * r))


def test_loss_keeps_state_physical():
    st_ = GaussianCircuit(1).s(0, 1.2).loss(0, 0.5).run()
    assert st_.is_physical()
    assert not st_.is_pure()
    assert st_.mean_photon(0) == pytest.approx(0.5 * np.sinh(1.2) ** 2)


def test_loss_validation():
    with pytest.raises(ValueError):
        GaussianCircuit(1).loss(0, -0.1)
    with pytest.raises(ValueError):
        GaussianCircuit(2).interferometer(np.ones((2, 2)))


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 4), seed=st.integers(0, 2**31 - 1), eta=st.floats(0, 1))
def test_symplectic_and_physicality_invariants(m, seed, eta):
    g = random_squeezed(m, seed)
    assert g.symplectic().is_symplectic(1e-8)
    g.loss(0, eta)
    st_ = g.run()
    assert st_.is_physical(1e-8)
    assert np.allclose(st_.cov, st_.cov.T)


@pytest.mark.parametrize("name,params", [("s", (0.4, 0.2)), ("r", (0.9,)), ("d", (0.3, 1.0)), ("bs", (0.7, 0.3))])
def test_gate_symplectics(name, params):
    wires = (0, 1) if name == "bs" else (1,)
    op = symplectic_of(name, wires, params, 2)
    assert op.is_symplectic()


def test_reduced_state():
    st_ = GaussianCircuit(3).s(1, 0.5).run()
    red = st_.reduced([1])
    assert np.allclose(red.cov, np.diag([np.exp(-1), np.exp(1)]))


# --------------------------------------------------------------- photon counting
def test_single_mode_squeezed_pnrd_vs_fock():
    f = QumodeCircuit(1, "vac", cutoff=40)
    f.s(0, 1.0)
    ft = f.run()
    st_ = GaussianCircuit(1).s(0, 1.0).run()
    for n in (0, 1, 2, 4):
        assert prob_pnrd(st_, [n]) == pytest.approx(ft.probability([n]), abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1])
def test_pnrd_matches_fock_backend(seed):
    m, d = 3, 14
    rng = np.random.default_rng(seed)
    rs, phs = rng.uniform(0.2, 0.5, m), rng.uniform(-1, 1, m)
    u = unitary_group.rvs(m, random_state=seed + 10)
    g, f = GaussianCircuit(m), QumodeCircuit(m, "vac", cutoff=d)
    for i in range(m):
        g.s(i, rs[i], phs[i])
        f.s(i, rs[i], phs[i])
    g.interferometer(u)
    f.any(u)
    st_, ft = g.run(), f.run()
    err = max(abs(prob_pnrd(st_, p) - ft.probability(p)) for p in itertools.product(range(4), repeat=m))
    assert err < 1e-6


def test_lossy_pnrd_matches_fock_backend():
    g = GaussianCircuit(2).s(0, 0.4).s(1, 0.3, 0.5).bs([0, 1], [0.6, 0.2]).loss(1, 0.6)
    f = QumodeCircuit(2, "vac", cutoff=12)
    f.s(0, 0.4)
    f.s(1, 0.3, 0.5)
    f.bs([0, 1], [0.6, 0.2])
    f.loss(1, 0.6)
    st_, ft = g.run(), f.run()
    for p in itertools.product(range(4), repeat=2):
        assert prob_pnrd(st_, p) == pytest.approx(ft.probability(p), abs=1e-6)


def test_threshold_single_mode_frozen():
    st_ = gbs([1.0]).state()
    assert prob_threshold(st_, [1]) == pytest.approx(O.CLICK_R1, abs=1e-12)
    assert prob_threshold(st_, [0]) == pytest.approx(1 / np.cosh(1.0), abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(m=st.integers(1, 4), seed=st.integers(0, 2**31 - 1))
def test_click_patterns_sum_to_one(m, seed):
    st_ = random_squeezed(m, seed, loss=0.7).run()
    total = sum(prob_threshold(st_, c) for c in itertools.product([0, 1], repeat=m))
    assert total == pytest.approx(1, abs=1e-6)


def test_threshold_equals_coarse_grained_pnrd():
    # enumerate by total photon number so hafnians stay small; with r <= 0.35
    # the mass beyond 16 photons is far below the tolerance
    m, nmax = 3, 16
    g = random_squeezed(m, 5, rmax=0.35)
    st_ = g.run()
    pnrd = np.zeros((nmax + 1,) * m)
    for p in itertools.product(range(nmax + 1), repeat=m):
        if sum(p) <= nmax and sum(p) % 2 == 0:
            pnrd[p] = prob_pnrd(st_, p)
    assert pnrd.sum() == pytest.approx(1, abs=1e-7)
    for clicks in itertools.product([0, 1], repeat=m):
        assert prob_threshold(st_, clicks) == pytest.approx(O.threshold_from_pnrd(pnrd, clicks), abs=1e-5)


def test_tmsv_photon_numbers_are_correlated():
    g = GaussianCircuit(2).s(0, 0.6).s(1, -0.6).bs([0, 1])
    st_ = g.run()
    for a, b in itertools.product(range(4), repeat=2):
        p = prob_pnrd(st_, [a, b])
        if a != b:
            assert p < 1e-12
    assert prob_pnrd(st_, [1, 1]) > 0.05


def test_displaced_states_rejected_for_counting():
    st_ = GaussianCircuit(1).d(0, 0.3).run()
    with pytest.raises(UnsupportedGateError):
        prob_pnrd(st_, [0])


def test_pnrd_pattern_validation():
    with pytest.raises(ValueError):
        prob_pnrd(GaussianState.vacuum(2), [1])


def test_gbs_click_rate_5_sigma():
    shots = 4000
    st_ = gbs([1.0] * 6).state()
    counts = sample_detection(st_, "threshold", shots, rng=3)
    p = O.CLICK_R1
    sigma = np.sqrt(shots * p * (1 - p))
    for k in range(6):
        clicks = sum(v for pat, v in counts.items() if pat[k])
        assert abs(clicks - shots * p) < 5 * sigma


def test_sample_detection_seeded_and_even_parity():
    st_ = gbs([0.3, 0.3], unitary_group.rvs(2, random_state=1)).state()
    a = sample_detection(st_, "pnrd", 300, cutoff=12, rng=9)
    assert a == sample_detection(st_, "pnrd", 300, cutoff=12, rng=9)
    assert all(sum(p) % 2 == 0 for p in a)
    assert sum(a.values()) == 300


def test_sample_detection_warns_on_truncation():
    st_ = gbs([1.0]).state()
    with pytest.warns(RuntimeWarning, match="truncates"):
        counts = sample_detection(st_, "pnrd", 50, cutoff=2, rng=0)
    assert set(counts) <= {(0,), (1,)}


def test_sample_detection_unknown_detector():
    with pytest.raises(ValueError):
        sample_detection(GaussianState.vacuum(1), "bogus", 1)


# -------------------------------------------------------------------- graphs
def test_graph_encoding_reproduces_adjacency():
    spec = gbs_from_graph(O.GRAPH6)
    a = spec.state().a_matrix()
    c = spec.scale
    assert np.max(abs(a[:6, :6] - c * O.GRAPH6)) < 1e-8
    assert np.max(abs(a[6:, 6:] - c * O.GRAPH6)) < 1e-8
    assert np.max(abs(a[:6, 6:])) < 1e-8
    assert spec.mean_photon() == pytest.approx(6, rel=1e-9)


def test_single_edge_graph():
    spec = gbs_from_graph(np.array([[0.0, 1.0], [1.0, 0.0]]), mean_photon=1.0)
    assert spec.squeezing[0] == pytest.approx(spec.squeezing[1])
    assert np.allclose(abs(spec.unitary) ** 2, 0.5)
    a = spec.state().a_matrix()
    assert np.allclose(a[:2, :2] / a[0, 1], [[0, 1], [1, 0]], atol=1e-10)


def test_graph_validation():
    with pytest.raises(ValueError):
        gbs_from_graph(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="infeasible"):
        gbs_from_graph(O.GRAPH6, scale=10.0)


def test_gbs_validation():
    with pytest.raises(ValueError):
        gbs([1.0, 1.0], np.ones((2, 2)))


# ------------------------------------------------------------------ homodyne
def test_homodyne_vacuum_statistics():
    shots = 10**5
    res = measure_homodyne(GaussianState.vacuum(1), [0], 0.0, shots, rng=5)
    x = res.samples[:, 0]
    assert abs(x.mean()) < 5 * np.sqrt(1 / shots)
    # sample-variance standard error for a Gaussian: sigma^2 sqrt(2 / (N - 1))
    assert abs(x.var(ddof=1) - 1) < 5 * np.sqrt(2 / (shots - 1))


def test_homodyne_rotated_quadrature():
    st_ = GaussianCircuit(1).s(0, 0.5).run()
    _, vx = homodyne_marginal(st_, [0], 0.0)
    _, vp = homodyne_marginal(st_, [0], np.pi / 2)
    assert vx[0, 0] == pytest.approx(np.exp(-1))
    assert vp[0, 0] == pytest.approx(np.exp(1))


def test_homodyne_conditioning_on_epr_pair():
    g = GaussianCircuit(2).s(0, -2.0).s(1, 2.0).bs([0, 1])
    st_ = g.run()
    post = homodyne_condition(st_, [0], [1.5])
    x1, _ = post.quadrature_means(1)
    assert x1 == pytest.approx(1.5, rel=0.05)
    assert post.cov[1, 1] < 0.1
    assert np.allclose(post.cov[0, 0], 1.0)


def test_homodyne_on_circuit_requires_registration():
    g = GaussianCircuit(1)
    with pytest.raises(ValueError):
        g.measure_homodyne(3)
    g.homodyne(0)
    assert g.measure_homodyne(3, seed=1).samples.shape == (3, 1)


def test_psd_sqrt_of_singular_matrix():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    s = psd_sqrt(cov)
    assert np.allclose(s @ s.T, cov)


def test_apply_loss_full_gives_vacuum():
    st_ = apply_loss(GaussianCircuit(1).s(0, 1.0).d(0, 1.0).run(), 0, 0.0)
    assert np.allclose(st_.cov, np.eye(2))
    assert np.allclose(st_.mean, 0)
