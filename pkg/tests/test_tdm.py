import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qumulus.photonic import TDMProgram, cluster_program, epr_program, run_tdm, unroll
from qumulus.photonic.tdm import (
    EPR_DATA,
    cluster_nullifiers,
    epr_pair_errors,
    nullifier_variance_exact,
    tdm_moments,
)


def loop_x_covariance(r, ntau, theta, nstep, hbar=2.0):
    """x-quadrature covariance of ``s(r) -> delay(ntau, theta) -> homodyne_x`` by direct recursion.

    Each measured value is a linear combination of independent noise sources:
    one squeezed x-quadrature per step (variance ``hbar/2 e^{-2r}``) and one
    vacuum per loop slot.  A real splitter ``[[c, -s], [s, c]]`` couples the
    fresh pulse to the slot that is ``ntau`` steps old.
    """
    nsrc = nstep + ntau
    var = np.array([hbar / 2 * np.exp(-2 * r)] * nstep + [hbar / 2] * ntau)
    slots = [np.eye(nsrc)[nstep + j] for j in range(ntau)]
    rows = []
    c, s = np.cos(theta), np.sin(theta)
    for k in range(nstep):
        fresh = np.eye(nsrc)[k]
        loop = slots[k % ntau]
        rows.append(c * fresh - s * loop)
        slots[k % ntau] = s * fresh + c * loop
    a = np.array(rows)
    return a @ np.diag(var) @ a.T


def simple_program(r=1.0, ntau=1, theta=np.pi / 4):
    p = TDMProgram(1)
    p.s(0, r)
    p.delay(0, ntau, [theta, 0.0])
    p.homodyne_x(0)
    return p


# --------------------------------------------------------------------- moments
@settings(max_examples=30, deadline=None)
@given(r=st.floats(0, 1.5), ntau=st.integers(1, 3), theta=st.floats(0, np.pi), nstep=st.integers(1, 7))
def test_moments_match_recursion_oracle(r, ntau, theta, nstep):
    m = tdm_moments(simple_program(r, ntau, theta), nstep)
    assert np.max(abs(m.cov - loop_x_covariance(r, ntau, theta, nstep))) < 1e-10
    assert np.max(abs(m.mean)) < 1e-12


def test_full_coupling_delays_by_ntau():
    # theta = pi/2 sends the fresh pulse into the loop and emits the stored one
    cov = tdm_moments(simple_program(1.0, 2, np.pi / 2), 5).cov
    assert np.allclose(np.diag(cov), [1, 1] + [np.exp(-2)] * 3)
    assert np.allclose(cov, np.diag(np.diag(cov)), atol=1e-12)


def test_no_coupling_passes_pulses_through():
    cov = tdm_moments(simple_program(1.0, 3, 0.0), 5).cov
    assert np.allclose(cov, np.exp(-2) * np.eye(5), atol=1e-12)


def test_zero_squeezing_is_vacuum_noise():
    cov = tdm_moments(simple_program(0.0, 1, 0.7), 4).cov
    assert np.allclose(cov, np.eye(4), atol=1e-12)


# ---------------------------------------------------------------------- unroll
@pytest.mark.parametrize("nstep,modes", [(1, 2), (2, 3), (3, 4)])
def test_unroll_mode_count(nstep, modes):
    p = simple_program()
    p.r(0, 0.3)
    assert unroll(p, nstep).total_modes == modes


@pytest.mark.parametrize("nstep", [1, 2, 3])
def test_unroll_equivalence(nstep):
    p = simple_program()
    p.r(0, 0.3)
    mu, cov = unroll(p, nstep).homodyne_moments()
    m = tdm_moments(p, nstep)
    assert np.max(abs(cov - m.cov)) < 1e-8
    assert np.max(abs(mu - m.mean)) < 1e-8


def test_unroll_equivalence_for_cluster_program():
    prog = cluster_program(3.0)
    mu, cov = unroll(prog, 8).homodyne_moments()
    m = tdm_moments(prog, 8)
    assert np.max(abs(cov - m.cov)) <= 1e-8 * np.max(abs(cov))
    assert unroll(prog, 8).total_modes == 4 * 8 + 1 + 5


def test_unroll_describe_lists_gates():
    text = unroll(simple_program(), 1).describe()
    assert text.splitlines()[0] == "2 modes, 1 step(s)"
    assert "bs [0, 1]" in text


def test_sampled_covariance_matches_moments():
    p = simple_program()
    p.r(0, 0.3)
    res = run_tdm(p, 3, rng=1, shots=100_000)
    assert res.samples.shape == (100_000, 3, 1)
    emp = np.cov(res.samples.reshape(100_000, -1).T)
    # 5 sigma for a sample covariance entry with unit-scale variances
    assert np.max(abs(emp - tdm_moments(p, 3).cov)) < 5 * np.sqrt(2 / 1e5) * 1.5


# ------------------------------------------------------------------- encoding
def test_encoded_parameters_cycle_through_rows():
    p = epr_program()
    rows = [p.step_params(EPR_DATA, k)[1] for k in range(3)]
    # rows alternate swap-out and 50:50 coupling, which produces the pairs
    assert rows[0] == rows[2] == (np.pi / 2, np.pi / 2)
    assert rows[1] == (np.pi / 4, 0.0)


def test_encoding_errors():
    p = epr_program()
    with pytest.raises(ValueError, match="no data"):
        run_tdm(p, 2)
    with pytest.raises(ValueError, match="need 2 values"):
        run_tdm(p, 2, [[0.1, 0.2, 0.3]])


def test_program_validation():
    p = TDMProgram(2)
    with pytest.raises(ValueError):
        p.delay(0, 0)
    p.s(0, 1.0)
    p.homodyne_x(0)
    with pytest.raises(ValueError, match="missing wires"):
        run_tdm(p, 2)


def test_run_is_seeded(tmp_path):
    p = simple_program()
    a = run_tdm(p, 5, rng=7).samples
    assert np.array_equal(a, run_tdm(p, 5, rng=7).samples)
    path = tmp_path / "s.csv"
    run_tdm(p, 5, rng=7).to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,wire,value"
    assert len(lines) == 6
    assert float(lines[3].split(",")[2]) == a[2, 0]


# ----------------------------------------------------------------------- demos
def test_epr_demo_pairs():
    res = run_tdm(epr_program(9.0), 13, EPR_DATA, rng=0)
    assert res.samples.shape == (13, 1)
    assert epr_pair_errors(res.samples).max() < 1e-3
    # the pairs themselves are large anti-squeezed values, not vacuum
    assert np.median(abs(res.samples[1:])) > 10


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.slow
def test_cluster_demo_nullifiers(seed):
    res = run_tdm(cluster_program(8.0), 100, rng=seed)
    e = cluster_nullifiers(res.samples, count=90)
    assert e.var() < 1e-5
    assert abs(e.mean()) < 1e-3


def test_nullifier_variance_scales_with_squeezing():
    lo = nullifier_variance_exact(cluster_program(4.0), 12)
    hi = nullifier_variance_exact(cluster_program(8.0), 12)
    assert hi / lo == pytest.approx(np.exp(-8), rel=0.2)
