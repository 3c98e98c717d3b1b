import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from qumulus.errors import NumericalGuardError
from qumulus.photonic import BosonicCircuit, GKPSpec, breeding_demo, cat, coherent, gkp, squeezed, wigner_fock
from qumulus.photonic.bosonic import (
    apply_loss,
    condition_homodyne,
    evolve,
    marginal_peaks,
    sample_homodyne,
    tensor,
    vacuum,
    window_probability,
)
from qumulus.photonic.gaussian import symplectic_of


def cat_ket(alpha, p, cutoff=40):
    """Fock-basis cat ``|alpha> + e^{i pi p} |-alpha>`` from closed-form coherent amplitudes."""
    v = O.coherent_amplitudes(alpha, cutoff) + np.exp(1j * np.pi * p) * O.coherent_amplitudes(-alpha, cutoff)
    return v / np.linalg.norm(v)


def cat_parity(a, p, eta=1.0):
    """Closed-form parity of a cat after loss ``eta``.

    Diagonal terms give ``exp(-2 eta |a|^2)``; the coherences pick up
    ``exp(-2 (1 - eta) |a|^2)`` and have unit parity overlap.
    """
    diag = 2 * np.exp(-2 * eta * a**2)
    cross = 2 * np.cos(np.pi * p) * np.exp(-2 * (1 - eta) * a**2)
    norm = 2 * (1 + np.cos(np.pi * p) * np.exp(-2 * a**2))
    return (diag + cross) / norm


# ---------------------------------------------------------------------- cats
@pytest.mark.parametrize("p", [0.0, 1.0, 0.5])
def test_cat_wigner_matches_fock_superposition(p):
    a, theta = 1.3, 0.4
    xs = np.linspace(-5, 5, 41)
    w = cat(a, theta, p).wigner(0, xs, xs)
    ref = wigner_fock(cat_ket(a * np.exp(1j * theta), p), xs, xs)
    assert np.max(abs(w - ref)) < 1e-10


def test_cat_wigner_is_real():
    xs = np.linspace(-4, 4, 21)
    assert np.max(abs(cat(2.0).wigner_complex(0, xs, xs).imag)) < 1e-12


def test_even_and_odd_cat_origin_sign():
    assert cat(2.0).wigner(0, [0.0], [0.0])[0, 0] > 0
    assert cat(2.0, 0.0, 1.0).wigner(0, [0.0], [0.0])[0, 0] < 0
    ps = np.linspace(-2, 2, 401)
    assert cat(2.0).wigner(0, [0.0], ps).min() < -0.1


@pytest.mark.parametrize("p", [0.0, 1.0, 0.5])
def test_cat_parity_closed_form(p):
    assert cat(2.0, 0.0, p).parity() == pytest.approx(cat_parity(2.0, p), abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.2, 2.5), p=st.sampled_from([0.0, 1.0]), eta=st.floats(0, 1))
def test_lossy_cat_parity(a, p, eta):
    s = apply_loss(cat(a, 0.0, p), 0, eta)
    assert s.parity() == pytest.approx(cat_parity(a, p, eta), abs=1e-9)
    assert s.total_weight() == pytest.approx(1, abs=1e-12)


def test_cat_component_counts():
    assert cat(1.0).ncomponent == 4
    assert tensor([cat(1.0), cat(1.5)]).ncomponent == 16
    c = BosonicCircuit(2)
    c.cat(0, 1.0)
    c.cat(1, 1.0)
    c.bs([0, 1])
    assert c.run().ncomponent == 16


def test_coherent_and_squeezed_are_single_gaussians():
    xs = np.linspace(-4, 4, 21)
    w = coherent(0.5 + 0.2j).wigner(0, xs, xs)
    assert np.max(abs(w - O.wigner_coherent(0.5 + 0.2j, xs, xs))) < 1e-12
    s = squeezed(0.6)
    assert s.ncomponent == 1
    assert np.real(s.covs[0, 0, 0]) == pytest.approx(np.exp(-1.2))


# ----------------------------------------------------------------------- gkp
def test_gkp_default_component_count_and_negativity():
    g = gkp()
    assert g.ncomponent == 89
    xs = np.linspace(-6, 6, 121)
    assert g.wigner(0, xs, xs).min() < 0
    assert g.total_weight() == pytest.approx(1, abs=1e-12)


def test_gkp_components_grow_as_cutoffs_tighten():
    base = gkp().ncomponent
    assert gkp(GKPSpec(0, 0, 0.05, 0.01)).ncomponent > base
    assert gkp(GKPSpec(0, 0, 0.01, 0.1)).ncomponent > base


def test_gkp_marginal_peaks_on_lattice():
    lattice = np.sqrt(2 * np.pi)  # sqrt(pi hbar) with hbar = 2
    zero = marginal_peaks(gkp())
    one = marginal_peaks(gkp(GKPSpec(np.pi)))
    assert np.allclose(zero / lattice, np.round(zero / lattice), atol=0.01)
    assert all(round(x / lattice) % 2 == 0 for x in zero)
    assert all(round(x / lattice) % 2 == 1 for x in one)


def test_gkp_validation():
    with pytest.raises(ValueError):
        GKPSpec(epsilon=-1.0)
    with pytest.raises(ValueError):
        gkp(GKPSpec(amp_cutoff=2.0))


def test_mixed_circuit_with_cat_and_gkp():
    c = BosonicCircuit(2)
    c.cat(0, 1.0)
    c.gkp(1)
    out = c.run()
    assert out.ncomponent == 4 * 89
    assert out.reduced([1]).ncomponent == out.ncomponent


# ------------------------------------------------------------------ dynamics
def test_rotation_swaps_quadratures():
    g = gkp()
    rotated = evolve(g, symplectic_of("r", [0], [np.pi / 2], 1))
    xs = np.linspace(-6, 6, 301)
    assert np.max(abs(rotated.marginal(0, xs) - g.marginal(0, xs, np.pi / 2)[::-1])) < 1e-10


def test_loss_validation():
    with pytest.raises(ValueError):
        apply_loss(vacuum(), 0, 1.5)


def test_full_loss_gives_vacuum():
    s = apply_loss(cat(2.0), 0, 0.0)
    xs = np.linspace(-3, 3, 13)
    assert np.max(abs(s.wigner(0, xs, xs) - O.wigner_coherent(0j, xs, xs))) < 1e-12


# ----------------------------------------------------------------- homodyne
def test_window_probability_of_vacuum():
    from math import erf

    # x has variance hbar / 2 = 1
    assert window_probability(vacuum(), 0, -1, 1) == pytest.approx(erf(1 / np.sqrt(2)), abs=1e-12)


def test_condition_on_exact_value():
    st_, dens = condition_homodyne(tensor([coherent(1.0), vacuum()]), 1, value=0.3)
    assert dens == pytest.approx(np.exp(-0.045) / np.sqrt(2 * np.pi), abs=1e-12)
    assert st_.nmode == 1
    assert np.real(st_.means[0, 0]) == pytest.approx(2.0)


def test_condition_errors():
    with pytest.raises(ValueError):
        condition_homodyne(vacuum(), 0, value=0.0, window=(-1, 1))
    with pytest.raises(ValueError):
        condition_homodyne(vacuum(), 0, window=(1, -1))
    with pytest.raises(NumericalGuardError):
        condition_homodyne(tensor([vacuum(), vacuum()]), 0, window=(80.0, 81.0))


def test_sample_homodyne_vacuum_statistics():
    s = sample_homodyne(vacuum(), 0, 100_000, rng=3)
    assert abs(s.mean()) < 5 * np.sqrt(1 / 1e5)
    assert s.var() == pytest.approx(1.0, abs=0.03)
    assert np.array_equal(s, sample_homodyne(vacuum(), 0, 100_000, rng=3))


def test_circuit_homodyne_requires_registration():
    c = BosonicCircuit(1)
    with pytest.raises(ValueError):
        c.measure_homodyne(10)
    c.homodyne_x(0)
    assert c.measure_homodyne(10, seed=1).shape == (10,)


# ------------------------------------------------------------------ breeding
def test_breeding_peak_counts_increase():
    states = breeding_demo()
    peaks = [len(marginal_peaks(s)) for s in states]
    assert peaks == [2, 3, 5]
    for s in states:
        assert s.total_weight() == pytest.approx(1, abs=1e-10)
    last = marginal_peaks(states[-1])
    assert np.allclose(np.diff(last), np.diff(last)[0], atol=0.02)
