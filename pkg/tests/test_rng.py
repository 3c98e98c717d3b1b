import numpy as np
import pytest

from qumulus.rng import as_generator, default_seed, stream


def test_stream_is_reproducible():
    a = stream("qubit.measure", 5).random(8)
    b = stream("qubit.measure", 5).random(8)
    assert np.array_equal(a, b)


def test_streams_are_independent_by_name_and_seed():
    base = stream("qubit.measure", 5).random(8)
    assert not np.array_equal(base, stream("tdm.sample", 5).random(8))
    assert not np.array_equal(base, stream("qubit.measure", 6).random(8))


def test_draws_in_one_stream_do_not_perturb_another():
    ref = stream("b", 1).random(4)
    a = stream("a", 1)
    a.random(1000)
    assert np.array_equal(stream("b", 1).random(4), ref)


def test_default_seed_from_environment(monkeypatch):
    monkeypatch.delenv("QUMULUS_SEED", raising=False)
    assert default_seed() == 0
    monkeypatch.setenv("QUMULUS_SEED", "42")
    assert default_seed() == 42
    assert np.array_equal(stream("x").random(3), stream("x", 42).random(3))
    monkeypatch.setenv("QUMULUS_SEED", "forty-two")
    with pytest.raises(ValueError, match="QUMULUS_SEED"):
        default_seed()


def test_as_generator_passthrough():
    g = np.random.default_rng(0)
    assert as_generator(g, "x") is g
    assert np.array_equal(as_generator(3, "x").random(2), stream("x", 3).random(2))
