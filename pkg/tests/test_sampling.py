import numpy as np
import pytest

from tgpt.errors import DomainError
from tgpt.sampling import shock_collocation, shock_distance, uniform_collocation
from tgpt.types import Box


def test_uniform_collocation():
    colloc = uniform_collocation(Box((0, 2)), 1.0, 100, 20, 30, seed=3)
    assert colloc.interior.shape == (100, 2)
    assert colloc.boundary.shape == (20, 2, 2)
    assert colloc.initial.shape == (30, 1)
    assert np.all((colloc.interior[:, 0] >= 0) & (colloc.interior[:, 0] <= 2))
    assert np.all((colloc.interior[:, 1] >= 0) & (colloc.interior[:, 1] <= 1))


def test_uniform_boundary_pairs():
    colloc = uniform_collocation(Box((-1, 1)), 2.0, 10, 15, 10)
    left, right = colloc.boundary[:, 0], colloc.boundary[:, 1]
    assert np.all(left[:, 0] == -1)
    assert np.all(right[:, 0] == 1)
    assert np.array_equal(left[:, 1], right[:, 1]), "pairs share their time"


def test_uniform_2d():
    colloc = uniform_collocation(Box((0, 1), (0, 1)), 1.0, 10, 5, 5)
    assert colloc.interior.shape == (10, 3)
    assert colloc.boundary.shape == (5, 2, 3)
    assert np.array_equal(colloc.boundary[:, 0, 1], colloc.boundary[:, 1, 1])


def test_uniform_deterministic():
    a = uniform_collocation(Box((0, 1)), 1.0, 10, 5, 5, seed=1)
    assert a == uniform_collocation(Box((0, 1)), 1.0, 10, 5, 5, seed=1)
    assert a != uniform_collocation(Box((0, 1)), 1.0, 10, 5, 5, seed=2)


def test_uniform_empty_sets():
    colloc = uniform_collocation(Box((0, 1)), 1.0, 0, 0, 0)
    assert colloc.counts == (0, 0, 0)


def test_uniform_invalid():
    with pytest.raises(DomainError):
        uniform_collocation(Box((1, 1)), 1.0, 10, 5, 5)
    with pytest.raises(DomainError):
        uniform_collocation(Box((0, 1)), 0.0, 10, 5, 5)
    with pytest.raises(DomainError):
        uniform_collocation(Box((0, 1)), 1.0, -1, 5, 5)


def test_tensors():
    colloc = uniform_collocation(Box((0, 1)), 1.0, 10, 4, 6)
    tensors = colloc.tensors
    assert tensors["interior"].shape == (10, 2)
    assert tensors["left"].shape == (4, 2)
    assert tensors["initial"].shape == (6, 2)
    assert float(tensors["initial"][:, 1].abs().max()) == 0.0


def test_shock_distance():
    assert shock_distance(0.5, 0.0, 0.0) == 0.0
    assert shock_distance(0.0, 0.0, 0.0) == 0.5
    assert shock_distance(1.0, 0.0, 0.0) == pytest.approx(0.5)
    assert shock_distance(0.5 + 1.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_shock_collocation_counts():
    colloc = shock_collocation(0.0, seed=5)
    assert colloc.interior.shape == (10000, 2)
    assert colloc.initial.shape == (1000, 1)
    assert colloc.boundary.shape == (200, 2, 2)


def test_shock_collocation_concentration():
    colloc = shock_collocation(0.0, seed=5)
    distance = shock_distance(colloc.interior[:, 0], colloc.interior[:, 1], 0.0)
    assert np.mean(distance <= 0.1) >= 0.6
    assert np.mean(distance <= 0.2) >= 0.8
    assert colloc.meta["interior"]["taken"] == [6000, 2000, 2000]

    x0 = colloc.initial[:, 0]
    assert np.mean(shock_distance(x0, 0.0, 0.0) <= 0.1) >= 0.6


def test_shock_collocation_on_grid():
    colloc = shock_collocation(3.0, seed=5)
    x = np.linspace(-1, 1, 400)
    assert np.all(np.isin(colloc.interior[:, 0], x))
    assert len(np.unique(colloc.interior, axis=0)) == 10000, "no point is drawn twice"


def test_shock_collocation_shortfall():
    """At nu = 10 almost every grid point lies near a jump line, so the
       outer bands run short and pass their quota inward"""
    colloc = shock_collocation(10.0, seed=5)
    meta = colloc.meta["interior"]
    assert len(colloc.interior) == 10000
    assert sum(meta["shortfall"]) > 0
    assert meta["unfilled"] == 0


def test_shock_collocation_deterministic():
    assert shock_collocation(2.0, seed=9) == shock_collocation(2.0, seed=9)
    assert shock_collocation(2.0, seed=9) != shock_collocation(2.0, seed=10)


def test_shock_collocation_invalid():
    with pytest.raises(DomainError):
        shock_collocation(float("nan"))
