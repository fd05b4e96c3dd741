from math import pi, sqrt

import numpy as np
import pytest
import torch

from tgpt.diffnet import jet
from tgpt.errors import ContractError, DomainError, GridError
from tgpt.problems import (FUNCTION_IDS, PDE_IDS, ExactNeuron, FunctionNeuron, eval_function,
                           get_target, rd_exact, reaction_exact, residual, transport_exact)
from tgpt.types import DTYPE


def test_registry():
    assert "transport" in PDE_IDS
    assert "welper_jump" in FUNCTION_IDS
    assert get_target("reaction").T == 1.0
    assert get_target(get_target("reaction")).id == "reaction"


def test_get_target_unknown():
    with pytest.raises(DomainError) as e:
        get_target("burgers")
    assert "sin_shift" in str(e.value), "the error lists the valid ids"


@pytest.mark.parametrize("id, inputs, params, count", [
    ("sin_shift", 1, 1, 201),
    ("sin_freq_shift", 1, 2, 400),
    ("inv_dist_2d", 2, 2, 441),
    ("transport", 2, 1, 41),
    ("reaction", 2, 1, 41),
    ("reaction_diffusion", 2, 2, 121),
])
def test_target_dimensions(id, inputs, params, count):
    target = get_target(id)
    assert target.input_dim == inputs
    assert target.params.dim == params
    assert len(target.xi_train()) == count


def test_eval_function():
    assert eval_function("sin_shift", 0.0, pi / 2) == 1.0
    assert eval_function("abs_shift", -3.0, 1.0) == 2.0
    assert eval_function("relu_sin", 0.0, -pi / 2) == 0.0
    assert eval_function("inv_dist_2d", (0.0, 0.0), (-1.0, -1.0)) == pytest.approx(1 / sqrt(2))


def test_eval_function_domain():
    with pytest.raises(DomainError):
        eval_function("sin_shift", 4.0, 0.0)
    with pytest.raises(DomainError):
        eval_function("sin_shift", 0.0, 6.0)
    with pytest.raises(DomainError):
        eval_function("transport", 0.0, 0.0)


def test_welper():
    # support of the bump is 0 < x < (0.4 + mu) / 2
    assert eval_function("welper_jump", 0.2, 0.6) > 0
    assert eval_function("welper_jump", 0.6, 0.6) == 0.0
    assert eval_function("welper_jump", -0.5, 0.6) == 0.0
    assert eval_function("welper_jump", 0.3, -0.4) == 0.0, "zero scale gives the zero function"


def test_welper_finite_gradient():
    family = get_target("welper_jump")
    x = torch.linspace(-1, 1, 101, dtype=DTYPE).reshape(-1, 1)
    result = jet(lambda p: family(p, (0.6,)), x)
    assert torch.all(torch.isfinite(result.grad))


def test_transport_exact():
    assert transport_exact(0.0, 0.0, 0.0) == 0.0
    assert transport_exact(0.75, 0.0, 0.0) == 1.0
    assert transport_exact(0.25, 0.25, 1.0) == 0.0
    assert transport_exact(0.1 - 2.0, 0.0, 0.0) == transport_exact(0.1, 0.0, 0.0)
    values = transport_exact(np.array([0.0, 0.9]), 0.0, 0.0)
    assert list(values) == [0.0, 1.0]


def test_reaction_exact():
    x = np.linspace(0, 2 * pi, 11)
    h = np.exp(-(x - pi) ** 2 / (2 * (pi / 4) ** 2))
    assert np.allclose(reaction_exact(x, 0.0, 3.0), h, atol=1e-15)
    assert reaction_exact(pi, 0.7, 5.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        reaction_exact(1.0, 0.5, 0.0)


def test_rd_exact_initial():
    x = 2 * pi * np.arange(64) / 64
    assert np.allclose(rd_exact(x, 0.0, 2.0, 3.0), reaction_exact(x, 0.0, 2.0), atol=1e-12)


def test_rd_exact_without_diffusion():
    x = 2 * pi * np.arange(64) / 64
    assert np.allclose(rd_exact(x, 0.5, 2.0, 0.0), reaction_exact(x, 0.5, 2.0), atol=1e-12)


def test_rd_exact_shape():
    x = 2 * pi * np.arange(32) / 32
    assert rd_exact(x, 0.5, 1.0, 1.0).shape == (32,)
    assert rd_exact(x, [0.0, 0.5, 1.0], 1.0, 1.0).shape == (3, 32)


def test_rd_exact_diffusion_flattens():
    x = 2 * pi * np.arange(128) / 128
    values = rd_exact(x, 1.0, 1.0, 5.0)
    assert values.max() - values.min() < 5e-2
    assert values.mean() == pytest.approx(reaction_exact(x, 1.0, 1.0).mean(), abs=1e-12)


def test_rd_exact_grid():
    with pytest.raises(GridError):
        rd_exact(np.linspace(0, 2 * pi, 64), 0.5, 1.0, 1.0)
    with pytest.raises(GridError):
        rd_exact(2 * pi * np.arange(5000) / 5000, 0.5, 1.0, 1.0)


def test_rd_exact_imaginary_residue(monkeypatch):
    ifft = np.fft.ifft
    monkeypatch.setattr(np.fft, "ifft", lambda spectrum: ifft(spectrum) + 1e-6j)
    with pytest.raises(GridError):
        rd_exact(2 * pi * np.arange(16) / 16, 0.5, 1.0, 1.0)


def space_time(n=7):
    generator = torch.Generator().manual_seed(4)
    return torch.rand(n, 2, generator=generator, dtype=DTYPE) * torch.tensor([2 * pi, 1.0])


def test_residual_transport():
    nu = 3.0
    points = space_time()
    result = jet(lambda p: torch.sin(p[:, 0] - nu * p[:, 1]), points)
    values = residual("transport", result, points[:, 0], points[:, 1], (nu,))
    assert torch.allclose(values, torch.zeros(len(points), dtype=DTYPE), atol=1e-14)


def test_residual_reaction_exact():
    points = space_time()
    neuron = ExactNeuron("reaction", 4.0)
    result = jet(neuron, points)
    values = residual("reaction", result, None, None, (4.0,))
    assert torch.allclose(values, torch.zeros(len(points), dtype=DTYPE), atol=1e-12)


def test_residual_needs_hessian():
    points = space_time()
    result = jet(lambda p: p[:, 0] ** 2, points)
    with pytest.raises(ContractError):
        residual("reaction_diffusion", result, None, None, (1.0, 1.0))


def test_residual_reaction_diffusion():
    rho, nu = 2.0, 0.5
    points = space_time()
    u = lambda p: torch.full_like(p[:, 0], 1.0) + 0 * p[:, 0]
    result = jet(u, points, hess_enabled=True)
    values = residual("reaction_diffusion", result, None, None, (rho, nu))
    assert torch.allclose(values, torch.zeros(len(points), dtype=DTYPE)), "u = 1 is a steady state"


def test_residual_function_family():
    result = jet(lambda p: p[:, 0], space_time())
    with pytest.raises(DomainError):
        residual("sin_shift", result, None, None, (0.0,))


def test_function_neuron():
    neuron = FunctionNeuron("sin_shift", 1.0)
    grid = get_target("sin_shift").grid
    assert neuron.input_dim == 1
    assert torch.equal(neuron(grid), torch.sin(grid[:, 0] + 1.0))
    with pytest.raises(DomainError):
        FunctionNeuron("sin_shift", 10.0)


def test_exact_neuron_transport():
    neuron = ExactNeuron("transport", 0.0)
    points = torch.tensor([[0.0, 0.0], [0.9, 1.0], [0.5 - 0.01, 0.3]], dtype=DTYPE)
    values = neuron(points)
    assert float(values[0]) < 1e-12
    assert float(values[1]) > 1 - 1e-12
    assert float(values[2]) < 1e-4
    assert neuron.input_dim == 2


def test_exact_neuron_without_solution():
    with pytest.raises(ContractError):
        ExactNeuron("reaction_diffusion", (1.0, 1.0))


def test_l2_error():
    family = get_target("sin_shift")
    exact = family(family.grid, (0.5,))
    assert family.l2_error(exact, (0.5,)) == 0.0
    zeros = torch.zeros_like(exact)
    assert family.l2_error(zeros, (0.5,)) == pytest.approx(sqrt(pi), rel=1e-2)


def test_relative_l2():
    problem = get_target("reaction")
    assert problem.relative_l2(ExactNeuron("reaction", 2.0), (2.0,)) == 0.0
    assert problem.relative_l2(ExactNeuron("reaction", 2.0), (3.0,)) > 1e-2


def test_reference_grids():
    points, values = get_target("transport").reference((0.0,))
    assert points.shape == (400 * 101, 2)
    assert values.shape == (400 * 101,)
    points, values = get_target("reaction_diffusion").reference((1.0, 1.0))
    assert points.shape == (256 * 101, 2)


def test_collocation():
    transport = get_target("transport").collocation((2.0,), seed=1)
    assert transport.meta["nu"] == 2.0
    assert transport.counts == (10000, 200, 1000)

    reaction = get_target("reaction").collocation((2.0,), seed=1, counts=(50, 10, 20))
    assert reaction.counts == (50, 10, 20)
