import pytest
import torch

from tgpt.app import App
from tgpt.diffnet import NetworkSpec, init_params
from tgpt.types import DTYPE


@pytest.fixture(autouse=True)
def app():
    """A quiet App for every test"""
    return App()


@pytest.fixture(params=["tanh", "waveact"])
def network(request):
    """A small random network of either activation, as (spec, params)"""
    spec = NetworkSpec([2, 5, 4, 1], request.param)
    params = init_params(spec, seed=3)
    if request.param == "waveact":
        params[-4:] = torch.tensor([0.8, 0.3, 1.1, -0.4], dtype=DTYPE)
    return spec, params


@pytest.fixture
def points():
    """A few space-time points"""
    generator = torch.Generator().manual_seed(11)
    return torch.rand(6, 2, generator=generator, dtype=DTYPE) * 2 - 1
