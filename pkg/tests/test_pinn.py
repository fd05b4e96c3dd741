import pytest
import torch

from tgpt import pinn
from tgpt.diffnet import NetworkSpec, evaluate, init_params, jet, loss_grad
from tgpt.errors import DivergenceError, NonFiniteError
from tgpt.metanet import MetaConfig, approximation_error, train_online
from tgpt.pinn import PinnConfig, Snapshot, loss_terms, pinn_loss, shock_weight, train_pinn
from tgpt.problems import ExactNeuron, get_target
from tgpt.sampling import uniform_collocation
from tgpt.states import Outcome
from tgpt.types import DTYPE, Box


@pytest.fixture
def reaction_colloc():
    return get_target("reaction").collocation((2.0,), seed=0, counts=(40, 8, 12))


@pytest.fixture
def small_spec():
    return NetworkSpec([2, 6, 6, 1])


def test_shock_weight():
    points = torch.tensor([[0.0, 0.0], [1.0, 0.5]], dtype=DTYPE)
    flat = jet(lambda p: 0 * p[:, 0] + 2.0, points)
    assert torch.equal(shock_weight(flat, 0.1), torch.ones(2, dtype=DTYPE))

    steep = jet(lambda p: 30 * p[:, 0] + p[:, 1], points)
    weights = shock_weight(steep, 0.1)
    assert torch.allclose(weights, torch.full((2,), 1 / 4.0, dtype=DTYPE))


def test_lambda_for():
    assert PinnConfig().lambda_for(get_target("transport"))
    assert not PinnConfig().lambda_for(get_target("reaction"))
    assert PinnConfig(use_lambda=True).lambda_for(get_target("reaction"))


def test_config_invalid():
    with pytest.raises(ValueError):
        PinnConfig(lr=0)


def test_loss_terms_exact_solution(reaction_colloc):
    neuron = ExactNeuron("reaction", 2.0)
    terms = loss_terms("reaction", neuron, reaction_colloc, (2.0,))
    assert float(terms.total) < 1e-24


def test_loss_terms_additive(network, reaction_colloc):
    spec, params = network
    field = lambda x: evaluate(spec, params, x)
    terms = loss_terms("reaction", field, reaction_colloc, (2.0,), eps_i=3.0, eps_b=0.5)
    expected = terms.interior + 0.5 * terms.boundary + 3.0 * terms.initial
    assert float(terms.total) == pytest.approx(float(expected), rel=1e-14)
    assert set(terms.as_floats()) == {"interior", "boundary", "initial", "total"}


def test_loss_terms_empty_sets(network):
    spec, params = network
    colloc = uniform_collocation(Box((0, 1)), 1.0, 0, 0, 0)
    terms = loss_terms("reaction", lambda x: evaluate(spec, params, x), colloc, (2.0,))
    assert float(terms.total) == 0.0


def test_loss_terms_without_initial(network, reaction_colloc):
    spec, params = network
    terms = loss_terms("reaction", lambda x: evaluate(spec, params, x), reaction_colloc, (2.0,),
                       eps_i=0.0)
    assert float(terms.initial) == 0.0


def test_loss_terms_non_finite(reaction_colloc):
    with pytest.raises(NonFiniteError) as e:
        loss_terms("reaction", lambda x: x[:, 0] / 0.0, reaction_colloc, (2.0,))
    assert e.value.term == "interior"


def test_pinn_loss_gradient(small_spec, reaction_colloc):
    params = init_params(small_spec, 2)
    colloc = get_target("reaction").collocation((2.0,), seed=0, counts=(6, 3, 3))
    loss = lambda p: pinn_loss("reaction", small_spec, p, colloc, PinnConfig(), (2.0,))
    _, grad = loss_grad(loss, params)

    h = 1e-5
    for i in (0, 5, 20, len(params) - 1):
        step = torch.zeros_like(params)
        step[i] = h
        fd = (float(loss(params + step)) - float(loss(params - step))) / (2 * h)
        assert float(grad[i]) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_pinn_loss_transport_lambda(small_spec):
    colloc = uniform_collocation(Box((-1, 1)), 2.0, 20, 4, 6)
    params = init_params(small_spec, 1)
    on = pinn_loss("transport", small_spec, params, colloc, PinnConfig(use_lambda=True), (1.0,))
    off = pinn_loss("transport", small_spec, params, colloc, PinnConfig(use_lambda=False), (1.0,))
    assert float(on) <= float(off), "lambda only attenuates the residual"


def test_train_pinn(small_spec, reaction_colloc):
    config = PinnConfig(max_iter=30, log_every=10, lr=1e-2)
    snapshot = train_pinn("reaction", (2.0,), small_spec, config, reaction_colloc)
    assert isinstance(snapshot, Snapshot)
    assert snapshot.mu == (2.0,)
    assert snapshot.outcome == Outcome.max_iterations
    assert snapshot.iterations == 30
    assert [i for i, _ in snapshot.history] == [0, 10, 20, 30]
    assert snapshot.history[-1][1] < snapshot.history[0][1]
    assert snapshot.final_loss == snapshot.history[-1][1]


def test_train_pinn_no_iterations(small_spec, reaction_colloc):
    snapshot = train_pinn("reaction", (2.0,), small_spec, PinnConfig(max_iter=0, seed=4),
                          reaction_colloc)
    assert snapshot.iterations == 0
    assert len(snapshot.history) == 1
    assert torch.equal(snapshot.params, init_params(small_spec, 4))
    assert snapshot.outcome.exit_code == 2


def test_train_pinn_converged(small_spec, reaction_colloc):
    snapshot = train_pinn("reaction", (2.0,), small_spec, PinnConfig(tol=1e9), reaction_colloc)
    assert snapshot.outcome == Outcome.converged
    assert snapshot.iterations == 0


def test_train_pinn_deterministic(small_spec, reaction_colloc):
    config = PinnConfig(max_iter=5, seed=3)
    a = train_pinn("reaction", (2.0,), small_spec, config, reaction_colloc)
    b = train_pinn("reaction", (2.0,), small_spec, config, reaction_colloc)
    assert torch.equal(a.params, b.params)


def test_train_pinn_divergence(monkeypatch, small_spec, reaction_colloc):
    monkeypatch.setattr(pinn, "DIVERGENCE_LIMIT", -1.0)
    with pytest.raises(DivergenceError) as e:
        train_pinn("reaction", (2.0,), small_spec, PinnConfig(max_iter=5), reaction_colloc)
    assert len(e.value.history) == 1


def test_snapshot_neuron(small_spec):
    params = init_params(small_spec, 0)
    snapshot = Snapshot(small_spec, params, 1.5, "reaction")
    points = torch.zeros(3, 2, dtype=DTYPE)
    assert snapshot.input_dim == 2
    assert torch.equal(snapshot(points), evaluate(small_spec, params, points))


@pytest.fixture(scope="module")
def reaction_snapshot():
    """Full PINN for the reaction problem at rho = 1"""
    spec = NetworkSpec([2, 20, 20, 20, 1], "waveact")
    return train_pinn("reaction", (1.0,), spec, PinnConfig(max_iter=50000, tol=1e-8))


@pytest.fixture(scope="module")
def transport_snapshot():
    """Full PINN for the transport problem at nu = 0, shock collocation and weight on"""
    spec = NetworkSpec([2, 20, 20, 20, 1], "tanh")
    return train_pinn("transport", (0.0,), spec, PinnConfig(max_iter=50000, tol=0.0))


@pytest.mark.slow
def test_reaction_snapshot_accuracy(reaction_snapshot):
    assert get_target("reaction").relative_l2(reaction_snapshot, (1.0,)) <= 1e-2


@pytest.mark.slow
def test_reaction_tgpt_beats_gpt(reaction_snapshot):
    problem = get_target("reaction")
    neurons = [reaction_snapshot]
    tgpt = MetaConfig.for_target(problem)
    gpt = MetaConfig.for_target(problem, freeze_transform=True)
    transformed = train_online(problem, (9.85,), neurons, tgpt)
    coefficient = train_online(problem, (9.85,), neurons, gpt)
    assert transformed.final_loss < coefficient.final_loss
    assert approximation_error(problem, (9.85,), transformed, neurons, tgpt) <= 5e-2


@pytest.mark.slow
def test_transport_snapshot_loss_drops(transport_snapshot):
    first, last = transport_snapshot.history[0][1], transport_snapshot.final_loss
    assert last <= 1e-2 * first


@pytest.mark.slow
@pytest.mark.parametrize("nu", [10.0, -10.0])
def test_transport_snapshot_online(transport_snapshot, nu):
    problem = get_target("transport")
    config = MetaConfig.for_target(problem, resample=True, stage_iter=1000, max_iter=20000)
    result = train_online(problem, (nu,), [transport_snapshot], config)
    assert result.final_loss <= 10 * transport_snapshot.final_loss
