"""Pinn module -- offline full-PINN snapshot solver"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import torch

from .app import App
from .diffnet import (AdamState, Jet, NetworkSpec, Neuron, adam_step, evaluate, init_params,
                      jet, loss_grad)
from .errors import DivergenceError, NonFiniteError
from .problems import get_target
from .sampling import CollocationSet
from .states import Outcome
from .types import DTYPE, as_mu


__all__ = [
    "LossTerms",
    "PinnConfig",
    "Snapshot",
    "loss_terms",
    "pinn_loss",
    "shock_weight",
    "train_pinn",
]


"""Training stops with DivergenceError once the loss exceeds this."""
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class PinnConfig():
    """Settings of a full PINN training run.
       use_lambda=None uses the problem default (on for transport only).
    """
    lr: float = 1e-3
    max_iter: int = 50000
    tol: float = 1e-6
    eps_i: float = 1.0
    eps_b: float = 1.0
    eps_lambda: float = 0.1
    use_lambda: Optional[bool] = None
    seed: int = 0
    log_every: int = 100

    def __post_init__(self):
        """Validate"""
        if self.lr <= 0 or self.max_iter < 0 or self.tol < 0:
            raise ValueError(f"invalid training settings: {self}")

    def lambda_for(self, problem) -> bool:
        """Whether the shock-capturing weight is used for {problem}"""
        return problem.use_lambda if self.use_lambda is None else self.use_lambda


class LossTerms(NamedTuple):
    """The three loss terms (unweighted means) and their weighted total."""
    interior: torch.Tensor
    boundary: torch.Tensor
    initial: torch.Tensor
    total: torch.Tensor

    def as_floats(self) -> dict:
        """Return the terms as a dict of floats"""
        return {k: float(v) for k, v in self._asdict().items()}


def shock_weight(jet: Jet, eps_lambda: float) -> torch.Tensor:
    """lambda = 1 / (eps_lambda |grad_x u| + 1), per point, in (0, 1]"""
    return 1 / (eps_lambda * torch.linalg.vector_norm(jet.spatial_grad, dim=-1) + 1)


def _mean_square(values: torch.Tensor) -> torch.Tensor:
    """Mean of squares, 0 for an empty set"""
    if values.numel() == 0:
        return torch.zeros((), dtype=DTYPE)
    return torch.mean(values ** 2)


def loss_terms(problem, field: Callable, colloc: CollocationSet, mu, eps_i: float=1.0,
               eps_b: float=1.0, eps_lambda: float=0.1, use_lambda: bool=False) -> LossTerms:
    """Assemble the discretized PINN loss of any graph-preserving field.

       total = mean(|lambda r|^2 over C_o) + eps_b mean(|u_L - u_R|^2 over C_b)
               + eps_i mean(|u(x, 0) - u_0(x)|^2 over C_i)

       lambda is recomputed from {field} and detached from the graph.
    """
    problem = get_target(problem)
    mu = as_mu(mu)
    points = colloc.tensors

    interior = torch.zeros((), dtype=DTYPE)
    if len(points["interior"]):
        jets = jet(field, points["interior"], hess_enabled=problem.needs_hessian)
        residuals = problem.residual(jets, points["interior"], mu)
        if use_lambda:
            residuals = shock_weight(jets.detach(), eps_lambda) * residuals
        interior = _mean_square(residuals)

    boundary = torch.zeros((), dtype=DTYPE)
    if eps_b and len(points["left"]):
        boundary = _mean_square(field(points["left"]) - field(points["right"]))

    initial = torch.zeros((), dtype=DTYPE)
    if eps_i and len(points["initial"]):
        x0 = points["initial"]
        initial = _mean_square(field(x0) - problem.initial(x0[:, :-1], mu))

    for name, term in (("interior", interior), ("boundary", boundary), ("initial", initial)):
        if not torch.isfinite(term):
            raise NonFiniteError("loss is not finite", term=name)

    total = interior + eps_b * boundary + eps_i * initial
    return LossTerms(interior, boundary, initial, total)


def pinn_loss(problem, spec: NetworkSpec, params, colloc: CollocationSet, config: PinnConfig,
              mu) -> torch.Tensor:
    """Discretized PINN loss of the network (spec, params) at {mu}"""
    problem = get_target(problem)
    params = torch.as_tensor(params, dtype=DTYPE)
    terms = loss_terms(problem, lambda x: evaluate(spec, params, x), colloc, mu,
                       config.eps_i, config.eps_b, config.eps_lambda, config.lambda_for(problem))
    return terms.total


class Snapshot(Neuron):
    """A trained full PINN at one parameter value."""

    def __init__(self, spec: NetworkSpec, params, mu, problem: str, final_loss: float=None,
                 history: list=None, iterations: int=0, outcome: Outcome=Outcome.max_iterations):
        """Initializer
           Params
           ------
           spec (NetworkSpec) : architecture
           params (Tensor)    : flat trained parameters
           mu (tuple)         : parameter value
           problem (str)      : problem id
           final_loss (float) : loss of the returned parameters
           history (list)     : (iteration, loss) pairs
        """
        self.spec = spec
        self.params = torch.as_tensor(params, dtype=DTYPE).detach()
        self.mu = as_mu(mu)
        self.problem = problem
        self.history = [(int(i), float(l)) for i, l in (history or [])]
        self.final_loss = final_loss if final_loss is not None else (
            self.history[-1][1] if self.history else None)
        self.iterations = iterations
        self.outcome = Outcome(outcome)

    def __repr__(self):
        """Return repr string"""
        return f"Snapshot({self.problem!r}, mu={self.mu}, loss={self.final_loss})"

    @property
    def input_dim(self) -> int:
        """Network inputs"""
        return self.spec.input_dim

    def __call__(self, points):
        """Evaluate the network"""
        return evaluate(self.spec, self.params, points)


def train_pinn(problem, mu, spec: NetworkSpec, config: PinnConfig=None,
               colloc: CollocationSet=None) -> Snapshot:
    """Train a full PINN for {problem} at {mu} with Adam.

       Stops when the loss reaches config.tol or after config.max_iter steps;
       the history is recorded every config.log_every iterations and at the end.

       Raises
       ------
       DivergenceError: loss above DIVERGENCE_LIMIT, carrying the history
    """
    problem = get_target(problem)
    config = config or PinnConfig()
    mu = problem.check_mu(mu)
    colloc = colloc or problem.collocation(mu, config.seed)
    use_lambda = config.lambda_for(problem)

    def loss(params):
        terms = loss_terms(problem, lambda x: evaluate(spec, params, x), colloc, mu,
                           config.eps_i, config.eps_b, config.eps_lambda, use_lambda)
        return torch.stack([terms.interior, config.eps_b * terms.boundary,
                            config.eps_i * terms.initial])

    App.APP.info(f"{problem.id} mu={mu} {spec}", prefix="pinn")
    params = init_params(spec, config.seed)
    state = AdamState.for_params(params, config.lr)
    history, iteration = [], 0

    while True:
        value, grad = loss_grad(loss, params)
        if iteration % config.log_every == 0:
            history.append((iteration, value))
            App.APP.info(f"iter {iteration:>7} loss {value:.6e}", prefix="pinn")
        if value > DIVERGENCE_LIMIT:
            raise DivergenceError(f"loss {value:.3e} exceeded {DIVERGENCE_LIMIT:.0e}", history)
        if value <= config.tol or iteration >= config.max_iter:
            break
        params, state = adam_step(state, params, grad)
        iteration += 1

    if history[-1][0] != iteration:
        history.append((iteration, value))

    outcome = Outcome.converged if value <= config.tol else Outcome.max_iterations
    App.APP.info(f"{outcome} after {iteration} iterations, loss {value:.6e}", prefix="pinn")
    return Snapshot(spec, params, mu, problem.id, value, history, iteration, outcome)
