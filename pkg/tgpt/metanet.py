"""Metanet module -- transform layer, TGPT meta-network and online training

The meta-network evaluates

    Psi(x, t) = sum_i c_i psi_i(Mod(W_i (x, t) + b_i))

over a list of pre-trained meta-neurons psi_i. Theta holds every (W_i, b_i,
c_i) in one flat vector laid out entry by entry: W_i row-major, then b_i,
then c_i.
"""

from dataclasses import dataclass
from math import inf
from typing import Callable, List, NamedTuple, Optional, Sequence

import torch
from more_itertools import always_iterable

from .app import App
from .diffnet import AdamState, Jet, Neuron, adam_step, jet, loss_grad
from .errors import DivergenceError, DomainError, NonFiniteError, SizingError
from .pinn import DIVERGENCE_LIMIT, loss_terms
from .problems import get_target
from .sampling import CollocationSet
from .states import LossMode, Outcome
from .types import DTYPE, Box, as_mu


__all__ = [
    "MetaConfig",
    "OnlineResult",
    "TGPTField",
    "Theta",
    "TransformParams",
    "approximation_error",
    "mod_map",
    "param_count",
    "polish",
    "stages",
    "tgpt_eval",
    "tgpt_loss",
    "train_online",
    "transform_apply",
]


def param_count(n: int, d: int) -> int:
    """Trainable parameters of an n-neuron meta-network over d space dimensions
       and time: n (d^2 + 3d + 3).

    Examples
    --------
    >>> param_count(1, 1), param_count(10, 1), param_count(3, 2)
    (7, 70, 39)
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return n * (d * d + 3 * d + 3)


def mod_map(values: torch.Tensor, box: Box, T: float=None, dims: Sequence=None) -> torch.Tensor:
    """Map each coordinate j of {values} onto [a_j, b_j) of {box} (with the
       time range [0, T) appended when {T} is given). The derivative is the
       identity almost everywhere.

       Params
       ------
       dims (Sequence): one bool per coordinate, False leaves it unchanged
                        (default: map every coordinate)
    """
    if T is not None:
        box = box.extend(0.0, T)
    if box.is_degenerate:
        raise DomainError(f"zero-width range in {box}")
    values = torch.as_tensor(values, dtype=DTYPE)
    if values.shape[-1] != box.dim:
        raise SizingError("mod_map input", expected=box.dim, actual=values.shape[-1])
    lower = torch.tensor(box.lower, dtype=DTYPE)
    width = torch.tensor(box.widths, dtype=DTYPE)
    wrapped = lower + torch.remainder(values - lower, width)
    if dims is None:
        return wrapped
    dims = torch.as_tensor(_wrap_dims(dims, box.dim))
    return torch.where(dims, wrapped, values)


def _wrap_dims(wrap, m: int) -> tuple:
    """{wrap} as one bool per coordinate"""
    if isinstance(wrap, bool):
        return (wrap,) * m
    wrap = tuple(bool(w) for w in wrap)
    if len(wrap) != m:
        raise SizingError("wrap flags", expected=m, actual=len(wrap))
    return wrap


@dataclass
class TransformParams():
    """Affine part of the transform layer of one neuron."""
    W: torch.Tensor
    b: torch.Tensor


def transform_apply(tp: TransformParams, points, box: Box, T: float=None, wrap=True) -> torch.Tensor:
    """Mod(W (x, t) + b) for a (N, m) batch. {wrap} is a bool, or one bool
       per coordinate."""
    points = torch.as_tensor(points, dtype=DTYPE)
    moved = points @ tp.W.T + tp.b
    dims = _wrap_dims(wrap, moved.shape[-1])
    if not any(dims):
        return moved
    return mod_map(moved, box, T, None if all(dims) else dims)


class Theta():
    """Online trainable parameters of an n-neuron meta-network with m inputs."""

    def __init__(self, flat, n: int, m: int, mus: Sequence=None):
        """Initializer
           Params
           ------
           flat (Tensor)     : n (m^2 + m + 1) values
           n (int)           : number of neurons
           m (int)           : number of inputs
           mus (Sequence)    : parameter value of every neuron, for reports
        """
        self.n, self.m = int(n), int(m)
        self.flat = torch.as_tensor(flat, dtype=DTYPE)
        if self.flat.dim() != 1 or self.flat.numel() != self.size:
            raise SizingError("theta", expected=self.size, actual=self.flat.numel())
        self.mus = [as_mu(mu) for mu in mus] if mus is not None else [()] * self.n

    def __repr__(self):
        """Return repr string"""
        return f"Theta(n={self.n}, m={self.m})"

    @classmethod
    def entry_size(cls, m: int) -> int:
        """Values per neuron"""
        return m * m + m + 1

    @property
    def size(self) -> int:
        """Length of the flat vector"""
        return self.n * self.entry_size(self.m)

    @classmethod
    def identity(cls, n: int, m: int, mus: Sequence=None):
        """W_i = I, b_i = 0, c_i = 1/n"""
        entry = torch.cat([torch.eye(m, dtype=DTYPE).reshape(-1), torch.zeros(m, dtype=DTYPE),
                           torch.tensor([1.0 / n], dtype=DTYPE)])
        return cls(entry.repeat(n), n, m, mus)

    @classmethod
    def from_entries(cls, W, b, c, mus: Sequence=None):
        """Build from stacked W (n, m, m), b (n, m) and c (n,)"""
        W = torch.as_tensor(W, dtype=DTYPE)
        b = torch.as_tensor(b, dtype=DTYPE)
        c = torch.as_tensor(c, dtype=DTYPE).reshape(-1, 1)
        n, m = W.shape[0], W.shape[1]
        flat = torch.cat([W.reshape(n, -1), b.reshape(n, -1), c], dim=1).reshape(-1)
        return cls(flat, n, m, mus)

    def with_flat(self, flat):
        """Copy with new values"""
        return Theta(flat, self.n, self.m, self.mus)

    def split(self, flat: torch.Tensor=None):
        """Views (W (n, m, m), b (n, m), c (n,)) of {flat} (default: own values)"""
        flat = self.flat if flat is None else flat
        m = self.m
        entries = flat.view(self.n, self.entry_size(m))
        return (entries[:, :m * m].reshape(self.n, m, m), entries[:, m * m:m * m + m],
                entries[:, -1])

    @property
    def W(self) -> torch.Tensor:
        """Transform matrices"""
        return self.split()[0]

    @property
    def b(self) -> torch.Tensor:
        """Transform shifts"""
        return self.split()[1]

    @property
    def c(self) -> torch.Tensor:
        """Mode coefficients"""
        return self.split()[2]

    @property
    def transforms(self) -> List[TransformParams]:
        """TransformParams of every neuron"""
        W, b, _ = self.split()
        return [TransformParams(W[i], b[i]) for i in range(self.n)]

    def mask(self, freeze_transform: bool=False, fix_w: bool=False,
             freeze_c: bool=False) -> torch.Tensor:
        """1 where an entry is trained, 0 where it stays at its initial value"""
        m = self.m
        entry = torch.ones(self.entry_size(m), dtype=DTYPE)
        if freeze_transform:
            entry[:-1] = 0
        elif fix_w:
            entry[:m * m] = 0
        if freeze_c:
            entry[-1] = 0
        return entry.repeat(self.n)


class TGPTField():
    """The meta-network Psi as a graph-preserving callable on (N, m) points."""

    def __init__(self, theta: Theta, neurons: Sequence[Neuron], box: Box, wrap=True,
                 flat: torch.Tensor=None):
        """Initializer
           Params
           ------
           theta (Theta)       : layout (and values unless {flat} is given)
           neurons (Sequence)  : meta-neurons, one per theta entry
           box (Box)           : input box of the neurons, target of the modulo map
           wrap (bool | tuple) : apply the modulo map, to all or to selected coordinates
           flat (Tensor)       : values to use instead of theta.flat (may require grad)
        """
        if len(neurons) != theta.n:
            raise SizingError("neurons", expected=theta.n, actual=len(neurons))
        for neuron in neurons:
            if neuron.input_dim != theta.m:
                raise SizingError("neuron inputs", expected=theta.m, actual=neuron.input_dim)
        if box.dim != theta.m:
            raise SizingError("input box", expected=theta.m, actual=box.dim)
        self.theta, self.neurons, self.box, self.wrap = theta, list(neurons), box, wrap
        self.flat = theta.flat if flat is None else flat

    def __call__(self, points: torch.Tensor) -> torch.Tensor:
        """Psi at {points}"""
        W, b, c = self.theta.split(self.flat)
        total = torch.zeros(points.shape[0], dtype=DTYPE)
        for i, neuron in enumerate(self.neurons):
            moved = transform_apply(TransformParams(W[i], b[i]), points, self.box, wrap=self.wrap)
            total = total + c[i] * neuron(moved)
        return total


def tgpt_eval(theta: Theta, neurons: Sequence[Neuron], points, box: Box,
              hess_enabled: bool=False, wrap=True) -> Jet:
    """Jet of the meta-network at {points}: value sum c_i psi_i(T_i),
       gradient sum c_i W_i^T grad psi_i, hessian sum c_i W_i^T H_i W_i."""
    field = TGPTField(theta, neurons, box, wrap)
    return jet(field, torch.as_tensor(points, dtype=DTYPE).reshape(-1, theta.m), hess_enabled)


"""Online settings of every function family, over the MetaConfig defaults."""
FUNCTION_DEFAULTS = dict(max_iter=5000, tol=1e-14, polish_iter=200, path_steps=10)

"""Online settings per target id, over the generic and function family ones."""
TARGET_DEFAULTS = {
    "sin_freq_shift": dict(path_steps=40),
    "transport": dict(lr=0.05, max_iter=100000, tol=1e-5, stage_iter=2000, polish_iter=100,
                      smoothing=(0.1, 0.03, 0.01, 0.003)),
}

"""L-BFGS iterations between progress checks of polish."""
POLISH_CHUNK = 20


@dataclass(frozen=True)
class MetaConfig():
    """Settings of an online training run.

       freeze_transform trains c only (GPT mode); fix_w trains b and c.
       use_lambda=None follows the problem default. resample regenerates the
       collocation sets at the target parameter, counts sizes the uniform ones.
       wrap applies the modulo map to the spatial inputs (None: when the
       target is periodic), wrap_time to the time input.

       A run is a chain of stages, each starting from the Theta the previous
       one ended with. path_steps > 1 walks the parameter from that of the
       nearest neuron to the target in path_steps legs. Every smoothing width
       adds a leg at the target that trains the transforms with c held, on
       the neurons smoothed to that width where they have sharp features and
       with the learning rate scaled by the width. Legs take stage_iter Adam
       steps. The final stage takes max_iter, then up to polish_iter L-BFGS
       iterations while its loss is above tol.
    """
    lr: float = 1e-2
    max_iter: int = 20000
    tol: float = 1e-8
    mode: LossMode = LossMode.pde
    freeze_transform: bool = False
    fix_w: bool = False
    wrap: Optional[bool] = None
    wrap_time: bool = False
    resample: bool = False
    counts: Optional[tuple] = None
    eps_i: float = 1.0
    eps_b: float = 1.0
    eps_lambda: float = 0.1
    use_lambda: bool = None
    seed: int = 0
    log_every: int = 100
    polish_iter: int = 0
    path_steps: int = 0
    smoothing: tuple = ()
    stage_iter: int = 200

    def __post_init__(self):
        """Validate and coerce"""
        object.__setattr__(self, "mode", LossMode(self.mode))
        object.__setattr__(self, "smoothing", tuple(float(w) for w in always_iterable(self.smoothing)))
        if self.counts is not None:
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if (self.lr <= 0 or self.max_iter < 0 or self.tol < 0 or self.polish_iter < 0
                or self.path_steps < 0 or self.stage_iter < 0
                or any(w <= 0 for w in self.smoothing)):
            raise ValueError(f"invalid training settings: {self}")

    @classmethod
    def for_target(cls, target, **overrides):
        """Defaults for {target}: the generic ones, then FUNCTION_DEFAULTS for
           function families, then TARGET_DEFAULTS, then {overrides}."""
        target = get_target(target)
        settings = dict(mode=LossMode.pde if target.is_pde else LossMode.function,
                        wrap=target.periodic)
        if not target.is_pde:
            settings.update(FUNCTION_DEFAULTS)
        settings.update(TARGET_DEFAULTS.get(target.id, {}))
        settings.update(overrides)
        return cls(**settings)

    def wrap_dims(self, target) -> tuple:
        """Inputs of the neurons of {target} the modulo map applies to"""
        target = get_target(target)
        space = target.periodic if self.wrap is None else self.wrap
        dims = (bool(space),) * target.omega.dim
        return dims + (self.wrap_time,) if target.is_pde else dims


class OnlineResult(NamedTuple):
    """Outcome of train_online"""
    theta: Theta
    final_loss: float
    history: list
    iterations: int
    outcome: Outcome


class Stage(NamedTuple):
    """One leg of an online run"""
    mu: tuple
    neurons: list
    max_iter: int
    lr: float
    freeze_c: bool = False
    polish_iter: int = 0


def _target_box(target) -> Box:
    """Input box of the neurons of {target}"""
    return target.input_box


def tgpt_loss(target, theta: Theta, neurons: Sequence[Neuron], colloc: CollocationSet,
              config: MetaConfig, mu, flat: torch.Tensor=None) -> torch.Tensor:
    """Online loss of the meta-network at {mu}.

       pde mode: the three-term PINN loss with Psi in place of the network.
       function mode: mean squared misfit against the family on its fixed grid.
    """
    target = get_target(target)
    field = TGPTField(theta, neurons, _target_box(target), config.wrap_dims(target), flat)
    if config.mode == LossMode.function:
        exact = target(target.grid, mu)
        return torch.mean((field(target.grid) - exact) ** 2)

    use_lambda = target.use_lambda if config.use_lambda is None else config.use_lambda
    return loss_terms(target, field, colloc, mu, config.eps_i, config.eps_b,
                      config.eps_lambda, use_lambda).total


def _online_loss(target, theta, neurons, colloc, config, mu) -> Callable:
    """Loss closure over the flat theta vector"""
    box, wrap = _target_box(target), config.wrap_dims(target)
    if config.mode == LossMode.function:
        grid = target.grid
        exact = target(grid, mu).detach()
        return lambda flat: torch.mean((TGPTField(theta, neurons, box, wrap, flat)(grid) - exact) ** 2)

    use_lambda = target.use_lambda if config.use_lambda is None else config.use_lambda

    def loss(flat):
        field = TGPTField(theta, neurons, box, wrap, flat)
        terms = loss_terms(target, field, colloc, mu, config.eps_i, config.eps_b,
                           config.eps_lambda, use_lambda)
        return torch.stack([terms.interior, config.eps_b * terms.boundary,
                            config.eps_i * terms.initial])
    return loss


def _nearest(neurons: Sequence[Neuron], mu: tuple) -> tuple:
    """Parameter of the neuron closest to {mu}, the first one on ties"""
    return min((n.mu for n in neurons),
               key=lambda p: sum((a - b) ** 2 for a, b in zip(p, mu)) if len(p) == len(mu) else inf)


def stages(mu, neurons: Sequence[Neuron], config: MetaConfig) -> List[Stage]:
    """Legs of an online run at {mu}; the last one trains {neurons} at {mu}."""
    mu, neurons = as_mu(mu), list(neurons)
    if config.freeze_transform:
        return [Stage(mu, neurons, config.max_iter, config.lr, polish_iter=config.polish_iter)]

    legs, lr = [], config.lr
    stage_iter = min(config.stage_iter, config.max_iter)
    start = _nearest(neurons, mu)
    if config.path_steps > 1 and len(start) == len(mu) and start != mu:
        for k in range(1, config.path_steps):
            s = k / config.path_steps
            legs.append(Stage(tuple(a + s * (b - a) for a, b in zip(start, mu)), neurons,
                              stage_iter, config.lr))

    widths = config.smoothing
    if widths:
        for width in widths:
            legs.append(Stage(mu, [n.smoothed(width) for n in neurons], stage_iter,
                              config.lr * width / widths[0], freeze_c=True))
        native = min(n.smoothing if n.smoothed(widths[0]) is not n else widths[-1]
                     for n in neurons)
        lr = config.lr * min(1.0, native / widths[0])

    legs.append(Stage(mu, neurons, config.max_iter, lr, polish_iter=config.polish_iter))
    return legs


def polish(loss: Callable, flat, mask: torch.Tensor, max_iter: int, tol: float, value: float):
    """Refine {flat} with L-BFGS on the entries where {mask} is 1, starting
       from a point whose loss is {value}.

       Returns
       -------
       (float, Tensor, int) lowest loss seen, its parameters, iterations used
    """
    point = torch.as_tensor(flat, dtype=DTYPE).detach().clone().requires_grad_(True)
    optimizer = torch.optim.LBFGS([point], lr=1.0, max_iter=POLISH_CHUNK,
                                  history_size=POLISH_CHUNK, tolerance_grad=0.0,
                                  tolerance_change=0.0, line_search_fn="strong_wolfe")
    best = [value, point.detach().clone()]

    def closure():
        current, grad = loss_grad(loss, point.detach())
        point.grad = grad * mask
        if current < best[0]:
            best[:] = [current, point.detach().clone()]
        return torch.tensor(current, dtype=DTYPE)

    used = 0
    while used < max_iter and best[0] > tol:
        before = best[0]
        group = optimizer.param_groups[0]
        group["max_iter"] = min(POLISH_CHUNK, max_iter - used)
        group["max_eval"] = group["max_iter"] * 5 // 4 + 1
        try:
            optimizer.step(closure)
        except NonFiniteError:
            break
        used = optimizer.state[point].get("n_iter", max_iter)
        if best[0] >= before:
            break
    return best[0], best[1], used


def _fit(target, stage: Stage, theta: Theta, colloc, config: MetaConfig, offset: int):
    """Adam, then polish, on one stage.

       Returns
       -------
       (Tensor, float, list, int) parameters, loss, history, iterations
    """
    mask = theta.mask(config.freeze_transform, config.fix_w, stage.freeze_c)
    loss = _online_loss(target, theta, stage.neurons, colloc, config, stage.mu)
    state = AdamState.for_params(theta.flat, stage.lr)
    flat, history, iteration = theta.flat, [], 0

    while True:
        value, grad = loss_grad(loss, flat)
        if (offset + iteration) % config.log_every == 0:
            history.append((offset + iteration, value))
        if value > DIVERGENCE_LIMIT:
            raise DivergenceError(f"online loss {value:.3e} exceeded {DIVERGENCE_LIMIT:.0e}", history)
        if value <= config.tol or iteration >= stage.max_iter:
            break
        flat, state = adam_step(state, flat, grad * mask)
        iteration += 1

    if value > config.tol and stage.polish_iter:
        value, flat, steps = polish(loss, flat, mask, stage.polish_iter, config.tol, value)
        iteration += steps
    return flat, value, history, iteration


def train_online(target, mu, neurons: Sequence[Neuron], config: MetaConfig=None,
                 colloc: CollocationSet=None) -> OnlineResult:
    """Train Theta(mu) with Adam, starting from W_i = I, b_i = 0, c_i = 1/n.

       For PDE targets the collocation sets default to those of the first
       neuron's parameter (the offline sets), or to those of {mu} when
       config.resample is on. The stages of config run in order, see
       MetaConfig.
    """
    target = get_target(target)
    config = config or MetaConfig.for_target(target)
    if not neurons:
        raise SizingError("neurons", expected=1, actual=0)
    mu = as_mu(mu)
    if target.is_pde and config.mode == LossMode.pde and colloc is None:
        source = mu if config.resample else neurons[0].mu
        colloc = target.collocation(source, config.seed, config.counts)

    theta = Theta.identity(len(neurons), target.input_dim, [n.mu for n in neurons])
    legs = stages(mu, neurons, config)
    history, iteration = [], 0
    for number, stage in enumerate(legs, start=1):
        flat, value, logged, steps = _fit(target, stage, theta, colloc, config, iteration)
        theta, iteration = theta.with_flat(flat), iteration + steps
        history.extend(logged)
        if len(legs) > 1:
            App.APP.info(f"stage {number}/{len(legs)} mu={stage.mu} loss={value:.6e}",
                         prefix="online")

    if history[-1][0] != iteration:
        history.append((iteration, value))

    outcome = Outcome.converged if value <= config.tol else Outcome.max_iterations
    App.APP.info(f"{target.id} mu={mu} n={theta.n} {outcome} iter={iteration} loss={value:.6e}",
                 prefix="online")
    return OnlineResult(theta, value, history, iteration, outcome)


def approximation_error(target, mu, result: OnlineResult, neurons: Sequence[Neuron],
                        config: MetaConfig=None):
    """Error of the trained meta-network at {mu}, wrapped as in {config}.

       Function families: discrete L2 error on the misfit grid.
       PDEs: relative L2 error on the reference grid, or None without an
       exact solution.
    """
    target = get_target(target)
    config = config or MetaConfig.for_target(target)
    field = TGPTField(result.theta, neurons, _target_box(target), config.wrap_dims(target))
    if target.is_pde:
        return target.relative_l2(field, mu)
    with torch.no_grad():
        approx = field(target.grid)
    return target.l2_error(approx, mu)
