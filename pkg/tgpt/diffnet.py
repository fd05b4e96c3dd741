"""Diffnet module -- dense networks with exact input jets and parameter gradients

Networks are described by a NetworkSpec and stored as one flat float64
ParamVector (a 1-D torch tensor). Derivatives come from torch autograd with
create_graph=True, so losses built from jet entries (u_t, u_x, u_xx) can be
differentiated again with respect to the parameters.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from math import sqrt
from typing import Callable, Optional, Sequence

import torch

from .errors import ContractError, NonFiniteError, SizingError
from .states import Activation
from .types import DTYPE, as_points


__all__ = [
    "AdamState",
    "Jet",
    "NetworkSpec",
    "Neuron",
    "adam_step",
    "forward",
    "forward_jet",
    "init_params",
    "jet",
    "loss_grad",
]


class NetworkSpec():
    """Architecture of a fully connected network.

    Examples
    --------
    >>> spec = NetworkSpec([2, 20, 20, 20, 1], "tanh")
    >>> spec.param_count
    921
    >>> NetworkSpec([2, 20, 1], "waveact").param_count
    83
    """

    def __init__(self, widths: Sequence[int], activation="tanh"):
        """Initializer
           Params
           ------
           widths (Sequence[int])         : layer sizes, inputs first, output last
           activation (Activation | str)  : hidden layer activation
        """
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2:
            raise SizingError("widths", expected=2, actual=len(widths))
        if any(w < 1 for w in widths):
            raise ContractError(f"all widths must be positive: {widths}")
        if widths[-1] != 1:
            raise SizingError("output width", expected=1, actual=widths[-1])

        self.widths = widths
        self.activation = Activation(activation)

    def __repr__(self):
        """Return repr string"""
        return f"NetworkSpec({list(self.widths)}, {self.activation.name!r})"

    def __eq__(self, other):
        """Specs are equal when widths and activation agree"""
        return (isinstance(other, NetworkSpec)
                and (self.widths, self.activation) == (other.widths, other.activation))

    @property
    def input_dim(self) -> int:
        """Number of inputs (d+1 for space-time networks)"""
        return self.widths[0]

    @property
    def layers(self) -> list:
        """(in, out) pairs of every affine layer"""
        return list(zip(self.widths[:-1], self.widths[1:]))

    @property
    def hidden_count(self) -> int:
        """Number of hidden layers"""
        return len(self.widths) - 2

    @property
    def param_count(self) -> int:
        """Length of the flat parameter vector"""
        count = sum(o * i + o for i, o in self.layers)
        if self.activation == Activation.waveact:
            count += 2 * self.hidden_count
        return count

    def unflatten(self, params: torch.Tensor):
        """Split a flat parameter vector into views.

           Returns
           -------
           (layers, waves): layers is a list of (W, b) with W of shape (out, in);
                            waves is a list of (w1, w2) per hidden layer (empty
                            for tanh networks)
        """
        if params.dim() != 1 or params.shape[0] != self.param_count:
            raise SizingError("params", expected=self.param_count,
                              actual=params.reshape(-1).shape[0])

        layers, offset = [], 0
        for fan_in, fan_out in self.layers:
            weight = params[offset:offset + fan_out * fan_in].view(fan_out, fan_in)
            offset += fan_out * fan_in
            bias = params[offset:offset + fan_out]
            offset += fan_out
            layers.append((weight, bias))

        waves = []
        if self.activation == Activation.waveact:
            for _ in range(self.hidden_count):
                waves.append((params[offset], params[offset + 1]))
                offset += 2
        return layers, waves


def init_params(spec: NetworkSpec, seed: int=0) -> torch.Tensor:
    """Return seeded initial parameters.
       Weights uniform in +/- sqrt(6/(in+out)), biases 0, waveact pairs (1, 1).
    """
    generator = torch.Generator().manual_seed(int(seed))
    chunks = []
    for fan_in, fan_out in spec.layers:
        bound = sqrt(6.0 / (fan_in + fan_out))
        weight = torch.rand(fan_out * fan_in, generator=generator, dtype=DTYPE)
        chunks.append((2 * weight - 1) * bound)
        chunks.append(torch.zeros(fan_out, dtype=DTYPE))
    if spec.activation == Activation.waveact:
        chunks.append(torch.ones(2 * spec.hidden_count, dtype=DTYPE))
    return torch.cat(chunks)


def _activate(spec: NetworkSpec, z: torch.Tensor, wave) -> torch.Tensor:
    """Apply the hidden-layer activation"""
    if spec.activation == Activation.waveact:
        w1, w2 = wave
        return w1 * torch.sin(z) + w2 * torch.cos(z)
    return torch.tanh(z)


def evaluate(spec: NetworkSpec, params: torch.Tensor, points: torch.Tensor) -> torch.Tensor:
    """Evaluate the network on a (N, widths[0]) batch, returning shape (N,).
       Graph-preserving, so it can be composed with jet() and loss_grad().
    """
    layers, waves = spec.unflatten(params)
    hidden = points
    for k, (weight, bias) in enumerate(layers[:-1]):
        wave = waves[k] if waves else None
        hidden = _activate(spec, hidden @ weight.T + bias, wave)
    weight, bias = layers[-1]
    return (hidden @ weight.T + bias).reshape(-1)


def forward(spec: NetworkSpec, params, inputs):
    """Return the network output.

       Params
       ------
       spec (NetworkSpec)             : architecture
       params (Tensor | sequence)     : flat parameters
       inputs (Tensor | sequence)     : one point of length widths[0], or a (N, widths[0]) batch

       Returns
       -------
       (float | Tensor) a float for a single point, a (N,) tensor for a batch
    """
    params = torch.as_tensor(params, dtype=DTYPE)
    single = torch.as_tensor(inputs).dim() == 1
    points = as_points(inputs, spec.input_dim)
    with torch.no_grad():
        values = evaluate(spec, params, points)
    return float(values[0]) if single else values


class Jet():
    """Value, input gradient and (optionally) input Hessian of a scalar field
       at a batch of N points with m inputs (x_1..x_d, t).

       value: (N,)   grad: (N, m)   hess: (N, m, m)
    """

    def __init__(self, value, grad, hess=None):
        """Initializer"""
        self.value = value
        self.grad = grad
        self._hess = hess

    def __repr__(self):
        """Return repr string with the batch shape"""
        return f"Jet(points={self.value.shape[0]}, inputs={self.grad.shape[-1]}, hess={self.hess_enabled})"

    @property
    def hess_enabled(self) -> bool:
        """True if second derivatives were computed"""
        return self._hess is not None

    @property
    def hess(self) -> torch.Tensor:
        """Second derivatives; absent unless requested."""
        if self._hess is None:
            raise ContractError("Jet was computed without hessian entries")
        return self._hess

    @property
    def inputs(self) -> int:
        """Number of input coordinates"""
        return self.grad.shape[-1]

    @property
    def u_t(self) -> torch.Tensor:
        """Time derivative (last input)"""
        return self.grad[:, -1]

    @property
    def u_x(self) -> torch.Tensor:
        """First spatial derivative"""
        return self.grad[:, 0]

    @property
    def u_xx(self) -> torch.Tensor:
        """Second spatial derivative"""
        return self.hess[:, 0, 0]

    @property
    def spatial_grad(self) -> torch.Tensor:
        """Gradient without the time entry, shape (N, m-1)"""
        return self.grad[:, :-1]

    def detach(self):
        """Return a Jet cut from the autograd graph"""
        hess = self._hess.detach() if self._hess is not None else None
        return Jet(self.value.detach(), self.grad.detach(), hess)


def _grad_or_zeros(output: torch.Tensor, points: torch.Tensor) -> torch.Tensor:
    """d(sum output)/d points, keeping the graph; zeros if output is independent of points"""
    if not output.requires_grad:
        return torch.zeros_like(points)
    grad, = torch.autograd.grad(output.sum(), points, create_graph=True, allow_unused=True)
    return torch.zeros_like(points) if grad is None else grad


def jet(fn: Callable, inputs, hess_enabled: bool=False) -> Jet:
    """Return the Jet of any graph-preserving scalar field {fn} mapping
       (N, m) points to (N,) values. Each output only depends on its own
       point, so derivatives of the summed output are per-point derivatives.
    """
    points = torch.as_tensor(inputs, dtype=DTYPE).detach().clone().requires_grad_(True)
    value = fn(points)
    grad = _grad_or_zeros(value, points)

    hess = None
    if hess_enabled:
        rows = [_grad_or_zeros(grad[:, j], points) for j in range(points.shape[1])]
        hess = torch.stack(rows, dim=1)
    return Jet(value, grad, hess)


def forward_jet(spec: NetworkSpec, params, inputs, hess_enabled: bool=False) -> Jet:
    """Return the Jet of the network at {inputs}.
       If {params} requires grad, the Jet entries stay differentiable with
       respect to it.
    """
    params = torch.as_tensor(params, dtype=DTYPE)
    points = as_points(inputs, spec.input_dim)
    return jet(lambda x: evaluate(spec, params, x), points, hess_enabled)


def loss_grad(loss: Callable, params):
    """Evaluate {loss} at {params} and its exact gradient.

       Params
       ------
       loss (Callable)         : maps a flat parameter tensor to a scalar, or
                                 to a vector of terms that are summed
       params (Tensor | list)  : flat parameters

       Returns
       -------
       (float, Tensor) loss value and gradient with the shape of params
    """
    point = torch.as_tensor(params, dtype=DTYPE).detach().clone().requires_grad_(True)
    terms = torch.as_tensor(loss(point)).reshape(-1)

    bad = (~torch.isfinite(terms.detach())).nonzero()
    if len(bad):
        raise NonFiniteError("loss is not finite", term=int(bad[0]))

    value = terms.sum()
    grad = None
    if value.requires_grad:
        grad, = torch.autograd.grad(value, point, allow_unused=True)
    if grad is None:
        grad = torch.zeros_like(point)

    bad = (~torch.isfinite(grad)).nonzero()
    if len(bad):
        raise NonFiniteError("gradient is not finite", index=int(bad[0]))
    return float(value.detach()), grad.detach()


@dataclass(frozen=True)
class AdamState():
    """Moments and hyperparameters of an Adam run over one parameter vector."""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Optional[torch.Tensor] = field(default=None, repr=False)
    v: Optional[torch.Tensor] = field(default=None, repr=False)

    @classmethod
    def for_params(cls, params, lr: float=1e-3, **kwargs):
        """Return a fresh state with zero moments aligned with {params}"""
        params = torch.as_tensor(params, dtype=DTYPE)
        return cls(lr=lr, m=torch.zeros_like(params), v=torch.zeros_like(params), **kwargs)


def adam_step(state: AdamState, params, grad):
    """Take one bias-corrected Adam step.

       Returns
       -------
       (Tensor, AdamState) updated parameters and a new state; inputs are not modified
    """
    params = torch.as_tensor(params, dtype=DTYPE)
    grad = torch.as_tensor(grad, dtype=DTYPE)
    if state.m is None:
        state = AdamState.for_params(params, lr=state.lr, beta1=state.beta1,
                                     beta2=state.beta2, eps=state.eps)
    for name, other in (("grad", grad), ("moments", state.m)):
        if other.shape != params.shape:
            raise SizingError(name, expected=params.numel(), actual=other.numel())

    bad = (~torch.isfinite(grad)).nonzero()
    if len(bad):
        raise NonFiniteError("gradient is not finite", index=int(bad[0]))

    step = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = m / (1 - state.beta1 ** step)
    v_hat = v / (1 - state.beta2 ** step)
    updated = params - state.lr * m_hat / (torch.sqrt(v_hat) + state.eps)
    return updated, replace(state, step=step, m=m, v=v)


class Neuron(ABC):
    """A scalar field usable as a meta-neuron: a trained network or an
       analytic function evaluated at a fixed parameter value mu.
    """

    """Parameter value the neuron was built at."""
    mu: tuple

    @property
    @abstractmethod
    def input_dim(self) -> int:
        """Number of inputs"""

    @abstractmethod
    def __call__(self, points: torch.Tensor) -> torch.Tensor:
        """Graph-preserving evaluation on (N, input_dim) points, returning (N,)"""

    def smoothed(self, width: float) -> "Neuron":
        """Copy with its sharp features spread over {width}, or the neuron
           itself when it has none."""
        return self
