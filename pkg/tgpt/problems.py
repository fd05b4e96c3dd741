"""Problems module -- registry of parametric function families and PDEs"""

from abc import ABC, abstractmethod
from functools import cached_property
from math import pi
from typing import Callable

import numpy as np
import torch

from .diffnet import Jet, Neuron
from .errors import ContractError, DomainError, GridError
from .sampling import CollocationSet, shock_collocation, uniform_collocation
from .types import DTYPE, Box, as_mu, as_points


__all__ = [
    "FUNCTION_IDS",
    "PDE_IDS",
    "TARGETS",
    "ExactNeuron",
    "FunctionFamily",
    "FunctionNeuron",
    "PDEProblem",
    "eval_function",
    "get_target",
    "rd_exact",
    "reaction_exact",
    "residual",
    "transport_exact",
]


"""Width of the logistic profile replacing the transport jump in ExactNeuron."""
TRANSPORT_SMOOTHING = 1e-3


class Target(ABC):
    """Base class for anything the meta-network can be trained against."""

    def __init__(self, id: str, omega: Box, params: Box, xi_counts: tuple):
        """Initializer
           Params
           ------
           id (str)          : registry key
           omega (Box)       : spatial domain
           params (Box)      : parameter domain D
           xi_counts (tuple) : default equispaced training grid size per parameter
        """
        self.id = id
        self.omega = omega
        self.params = params
        self.xi_counts = tuple(xi_counts)

    def __repr__(self):
        """Return repr string containing the id"""
        return f"{self.__class__.__name__}({self.id!r})"

    @property
    @abstractmethod
    def is_pde(self) -> bool:
        """True for PDE problems"""

    @property
    @abstractmethod
    def input_box(self) -> Box:
        """Box of the meta-neuron inputs (Omega, or Omega x [0, T])"""

    @property
    def input_dim(self) -> int:
        """Number of meta-neuron inputs"""
        return self.input_box.dim

    def check_mu(self, mu) -> tuple:
        """Return {mu} as a tuple, raising DomainError if it has the wrong
           length or lies outside of D."""
        mu = as_mu(mu)
        if len(mu) != self.params.dim:
            raise DomainError(f"{self.id} takes {self.params.dim} parameter(s), got {mu}")
        if not self.params.contains(mu):
            raise DomainError(f"mu={mu} is outside of {self.params} for {self.id}")
        return mu

    def xi_train(self, counts=None) -> list:
        """Equispaced training grid over D as a list of parameter tuples."""
        grid = self.params.linspace(counts or self.xi_counts)
        return [tuple(float(v) for v in row) for row in grid]


class FunctionFamily(Target):
    """An analytically given parametric function u(x; mu)."""

    """Points per dimension of the misfit grid."""
    GRID_POINTS = {1: 1000, 2: 101}

    def __init__(self, id, omega, params, xi_counts, evaluator: Callable, label: str="",
                 periodic: bool=False):
        """Initializer
           Params
           ------
           evaluator (Callable): maps ((N, d) tensor, mu tuple) to a (N,) tensor
           label (str)         : formula, for reports
           periodic (bool)     : every member is periodic over Omega
        """
        super().__init__(id, omega, params, xi_counts)
        self.evaluator = evaluator
        self.label = label or id
        self.periodic = periodic

    @property
    def is_pde(self) -> bool:
        """Functions are not PDEs"""
        return False

    @property
    def input_box(self) -> Box:
        """Function neurons only see the spatial inputs"""
        return self.omega

    @cached_property
    def grid(self) -> torch.Tensor:
        """Fixed misfit grid: 1000 points in 1D, 101x101 in 2D"""
        counts = self.GRID_POINTS.get(self.omega.dim, 101)
        return torch.as_tensor(self.omega.linspace(counts), dtype=DTYPE)

    def __call__(self, points, mu) -> torch.Tensor:
        """Graph-preserving evaluation, no domain checks."""
        return self.evaluator(points, as_mu(mu))

    def l2_error(self, approx, mu) -> float:
        """Discrete L2 error sqrt(|Omega| mean(e^2)) of {approx} on the grid"""
        exact = self(self.grid, mu)
        return float(torch.sqrt(self.omega.volume * torch.mean((approx - exact) ** 2)))


class PDEProblem(Target):
    """A time-dependent parametric PDE u_t + F(u) = 0 with periodic boundary."""

    def __init__(self, id, omega, T, params, xi_counts, residual: Callable, initial: Callable,
                 exact: Callable=None, needs_hessian=False, use_lambda=False, counts=None,
                 label: str=""):
        """Initializer
           Params
           ------
           T (float)              : time horizon
           residual (Callable)    : (jet, points, mu) -> (N,) residual
           initial (Callable)     : (x tensor (N, d), mu) -> u_0 values
           exact (Callable)       : (points, mu) -> values, optional
           needs_hessian (bool)   : residual reads second derivatives
           use_lambda (bool)      : shock-capturing weight on by default
           counts (tuple)         : default (interior, boundary, initial) collocation sizes
        """
        super().__init__(id, omega, params, xi_counts)
        self.T = float(T)
        self._residual = residual
        self.initial = initial
        self.exact = exact
        self.needs_hessian = needs_hessian
        self.use_lambda = use_lambda
        self.counts = counts or (2000, 100, 200)
        self.label = label or id
        self.boundary = "periodic"
        self.periodic = True

    @property
    def is_pde(self) -> bool:
        """PDEs are PDEs"""
        return True

    @property
    def input_box(self) -> Box:
        """Space-time box Omega x [0, T]"""
        return self.omega.extend(0.0, self.T)

    def residual(self, jet: Jet, points, mu) -> torch.Tensor:
        """Residual u_t + F(u) evaluated from jet entries."""
        if self.needs_hessian and not jet.hess_enabled:
            raise ContractError(f"{self.id} residual needs hessian entries")
        return self._residual(jet, points, as_mu(mu))

    def collocation(self, mu, seed: int=0, counts=None) -> CollocationSet:
        """Collocation sets for training at {mu}.
           Transport uses the discontinuity-concentrated sampler.
        """
        mu = as_mu(mu)
        n_o, n_b, n_i = counts or self.counts
        if self.id == "transport":
            return shock_collocation(mu[0], seed, n_interior=n_o, n_initial=n_i, n_boundary=n_b)
        return uniform_collocation(self.omega, self.T, n_o, n_b, n_i, seed)

    def reference(self, mu):
        """Reference grid and exact values, or None without an exact solution.

           Returns
           -------
           (points, values): (N, 2) tensor and (N,) tensor
        """
        mu = as_mu(mu)
        (lo, hi), = self.omega.ranges
        times = np.linspace(0.0, self.T, 101)
        if self.id == "reaction_diffusion":
            x = 2 * pi * np.arange(256) / 256
            values = rd_exact(x, times, *mu)
        elif self.exact is not None:
            x = np.linspace(lo, hi, 400 if self.id == "transport" else 101)
            values = None
        else:
            return None

        tt, xx = np.meshgrid(times, x, indexing="ij")
        points = torch.as_tensor(np.stack([xx.reshape(-1), tt.reshape(-1)], axis=-1), dtype=DTYPE)
        if values is None:
            values = self.exact(points, mu)
        return points, torch.as_tensor(values, dtype=DTYPE).reshape(-1)

    def relative_l2(self, approx: Callable, mu):
        """Relative L2 error of the field {approx} on the reference grid, or
           None without an exact solution."""
        reference = self.reference(mu)
        if reference is None:
            return None
        points, exact = reference
        with torch.no_grad():
            values = approx(points)
        return float(torch.linalg.norm(values - exact) / torch.linalg.norm(exact))


# ---------------------------------------------------------------------------
# Function families
# ---------------------------------------------------------------------------

def _welper(points, mu):
    """psi(x/(0.4+mu) - 1), psi(z) = exp(-1/(1-z^2)) on [-1, -1/2), else 0"""
    x = points[:, 0]
    scale = 0.4 + mu[0]
    if scale == 0:
        return torch.zeros_like(x)
    z = x / scale - 1
    inside = (z > -1) & (z < -0.5)
    safe = torch.where(inside, z, torch.full_like(z, -0.75))
    return torch.where(inside, torch.exp(-1 / (1 - safe ** 2)), torch.zeros_like(z))


def _inv_dist(points, mu):
    """1/sqrt((x-mu1)^2 + (y-mu2)^2)"""
    return 1 / torch.sqrt((points[:, 0] - mu[0]) ** 2 + (points[:, 1] - mu[1]) ** 2)


def _families() -> list:
    """Build the function families"""
    sym = Box((-pi, pi))
    return [
        FunctionFamily("sin_shift", sym, Box((-5, 5)), (201,),
                       lambda p, mu: torch.sin(p[:, 0] + mu[0]), "sin(x+mu)", periodic=True),
        FunctionFamily("sin_freq", sym, Box((1, 2)), (201,),
                       lambda p, mu: torch.sin(mu[0] * p[:, 0]), "sin(mu x)"),
        FunctionFamily("sin_freq_shift", sym, Box((-5, 5), (-5, 5)), (20, 20),
                       lambda p, mu: torch.sin(mu[0] * (p[:, 0] + mu[1])), "sin(mu1(x+mu2))"),
        FunctionFamily("relu_sin", sym, Box((-5, 5)), (201,),
                       lambda p, mu: torch.clamp(torch.sin(p[:, 0] + mu[0]), min=0),
                       "max(sin(x+mu),0)", periodic=True),
        FunctionFamily("abs_shift", Box((-10, 10)), Box((-5, 5)), (201,),
                       lambda p, mu: torch.abs(p[:, 0] + mu[0]), "|x+mu|"),
        FunctionFamily("welper_jump", Box((-1, 1)), Box((-1, 1)), (201,),
                       _welper, "psi(x/(0.4+mu)-1)"),
        FunctionFamily("inv_dist_2d", Box((0, 1), (0, 1)), Box((-1, -0.01), (-1, -0.01)), (21, 21),
                       _inv_dist, "1/|(x,y)-mu|"),
    ]


# ---------------------------------------------------------------------------
# PDE problems
# ---------------------------------------------------------------------------

def _wrap(s, period=2.0, lower=-1.0):
    """Map s periodically onto [lower, lower+period)"""
    return lower + torch.remainder(s - lower, period)


def _g(s) -> torch.Tensor:
    """Transport initial condition: 0 on (-0.5, 0.5), 1 otherwise, period 2"""
    s = _wrap(s)
    return torch.where(torch.abs(s) < 0.5, torch.zeros_like(s), torch.ones_like(s))


def _g_smooth(s, width=TRANSPORT_SMOOTHING) -> torch.Tensor:
    """Logistic profile approaching _g as width -> 0"""
    return torch.sigmoid((torch.abs(_wrap(s)) - 0.5) / width)


def _h(x):
    """Gaussian bump exp(-(x-pi)^2 / (2 (pi/4)^2))"""
    return torch.exp(-(x - pi) ** 2 / (2 * (pi / 4) ** 2))


def _logistic(x, t, rho):
    """h e^{rho t} / (h e^{rho t} + 1 - h)"""
    h = _h(x)
    grown = h * torch.exp(rho * t)
    return grown / (grown + 1 - h)


def _transport_residual(jet, points, mu):
    """u_t + nu u_x"""
    return jet.u_t + mu[0] * jet.u_x


def _reaction_residual(jet, points, mu):
    """u_t - rho u (1 - u)"""
    u = jet.value
    return jet.u_t - mu[0] * u * (1 - u)


def _rd_residual(jet, points, mu):
    """u_t - nu u_xx - rho u (1 - u), mu = (rho, nu)"""
    rho, nu = mu
    u = jet.value
    return jet.u_t - nu * jet.u_xx - rho * u * (1 - u)


def _problems() -> list:
    """Build the PDE problems"""
    periodic = Box((0, 2 * pi))
    return [
        PDEProblem("transport", Box((-1, 1)), 2.0, Box((-10, 10)), (41,),
                   _transport_residual,
                   lambda x, mu: _g(x[:, 0]),
                   exact=lambda p, mu: _g(p[:, 0] - mu[0] * p[:, 1]),
                   use_lambda=True, counts=(10000, 200, 1000), label="u_t + nu u_x = 0"),
        PDEProblem("reaction", periodic, 1.0, Box((1, 10)), (41,),
                   _reaction_residual,
                   lambda x, mu: _h(x[:, 0]),
                   exact=lambda p, mu: _logistic(p[:, 0], p[:, 1], mu[0]),
                   label="u_t - rho u(1-u) = 0"),
        PDEProblem("reaction_diffusion", periodic, 1.0, Box((1, 5), (1, 5)), (11, 11),
                   _rd_residual,
                   lambda x, mu: _h(x[:, 0]),
                   needs_hessian=True, label="u_t - nu u_xx - rho u(1-u) = 0"),
    ]


"""Registry of every target by id"""
TARGETS = {target.id: target for target in _families() + _problems()}

FUNCTION_IDS = [k for k, v in TARGETS.items() if not v.is_pde]
PDE_IDS = [k for k, v in TARGETS.items() if v.is_pde]


def get_target(id):
    """Return the FunctionFamily or PDEProblem registered as {id}"""
    if isinstance(id, Target):
        return id
    try:
        return TARGETS[id]
    except KeyError:
        raise DomainError(f"Unknown problem id {id!r}, valid ids: {', '.join(TARGETS)}") from None


# ---------------------------------------------------------------------------
# Neurons built from exact formulas
# ---------------------------------------------------------------------------

class FunctionNeuron(Neuron):
    """Family member u(.; mu) used as a meta-neuron."""

    def __init__(self, family, mu):
        """Initializer"""
        self.family = get_target(family)
        self.mu = self.family.check_mu(mu)

    def __repr__(self):
        """Return repr string"""
        return f"FunctionNeuron({self.family.id!r}, mu={self.mu})"

    @property
    def input_dim(self) -> int:
        """Spatial dimension of the family"""
        return self.family.omega.dim

    def __call__(self, points):
        """Evaluate the family member"""
        return self.family(points, self.mu)


class ExactNeuron(Neuron):
    """Exact PDE solution at mu used in place of a trained PINN.
       The transport jump is replaced by a logistic profile of width
       {smoothing} so the field has usable derivatives.
    """

    def __init__(self, problem, mu, smoothing: float=TRANSPORT_SMOOTHING):
        """Initializer"""
        self.problem = get_target(problem)
        if self.problem.exact is None:
            raise ContractError(f"{self.problem.id} has no closed-form solution")
        self.mu = self.problem.check_mu(mu)
        self.smoothing = smoothing

    def __repr__(self):
        """Return repr string"""
        return f"ExactNeuron({self.problem.id!r}, mu={self.mu})"

    @property
    def input_dim(self) -> int:
        """Space-time inputs"""
        return self.problem.input_dim

    def smoothed(self, width: float):
        """Transport neuron with a logistic jump of {width}"""
        if self.problem.id != "transport":
            return self
        return ExactNeuron(self.problem, self.mu, width)

    def __call__(self, points):
        """Evaluate the exact solution"""
        if self.problem.id == "transport":
            return _g_smooth(points[:, 0] - self.mu[0] * points[:, 1], self.smoothing)
        return self.problem.exact(points, self.mu)


# ---------------------------------------------------------------------------
# Scalar entry points
# ---------------------------------------------------------------------------

def eval_function(id: str, x, mu) -> float:
    """Evaluate family {id} at the spatial point {x} and parameter {mu}.

    Examples
    --------
    >>> eval_function("sin_shift", 0.0, pi / 2)
    1.0
    """
    family = get_target(id)
    if family.is_pde:
        raise DomainError(f"{id} is a PDE problem, not a function family")
    mu = family.check_mu(mu)
    if not family.omega.contains(x):
        raise DomainError(f"x={as_mu(x)} is outside of {family.omega} for {id}")
    points = as_points(as_mu(x), family.omega.dim)
    return float(family(points, mu)[0])


def _scalar_or_array(fn, *args):
    """Apply a torch formula to float or array arguments"""
    tensors = torch.broadcast_tensors(*(torch.as_tensor(a, dtype=DTYPE) for a in args))
    values = fn(*tensors)
    return float(values) if values.dim() == 0 else values.numpy()


def transport_exact(x, t, nu):
    """g(x - nu t) with g extended with period 2"""
    return _scalar_or_array(lambda x, t: _g(x - nu * t), x, t)


def reaction_exact(x, t, rho):
    """Logistic solution of u_t = rho u (1 - u) with u(x, 0) = h(x)"""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return _scalar_or_array(lambda x, t: _logistic(x, t, rho), x, t)


"""Largest grid accepted by rd_exact"""
RD_MAX_POINTS = 4096

"""Largest imaginary part the inverse DFT of rd_exact may leave."""
RD_IMAG_TOL = 1e-10


def rd_exact(x, t, rho, nu):
    """Reaction profile at time t smoothed by the periodic heat kernel.

       Params
       ------
       x (array)          : uniform periodic grid 2 pi k / N on [0, 2 pi)
       t (float | array)  : time(s)
       rho, nu (float)    : reaction and diffusion coefficients

       Returns
       -------
       (ndarray) shape (N,) for scalar t, else (len(t), N)
    """
    if nu < 0:
        raise DomainError(f"nu must be non-negative, got {nu}")
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2 or n > RD_MAX_POINTS:
        raise GridError(f"grid size must be in [2, {RD_MAX_POINTS}], got {n}")
    expected = 2 * pi * np.arange(n) / n
    if not np.allclose(x, expected, rtol=0, atol=1e-10):
        raise GridError("rd_exact needs the uniform periodic grid 2 pi k / N on [0, 2 pi)")

    k = np.fft.fftfreq(n, d=1.0 / n)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    rows = []
    for time in times:
        profile = reaction_exact(x, np.full_like(x, time), rho)
        spectrum = np.fft.fft(profile) * np.exp(-nu * k ** 2 * time)
        values = np.fft.ifft(spectrum)
        if np.max(np.abs(values.imag)) > RD_IMAG_TOL:
            raise GridError(f"inverse DFT left an imaginary residue at t={time}")
        rows.append(values.real)
    return rows[0] if np.ndim(t) == 0 else np.stack(rows)


def residual(problem, jet: Jet, x, t, mu) -> torch.Tensor:
    """Residual of {problem} from the entries of {jet} at points (x, t)."""
    problem = get_target(problem)
    if not problem.is_pde:
        raise DomainError(f"{problem.id} is not a PDE problem")
    points = None
    if x is not None and t is not None:
        points = torch.stack(torch.broadcast_tensors(
            torch.as_tensor(x, dtype=DTYPE), torch.as_tensor(t, dtype=DTYPE)), dim=-1).reshape(-1, 2)
    return problem.residual(jet, points, mu)
