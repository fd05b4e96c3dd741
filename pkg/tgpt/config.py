"""Config module -- experiment settings read from INI files and command-line flags"""

from configparser import ConfigParser
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .diffnet import NetworkSpec
from .errors import DomainError
from .metanet import MetaConfig
from .pinn import PinnConfig
from .problems import get_target
from .types import Box, as_mu


__all__ = [
    "ExperimentConfig",
    "SECTIONS",
]


"""Default snapshot networks per problem."""
NETWORKS = {
    "transport": ([2, 20, 20, 20, 1], "tanh"),
    "reaction": ([2, 20, 20, 20, 1], "waveact"),
    "reaction_diffusion": ([2, 40, 40, 40, 1], "tanh"),
}


"""INI section and key of every setting"""
SECTIONS = {
    "experiment": dict(problem="problem", mu="mu", mu1="mu1", seed="seed", n_max="n_max",
                       tol="tol", xi_ranges="xi_ranges", xi_counts="xi_counts"),
    "network": dict(widths="widths", activation="activation"),
    "pinn": dict(lr="pinn_lr", max_iter="pinn_max_iter", tol="pinn_tol", eps_i="eps_i",
                 eps_b="eps_b", eps_lambda="eps_lambda", use_lambda="use_lambda",
                 log_every="log_every"),
    "meta": dict(lr="meta_lr", max_iter="meta_max_iter", tol="meta_tol", mode="mode",
                 fix_w="fix_w", wrap="wrap", wrap_time="wrap_time", resample="resample",
                 polish_iter="polish_iter", path_steps="path_steps", stage_iter="stage_iter",
                 smoothing="smoothing"),
    "collocation": dict(n_interior="n_interior", n_boundary="n_boundary",
                        n_initial="n_initial"),
}


def _split(text: str, sep: str=",") -> list:
    """Split {text} by {sep}, dropping blanks"""
    return [part.strip() for part in str(text).split(sep) if part.strip()]


@dataclass(frozen=True)
class ExperimentConfig():
    """All settings of an experiment.

       Grids are written as text: xi_ranges "lo,hi;lo,hi" per parameter,
       xi_counts "41" or "11,11"; widths "2,20,20,20,1". use_lambda is
       "auto", "on" or "off". mode is "tgpt" or "gpt". smoothing lists the
       widths of the smoothing stages, "0.1,0.01". Online settings left at None
       take the defaults of MetaConfig.for_target.
    """
    problem: str = None
    mu: str = None
    mu1: str = None
    seed: int = 0
    n_max: int = 1
    tol: float = 1e-5
    xi_ranges: str = None
    xi_counts: str = None
    widths: str = None
    activation: str = None
    pinn_lr: float = 1e-3
    pinn_max_iter: int = 50000
    pinn_tol: float = 1e-6
    eps_i: float = 1.0
    eps_b: float = 1.0
    eps_lambda: float = 0.1
    use_lambda: str = "auto"
    log_every: int = 100
    meta_lr: float = None
    meta_max_iter: int = None
    meta_tol: float = None
    mode: str = "tgpt"
    fix_w: bool = False
    wrap: bool = None
    wrap_time: bool = False
    resample: bool = False
    polish_iter: int = None
    path_steps: int = None
    stage_iter: int = None
    smoothing: str = None
    n_interior: int = None
    n_boundary: int = None
    n_initial: int = None

    @classmethod
    def read(cls, path):
        """Return the config in the INI file at {path}"""
        parser = ConfigParser()
        with Path(path).open() as fp:
            parser.read_file(fp)

        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for section, keys in SECTIONS.items():
            if not parser.has_section(section):
                continue
            for key, attr in keys.items():
                if not parser.has_option(section, key):
                    continue
                kind = types[attr]
                if kind is bool:
                    values[attr] = parser.getboolean(section, key)
                elif kind is int:
                    values[attr] = parser.getint(section, key)
                elif kind is float:
                    values[attr] = parser.getfloat(section, key)
                else:
                    values[attr] = parser.get(section, key)
        return cls(**values)

    def override(self, **flags):
        """Return a copy with every flag that is not None applied"""
        return replace(self, **{k: v for k, v in flags.items() if v is not None})

    def resolved(self):
        """Return a copy with the per-problem defaults filled in"""
        if not self.problem:
            return self
        target = get_target(self.problem)
        filled = {}
        if target.is_pde:
            widths, activation = NETWORKS.get(target.id, ([target.input_dim, 20, 20, 20, 1], "tanh"))
            if self.widths is None:
                filled["widths"] = ",".join(map(str, widths))
            if self.activation is None:
                filled["activation"] = activation
            sizes = dict(zip(("n_interior", "n_boundary", "n_initial"), target.counts))
            filled.update({k: v for k, v in sizes.items() if getattr(self, k) is None})
        if self.xi_ranges is None:
            filled["xi_ranges"] = ";".join(f"{lo!r},{hi!r}" for lo, hi in target.params)
        if self.xi_counts is None:
            filled["xi_counts"] = ",".join(map(str, target.xi_counts))

        meta = MetaConfig.for_target(target)
        defaults = dict(meta_lr=meta.lr, meta_max_iter=meta.max_iter, meta_tol=meta.tol,
                        wrap=meta.wrap, polish_iter=meta.polish_iter, path_steps=meta.path_steps,
                        stage_iter=meta.stage_iter,
                        smoothing=",".join(map(repr, meta.smoothing)))
        filled.update({k: v for k, v in defaults.items() if getattr(self, k) is None})
        return replace(self, **filled)

    def write(self, directory) -> Path:
        """Write the resolved config to {directory}/config.ini"""
        config = self.resolved()
        parser = ConfigParser()
        values = asdict(config)
        for section, keys in SECTIONS.items():
            parser[section] = {key: str(values[attr]) for key, attr in keys.items()
                               if values[attr] is not None}
        path = Path(directory) / "config.ini"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fp:
            parser.write(fp)
        return path

    @property
    def target(self):
        """The problem or function family"""
        if not self.problem:
            raise DomainError("no problem id configured")
        return get_target(self.problem)

    def network_spec(self) -> NetworkSpec:
        """Snapshot architecture"""
        config = self.resolved()
        return NetworkSpec([int(w) for w in _split(config.widths)], config.activation)

    def _lambda(self):
        """use_lambda as None (problem default), True or False"""
        value = str(self.use_lambda).lower()
        if value in ("auto", "none", ""):
            return None
        if value in ("on", "true", "yes", "1"):
            return True
        if value in ("off", "false", "no", "0"):
            return False
        raise DomainError(f"use_lambda must be auto, on or off, got {self.use_lambda!r}")

    def pinn_config(self) -> PinnConfig:
        """Settings of snapshot training"""
        return PinnConfig(lr=self.pinn_lr, max_iter=self.pinn_max_iter, tol=self.pinn_tol,
                          eps_i=self.eps_i, eps_b=self.eps_b, eps_lambda=self.eps_lambda,
                          use_lambda=self._lambda(), seed=self.seed, log_every=self.log_every)

    def meta_config(self) -> MetaConfig:
        """Settings of online training"""
        mode = str(self.mode).lower()
        if mode not in ("tgpt", "gpt"):
            raise DomainError(f"mode must be tgpt or gpt, got {self.mode!r}")
        config, target = self.resolved(), self.target
        return MetaConfig.for_target(
            target, lr=config.meta_lr, max_iter=config.meta_max_iter, tol=config.meta_tol,
            freeze_transform=(mode == "gpt"), fix_w=config.fix_w, wrap=config.wrap,
            wrap_time=config.wrap_time, resample=config.resample,
            counts=config.collocation_counts if target.is_pde else None,
            eps_i=config.eps_i, eps_b=config.eps_b, eps_lambda=config.eps_lambda,
            use_lambda=config._lambda(), seed=config.seed, log_every=config.log_every,
            polish_iter=config.polish_iter, path_steps=config.path_steps,
            stage_iter=config.stage_iter, smoothing=[float(w) for w in _split(config.smoothing)])

    @property
    def collocation_counts(self) -> tuple:
        """(interior, boundary, initial) collocation sizes, None when unset"""
        config = self.resolved()
        counts = (config.n_interior, config.n_boundary, config.n_initial)
        return None if None in counts else counts

    def xi_train(self) -> list:
        """Training parameters"""
        config = self.resolved()
        ranges = [tuple(float(v) for v in _split(part)) for part in _split(config.xi_ranges, ";")]
        counts = [int(c) for c in _split(config.xi_counts)]
        box = Box(*ranges)
        if len(counts) == 1 and box.dim > 1:
            counts = counts * box.dim
        if len(counts) != box.dim or any(c < 1 for c in counts):
            raise DomainError(f"xi_counts {config.xi_counts!r} does not match {box}")
        return [tuple(float(v) for v in row) for row in box.linspace(counts)]

    @property
    def mu_value(self) -> tuple:
        """Target parameter"""
        if self.mu is None:
            raise DomainError("no parameter value configured")
        return as_mu(self.mu)
