"""Objects module -- classes for the JSON documents written and read by the commands"""

from abc import ABC, abstractmethod

import torch

from .diffnet import NetworkSpec
from .errors import ContractError
from .metanet import OnlineResult, Theta
from .pinn import Snapshot
from .problems import get_target
from .states import Activation, Outcome
from .types import DTYPE, as_mu


__all__ = [
    "Checkpoint",
    "ThetaDocument",
    "rget",
]


class Document(ABC):
    """Base class for objects created from JSON data."""

    """Version written to every document."""
    FORMAT_VERSION: int = 1

    """The data the object was created from."""
    data: dict

    def __repr__(self):
        """Return repr string containing values of attrs as defined in
           self.fields"""
        fields = {k: getattr(self, k) for k, v in self.fields.items() if v[1]}
        return f"{self.__class__.__name__}({fields!r})"

    def __init__(self, data: dict=None):
        """Initializer
           Extracts the values from the {data} dict as defined by {self.fields}.

           Params
           ------
           data: (dict) the parsed JSON document
        """
        self.data = data or {}
        for attr, mapping in self.fields.items():
            key = mapping[0]
            klass = mapping[2] if len(mapping) >= 3 else None
            val = rget(self.data, key)
            if klass and val is not None:
                val = klass(val)
            setattr(self, attr, val)

    @property
    @abstractmethod
    def fields(self) -> dict:
        """Return a dict, where
            * key (str): object attribute to set
            * value (tuple):
                * (str) key to the corresponding field of the JSON dict
                * (bool) if it should be included in the repr
                * (type, optional) type to instantiate attr as
        """

    def check_version(self):
        """Raise ContractError for documents of another format version"""
        if self.format_version != self.FORMAT_VERSION:
            raise ContractError(f"{self.__class__.__name__} format version "
                                f"{self.format_version!r} is not supported")


class Checkpoint(Document):
    """A saved snapshot network.

       {"format_version": 1, "widths": [...], "activation": "tanh",
        "params": [...], "mu": [...], "problem": "transport",
        "history": [{"iter": 0, "loss": ...}, ...], ...}
    """

    @property
    def fields(self) -> dict:
        """Mapping of object attrs to (json field, include in repr, instance type)"""
        return dict(
            format_version=("format_version", False),
            problem=("problem", True),
            mu=("mu", True, as_mu),
            widths=("widths", True),
            activation=("activation", False, Activation),
            params=("params", False),
            final_loss=("final_loss", True),
            iterations=("iterations", False),
            outcome=("outcome", False, Outcome),
            history=("history", False),
        )

    @classmethod
    def from_snapshot(cls, snapshot: Snapshot):
        """Return the Checkpoint of a trained snapshot"""
        return cls(dict(
            format_version=cls.FORMAT_VERSION,
            problem=snapshot.problem,
            mu=list(snapshot.mu),
            widths=list(snapshot.spec.widths),
            activation=snapshot.spec.activation.name,
            params=snapshot.params.tolist(),
            final_loss=snapshot.final_loss,
            iterations=snapshot.iterations,
            outcome=snapshot.outcome.value,
            history=[{"iter": i, "loss": loss} for i, loss in snapshot.history],
        ))

    @property
    def spec(self) -> NetworkSpec:
        """Architecture"""
        return NetworkSpec(self.widths, self.activation)

    def to_snapshot(self) -> Snapshot:
        """Return the Snapshot; parameters are restored bit for bit"""
        self.check_version()
        get_target(self.problem)
        history = [(row["iter"], row["loss"]) for row in self.history or []]
        return Snapshot(self.spec, torch.tensor(self.params, dtype=DTYPE), self.mu, self.problem,
                        self.final_loss, history, self.iterations or 0,
                        self.outcome or Outcome.max_iterations)


class ThetaDocument(Document):
    """Trained online parameters.

       {"n": 1, "d": 1, "time": true,
        "entries": [{"mu_i": [...], "W": [[...]], "b": [...], "c": ...}],
        "final_loss": ...}
    """

    @property
    def fields(self) -> dict:
        """Mapping of object attrs to (json field, include in repr, instance type)"""
        return dict(
            format_version=("format_version", False),
            problem=("problem", True),
            mu=("mu", True, as_mu),
            n=("n", True),
            d=("d", True),
            time=("time", False, bool),
            entries=("entries", False),
            final_loss=("final_loss", True),
            iterations=("iterations", False),
            outcome=("outcome", False, Outcome),
        )

    @classmethod
    def from_result(cls, target, mu, result: OnlineResult):
        """Return the ThetaDocument of an online run"""
        target = get_target(target)
        theta = result.theta
        entries = [dict(mu_i=list(mu_i), W=W.tolist(), b=b.tolist(), c=float(c))
                   for mu_i, W, b, c in zip(theta.mus, *theta.split())]
        return cls(dict(
            format_version=cls.FORMAT_VERSION,
            problem=target.id,
            mu=list(as_mu(mu)),
            n=theta.n,
            d=target.omega.dim,
            time=target.is_pde,
            entries=entries,
            final_loss=result.final_loss,
            iterations=result.iterations,
            outcome=result.outcome.value,
        ))

    @property
    def inputs(self) -> int:
        """Number of transform inputs"""
        return self.d + (1 if self.time else 0)

    def to_theta(self) -> Theta:
        """Return the Theta"""
        self.check_version()
        entries = self.entries or []
        if len(entries) != self.n:
            raise ContractError(f"ThetaDocument declares n={self.n} but has {len(entries)} entries")
        return Theta.from_entries([e["W"] for e in entries], [e["b"] for e in entries],
                                  [e["c"] for e in entries], [e["mu_i"] for e in entries])


def rget(source, keys):
    """Get a value from nested dictionaries.
       Params
       ------
       * source (dict)   : (possibly) nested dictionary
       * keys (str, list): a string of nested keys separated by "." or the
                           resulting list split from such a string
       Returns
       -------
       (Any) The final value

       Examples
       -------
       >>> doc = {'mu': [0.0], 'history': {'last': 1e-3}}
       >>> rget(doc, "mu")
       [0.0]
       >>> rget(doc, "history.last")
       0.001
    """
    if not keys or not source:
        return

    if isinstance(keys, str):
        keys = keys.split(".")
    keys = list(keys)

    this_key = keys.pop(0)
    if len(keys):
        return rget(source.get(this_key, {}), keys)
    return source.get(this_key)
