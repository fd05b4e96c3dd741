"""Greedy module -- offline stage growing the meta-network one neuron at a time"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from more_itertools import first

from .app import App
from .diffnet import Neuron
from .errors import DomainError, TGPTError
from .metanet import MetaConfig, approximation_error, train_online
from .problems import get_target
from .types import as_mu


__all__ = [
    "GreedyState",
    "error_indicator",
    "evaluation_sweep",
    "offline_loop",
    "sweep",
    "tie_break",
]


@dataclass
class GreedyState():
    """Bookkeeping of an offline run.

       tables[r] holds the (mu, indicator) pairs of sweep r, computed with the
       first r+1 neurons; max_indicators[r] is its largest indicator.
    """
    chosen: List[tuple] = field(default_factory=list)
    neurons: List[Neuron] = field(default_factory=list)
    tables: List[list] = field(default_factory=list)
    max_indicators: List[float] = field(default_factory=list)
    error: Optional[Exception] = None

    @property
    def n(self) -> int:
        """Number of neurons"""
        return len(self.neurons)

    @property
    def rounds(self) -> int:
        """Number of completed sweeps"""
        return len(self.tables)

    @property
    def ok(self) -> bool:
        """False if the run stopped on an error"""
        return self.error is None

    def add(self, mu, neuron: Neuron):
        """Record a new neuron"""
        self.chosen.append(as_mu(mu))
        self.neurons.append(neuron)


def error_indicator(target, mu, neurons: Sequence[Neuron], config: MetaConfig=None) -> float:
    """Terminal online loss at {mu} with the current neurons."""
    return train_online(target, mu, neurons, config).final_loss


def sweep(target, candidates: Sequence, neurons: Sequence[Neuron], config: MetaConfig=None,
          threads: int=None, indicator: Callable=None) -> list:
    """Indicators at every candidate, as (mu, indicator) pairs in candidate order.
       Runs are independent and spread over {threads} worker threads.
    """
    indicator = indicator or error_indicator
    threads = threads or App.APP.threads
    candidates = [as_mu(mu) for mu in candidates]

    def run(mu):
        return indicator(target, mu, neurons, config)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        values = list(pool.map(run, candidates))
    return list(zip(candidates, values))


def tie_break(candidates: Sequence) -> tuple:
    """Smallest parameter in lexicographic order.

    Examples
    --------
    >>> tie_break([(1.0, 2.0), (1.0, 1.0)])
    (1.0, 1.0)
    """
    if not candidates:
        raise DomainError("tie_break needs at least one candidate")
    return min(as_mu(mu) for mu in candidates)


def _find(mu, xi: Sequence, tol: float=1e-12) -> Optional[tuple]:
    """Element of {xi} equal to {mu} up to {tol}"""
    mu = as_mu(mu)
    return first((p for p in xi if len(p) == len(mu)
                  and all(abs(a - b) <= tol for a, b in zip(p, mu))), None)


def offline_loop(target, xi_train: Sequence, mu1, n_max: int, tol: float,
                 make_neuron: Callable, config: MetaConfig=None, threads: int=None,
                 indicator: Callable=None) -> GreedyState:
    """Grow the meta-network greedily.

       Trains a neuron at {mu1}, then alternates a sweep over the parameters
       not chosen yet with training a neuron at the worst one, until the
       largest indicator is at most {tol} or {n_max} neurons exist.

       Params
       ------
       target (str | Target) : problem or function family
       xi_train (Sequence)   : training parameters
       mu1 (tuple)           : first parameter, an element of {xi_train}
       make_neuron (Callable): mu -> Neuron (a trained Snapshot, or an analytic neuron)
       indicator (Callable)  : (target, mu, neurons, config) -> float, default error_indicator

       Returns
       -------
       (GreedyState) a failure while training a neuron or sweeping ends the
       loop and is stored in state.error
    """
    target = get_target(target)
    xi = [as_mu(mu) for mu in xi_train]
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {n_max}")
    mu = _find(mu1, xi)
    if mu is None:
        raise DomainError(f"mu1={as_mu(mu1)} is not an element of the training set")

    state = GreedyState()
    while True:
        App.APP.info(f"neuron {state.n + 1} at mu={mu}", prefix="greedy")
        try:
            state.add(mu, make_neuron(mu))
        except TGPTError as e:
            App.APP.warn(f"training at mu={mu} failed: {e}")
            state.error = e
            return state

        remaining = [p for p in xi if p not in state.chosen]
        if state.n >= n_max or not remaining:
            break

        try:
            table = sweep(target, remaining, state.neurons, config, threads, indicator)
        except TGPTError as e:
            App.APP.warn(f"sweep {state.rounds + 1} failed: {e}")
            state.error = e
            return state

        worst = max(value for _, value in table)
        state.tables.append(table)
        state.max_indicators.append(worst)
        App.APP.info(f"round {state.rounds} max indicator {worst:.6e}", prefix="greedy")
        if worst <= tol:
            break
        mu = tie_break([p for p, value in table if value == worst])

    return state


def evaluation_sweep(target, xi: Sequence, neurons: Sequence[Neuron], config: MetaConfig=None,
                     threads: int=None) -> list:
    """Largest approximation error over {xi} using the first n neurons, for
       n = 1..len(neurons).

       Returns
       -------
       (list) rows (n, max_error, worst_mu); max_error is None when the
       target has no exact solution
    """
    rows = []

    def error(mu, count):
        result = train_online(target, mu, neurons[:count], config)
        return approximation_error(target, mu, result, neurons[:count], config)

    for count in range(1, len(neurons) + 1):
        table = sweep(target, xi, neurons[:count], config, threads,
                      indicator=lambda _t, mu, _n, _c: error(mu, count))
        known = [(value, mu) for mu, value in table if value is not None]
        if not known:
            rows.append((count, None, None))
            continue
        worst, mu = max(known, key=lambda pair: pair[0])
        rows.append((count, worst, mu))
        App.APP.info(f"n={count} max error {worst:.6e} at mu={mu}", prefix="evaluate")
    return rows
