#!/usr/bin/env python3
"""TGPT command line interface
"""

from functools import wraps
from itertools import count
from math import isfinite
from pathlib import Path
from sys import exit
from time import perf_counter

import click
from click import style
import numpy as np

from .app import App
from .config import ExperimentConfig
from .eim import eim_offline, snapshot_matrix, sv_decay
from .errors import ContractError, DomainError, TGPTError
from .greedy import evaluation_sweep, offline_loop
from .metanet import approximation_error, train_online
from .objects import Checkpoint
from .pinn import train_pinn
from .problems import FUNCTION_IDS, PDE_IDS, TARGETS, ExactNeuron, FunctionNeuron
from .reports import (COMPARISON_HEADER, append_csv, comparison_rows, comparison_table,
                      mu_columns, write_csv)
from .states import Activation
from .store import RunStore, write_json
from .types import as_mu


class Group(click.Group):
    """Command group whose usage errors exit with status 1."""

    def main(self, *args, **kwargs):
        """Run the command, mapping click errors to exit statuses"""
        kwargs.pop("standalone_mode", None)
        try:
            status = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            exit(1)
        except click.ClickException as e:
            e.show()
            exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            exit(1)
        exit(status if isinstance(status, int) else 0)


def handle_errors(func):
    """Abort with the message of any package error"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except TGPTError as e:
            App.APP.abort(f"{e.__class__.__name__}: {e}")
    return wrapper


def load_config(path, **flags) -> ExperimentConfig:
    """Return the config file at {path} (or the defaults) with {flags} applied"""
    config = ExperimentConfig.read(path) if path else ExperimentConfig()
    return config.override(**flags).resolved()


def pick_mu1(config: ExperimentConfig, xi: list) -> tuple:
    """The configured first parameter, or a seeded random element of {xi}"""
    if config.mu1 is not None:
        return as_mu(config.mu1)
    rng = np.random.default_rng(config.seed)
    return xi[int(rng.integers(len(xi)))]


def show_history(history, title="History", count: int=10):
    """Print the last {count} (iteration, loss) pairs to the buffer."""
    app = App.APP
    table = [{"iter": i, "loss": app.style.number(loss)} for i, loss in history[-count:]]
    app.writer.add_table(title, table, colalign=("right", "right"))


def show_outcome(label, outcome, loss, iterations):
    """Print a one-line result to the buffer."""
    app = App.APP
    app.writer.add_line(f"{app.style.status(outcome)} {style(label, bold=True)}  "
                        f"{outcome}  iter {iterations}  loss {app.style.number(loss)}", before=1)


def show_rounds(state):
    """Print the chosen parameters and max indicators of an offline run."""
    app = App.APP
    table = []
    for r, mu in enumerate(state.chosen):
        worst = state.max_indicators[r] if r < len(state.max_indicators) else None
        table.append({"#": r + 1, "mu": ", ".join(f"{v:g}" for v in mu),
                      "max indicator": app.style.number(worst)})
    app.writer.add_table("Greedy Rounds", table)


@click.group(cls=Group)
@click.option("--threads", "-j", type=int,
              help="Worker threads for parameter sweeps. (default: machine parallelism)")
@click.option("--verbose", "-v", is_flag=True, default=False,
              help="Enable verbose mode.")
def main(**kwargs):
    """Transformed GPT-PINN experiments"""
    App(**kwargs)


def config_option(func):
    """--config option"""
    return click.option("--config", "-c", "config_path",
                        type=click.Path(exists=True, dir_okay=False),
                        help="Experiment config file (INI).")(func)


@main.command("pinn-train")
@config_option
@click.option("--problem", "-p", required=True, type=click.Choice(PDE_IDS),
              help="PDE problem id.")
@click.option("--mu", "-m", required=True, help="Parameter value, comma separated.")
@click.option("--widths", help="Layer widths, comma separated. (ie '2,20,20,20,1')")
@click.option("--activation", type=click.Choice(Activation.names()),
              help="Hidden layer activation.")
@click.option("--iters", type=click.IntRange(min=0), help="Maximum Adam iterations.")
@click.option("--lr", type=click.FloatRange(min=0, min_open=True), help="Learning rate.")
@click.option("--tol", type=click.FloatRange(min=0), help="Stopping loss.")
@click.option("--lambda", "use_lambda", type=click.Choice(["auto", "on", "off"]),
              help="Shock-capturing weight.")
@click.option("--seed", type=int, help="Initialization and sampling seed.")
@click.option("--out", "-o", default="snapshot.json", type=click.Path(dir_okay=False),
              help="Checkpoint file to write.")
@click.pass_context
@handle_errors
def pinn_train(ctx, config_path, problem, mu, iters, lr, tol, out, **flags):
    """Train a full PINN snapshot"""
    app = App.APP
    config = load_config(config_path, problem=problem, mu=mu, pinn_max_iter=iters,
                         pinn_lr=lr, pinn_tol=tol, **flags)
    target = config.target
    mu = target.check_mu(config.mu_value)
    colloc = target.collocation(mu, config.seed, config.collocation_counts)

    out = Path(out)
    app.out = out.parent
    config.write(out.parent)
    snapshot = train_pinn(target, mu, config.network_spec(), config.pinn_config(), colloc)

    write_json(out, Checkpoint.from_snapshot(snapshot).data)
    write_csv(out.with_name(f"{out.stem}_history.csv"), ["iter", "loss"], snapshot.history)

    show_outcome(f"{target.id} mu={mu}", snapshot.outcome, snapshot.final_loss,
                 snapshot.iterations)
    show_history(snapshot.history)
    app.writer.print()
    ctx.exit(snapshot.outcome.exit_code)


@main.command()
@config_option
@click.option("--problem", "-p", required=True, type=click.Choice(list(TARGETS)),
              help="Problem or function family id.")
@click.option("--xi-ranges", help="Training grid bounds. (ie '-10,10' or '1,5;1,5')")
@click.option("--xi-counts", help="Training grid points per parameter. (ie '41' or '11,11')")
@click.option("--mu1", help="First parameter. (default: seeded random training parameter)")
@click.option("--n-max", type=click.IntRange(min=1), help="Maximum number of neurons.")
@click.option("--tol", type=click.FloatRange(min=0), help="Stopping max indicator.")
@click.option("--mode", type=click.Choice(["tgpt", "gpt"]), help="Train transforms or c only.")
@click.option("--fix-w/--train-w", default=None, help="Keep W_i at the identity.")
@click.option("--iters", type=click.IntRange(min=0), help="Snapshot training iterations.")
@click.option("--meta-iters", type=click.IntRange(min=0), help="Online training iterations.")
@click.option("--seed", type=int, help="Seed.")
@click.option("--out", "-o", required=True, type=click.Path(file_okay=False),
              help="Run directory.")
@handle_errors
def offline(config_path, problem, iters, meta_iters, out, **flags):
    """Run the greedy offline stage"""
    app = App.APP
    app.out = out
    config = load_config(config_path, problem=problem, pinn_max_iter=iters,
                         meta_max_iter=meta_iters, **flags)
    target = config.target
    xi = config.xi_train()
    config = config.override(mu1=",".join(repr(v) for v in pick_mu1(config, xi)))
    store = RunStore(out)
    config.write(store.dirpath)

    if target.is_pde:
        spec, pinn_config = config.network_spec(), config.pinn_config()

        numbers = count(1)

        def make_neuron(mu):
            colloc = target.collocation(mu, config.seed, config.collocation_counts)
            snapshot = train_pinn(target, mu, spec, pinn_config, colloc)
            store.save_snapshot(next(numbers), snapshot)
            return snapshot
    else:
        make_neuron = lambda mu: FunctionNeuron(target, mu)

    state = offline_loop(target, xi, config.mu1, config.n_max, config.tol, make_neuron,
                         config.meta_config())

    columns = mu_columns(target.params.dim)
    for r, table in enumerate(state.tables, start=1):
        write_csv(store.sweep_path(r), [*columns, "indicator"], table)
    rounds = [(r + 1, mu, state.max_indicators[r] if r < state.rounds else None)
              for r, mu in enumerate(state.chosen)]
    write_csv(store.summary_path, ["round", *mu_columns(target.params.dim, "chosen_mu"),
                                   "max_indicator"], rounds)

    show_rounds(state)
    app.writer.print()
    if not state.ok:
        app.abort(f"offline stage stopped early: {state.error}")


@main.command()
@config_option
@click.option("--problem", "-p", required=True, type=click.Choice(list(TARGETS)),
              help="Problem or function family id.")
@click.option("--mu", "-m", required=True, help="Target parameter, comma separated.")
@click.option("--snapshots", "-s", type=click.Path(file_okay=False),
              help="Run directory holding snapshot checkpoints.")
@click.option("--neuron-mu", multiple=True,
              help="Use the exact solution at this parameter as a neuron. (repeatable)")
@click.option("--n", "count", type=click.IntRange(min=1), help="Use only the first n snapshots.")
@click.option("--mode", type=click.Choice(["tgpt", "gpt"]), help="Train transforms or c only.")
@click.option("--fix-w/--train-w", default=None, help="Keep W_i at the identity.")
@click.option("--resample/--no-resample", default=None,
              help="Collocation sets drawn at the target parameter.")
@click.option("--iters", type=click.IntRange(min=0), help="Maximum Adam iterations.")
@click.option("--lr", type=click.FloatRange(min=0, min_open=True), help="Learning rate.")
@click.option("--tol", type=click.FloatRange(min=0), help="Stopping loss.")
@click.option("--polish-iters", "polish_iter", type=click.IntRange(min=0),
              help="L-BFGS iterations after the Adam steps of every stage.")
@click.option("--path-steps", type=click.IntRange(min=0),
              help="Stages walking the parameter from the nearest neuron to --mu.")
@click.option("--wrap-time/--no-wrap-time", default=None, help="Apply the modulo map to t.")
@click.option("--seed", type=int, help="Seed.")
@click.option("--out", "-o", default="theta.json", type=click.Path(dir_okay=False),
              help="Theta file to write.")
@click.option("--metrics", type=click.Path(dir_okay=False),
              help="CSV file the metrics row is appended to. (default: online.csv next to --out)")
@handle_errors
def online(config_path, problem, mu, snapshots, neuron_mu, count, iters, lr, tol, out,
           metrics, **flags):
    """Train the meta-network at one parameter"""
    app = App.APP
    config = load_config(config_path, problem=problem, mu=mu, meta_max_iter=iters,
                         meta_lr=lr, meta_tol=tol, **flags)
    target = config.target
    mu = config.mu_value
    if len(mu) != target.params.dim or not all(isfinite(v) for v in mu):
        raise DomainError(f"{target.id} takes {target.params.dim} finite parameter(s), got {mu}")
    if not target.params.contains(mu):
        app.warn(f"mu={mu} is outside of {target.params}, extrapolating")

    if snapshots:
        neurons = RunStore(snapshots).load_snapshots(count)
        foreign = [n for n in neurons if n.problem != target.id]
        if foreign:
            raise ContractError(f"snapshots in {snapshots} belong to {foreign[0].problem}, not {target.id}")
    elif neuron_mu:
        make = ExactNeuron if target.is_pde else FunctionNeuron
        neurons = [make(target, as_mu(m)) for m in neuron_mu][:count]
    else:
        raise ContractError("online needs --snapshots or --neuron-mu")

    out = Path(out)
    app.out = out.parent
    config.write(out.parent)
    meta_config = config.meta_config()
    start = perf_counter()
    result = train_online(target, mu, neurons, meta_config)
    seconds = perf_counter() - start
    error = approximation_error(target, mu, result, neurons, meta_config)

    RunStore(out.parent).save_theta(out, target, mu, result)
    header = [*mu_columns(len(mu)), "n_neurons", "final_loss", "l2_error", "iterations",
              "wall_seconds"]
    append_csv(metrics or out.with_name("online.csv"), header,
               [mu, len(neurons), result.final_loss, error, result.iterations, seconds])

    show_outcome(f"{target.id} mu={mu} n={len(neurons)}", result.outcome, result.final_loss,
                 result.iterations)
    if error is not None:
        app.writer.add_line(f"  L2 error {app.style.number(error)}")
    app.writer.print()


@main.command()
@click.option("--function", "-f", "family", required=True, type=click.Choice(FUNCTION_IDS),
              help="Function family id.")
@click.option("--nmax", default=100, show_default=True, type=click.IntRange(min=1),
              help="Maximum number of basis functions.")
@click.option("--tol", default=1e-12, show_default=True, type=click.FloatRange(min=0),
              help="Stopping max L2 error.")
@click.option("--xi-counts", help="Training grid points per parameter.")
@click.option("--singular-values", is_flag=True, default=False,
              help="Also write the singular values of the snapshot matrix.")
@click.option("--out", "-o", default=".", type=click.Path(file_okay=False),
              help="Output directory.")
@handle_errors
def eim(family, nmax, tol, xi_counts, singular_values, out):
    """Run the EIM baseline on a function family"""
    app = App.APP
    app.out = out
    config = load_config(None, problem=family, xi_counts=xi_counts)
    target, xi = config.target, config.xi_train()
    config.write(out)

    basis, history = eim_offline(target, xi, n_max=nmax, tol=tol)
    header = ["n", "max_l2_error", *mu_columns(target.params.dim, "chosen_mu"),
              "magic_point_index"]
    write_csv(Path(out) / f"eim_{target.id}.csv", header,
              [(row.n, row.max_l2, row.mu, row.magic) for row in history])

    if singular_values:
        sigma = sv_decay(snapshot_matrix(target, xi))
        ratios = sigma / sigma[0] if sigma[0] else np.zeros_like(sigma)
        write_csv(Path(out) / f"sv_{target.id}.csv", ["index", "sigma", "ratio"],
                  [(i + 1, float(s), float(r)) for i, (s, r) in enumerate(zip(sigma, ratios))])

    table = [(row.n, app.style.number(row.max_l2)) for row in history[-10:]]
    app.writer.add_table(f"EIM {target.id}", table, headers=["n", "max L2 error"])
    app.writer.print()


@main.command()
@config_option
@click.option("--function", "-f", "family", required=True, type=click.Choice(FUNCTION_IDS),
              help="Function family id.")
@click.option("--max-neurons", "n_max", type=click.IntRange(min=1), default=1, show_default=True,
              help="Maximum number of neurons.")
@click.option("--tol", type=click.FloatRange(min=0), help="Stopping max indicator.")
@click.option("--mu1", help="First parameter. (default: seeded random training parameter)")
@click.option("--xi-counts", help="Training grid points per parameter.")
@click.option("--mode", type=click.Choice(["tgpt", "gpt"]), help="Train transforms or c only.")
@click.option("--fix-w/--train-w", default=None, help="Keep W_i at the identity.")
@click.option("--iters", type=click.IntRange(min=0), help="Online training iterations.")
@click.option("--polish-iters", "polish_iter", type=click.IntRange(min=0),
              help="L-BFGS iterations after the Adam steps of every stage.")
@click.option("--path-steps", type=click.IntRange(min=0),
              help="Stages walking the parameter from the nearest neuron to each candidate.")
@click.option("--lr", type=click.FloatRange(min=0, min_open=True), help="Learning rate.")
@click.option("--seed", type=int, help="Seed.")
@click.option("--out", "-o", default=".", type=click.Path(file_okay=False),
              help="Output directory.")
@handle_errors
def funcapprox(config_path, family, iters, lr, out, **flags):
    """Approximate a function family with the meta-network"""
    app = App.APP
    app.out = out
    config = load_config(config_path, problem=family, meta_max_iter=iters, meta_lr=lr, **flags)
    target, xi = config.target, config.xi_train()
    config = config.override(mu1=",".join(repr(v) for v in pick_mu1(config, xi)))
    config.write(out)
    meta_config = config.meta_config()

    state = offline_loop(target, xi, config.mu1, config.n_max, config.tol,
                         lambda mu: FunctionNeuron(target, mu), meta_config)
    if not state.ok:
        app.abort(f"greedy stage stopped early: {state.error}")
    rows = evaluation_sweep(target, xi, state.neurons, meta_config)

    dim = target.params.dim
    header = ["n_neurons", "max_l2_error", *mu_columns(dim, "worst_mu"),
              *mu_columns(dim, "chosen_mu")]
    write_csv(Path(out) / f"funcapprox_{target.id}.csv", header,
              [(n, error, worst or (None,) * dim, state.chosen[n - 1]) for n, error, worst in rows])

    show_rounds(state)
    table = [(n, app.style.number(error)) for n, error, _ in rows]
    app.writer.add_table(f"TGPT {target.id}", table, headers=["n", "max L2 error"])
    app.writer.print()


@main.command()
@click.option("--dir", "-d", "directory", default=".",
              type=click.Path(exists=True, file_okay=False),
              help="Directory searched for eim_*.csv and funcapprox_*.csv files.")
@click.option("--out", "-o", type=click.Path(dir_okay=False),
              help="Comparison CSV. (default: comparison.csv in --dir)")
@handle_errors
def report(directory, out):
    """Merge EIM and TGPT results into one comparison table"""
    app = App.APP
    rows = comparison_rows(directory)
    write_csv(out or Path(directory) / "comparison.csv", COMPARISON_HEADER, rows)
    app.writer.add_block(app.style.header("EIM vs TGPT"))
    app.writer.indent()
    app.writer.add_block(comparison_table(rows))
    app.writer.dedent(reset=True)
    app.writer.print()


def run():
    """Run the click command"""
    main(auto_envvar_prefix="TGPT")


if __name__ == "__main__":
    run()
