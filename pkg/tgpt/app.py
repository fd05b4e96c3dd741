"""App module -- run-wide settings and everything printed to the terminal"""

from functools import cached_property
from os import cpu_count
from pathlib import Path
from sys import exit
from typing import Any, Sequence

import click
from click import style
from more_itertools import always_iterable
from tabulate import tabulate

from .states import Ok


__all__ = ["App", "Style", "Writer"]


class App():
    """The running command: output directory, sweep threads and verbosity.
       The latest instance is kept in App.APP for the library modules to
       report through.
    """

    """Application object"""
    APP: Any

    def __init__(self, out=None, threads=None, verbose=False):
        """Initializer
           Set option attributes and print messages about enabled options.
        """
        self._out = self._threads = None
        self.verbose = verbose
        self.out = out
        self.threads = threads

        self.__class__.APP = self
        self.writer = Writer()

        self.info(self.out, prefix="Output")
        self.info(self._threads, prefix="Threads")
        self.msg(self.style.mode("verbose", self.verbose))

    @property
    def out(self):
        """Directory the current command writes to, as an absolute Path"""
        return self._out

    @out.setter
    def out(self, value):
        """Resolve {value} to an absolute Path"""
        self._out = Path(value).absolute() if value else None

    @property
    def threads(self) -> int:
        """Number of worker threads for parameter sweeps.
           default: machine parallelism
        """
        return self._threads or cpu_count() or 1

    @threads.setter
    def threads(self, value):
        """Set _threads, aborting on non-positive values"""
        if value is not None and int(value) < 1:
            self.abort(f"Invalid thread count: {value}")
        self._threads = int(value) if value else None

    def msg(self, *args):
        """Print user message"""
        # don't print empty args
        if not [a for a in args if a]:
            return
        text = " ".join(map(str, args))
        click.echo(f"{style('>', fg='cyan')} {style(text, fg='bright_black')}")

    def info(self, *args, prefix=None):
        """Print a progress line to stderr in verbose mode.

           Params
           ------
           *args (Any): joined with spaces
           prefix (str, default=None): activity name, shown in a fixed-width column
        """
        if not self.verbose:
            return
        line = [style("[Info]", fg="cyan")]
        if prefix:
            line.append(style(f"{prefix:<12}", fg="yellow"))
        line.append(style(" ".join(map(str, args)), fg="bright_black"))
        click.echo(" ".join(line), err=True)

    def warn(self, *args):
        """Print a warning message to stderr"""
        click.echo(" ".join([style("Warning", fg="yellow"), *map(str, args)]), err=True)

    def abort(self, *args):
        """Print an error message and exit with status code 1"""
        click.echo(" ".join([style("Error", fg="red"), *map(str, args)]), err=True)
        exit(1)

    @cached_property
    def style(self):
        """Return Style object"""
        return Style()


class Writer():
    """Buffer of indented output, printed once a command has its results."""

    """Spaces per indentation level."""
    INDENT_INCR: int = 2

    def __init__(self):
        self.buf = []
        self.level = 0

    @property
    def indentation(self) -> str:
        """Spaces for the current level"""
        return " " * self.INDENT_INCR * self.level

    def indent(self, level: int=1):
        """Go {level} levels deeper"""
        self.level += level

    def dedent(self, level: int=1, reset=False):
        """Go back {level} levels, or to the left margin with {reset}"""
        self.level = 0 if reset else max(self.level - level, 0)

    def add_line(self, text="", before=0):
        """Add one indented line, after {before} blank lines"""
        self.buf.append("\n" * before + self.indentation + str(text) + "\n")

    def add_lines(self, lines, *args):
        """Add indented lines.

        Examples
        --------
        >>> writer = Writer()
        >>> writer.add_lines(["iter", "loss"])
        >>> writer.add_lines("iter", "loss")
        """
        for line in [*always_iterable(lines), *args]:
            self.add_line(line)

    def add_block(self, text: str):
        """Add multiline text"""
        self.add_lines(text.splitlines())

    def add_table(self, title: str, rows: Sequence, headers="keys", **kwargs):
        """Add a bold {title} followed by {rows} formatted by tabulate and
           indented one level."""
        self.add_block(Style().header(title))
        self.indent()
        self.add_block(tabulate(rows, headers=headers, **kwargs))
        self.dedent()

    def print(self):
        """Print and clear the buffer."""
        click.echo("".join(self.buf), nl=False)
        self.buf = []


class Style():
    """Styling of terminal output"""

    """Symbol and color of every Ok value of a training Outcome"""
    OUTCOME_STYLES = {
        Ok.ok:    ("✔", "green"),
        Ok.busy:  ("⚬", "yellow"),
        Ok.fail:  ("✗", "red"),
        Ok.error: ("⚠", "red"),
    }

    def header(self, title) -> str:
        """Return a bold title preceded by a blank line"""
        return f"\n{style(title, bold=True)}"

    def status(self, outcome) -> str:
        """Return the colored symbol of an Outcome"""
        assert getattr(outcome, "ok", None) in self.OUTCOME_STYLES, \
            f"No symbol for {outcome!r}"
        symbol, color = self.OUTCOME_STYLES[outcome.ok]
        return style(symbol, fg=color)

    def mode(self, name, enabled) -> str:
        """Return a message saying mode {name} is on, or None"""
        if enabled:
            return style(f"{name.capitalize()} mode enabled.", fg="bright_black")

    def number(self, value) -> str:
        """Format a loss or error for display"""
        if value is None or value == "":
            return "-"
        return f"{float(value):.3e}"


App.APP = App()
