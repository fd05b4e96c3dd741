from pathlib import Path
from os import cpu_count

import pytest

from tgpt.app import App, Writer
from tgpt.states import Outcome


def test_app_global():
    """App() becomes App.APP"""
    app = App()
    assert App.APP is app


def test_out_setter():
    """App.out is resolved to an absolute Path"""
    app = App(out="runs")
    assert isinstance(app.out, Path)
    assert app.out.is_absolute()
    assert app.out.name == "runs"


def test_threads_default():
    """App.threads defaults to machine parallelism"""
    app = App()
    assert app.threads == (cpu_count() or 1)


def test_threads_setter():
    app = App(threads=3)
    assert app.threads == 3


def test_threads_invalid():
    with pytest.raises(SystemExit) as e:
        App(threads=0)
    assert e.value.code == 1


def test_info_quiet(capsys):
    """info() prints nothing unless verbose"""
    app = App()
    app.info("hidden", prefix="pinn")
    assert capsys.readouterr().err == ""


def test_info_verbose(capsys):
    app = App(verbose=True)
    capsys.readouterr()
    app.info("shown", prefix="pinn")
    err = capsys.readouterr().err
    assert "shown" in err
    assert "pinn" in err


def test_warn(capsys):
    App().warn("careful")
    assert "careful" in capsys.readouterr().err


def test_abort(capsys):
    with pytest.raises(SystemExit) as e:
        App().abort("broken")
    assert e.value.code == 1
    assert "broken" in capsys.readouterr().err


def test_writer(capsys):
    writer = Writer()
    writer.add_line("a")
    writer.indent()
    writer.add_lines(["b", "c"])
    writer.dedent(reset=True)
    writer.add_block("d\ne")
    writer.print()
    assert capsys.readouterr().out == "a\n  b\n  c\nd\ne\n"


def test_style_status():
    style = App().style
    assert "✔" in style.status(Outcome.converged)
    assert "⚬" in style.status(Outcome.max_iterations)
    assert "✗" in style.status(Outcome.diverged)


def test_style_number():
    style = App().style
    assert style.number(None) == "-"
    assert style.number(0.00123) == "1.230e-03"


def test_writer_dedent_floor():
    writer = Writer()
    writer.indent(2)
    writer.dedent(5)
    assert writer.level == 0


def test_writer_table(capsys):
    writer = Writer()
    writer.add_table("Losses", [{"iter": 0, "loss": "1.000e+00"}])
    writer.add_line("done", before=1)
    writer.print()
    lines = capsys.readouterr().out.splitlines()
    assert "Losses" in lines[1]
    assert lines[2].startswith("  ") and lines[2].split() == ["iter", "loss"]
    assert lines[-1] == "done"


def test_style_mode():
    style = App().style
    assert style.mode("verbose", False) is None
    assert "Verbose mode enabled." in style.mode("verbose", True)
