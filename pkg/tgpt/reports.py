"""Reports module -- CSV files emitted by the commands and the comparison table"""

import csv
from pathlib import Path
from typing import Sequence

from more_itertools import last
from tabulate import tabulate

from .app import App
from .problems import TARGETS


__all__ = [
    "COMPARISON_HEADER",
    "append_csv",
    "comparison_rows",
    "comparison_table",
    "format_value",
    "mu_columns",
    "read_csv",
    "write_csv",
]


"""Columns of the EIM vs TGPT comparison"""
COMPARISON_HEADER = ["function", "eim_n", "eim_max_l2_error", "tgpt_n", "tgpt_max_l2_error"]


def format_value(value) -> str:
    """Format one CSV cell: floats in scientific notation with 11 significant
       digits, None as an empty cell.

    Examples
    --------
    >>> format_value(0.5)
    '5.0000000000e-01'
    >>> format_value(None), format_value(3)
    ('', '3')
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.10e}"
    return str(value)


def mu_columns(dim: int, name: str="mu") -> list:
    """Column names of a parameter: mu, or mu1, mu2, ..."""
    if dim == 1:
        return [name]
    return [f"{name}{i}" for i in range(1, dim + 1)]


def _cells(row: Sequence) -> list:
    """Flatten tuples (parameters) into cells and format them"""
    cells = []
    for value in row:
        if isinstance(value, tuple):
            cells.extend(format_value(None if v is None else float(v)) for v in value)
        else:
            cells.append(format_value(value))
    return cells


def write_csv(path, header: Sequence[str], rows: Sequence) -> Path:
    """Write {rows} under {header}; the header is written even without rows"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    App.APP.info(path, prefix="Writing file")
    with path.open("w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(_cells(row) for row in rows)
    return path


def append_csv(path, header: Sequence[str], row: Sequence) -> Path:
    """Append one row, writing the header first if the file is new"""
    path = Path(path)
    if not path.is_file() or not path.stat().st_size:
        return write_csv(path, header, [row])
    with path.open("a", newline="") as fp:
        csv.writer(fp, lineterminator="\n").writerow(_cells(row))
    return path


def read_csv(path) -> list:
    """Return the rows of a CSV file as dicts"""
    with Path(path).open(newline="") as fp:
        return list(csv.DictReader(fp))


def _last_row(path):
    """Last data row of a CSV file, or None"""
    return last(read_csv(path), None)


def comparison_rows(directory) -> list:
    """Merge the eim_<id>.csv and funcapprox_<id>.csv files found under
       {directory} into one row per function family."""
    directory = Path(directory)
    found = {}
    for kind, column in (("eim", "max_l2_error"), ("funcapprox", "max_l2_error")):
        for path in sorted(directory.rglob(f"{kind}_*.csv")):
            id = path.stem[len(kind) + 1:]
            if id not in TARGETS:
                continue
            row = _last_row(path)
            if row is None:
                continue
            count = row.get("n") or row.get("n_neurons")
            found.setdefault(id, {})[kind] = (int(count), float(row[column]) if row[column] else None)

    rows = []
    for id in [k for k in TARGETS if k in found]:
        eim = found[id].get("eim", (None, None))
        tgpt = found[id].get("funcapprox", (None, None))
        rows.append((id, eim[0], eim[1], tgpt[0], tgpt[1]))
    return rows


def comparison_table(rows: Sequence) -> str:
    """The comparison as a printable table"""
    style = App.APP.style
    table = [(id, n or "-", style.number(e), m or "-", style.number(t))
             for id, n, e, m, t in rows]
    return tabulate(table, headers=COMPARISON_HEADER, tablefmt="simple")
