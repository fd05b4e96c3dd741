"""Store module -- files of a run directory"""

import json
from pathlib import Path

from .app import App
from .errors import ContractError
from .objects import Checkpoint, ThetaDocument


__all__ = [
    "RunStore",
    "read_json",
    "write_json",
]


def write_json(path, data: dict) -> Path:
    """Write {data} as indented JSON"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    App.APP.info(path, prefix="Writing file")
    with path.open("w") as fp:
        json.dump(data, fp, indent=2)
        fp.write("\n")
    return path


def read_json(path) -> dict:
    """Load a JSON file"""
    with Path(path).open() as fp:
        return json.load(fp)


class RunStore():
    """A directory holding the outputs of an offline run:

       snapshot_01.json ...   snapshot checkpoints, in selection order
       sweep_01.csv ...       indicator table of every sweep
       summary.csv            chosen parameter and max indicator per round
       config.ini             resolved experiment config
    """

    def __init__(self, dirpath):
        """Initializer
           Create the directory if it is missing.
        """
        self.dirpath = Path(dirpath).absolute()
        if not self.dirpath.is_dir():
            self.dirpath.mkdir(parents=True)

    def __repr__(self):
        """Return repr string containing the directory"""
        return f"{self.__class__.__name__}({str(self.dirpath)!r})"

    def snapshot_path(self, number: int) -> Path:
        """Checkpoint of the {number}th neuron (1-based)"""
        return self.dirpath / f"snapshot_{number:02d}.json"

    def sweep_path(self, number: int) -> Path:
        """Indicator table of sweep {number} (1-based)"""
        return self.dirpath / f"sweep_{number:02d}.csv"

    @property
    def summary_path(self) -> Path:
        """Per-round summary"""
        return self.dirpath / "summary.csv"

    @property
    def files(self) -> list:
        """Non-empty snapshot checkpoints in selection order"""
        files = [f for f in self.dirpath.glob("snapshot_*.json") if f.stat().st_size]
        return sorted(files)

    def save_snapshot(self, number: int, snapshot) -> Path:
        """Write the checkpoint of {snapshot}"""
        return write_json(self.snapshot_path(number), Checkpoint.from_snapshot(snapshot).data)

    def load_snapshots(self, limit: int=None) -> list:
        """Return the stored snapshots, at most {limit}"""
        files = self.files[:limit] if limit else self.files
        if not files:
            raise ContractError(f"no snapshot checkpoints in {self.dirpath}")
        App.APP.info(len(files), prefix="Snapshots")
        return [Checkpoint(read_json(f)).to_snapshot() for f in files]

    def save_theta(self, path, target, mu, result) -> Path:
        """Write the Theta of an online run"""
        return write_json(path, ThetaDocument.from_result(target, mu, result).data)
