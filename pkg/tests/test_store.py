import pytest

from tgpt.diffnet import NetworkSpec, init_params
from tgpt.errors import ContractError
from tgpt.pinn import Snapshot
from tgpt.store import RunStore, read_json, write_json


def test_json_roundtrip(tmp_path):
    path = write_json(tmp_path / "a" / "doc.json", {"x": [1.5, 2]})
    assert path.read_text().endswith("}\n")
    assert read_json(path) == {"x": [1.5, 2]}


def test_run_store_paths(tmp_path):
    store = RunStore(tmp_path / "run")
    assert store.dirpath.is_dir()
    assert store.snapshot_path(3).name == "snapshot_03.json"
    assert store.sweep_path(12).name == "sweep_12.csv"
    assert store.summary_path.name == "summary.csv"
    assert repr(store) == f"RunStore({str(store.dirpath)!r})"


def test_run_store_snapshots(tmp_path):
    store = RunStore(tmp_path)
    spec = NetworkSpec([2, 3, 1], "tanh")
    for number, mu in enumerate([4.0, 1.0, 2.5], start=1):
        store.save_snapshot(number, Snapshot(spec, init_params(spec, number), mu, "reaction", 0.5))
    (tmp_path / "snapshot_04.json").touch()

    assert [f.name for f in store.files] == ["snapshot_01.json", "snapshot_02.json",
                                             "snapshot_03.json"]
    assert [s.mu for s in store.load_snapshots()] == [(4.0,), (1.0,), (2.5,)]
    assert [s.mu for s in store.load_snapshots(2)] == [(4.0,), (1.0,)]


def test_run_store_empty(tmp_path):
    with pytest.raises(ContractError):
        RunStore(tmp_path).load_snapshots()
