from configparser import ConfigParser

import pytest

from tgpt.config import ExperimentConfig
from tgpt.diffnet import NetworkSpec
from tgpt.errors import DomainError
from tgpt.states import LossMode


def test_defaults():
    config = ExperimentConfig()
    assert config.pinn_lr == 1e-3
    assert config.meta_lr is None
    assert config.collocation_counts is None
    assert config.resolved() == config


def test_resolved_network_defaults():
    assert ExperimentConfig(problem="transport").network_spec() == \
        NetworkSpec([2, 20, 20, 20, 1], "tanh")
    assert ExperimentConfig(problem="reaction").network_spec() == \
        NetworkSpec([2, 20, 20, 20, 1], "waveact")
    assert ExperimentConfig(problem="reaction_diffusion").network_spec() == \
        NetworkSpec([2, 40, 40, 40, 1], "tanh")
    assert ExperimentConfig(problem="reaction", widths="2,8,1").network_spec() == \
        NetworkSpec([2, 8, 1], "waveact")


def test_override_skips_none():
    config = ExperimentConfig(problem="reaction", seed=3)
    changed = config.override(seed=None, n_max=4, problem=None)
    assert changed.seed == 3
    assert changed.n_max == 4
    assert changed.problem == "reaction"


def test_xi_train_defaults():
    xi = ExperimentConfig(problem="transport").xi_train()
    assert len(xi) == 41
    assert xi[0] == (-10.0,)
    assert xi[-1] == (10.0,)


def test_xi_train_2d():
    config = ExperimentConfig(problem="reaction_diffusion", xi_counts="3")
    xi = config.xi_train()
    assert len(xi) == 9
    assert xi[1] == (1.0, 3.0)


def test_xi_train_custom_ranges():
    config = ExperimentConfig(problem="sin_shift", xi_ranges="0, 1", xi_counts="5")
    assert config.xi_train() == [(0.0,), (0.25,), (0.5,), (0.75,), (1.0,)]
    with pytest.raises(DomainError):
        ExperimentConfig(problem="sin_shift", xi_ranges="0,1", xi_counts="5,5").xi_train()


def test_pinn_config():
    config = ExperimentConfig(problem="transport", pinn_max_iter=7, use_lambda="off", seed=2)
    pinn = config.pinn_config()
    assert pinn.max_iter == 7
    assert pinn.use_lambda is False
    assert pinn.seed == 2
    assert ExperimentConfig().pinn_config().use_lambda is None
    assert ExperimentConfig(use_lambda="on").pinn_config().use_lambda is True
    with pytest.raises(DomainError):
        ExperimentConfig(use_lambda="sometimes").pinn_config()


def test_meta_config():
    meta = ExperimentConfig(problem="sin_freq", mode="gpt").meta_config()
    assert meta.mode == LossMode.function
    assert meta.freeze_transform
    meta = ExperimentConfig(problem="reaction", fix_w=True).meta_config()
    assert meta.mode == LossMode.pde
    assert meta.fix_w and not meta.freeze_transform
    with pytest.raises(DomainError):
        ExperimentConfig(problem="reaction", mode="rb").meta_config()


def test_target_and_mu():
    config = ExperimentConfig(problem="reaction_diffusion", mu="2,3.5")
    assert config.target.id == "reaction_diffusion"
    assert config.mu_value == (2.0, 3.5)
    with pytest.raises(DomainError):
        ExperimentConfig().target
    with pytest.raises(DomainError):
        ExperimentConfig().mu_value


def test_write_then_read(tmp_path):
    config = ExperimentConfig(problem="reaction", mu="9.85", n_max=3, meta_max_iter=50,
                              fix_w=True, eps_i=2.5)
    path = config.write(tmp_path)
    assert path == tmp_path / "config.ini"

    parser = ConfigParser()
    parser.read(path)
    assert parser.get("network", "activation") == "waveact"
    assert parser.get("meta", "max_iter") == "50"

    restored = ExperimentConfig.read(path)
    assert restored == config.resolved()
    assert restored.fix_w is True
    assert restored.eps_i == 2.5


def test_read_partial(tmp_path):
    path = tmp_path / "experiment.ini"
    path.write_text("[experiment]\nproblem = sin_freq\nn_max = 6\n\n[meta]\nlr = 0.05\n")
    config = ExperimentConfig.read(path)
    assert config.problem == "sin_freq"
    assert config.n_max == 6
    assert config.meta_lr == 0.05
    assert config.meta_max_iter is None
    assert config.resolved().meta_max_iter == 5000
    assert config.meta_config().lr == 0.05


def test_resolved_online_defaults():
    transport = ExperimentConfig(problem="transport").resolved()
    assert (transport.meta_lr, transport.meta_max_iter, transport.meta_tol) == (0.05, 100000, 1e-5)
    assert transport.smoothing == "0.1,0.03,0.01,0.003"
    assert transport.wrap is True

    reaction = ExperimentConfig(problem="reaction").resolved()
    assert (reaction.meta_lr, reaction.meta_max_iter, reaction.meta_tol) == (1e-2, 20000, 1e-8)
    assert reaction.smoothing == ""

    family = ExperimentConfig(problem="inv_dist_2d").resolved()
    assert family.meta_tol == 1e-14
    assert family.wrap is False

    flagged = ExperimentConfig(problem="transport", meta_lr=0.2, wrap=False).resolved()
    assert (flagged.meta_lr, flagged.wrap) == (0.2, False)


def test_meta_config_online_defaults():
    meta = ExperimentConfig(problem="transport").meta_config()
    assert (meta.lr, meta.max_iter, meta.tol) == (0.05, 100000, 1e-5)
    assert meta.smoothing == (0.1, 0.03, 0.01, 0.003)
    assert meta.wrap_dims("transport") == (True, False)
    assert ExperimentConfig(problem="reaction", wrap_time=True).meta_config().wrap_dims("reaction") \
        == (True, True)
    assert ExperimentConfig(problem="sin_freq_shift", path_steps=0).meta_config().path_steps == 0


def test_collocation_counts():
    assert ExperimentConfig(problem="reaction").collocation_counts == (2000, 100, 200)
    assert ExperimentConfig(problem="transport").collocation_counts == (10000, 200, 1000)
    assert ExperimentConfig(problem="sin_shift").collocation_counts is None
    config = ExperimentConfig(problem="reaction", n_interior=40, n_boundary=5, n_initial=8)
    assert config.collocation_counts == (40, 5, 8)
    assert config.meta_config().counts == (40, 5, 8)
    assert ExperimentConfig(problem="sin_shift").meta_config().counts is None


def test_write_then_read_transport(tmp_path):
    config = ExperimentConfig(problem="transport", mu="10")
    restored = ExperimentConfig.read(config.write(tmp_path))
    assert restored == config.resolved()
    assert restored.meta_config() == config.meta_config()
