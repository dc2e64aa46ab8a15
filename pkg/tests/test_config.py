import numpy as np
import pytest

from protogeom.config import RunConfig, parse_config
from protogeom.errors import ConfigError


def test_parse_defaults_and_comments():
    cfg = parse_config("# comment\nk = 6  # trailing\nd=12\nloss = limit\n")
    assert cfg.k == 6 and cfg.d == 12
    assert cfg.seed_geometry == 0 and cfg.seed_init == 1 and cfg.seed_batch == 2


def test_parse_geometry_keys():
    cfg = parse_config(
        "geometry.kind = minority_angle\ngeometry.minority = 2, 3\ngeometry.cos_min_min = -0.9\ngeometry.cos_rest = -0.1\n"
    )
    assert cfg.geometry.minority == (2, 3)
    assert cfg.prototypes().gram[2, 3] == pytest.approx(-0.9, abs=1e-8)


def test_gram_target_file(tmp_path):
    np.savetxt(tmp_path / "g.csv", np.eye(4), delimiter=",")
    cfg = parse_config("geometry.kind = gram_target\ngeometry.target = g.csv\n", base_dir=tmp_path)
    np.testing.assert_allclose(cfg.prototypes().gram, np.eye(4), atol=1e-12)


@pytest.mark.parametrize(
    "text",
    [
        "loss = scl\nn_w = 1\n",
        "loss = scl_proto\nn_w = 0\n",
        "loss = softmax\n",
        "batch_size = 1000\n",
        "frobnicate = 1\n",
        "k = x\n",
        "no equals sign\n",
        "epochs = 10\nanneal_epochs = 10\n",
        "tau = 0\n",
        "k = 5\n",
        "geometry.kind = minority_angle\ngeometry.minority = 2,3\ngeometry.cos_min_min = -0.9\ngeometry.cos_rest = -0.3333\n",
        "geometry.kind = etf\nd = 2\n",
    ],
)
def test_invalid(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_echo_round_trip():
    cfg = parse_config(
        "k = 4\nloss = scl_proto\nn_w = 3\ntau = 0.07\nanneal_epochs = 5, 8\nepochs = 10\n"
        "geometry.kind = majority_collapse\ngeometry.majority = 0,1\nseed = 5\nbind_classes = true\n"
    )
    again = parse_config(cfg.echo())
    assert again == cfg
    assert again.echo() == cfg.echo()


def test_seed_override_rederives():
    cfg = RunConfig(seed=3)
    assert cfg.replace(seed=10).seed_batch == 12
