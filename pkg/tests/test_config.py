"""Tests for fracsis.common.config module."""

from pathlib import Path
from unittest.mock import patch

import pytest

from fracsis.common.config import (
    ExperimentConfig,
    ExperimentKind,
    ModelSection,
    build_config,
    load_config,
    load_env_config,
    merge_config,
    nodes_for,
    parse_flat,
    save_config,
)
from fracsis.common.errors import ConfigurationError
from fracsis.common.types import ExitCostVariant, FeedbackPairing

CONVERGE_CFG = """\
# convergence study, alpha = 1 column
model.alpha = 1
model.rho = 1.5
grid.x_max = 10
grid.t_max = 10
cost.variant = bump
run.kind = converge
run.levels = 0.1, 0.05, 0.025
"""


class TestExperimentConfig:
    """Test ExperimentConfig defaults."""

    def test_defaults(self):
        config = ExperimentConfig()
        assert config.model.alpha == 1.0
        assert config.grid.n_x == 200
        assert config.grid.n_t == 4000
        assert config.cost.variant is ExitCostVariant.LINEAR
        assert config.run.kind is ExperimentKind.PROFILES
        assert config.run.pairing is FeedbackPairing.REMAINING
        assert config.run.snapshot_times == [0.0, 0.5, 1.0, 5.0]
        assert config.run.out is None

    def test_default_params(self):
        p = ModelSection().params()
        assert p.beta == pytest.approx(1.5)
        assert p.n_pop == 2.25

    def test_rho_sets_beta(self):
        p = ModelSection(alpha=0.5, rho=2.0, gamma=0.5).params()
        assert p.beta == pytest.approx(1.0)

    def test_beta_and_rho_exclusive(self):
        with pytest.raises(ConfigurationError, match="either model.beta or model.rho"):
            build_config({"model": {"beta": "1.5", "rho": "1.5"}})


class TestParseFlat:
    """Test the flat file parser."""

    def test_sections(self):
        sections = parse_flat(CONVERGE_CFG)
        assert sections["model"] == {"alpha": "1", "rho": "1.5"}
        assert sections["run"]["levels"] == "0.1, 0.05, 0.025"

    def test_comments_and_blank_lines(self):
        assert parse_flat("\n# only a comment\n  \ngrid.n_x = 50  # trailing\n") == {"grid": {"n_x": "50"}}

    def test_missing_equals(self):
        with pytest.raises(ConfigurationError) as exc_info:
            parse_flat("model.alpha 1", source="exp.cfg")
        assert "Failed to parse" in str(exc_info.value)
        assert exc_info.value.details["line"] == 1

    def test_missing_section(self):
        with pytest.raises(ConfigurationError, match="Failed to parse"):
            parse_flat("alpha = 1")

    def test_unknown_section(self):
        with pytest.raises(ConfigurationError, match="unknown section"):
            parse_flat("solver.alpha = 1")


class TestLoadConfig:
    """Test loading experiment files."""

    def test_convergence_file(self, write_config):
        config = load_config(write_config(CONVERGE_CFG))
        assert config.run.kind is ExperimentKind.CONVERGE
        assert config.run.levels == [0.1, 0.05, 0.025]
        assert config.cost.variant is ExitCostVariant.BUMP
        assert config.grid.x_max == 10.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Failed to read config"):
            load_config(tmp_path / "missing.cfg")

    def test_bad_value(self, write_config):
        with pytest.raises(ConfigurationError, match="Invalid experiment configuration"):
            load_config(write_config("grid.n_x = many\n"))

    def test_inadmissible_model(self, write_config):
        with pytest.raises(ConfigurationError) as exc_info:
            load_config(write_config("model.alpha = 0.5\nmodel.beta = 4\n"))
        assert "admissibility" in exc_info.value.message

    def test_bad_grid(self, write_config):
        with pytest.raises(ConfigurationError):
            load_config(write_config("grid.n_x = 1\n"))

    def test_alphas_range(self, write_config):
        with pytest.raises(ConfigurationError, match="run.alphas"):
            load_config(write_config("run.alphas = 0.5, 1.5\n"))

    def test_enum_value(self, write_config):
        config = load_config(write_config("run.pairing = elapsed\ncost.variant = kinked\n"))
        assert config.run.pairing is FeedbackPairing.ELAPSED
        assert config.cost.variant is ExitCostVariant.KINKED

    def test_unknown_variant(self, write_config):
        with pytest.raises(ConfigurationError):
            load_config(write_config("cost.variant = quadratic\n"))

    def test_table_relative_to_config(self, tmp_path, write_config):
        (tmp_path / "phi.csv").write_text("x,phi\n0,0\n4,4\n")
        config = load_config(write_config("cost.variant = table\ncost.table = phi.csv\n"))
        assert config.cost.table == tmp_path / "phi.csv"
        assert config.cost.spec().variant is ExitCostVariant.TABLE

    def test_table_missing_file(self, write_config):
        with pytest.raises(ConfigurationError, match="Failed to read exit cost table"):
            load_config(write_config("cost.variant = table\ncost.table = nowhere.csv\n"))

    def test_table_without_path(self, write_config):
        with pytest.raises(ConfigurationError, match="cost.table"):
            load_config(write_config("cost.variant = table\n"))

    def test_table_too_short_for_grid(self, tmp_path, write_config):
        (tmp_path / "phi.csv").write_text("x,phi\n0,0\n1,1\n")
        with pytest.raises(ConfigurationError, match="tabulated range"):
            load_config(write_config("cost.variant = table\ncost.table = phi.csv\n"))


class TestRunValidation:
    """Range checks on the options the selected run kind reads."""

    def test_initial_state_beyond_domain(self):
        with pytest.raises(ConfigurationError, match="run.initial_states"):
            build_config({"grid": {"x_max": "4"}, "run": {"kind": "trajectories", "initial_states": "5"}})

    def test_negative_initial_state(self):
        with pytest.raises(ConfigurationError, match="run.initial_states"):
            build_config({"run": {"kind": "trajectories", "initial_states": "-0.5, 1"}})

    def test_snapshot_beyond_horizon(self):
        with pytest.raises(ConfigurationError, match="run.snapshot_times"):
            build_config({"grid": {"t_max": "1"}, "run": {"snapshot_times": "0, 2"}})

    def test_level_must_divide_domain(self):
        with pytest.raises(ConfigurationError, match="does not divide"):
            build_config({"grid": {"x_max": "1"}, "run": {"kind": "converge", "levels": "0.3"}})

    @pytest.mark.parametrize("levels", ["0.05, 0.1", "0.1, 0.1"])
    def test_levels_strictly_decreasing(self, levels):
        with pytest.raises(ConfigurationError, match="strictly decreasing"):
            build_config({"run": {"kind": "converge", "levels": levels}})

    def test_domain_must_fit_spacing(self):
        with pytest.raises(ConfigurationError, match="does not divide"):
            build_config({"grid": {"n_x": "40"}, "run": {"kind": "sweep", "domains": "0.25"}})

    def test_radius_beyond_domain(self):
        with pytest.raises(ConfigurationError, match="run.radius"):
            build_config({"grid": {"x_max": "2"}, "run": {"kind": "stationary", "horizons": "1", "radius": "3"}})

    def test_horizons_positive(self):
        with pytest.raises(ConfigurationError, match="run.horizons"):
            build_config({"run": {"kind": "stationary", "horizons": "-1, 2"}})

    def test_other_kinds_unchecked(self):
        sections = {"grid": {"x_max": "1", "t_max": "1"}, "run": {"kind": "converge", "initial_states": "5"}}
        config = build_config(sections)
        assert config.run.initial_states == [5.0]

    def test_explicit_kind(self):
        config = build_config({"grid": {"t_max": "1"}, "run": {"kind": "converge", "levels": "0.1"}})
        with pytest.raises(ConfigurationError, match="run.snapshot_times"):
            config.validate_run(ExperimentKind.PROFILES)

    def test_load_with_kind(self, write_config):
        path = write_config("grid.x_max = 1\ngrid.t_max = 1\nrun.levels = 0.1, 0.05\n")
        with pytest.raises(ConfigurationError, match="run.snapshot_times"):
            load_config(path)
        config = load_config(path, kind=ExperimentKind.CONVERGE)
        assert config.run.kind is ExperimentKind.CONVERGE


class TestNodesFor:
    def test_exact(self):
        assert nodes_for(10.0, 0.025) == 400
        assert nodes_for(4.0, 0.02) == 200

    @pytest.mark.parametrize(("x_max", "dx"), [(1.0, 0.3), (1.0, 0.0), (1.0, 0.75), (0.1, 0.1)])
    def test_rejects(self, x_max, dx):
        with pytest.raises(ConfigurationError, match="does not divide"):
            nodes_for(x_max, dx)


class TestEnvironment:
    """Test FRACSIS_* overrides."""

    def test_load_env_config(self):
        env = {"FRACSIS_MODEL_ALPHA": "0.5", "FRACSIS_GRID_N_X": "100", "FRACSIS_BOGUS": "1", "HOME": "/root"}
        assert load_env_config(env) == {"model": {"alpha": "0.5"}, "grid": {"n_x": "100"}}

    def test_environment_override(self, write_config, monkeypatch):
        monkeypatch.setenv("FRACSIS_MODEL_ALPHA", "0.75")
        monkeypatch.setenv("FRACSIS_RUN_INITIAL_STATES", "0.25")
        config = load_config(write_config(CONVERGE_CFG))
        assert config.model.alpha == 0.75
        assert config.run.initial_states == [0.25]

    def test_environment_ignored(self, write_config, monkeypatch):
        monkeypatch.setenv("FRACSIS_MODEL_ALPHA", "0.75")
        assert load_config(write_config(CONVERGE_CFG), use_env=False).model.alpha == 1.0

    def test_merge(self):
        merged = merge_config({"model": {"alpha": "1", "rho": "2"}}, {"model": {"alpha": "0.5"}, "run": {"plot": "1"}})
        assert merged == {"model": {"alpha": "0.5", "rho": "2"}, "run": {"plot": "1"}}


class TestSaveConfig:
    """Test writing configurations back."""

    def test_roundtrip(self, tmp_path, write_config):
        original = load_config(write_config(CONVERGE_CFG))
        path = tmp_path / "saved" / "copy.cfg"
        save_config(original, path)
        assert load_config(path) == original

    def test_roundtrip_with_output(self, tmp_path):
        config = build_config({"run": {"out": str(tmp_path / "runs"), "plot": "true", "pairing": "elapsed"}})
        path = tmp_path / "copy.cfg"
        save_config(config, path)
        text = path.read_text()
        assert "run.plot = true" in text
        assert "run.pairing = elapsed" in text
        assert "model.beta" not in text
        assert load_config(path) == config

    def test_save_error(self, tmp_path):
        config = ExperimentConfig()
        with patch.object(Path, "write_text", side_effect=PermissionError("denied")):
            with pytest.raises(ConfigurationError, match="Failed to save config"):
                save_config(config, tmp_path / "copy.cfg")
