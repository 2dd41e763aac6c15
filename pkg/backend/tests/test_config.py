import logging

import pytest

from src.config import Config
from src.errors import DomainError
from src.logging_config import setup_logging
from src.models.run_config import OutputFormat, RunConfig


class TestRunConfig:

    def test_defaults_come_from_environment_config(self):
        run = RunConfig.resolve()
        assert run.seed == Config.SEED
        assert run.max_degree == Config.ZONAL_MAX_DEGREE
        assert run.output_format is OutputFormat(Config.OUTPUT_FORMAT)

    def test_precedence(self):
        run = RunConfig.resolve({'seed': 5, 'workers': 2, 'mc_samples': 1000}, seed=9, workers=None)
        assert (run.seed, run.workers, run.mc_samples) == (9, 2, 1000)

    def test_unknown_setting(self):
        with pytest.raises(DomainError):
            RunConfig.resolve({'sede': 5})

    def test_invalid_format(self):
        with pytest.raises(DomainError):
            RunConfig.resolve(output_format='xml')

    @pytest.mark.parametrize("overrides", [{'workers': 0}, {'seed': -1}, {'rel_tol': 0.0}, {'mc_samples': -5}])
    def test_invalid_values(self, overrides):
        with pytest.raises(DomainError):
            RunConfig.resolve(**overrides)

    def test_dict_round_trip(self):
        run = RunConfig(seed=3, workers=2, output_format=OutputFormat.CSV)
        assert run.to_dict()['output_format'] == 'csv'
        assert RunConfig.from_dict(run.to_dict()) == run

    def test_quadrature_settings(self):
        quad = RunConfig(seed=1, rel_tol=1e-8, max_subdivisions=100).quadrature
        assert (quad.rel_tol, quad.max_subdivisions) == (1e-8, 100)


class TestConfig:

    def test_run_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("seed: 17\nworkers: 3\noutput_format: csv\n", encoding="utf-8")
        run = RunConfig.resolve(Config.load_run_file(str(path)))
        assert (run.seed, run.workers, run.output_format) == (17, 3, OutputFormat.CSV)

    def test_run_file_must_be_mapping(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ValueError):
            Config.load_run_file(str(path))

    def test_no_run_file(self):
        assert Config.load_run_file(None) == {}

    def test_validate(self, monkeypatch):
        assert Config.validate()
        monkeypatch.setattr(Config, 'IS_CLIP_PERCENTILE', 10.0)
        with pytest.raises(ValueError):
            Config.validate()

    def test_as_dict(self):
        settings = Config.as_dict()
        assert settings['ZONAL_DEGREE_LIMIT'] == Config.ZONAL_DEGREE_LIMIT
        assert all(name.isupper() for name in settings)


class TestLogging:

    def test_single_stderr_handler(self):
        root = setup_logging('debug', 'text')
        setup_logging('info', 'json')
        assert len(root.handlers) == 1
        assert root.level == logging.INFO

    @pytest.mark.parametrize("level, fmt", [('bogus', 'json'), ('info', 'xml')])
    def test_rejects_unknown_settings(self, level, fmt):
        with pytest.raises(DomainError):
            setup_logging(level, fmt)
