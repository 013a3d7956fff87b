import pytest

from config.settings import Settings, get_settings
from models.schemas import QuadratureSpec


def test_defaults():
    settings = Settings(_env_file=None)
    assert settings.log_level == "INFO"
    assert settings.quadrature.tolerance == 1e-8
    assert settings.execution.threads == 1
    assert not settings.storage.archive


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("POLYRIESZ_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("POLYRIESZ_QUADRATURE__TOLERANCE", "1e-10")
    monkeypatch.setenv("POLYRIESZ_EXECUTION__THREADS", "4")
    settings = Settings(_env_file=None)
    assert settings.log_level == "DEBUG"
    assert settings.quadrature.tolerance == 1e-10
    assert settings.execution.threads == 4


def test_quadrature_spec_from_defaults():
    settings = Settings(_env_file=None)
    spec = QuadratureSpec.from_defaults(settings.quadrature, tolerance=None, line_nodes=64)
    assert spec.tolerance == settings.quadrature.tolerance
    assert spec.line_nodes == 64


@pytest.mark.parametrize("tolerance", [0.0, 0.5, float("nan")])
def test_quadrature_spec_rejects_bad_tolerance(tolerance):
    with pytest.raises(ValueError):
        QuadratureSpec(tolerance=tolerance)


def test_get_settings_is_cached():
    assert get_settings() is get_settings()
