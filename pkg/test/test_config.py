import json
import pytest

from agenttestkit.exceptions import ConfigError, IoFailure
from tkutils.config import KitSettings, load_settings

def test_defaults_without_file_or_environment():
    settings = load_settings(environ={})
    assert settings == KitSettings()
    assert settings.jobs == 1
    assert not settings.has_llm

def test_file_values_are_loaded(tmp_path):
    path = tmp_path / 'testkit.json'
    path.write_text(json.dumps({'llm_endpoint': 'https://llm.example.test/converse', 'jobs': 4, 'llm_timeout': 30}),
                    encoding='utf-8')
    settings = load_settings(str(path), environ={})
    assert settings.llm_endpoint == 'https://llm.example.test/converse'
    assert settings.jobs == 4
    assert settings.llm_timeout == 30.0
    assert settings.has_llm

def test_environment_overrides_file(tmp_path):
    path = tmp_path / 'testkit.json'
    path.write_text(json.dumps({'jobs': 4, 'trace_dir': 'from-file'}), encoding='utf-8')
    settings = load_settings(str(path), environ={'TESTKIT_JOBS': '2', 'TESTKIT_LLM_API_KEY': 'secret'})
    assert settings.jobs == 2
    assert settings.trace_dir == 'from-file'
    assert settings.llm_api_key == 'secret'
    assert 'secret' not in str(settings)

@pytest.mark.parametrize('environ', [{'TESTKIT_JOBS': '0'}, {'TESTKIT_JOBS': 'many'}, {'TESTKIT_LLM_TIMEOUT': 'soon'}])
def test_invalid_values_raise_config_error(environ):
    with pytest.raises(ConfigError):
        load_settings(environ=environ)

def test_unknown_keys_raise_config_error(tmp_path):
    path = tmp_path / 'testkit.json'
    path.write_text(json.dumps({'llm_temperature': 0.2}), encoding='utf-8')
    with pytest.raises(ConfigError) as e:
        load_settings(str(path), environ={})
    assert 'llm_temperature' in str(e.value)

def test_invalid_json_cites_the_line(tmp_path):
    path = tmp_path / 'testkit.json'
    path.write_text('{\n  "jobs": 2,\n}\n', encoding='utf-8')
    with pytest.raises(ConfigError) as e:
        load_settings(str(path), environ={})
    assert e.value.line_number == 3

def test_missing_file_is_an_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        load_settings(str(tmp_path / 'missing.json'), environ={})
