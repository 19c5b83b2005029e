from __future__ import annotations

import pytest

from pqc2hls.config import Config, config_from_dict, load_config
from pqc2hls.errors import ConfigError


def test_defaults():
    cfg = load_config(None)
    assert cfg.loop.max_iterations == 12 and cfg.synth.backend == "mock"
    assert cfg.snapshot()["toolchain"]["compiler_command"] == list(cfg.toolchain.compiler_command)


def test_toml_file_and_relative_paths(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[llm]\nmock_script = "s.json"\ntemperature = 0\n[loop]\nmax_iterations = 3\n')
    cfg = load_config(p)
    assert cfg.loop.max_iterations == 3 and cfg.llm.temperature == 0.0
    assert cfg.resolve(cfg.llm.mock_script) == tmp_path / "s.json"


@pytest.mark.parametrize("data,msg", [
    ({"llm": {"modle": "x"}}, "llm.modle"),
    ({"nonsense": {}}, "nonsense"),
    ({"loop": {"max_iterations": "3"}}, "integer"),
    ({"loop": {"deterministic_transforms": 1}}, "true or false"),
    ({"loop": {"max_iterations": 0}}, ">= 1"),
    ({"synth": {"backend": "external"}}, "command_template"),
    ({"synth": {"backend": "vivado"}}, "mock"),
    ({"toolchain": {"compiler_command": ["cc"]}}, "placeholders"),
])
def test_bad_config_rejected(data, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_dict(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")
    (tmp_path / "bad.toml").write_text("[llm\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.toml")


def test_overrides_keep_other_values():
    cfg = Config().with_overrides(campaign={"parallel": 4}, dse={"budget": 5})
    assert cfg.campaign.parallel == 4 and cfg.campaign.seed == 1 and cfg.dse.budget == 5
    with pytest.raises(ConfigError):
        Config().with_overrides(campaign={"paralel": 4})


def test_command_string_is_split():
    cfg = config_from_dict({"toolchain": {"compiler_command": "gcc -std=c99 {sources} -o {output}"}})
    assert cfg.toolchain.compiler_command[:2] == ("gcc", "-std=c99")
