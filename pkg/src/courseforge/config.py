"""Operator configuration: file, flags, and built-in defaults.

Precedence per field is CLI flag > config file > default. The API key is
referenced by environment-variable name only; a config file carrying a
literal key is refused outright.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from courseforge.agents.gateway import SamplingParams
from courseforge.errors import CourseforgeError, InvalidDocument
from courseforge.metering import CostTable
from courseforge.model import ModeId
from courseforge.pipeline.engine import EngineConfig


@dataclass
class CliConfig:
    base_url: str = "http://127.0.0.1:8089/v1"
    model_name: str = "mock-edu"
    api_key_env_name: str = "COURSEFORGE_API_KEY"
    sampling: SamplingParams = field(default_factory=SamplingParams)
    slide_budget: int = 30
    mode: ModeId = ModeId.AUTONOMOUS
    cost_table_path: Optional[Path] = None
    run_root_path: Path = Path("runs")
    latex_binary: str = "pdflatex"
    latex_enabled: Optional[bool] = None
    rounds: int = 1
    pilot_students: int = 1
    pause_timeout_seconds: float = 3600.0
    concurrent_chapters: bool = False
    concurrent_analyze: bool = False
    server_host: str = "127.0.0.1"
    server_port: int = 8075
    server_tokens: dict[str, list[str]] = field(default_factory=dict)

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            run_root=self.run_root_path,
            base_url=self.base_url,
            model_name=self.model_name,
            api_key_env_name=self.api_key_env_name,
            sampling=self.sampling,
            rounds=self.rounds,
            slide_budget=self.slide_budget,
            pilot_students=self.pilot_students,
            latex_enabled=self.latex_enabled,
            latex_binary=self.latex_binary,
            pause_timeout=self.pause_timeout_seconds,
            concurrent_chapters=self.concurrent_chapters,
            concurrent_analyze=self.concurrent_analyze,
        )

    def cost_table(self) -> CostTable:
        if self.cost_table_path is None:
            return CostTable.zero()
        return CostTable.from_file(self.cost_table_path)


def _read_config_file(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        return tomllib.loads(text)
    return yaml.safe_load(text) or {}


def _reject_secrets(raw: dict, origin: str) -> None:
    def walk(node: Any, trail: str) -> None:
        if isinstance(node, dict):
            for key, value in node.items():
                lowered = str(key).lower()
                if lowered in ("api_key", "apikey", "secret", "token") and origin == "file":
                    if lowered == "token" and trail.startswith("server"):
                        continue  # server auth token names live in config by design
                    raise InvalidDocument(
                        f"config must not store secrets; found key {trail}{key}"
                    )
                walk(value, f"{trail}{key}.")

    walk(raw, "")


def load_config(path: Optional[Path] = None, overrides: Optional[dict] = None) -> CliConfig:
    """Merge defaults, an optional config file, and CLI flag overrides."""
    config = CliConfig()
    if path is not None:
        if not path.exists():
            raise CourseforgeError(f"config file {path} does not exist")
        raw = _read_config_file(path)
        _reject_secrets(raw, origin="file")
        backend = raw.get("backend", {})
        config.base_url = backend.get("base_url", config.base_url)
        config.model_name = backend.get("model_name", config.model_name)
        config.api_key_env_name = backend.get("api_key_env_name", config.api_key_env_name)
        sampling = raw.get("sampling", {})
        config.sampling = SamplingParams(
            temperature=float(sampling.get("temperature", config.sampling.temperature)),
            top_p=float(sampling.get("top_p", config.sampling.top_p)),
            presence_penalty=float(
                sampling.get("presence_penalty", config.sampling.presence_penalty)
            ),
            frequency_penalty=float(
                sampling.get("frequency_penalty", config.sampling.frequency_penalty)
            ),
        )
        if "slide_budget" in raw:
            config.slide_budget = int(raw["slide_budget"])
        if "mode" in raw:
            config.mode = ModeId.parse(raw["mode"])
        if "cost_table_path" in raw and raw["cost_table_path"]:
            config.cost_table_path = Path(raw["cost_table_path"])
        if "run_root_path" in raw:
            config.run_root_path = Path(raw["run_root_path"])
        if "latex_binary" in raw:
            config.latex_binary = raw["latex_binary"]
        if "latex_enabled" in raw:
            config.latex_enabled = bool(raw["latex_enabled"])
        for key in (
            "rounds", "pilot_students", "pause_timeout_seconds",
            "concurrent_chapters", "concurrent_analyze",
        ):
            if key in raw:
                setattr(config, key, type(getattr(config, key))(raw[key]))
        server = raw.get("server", {})
        config.server_host = server.get("host", config.server_host)
        config.server_port = int(server.get("port", config.server_port))
        config.server_tokens = {
            str(token): list(scopes)
            for token, scopes in server.get("tokens", {}).items()
        }

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "mode":
            value = ModeId.parse(value)
        elif key in ("run_root_path", "cost_table_path"):
            value = Path(value)
        setattr(config, key, value)
    return config
