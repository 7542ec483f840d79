"""Config documents: YAML with four flat sections plus `section.key=value` overrides."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type

import yaml
from pydantic import BaseModel, ValidationError

from src.errors import ConfigError
from src.models.config import (
    BandwidthSection,
    CellModelParams,
    ExperimentConfig,
    ExperimentSection,
    KernelSection,
    SECTION_NAMES,
    RunConfig,
)

logger = logging.getLogger(__name__)

SECTION_MODELS: Dict[str, Type[BaseModel]] = {
    "model": CellModelParams,
    "kernel": KernelSection,
    "bandwidths": BandwidthSection,
    "experiment": ExperimentSection,
}


def section_keys() -> Dict[str, List[str]]:
    """Documented keys per section, in declaration order."""
    return {name: list(model.model_fields) for name, model in SECTION_MODELS.items()}


def _sections_for_key(key: str) -> List[str]:
    return [name for name, keys in section_keys().items() if key in keys]


def split_override(override: str) -> Tuple[str, str, str]:
    """'section.key=value' or a bare 'key=value' -> (section, key, raw value).

    Raises:
        ConfigError: malformed pair, unknown key, or a bare key present in
            more than one section.
    """
    name, sep, raw = override.partition("=")
    name = name.strip()
    if not sep or not name:
        raise ConfigError(f"override '{override}' is not of the form key=value")
    if "." in name:
        section, _, key = name.partition(".")
        if section not in SECTION_MODELS:
            raise ConfigError(f"unknown section '{section}' in override '{override}'; expected one of {list(SECTION_NAMES)}")
        if key not in SECTION_MODELS[section].model_fields:
            raise ConfigError(f"unknown key '{key}' in section '{section}'")
        return section, key, raw.strip()

    sections = _sections_for_key(name)
    if not sections:
        raise ConfigError(f"unknown key '{name}'")
    if len(sections) > 1:
        raise ConfigError(f"key '{name}' is ambiguous; use one of {[f'{s}.{name}' for s in sections]}")
    return sections[0], name, raw.strip()


def _parse_value(raw: str) -> Any:
    """YAML scalar/flow syntax, so `0.5`, `[5000, 10000]` and `[[1, 0.5]]` all parse."""
    if raw == "":
        return None
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value '{raw}': {exc}") from exc


def _load_document(text: str) -> Dict[str, Dict[str, Any]]:
    try:
        doc = yaml.safe_load(text) if text and text.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config document is not valid YAML: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config document must be a mapping of sections, got {type(doc).__name__}")

    out: Dict[str, Dict[str, Any]] = {}
    for section, body in doc.items():
        if section not in SECTION_MODELS:
            raise ConfigError(f"unknown section '{section}'; expected one of {list(SECTION_NAMES)}")
        if body is None:
            body = {}
        if not isinstance(body, dict):
            raise ConfigError(f"section '{section}' must be a flat key/value mapping")
        out[section] = dict(body)
    return out


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(
    text: str,
    overrides: Sequence[str] = (),
    command: Optional[str] = None,
    source: Optional[str] = None,
) -> RunConfig:
    """Typed run config from a document and override pairs (applied last, in order).

    Raises:
        ConfigError: unknown section or key, type mismatch, constraint violation.
    """
    doc = _load_document(text)
    for override in overrides:
        section, key, raw = split_override(override)
        doc.setdefault(section, {})[key] = _parse_value(raw)

    try:
        config = ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc

    logger.debug(f"Parsed config from {source or '<defaults>'} with {len(overrides)} override(s)")
    return RunConfig(config=config, command=command, source=source, overrides=list(overrides))


def load_config_file(path: str, overrides: Sequence[str] = (), command: Optional[str] = None) -> RunConfig:
    """Read and parse a config file.

    Raises:
        ConfigError: if the file cannot be read or does not validate.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, overrides, command=command, source=str(path))


def dump_config(config: ExperimentConfig) -> str:
    """YAML document that parses back to an equal config."""
    return yaml.dump(config.model_dump(mode="json"), sort_keys=False, default_flow_style=None)
