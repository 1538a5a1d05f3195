"""INI run configs and sweep plans.

A run config has the sections [cavity], [drive], [integrator] and [output].
A sweep plan adds [sweep] and one [axis.<name>] section per axis. Validation
errors name the file, section, key and line of the offending entry.
"""
import configparser
import logging
import re
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ValidationError

from error_handler import ConfigError, PlanInvalid
from shared.schema import RunConfig, SweepPlan

logger = logging.getLogger(__name__)

RUN_SECTIONS = ('cavity', 'drive', 'integrator', 'output')
AXIS_PREFIX = 'axis.'

_SECTION = re.compile(r'^\s*\[([^\]]+)\]')
_KEY = re.compile(r'^\s*([^=:#;\s\[][^=:]*?)\s*[=:]')


def _line_map(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """1-based line of every section header and key."""
    lines, section = {}, None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION.match(line)
        if header:
            section = header.group(1).strip()
            lines.setdefault((section, None), number)
            continue
        key = _KEY.match(line)
        if key and section is not None:
            lines.setdefault((section, key.group(1)), number)
    return lines


def _read(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from e
    return parser


def _locate(loc: tuple, axis_names: list) -> Tuple[str, Optional[str]]:
    """Map a pydantic error location to (section, key)."""
    parts = list(loc)
    if parts and parts[0] == 'base':
        parts = parts[1:]
    if not parts:
        return '', None
    if parts[0] == 'axes':
        if len(parts) > 1 and isinstance(parts[1], int) and parts[1] < len(axis_names):
            key = parts[2] if len(parts) > 2 else None
            return AXIS_PREFIX + axis_names[parts[1]], key
        return 'sweep', None
    key = parts[1] if len(parts) > 1 and isinstance(parts[1], str) else None
    return str(parts[0]), key


def _format_errors(error: ValidationError, source: str, lines: dict, axis_names: list) -> str:
    messages = []
    for item in error.errors():
        section, key = _locate(item['loc'], axis_names)
        line = lines.get((section, key)) or lines.get((section, None))
        where = f"{source}:{line}" if line else source
        field = f"[{section}] {key}" if key else f"[{section}]"
        messages.append(f"{where}: {field}: {item['msg']}")
    return '\n'.join(messages)


def _run_sections(parser: configparser.ConfigParser) -> dict:
    return {name: dict(parser[name]) for name in RUN_SECTIONS if parser.has_section(name)}


def parse_run_config(text: str, source: str = '<config>') -> RunConfig:
    parser = _read(text, source)
    lines = _line_map(text)
    unknown = [s for s in parser.sections() if s not in RUN_SECTIONS]
    if unknown:
        line = lines.get((unknown[0], None))
        raise ConfigError(f"{source}:{line}: unknown section [{unknown[0]}]; expected {', '.join(RUN_SECTIONS)}")
    try:
        return RunConfig(**_run_sections(parser))
    except ValidationError as e:
        raise ConfigError(_format_errors(e, source, lines, [])) from e


def parse_sweep_plan(text: str, source: str = '<plan>') -> SweepPlan:
    parser = _read(text, source)
    lines = _line_map(text)
    axis_names, axes = [], []
    for section in parser.sections():
        if section.startswith(AXIS_PREFIX):
            name = section[len(AXIS_PREFIX):]
            axis_names.append(name)
            axes.append({'name': name, **dict(parser[section])})
        elif section not in RUN_SECTIONS + ('sweep',):
            raise PlanInvalid(f"{source}:{lines.get((section, None))}: unknown section [{section}]")
    data = {'base': _run_sections(parser), 'axes': axes}
    if parser.has_section('sweep'):
        data['sweep'] = dict(parser['sweep'])
    try:
        return SweepPlan(**data)
    except ValidationError as e:
        raise PlanInvalid(_format_errors(e, source, lines, axis_names)) from e


def _load_text(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


def load_run_config(path: str) -> RunConfig:
    config = parse_run_config(_load_text(path), source=path)
    logger.info(f"Loaded run config {path}")
    return config


def load_sweep_plan(path: str) -> SweepPlan:
    plan = parse_sweep_plan(_load_text(path), source=path)
    logger.info(f"Loaded sweep plan {path} with {len(plan.axes)} axes")
    return plan


def _section_lines(name: str, model: BaseModel, skip=()) -> list:
    out = [f"[{name}]"]
    for key, value in model.model_dump(exclude_none=True).items():
        if key in skip:
            continue
        out.append(f"{key} = {repr(value) if isinstance(value, float) else value}")
    return out + ['']


def dump_run_config(run: RunConfig) -> str:
    lines = []
    for name in RUN_SECTIONS:
        lines += _section_lines(name, getattr(run, name))
    return '\n'.join(lines)


def dump_sweep_plan(plan: SweepPlan) -> str:
    lines = dump_run_config(plan.base).splitlines() + ['']
    lines += _section_lines('sweep', plan.sweep)
    for axis in plan.axes:
        lines += _section_lines(AXIS_PREFIX + axis.name, axis, skip=('name',))
    return '\n'.join(lines)


def write_run_config(run: RunConfig, path: str):
    with open(path, 'w') as f:
        f.write(dump_run_config(run))
