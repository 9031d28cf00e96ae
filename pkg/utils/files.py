"""
State and settings file codecs

State file (JSON):
    {"format": "density", "entries": [[re, im], ... 16 pairs, row-major]}
    {"format": "pure", "amplitudes": [[re, im], ... 4 pairs]}

Settings file (JSON):
    {"mode": "pair", "a": [[x, y, z], [x, y, z]], "b": [[x, y, z], [x, y, z]]}
    {"mode": "triad", "a": [3 vectors], "b": [3 vectors]}
"""
import json
from typing import Tuple, Union

import numpy as np

from entanglement.bell import Direction, OrthogonalPair, SettingsPair, Triad
from entanglement.errors import NotOrthogonal, NotUnit, SettingsFileError, StateFileError
from entanglement.qstate import DensityMatrix, PureState, as_density
from utils.output import dumps_json

Settings = Union[SettingsPair, Tuple[Triad, Triad]]


def _load_json(path: str, error_cls):
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as e:
        raise error_cls(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise error_cls(f"{path} is not valid JSON: {e.msg} at line {e.lineno}") from e
    except UnicodeDecodeError as e:
        raise error_cls(f"{path} is not UTF-8 text: byte {e.start}") from e
    except ValueError as e:
        # e.g. integers beyond the interpreter's digit limit
        raise error_cls(f"{path} is not valid JSON: {e}") from e
    except RecursionError as e:
        raise error_cls(f"{path} nests JSON too deeply") from e


def _numbers(raw, count: int, error_cls, message: str) -> list:
    """Convert a list of exactly ``count`` JSON numbers to floats, rejecting bools and overflow"""
    if (
        not isinstance(raw, list)
        or len(raw) != count
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise error_cls(message)
    try:
        return [float(v) for v in raw]
    except OverflowError as e:
        raise error_cls(f"{message}; number out of range") from e


def _complex_entries(raw, count: int, field: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != count:
        raise StateFileError(f"'{field}' must be a list of {count} [re, im] pairs")
    values = []
    for pair in raw:
        re, im = _numbers(pair, 2, StateFileError, f"'{field}' entries must be [re, im] number pairs")
        values.append(complex(re, im))
    arr = np.array(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise StateFileError(f"'{field}' contains non-finite numbers")
    return arr


def parse_state(doc) -> Union[DensityMatrix, PureState]:
    """
    Build a state object from a parsed state document

    Raises:
        StateFileError: for structural problems
        InvalidDensityMatrix: if a density matrix fails validation
    """
    if not isinstance(doc, dict):
        raise StateFileError("state file must hold a JSON object")
    kind = doc.get('format')
    if kind == 'density':
        entries = _complex_entries(doc.get('entries'), 16, 'entries')
        return DensityMatrix(entries.reshape(4, 4))
    if kind == 'pure':
        return PureState(_complex_entries(doc.get('amplitudes'), 4, 'amplitudes'))
    raise StateFileError("state file 'format' must be 'density' or 'pure'")


def load_state(path: str) -> DensityMatrix:
    """
    Read a state file as a density matrix (pure states become projectors)

    Raises:
        StateFileError: if the file cannot be read or parsed
        InvalidDensityMatrix, NotNormalized: if the state fails validation
    """
    return as_density(parse_state(_load_json(path, StateFileError)))


def state_to_document(state: Union[DensityMatrix, PureState]) -> dict:
    if isinstance(state, PureState):
        return {
            'format': 'pure',
            'amplitudes': [[float(z.real), float(z.imag)] for z in state.amplitudes],
        }
    return {
        'format': 'density',
        'entries': [[float(z.real), float(z.imag)] for z in np.asarray(state.mat).reshape(16)],
    }


def write_state_file(path: str, state: Union[DensityMatrix, PureState]):
    """Write a state file that parses back to the bit-identical matrix"""
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(dumps_json(state_to_document(state)))


def _directions(raw, count: int, party: str):
    if not isinstance(raw, list) or len(raw) != count:
        raise SettingsFileError(f"'{party}' must list {count} direction vectors")
    directions = []
    for vec in raw:
        x, y, z = _numbers(vec, 3, SettingsFileError, f"'{party}' directions must be [x, y, z] number triples")
        directions.append(Direction(x, y, z))
    return directions


def parse_settings(doc) -> Settings:
    """
    Build settings from a parsed settings document

    Returns:
        SettingsPair in pair mode, (Triad, Triad) in triad mode

    Raises:
        SettingsFileError: for structural problems, non-unit or non-orthogonal directions
    """
    if not isinstance(doc, dict):
        raise SettingsFileError("settings file must hold a JSON object")
    mode = doc.get('mode')
    try:
        if mode == 'pair':
            a = _directions(doc.get('a'), 2, 'a')
            b = _directions(doc.get('b'), 2, 'b')
            return SettingsPair(OrthogonalPair(*a), OrthogonalPair(*b))
        if mode == 'triad':
            return Triad(*_directions(doc.get('a'), 3, 'a')), Triad(*_directions(doc.get('b'), 3, 'b'))
    except (NotUnit, NotOrthogonal) as e:
        raise SettingsFileError(f"invalid settings: {e}") from e
    raise SettingsFileError("settings file 'mode' must be 'pair' or 'triad'")


def load_settings(path: str) -> Settings:
    return parse_settings(_load_json(path, SettingsFileError))


def settings_to_document(settings: Settings) -> dict:
    def vec(d: Direction):
        return [d.x, d.y, d.z]

    if isinstance(settings, SettingsPair):
        return {
            'mode': 'pair',
            'a': [vec(settings.a.d1), vec(settings.a.d2)],
            'b': [vec(settings.b.d1), vec(settings.b.d2)],
        }
    ta, tb = settings
    return {
        'mode': 'triad',
        'a': [vec(ta.d1), vec(ta.d2), vec(ta.d3)],
        'b': [vec(tb.d1), vec(tb.d2), vec(tb.d3)],
    }
