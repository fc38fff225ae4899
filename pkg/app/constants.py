import os
from pathlib import Path
from typing import Literal, cast, get_args

from dotenv import load_dotenv

load_dotenv(override=True)

Variant = Literal['some', 'any']

VALID_VARIANTS = list(get_args(Variant))

VARIANT = cast(Variant, os.getenv('EPSK_VARIANT', 'some'))
assert VARIANT in VALID_VARIANTS, (
    f'Invalid EPSK_VARIANT value: {VARIANT}. Must be one of: '
    f'{VALID_VARIANTS}.'
)

Notion = Literal['cr', 'r']

VALID_NOTIONS = list(get_args(Notion))


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name, str(default))
    assert raw.isdigit() and int(raw) > 0, (
        f'Invalid {name} value: {raw}. Must be a positive integer.'
    )
    return int(raw)


# Oracle caps; table spaces are doubly exponential in these
MAX_UNIVERSE = _int_env('EPSK_MAX_UNIVERSE', 3)
MAX_GAMMA = _int_env('EPSK_MAX_GAMMA', 3)
MAX_DELTA_PLUS = _int_env('EPSK_MAX_DELTA_PLUS', 3)
MAX_DELTA_MINUS = _int_env('EPSK_MAX_DELTA_MINUS', 3)
MAX_SEARCH_NODES = _int_env('EPSK_MAX_SEARCH_NODES', 2_000_000)
MAX_TABLES = _int_env('EPSK_MAX_TABLES', 100_000)

MAX_SIZE = _int_env('EPSK_MAX_SIZE', 2)
assert MAX_SIZE <= MAX_UNIVERSE, (
    f'EPSK_MAX_SIZE ({MAX_SIZE}) must not exceed EPSK_MAX_UNIVERSE '
    f'({MAX_UNIVERSE}).'
)

BOOL_SORT = 'o'

PROJECTION_NAMES = ['1st', '2nd', '3rd', '4th', '5th', '6th']

CORPUS_DIR = Path(__file__).parent / 'corpus'
