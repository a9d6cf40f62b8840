"""Chemical formula parsing against the pinned standard atomic-weight table."""

import re
from importlib import resources

from .constants import _parse_table
from .errors import FormulaError

_TOKEN = re.compile(r"([A-Z][a-z]*)(\d*)")


def _load_weights():
    text = resources.files("kdtli.data").joinpath("atomic_weights_2021.txt").read_text()
    weights, version = _parse_table(text, "atomic_weights_2021.txt")
    return weights, version


ATOMIC_WEIGHTS, WEIGHTS_TABLE_VERSION = _load_weights()


def parse_formula(formula: str) -> float:
    """Mass in amu of a Hill-style formula like ``"C30H12F30N2O4"``.

    Counts are optional positive integers (``"H2O"``, ``"C60"``). The result
    is independent of element order: contributions are accumulated per element
    and summed in sorted-symbol order, so ``"C2H6"`` and ``"H6C2"`` agree
    exactly, bit for bit.
    """
    if not formula or not formula.strip():
        raise FormulaError("empty formula")
    formula = formula.strip()
    if not re.fullmatch(f"(?:{_TOKEN.pattern})+", formula):
        raise FormulaError(f"cannot parse formula {formula!r}")
    counts: dict[str, int] = {}
    for symbol, digits in _TOKEN.findall(formula):
        if symbol not in ATOMIC_WEIGHTS:
            raise FormulaError(f"unknown element symbol {symbol!r} in {formula!r}")
        n = int(digits) if digits else 1
        if n == 0:
            raise FormulaError(f"zero count for element {symbol!r} in {formula!r}")
        counts[symbol] = counts.get(symbol, 0) + n
    return sum(ATOMIC_WEIGHTS[sym] * counts[sym] for sym in sorted(counts))
