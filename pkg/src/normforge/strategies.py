"""Named social strategies and a parser for strategy specifications.

The ``L = 1`` candidates ``s1.1..s1.4`` and the ``L = 2`` sequence
``s2.1..s2.7`` are fixed matrices; the other constructors take ``L``.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .model import SocialStrategy


def all_decline(L: int) -> SocialStrategy:
    return SocialStrategy(np.zeros((L + 1, L + 1), dtype=bool))


def all_fulfill(L: int) -> SocialStrategy:
    return SocialStrategy(np.ones((L + 1, L + 1), dtype=bool))


def decline_zero_clients(L: int) -> SocialStrategy:
    """Everyone serves every client except those holding reputation 0."""
    serve = np.ones((L + 1, L + 1), dtype=bool)
    serve[:, 0] = False
    return SocialStrategy(serve)


def single_decline(L: int) -> SocialStrategy:
    """All F except that an ``(L-1)``-server declines a 0-client."""
    serve = np.ones((L + 1, L + 1), dtype=bool)
    serve[L - 1, 0] = False
    return SocialStrategy(serve)


def serve_equal_or_better(L: int) -> SocialStrategy:
    """F iff the client's reputation is at least the server's."""
    theta = np.arange(L + 1)
    return SocialStrategy(theta[None, :] >= theta[:, None])


L1_CANDIDATES = {
    1: SocialStrategy.from_string("DF/FF"),
    2: SocialStrategy.from_string("FF/DF"),
    3: SocialStrategy.from_string("DF/DF"),
    4: SocialStrategy.from_string("DD/DD"),
}

L2_SEQUENCE = {
    1: SocialStrategy.from_string("FFF/DFF/FFF"),
    2: SocialStrategy.from_string("DFF/FFF/FFF"),
    3: SocialStrategy.from_string("DFF/DFF/FFF"),
    4: SocialStrategy.from_string("FFF/FFF/DFF"),
    5: SocialStrategy.from_string("FFF/DFF/DFF"),
    6: SocialStrategy.from_string("DFF/FFF/DFF"),
    7: SocialStrategy.from_string("DFF/DFF/DFF"),
}

FAMILIES = {
    "D": all_decline,
    "F": all_fulfill,
    "D0": decline_zero_clients,
    "B": single_decline,
    "C": serve_equal_or_better,
}


def named(name: str, L: int) -> SocialStrategy:
    """Look up a strategy by catalog name: ``D``, ``F``, ``D0``, ``B``, ``C``
    (any ``L``) or ``s1.1``..``s1.4``, ``s2.1``..``s2.7`` (fixed ``L``)."""
    key = name.strip()
    if key.upper() in FAMILIES:
        return FAMILIES[key.upper()](L)
    if key.lower().startswith("s") and "." in key:
        fam, _, num = key[1:].partition(".")
        table = {"1": L1_CANDIDATES, "2": L2_SEQUENCE}.get(fam)
        if table is None or not num.isdigit() or int(num) not in table:
            raise ValidationError(f"unknown named strategy {name!r}")
        strat = table[int(num)]
        if strat.L != L:
            raise DimensionMismatch(f"{name} is defined for L={strat.L}, not L={L}")
        return strat
    raise ValidationError(f"unknown named strategy {name!r}")


def parse_strategy(spec, L: int) -> SocialStrategy:
    """Accept a ``SocialStrategy``, a catalog name, an F/D string, or an
    integer canonical index (``7`` or ``"#7"``)."""
    if isinstance(spec, SocialStrategy):
        strat = spec
    elif isinstance(spec, (int, np.integer)):
        strat = SocialStrategy.from_index(int(spec), L)
    else:
        text = str(spec).strip()
        if text.startswith("#") or text.isdigit():
            strat = SocialStrategy.from_index(int(text.lstrip("#")), L)
        elif text.upper() in FAMILIES or text[:1] in "sS":
            strat = named(text, L)
        else:
            strat = SocialStrategy.from_string(text)
    if strat.L != L:
        raise DimensionMismatch(f"strategy has L={strat.L}, expected L={L}")
    return strat


def catalog_name(strategy: SocialStrategy) -> str:
    """Best-effort catalog label for reporting; empty string when unnamed."""
    L = strategy.L
    if L == 1:
        for k, s in L1_CANDIDATES.items():
            if s == strategy:
                return f"s1.{k}"
    if L == 2:
        for k, s in L2_SEQUENCE.items():
            if s == strategy:
                return f"s2.{k}"
    for key, ctor in FAMILIES.items():
        if ctor(L) == strategy:
            return key
    return ""
