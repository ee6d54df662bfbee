"""Core types and reputation dynamics.

A community is described by ``CommunityParams``; a reputation scheme by
``ReputationScheme`` (reputations ``0..L``, punishment drop ``M``, entry
reputation ``K``); the prescribed behaviour by a ``SocialStrategy`` matrix
indexed ``[server reputation, client reputation]``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BenefitNotAboveCost,
    DimensionMismatch,
    LTooLarge,
    NoConvergence,
    OutOfRange,
    UnsupportedScheme,
    ValidationError,
)

MAX_ENUMERATION_L = 3
DIST_TOL = 1e-12


class Action(enum.IntEnum):
    """Server action. ``D < F`` fixes the canonical bit order."""

    D = 0
    F = 1

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class CommunityParams:
    b: float
    c: float
    beta: float
    alpha: float
    eps: float
    c_w: Optional[float] = None

    def __post_init__(self):
        for name in ("b", "c", "beta", "alpha", "eps"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise OutOfRange(name, "a finite number", v)
        if self.c <= 0:
            raise OutOfRange("c", "c > 0", self.c)
        if self.b <= self.c:
            raise BenefitNotAboveCost(self.b, self.c)
        if not 0 <= self.beta < 1:
            raise OutOfRange("beta", "0 <= beta < 1", self.beta)
        if not 0 <= self.alpha <= 1:
            raise OutOfRange("alpha", "0 <= alpha <= 1", self.alpha)
        if not 0 <= self.eps <= 0.5:
            raise OutOfRange("eps", "0 <= eps <= 1/2", self.eps)
        if self.c_w is not None:
            if not math.isfinite(self.c_w) or self.c_w < 0:
                raise OutOfRange("c_w", "c_w >= 0", self.c_w)

    @property
    def delta(self) -> float:
        """Effective weight on next period: discount times survival."""
        return self.beta * (1 - self.alpha)

    @property
    def gamma(self) -> float:
        return self.delta * (1 - self.eps)

    def replace(self, **changes) -> "CommunityParams":
        values = {k: getattr(self, k) for k in ("b", "c", "beta", "alpha", "eps", "c_w")}
        values.update(changes)
        return CommunityParams(**values)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("b", "c", "beta", "alpha", "eps", "c_w")}


DEFAULT_PARAMS = CommunityParams(b=10.0, c=1.0, beta=0.8, alpha=0.1, eps=0.2)

_PARAM_ORDER = ("b", "c", "beta", "alpha", "eps", "c_w")


def validate_params(raw) -> CommunityParams:
    """Build ``CommunityParams`` from a tuple ``(b, c, beta, alpha, eps[, c_w])``
    or a mapping with those keys. Raises ``OutOfRange`` or
    ``BenefitNotAboveCost`` naming the violated bound."""
    if isinstance(raw, CommunityParams):
        return raw
    if isinstance(raw, Mapping):
        unknown = set(raw) - set(_PARAM_ORDER)
        if unknown:
            raise ValidationError(f"unknown parameter(s): {sorted(unknown)}")
        missing = [k for k in _PARAM_ORDER[:5] if k not in raw]
        if missing:
            raise ValidationError(f"missing parameter(s): {missing}")
        values = dict(raw)
    else:
        raw = tuple(raw)
        if len(raw) not in (5, 6):
            raise ValidationError(f"expected 5 or 6 parameters, got {len(raw)}")
        values = dict(zip(_PARAM_ORDER, raw))
    converted = {}
    for k, v in values.items():
        if v is None and k == "c_w":
            converted[k] = None
            continue
        try:
            converted[k] = float(v)
        except (TypeError, ValueError):
            raise OutOfRange(k, "a finite number", v) from None
    return CommunityParams(**converted)


@dataclass(frozen=True)
class ReputationScheme:
    L: int
    M: Optional[int] = None
    K: Optional[int] = None

    def __post_init__(self):
        if self.M is None:
            object.__setattr__(self, "M", self.L)
        if self.K is None:
            object.__setattr__(self, "K", self.L)
        for name in ("L", "M", "K"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise OutOfRange(name, "an integer", getattr(self, name))
        if self.L < 1:
            raise OutOfRange("L", "L >= 1", self.L)
        if not 1 <= self.M <= self.L:
            raise OutOfRange("M", "1 <= M <= L", self.M)
        if not 0 <= self.K <= self.L:
            raise OutOfRange("K", "0 <= K <= L", self.K)

    @property
    def size(self) -> int:
        return self.L + 1

    @property
    def is_maximum_punishment(self) -> bool:
        return self.M == self.L and self.K == self.L

    def up(self, theta):
        return np.minimum(np.asarray(theta) + 1, self.L)

    def down(self, theta):
        return np.maximum(np.asarray(theta) - self.M, 0)


class SocialStrategy:
    """Prescribed action ``sigma(server, client)`` stored as a boolean matrix
    (``True`` = F).

    The canonical index reads the row-major flattening as a binary number with
    entry ``(0, 0)`` as the most significant bit, so the index and the F/D
    string (``"DFFF"``) spell the same bits.
    """

    __slots__ = ("_serve",)

    def __init__(self, serve):
        arr = np.array(serve, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise DimensionMismatch(f"strategy must be a square matrix of side >= 2, got shape {arr.shape}")
        arr.setflags(write=False)
        self._serve = arr

    @classmethod
    def from_actions(cls, rows) -> "SocialStrategy":
        return cls([[Action(a) == Action.F for a in row] for row in rows])

    @classmethod
    def from_string(cls, text: str) -> "SocialStrategy":
        """Parse ``"DFFF"`` or ``"DF/FF"`` (rows may be separated by ``/``,
        ``,``, ``;`` or whitespace)."""
        cleaned = "".join(ch for ch in text.upper() if ch not in "/,; \t\n[]")
        if not cleaned or set(cleaned) - {"F", "D"}:
            raise ValidationError(f"strategy string must contain only F/D characters: {text!r}")
        n = math.isqrt(len(cleaned))
        if n * n != len(cleaned) or n < 2:
            raise DimensionMismatch(f"strategy string length {len(cleaned)} is not a square >= 4")
        return cls(np.array([ch == "F" for ch in cleaned]).reshape(n, n))

    @classmethod
    def from_index(cls, index: int, L: int) -> "SocialStrategy":
        n = L + 1
        if not 0 <= index < 2 ** (n * n):
            raise OutOfRange("strategy index", f"0 <= index < 2^{n * n}", index)
        return cls(index_to_bits(np.array([index]), L)[0])

    @property
    def serve(self) -> np.ndarray:
        return self._serve

    @property
    def L(self) -> int:
        return self._serve.shape[0] - 1

    @property
    def index(self) -> int:
        out = 0
        for bit in self._serve.ravel():
            out = (out << 1) | int(bit)
        return out

    def action(self, theta, client) -> Action:
        return Action.F if self._serve[theta, client] else Action.D

    def rows(self) -> list:
        return ["".join("F" if x else "D" for x in row) for row in self._serve]

    def to_string(self, sep: str = "") -> str:
        return sep.join(self.rows())

    def serves_anyone(self) -> np.ndarray:
        """Per server reputation: does the row contain an F?"""
        return self._serve.any(axis=1)

    def __eq__(self, other):
        if not isinstance(other, SocialStrategy):
            return NotImplemented
        return self._serve.shape == other._serve.shape and bool((self._serve == other._serve).all())

    def __hash__(self):
        return hash((self._serve.shape[0], self.index))

    def __repr__(self):
        return f"SocialStrategy({self.to_string('/')!r})"

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class SocialNorm:
    scheme: ReputationScheme
    strategy: SocialStrategy

    def __post_init__(self):
        if self.strategy.L != self.scheme.L:
            raise DimensionMismatch(
                f"strategy side {self.strategy.L + 1} does not match scheme L+1={self.scheme.L + 1}"
            )

    @classmethod
    def of(cls, strategy: SocialStrategy, M=None, K=None) -> "SocialNorm":
        return cls(ReputationScheme(strategy.L, M, K), strategy)


@dataclass(frozen=True, eq=False)
class ReputationDistribution:
    mass: np.ndarray = field(repr=True)

    def __post_init__(self):
        arr = np.array(self.mass, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise DimensionMismatch("distribution must be a vector of length L+1 >= 2")
        if (arr < 0).any() or abs(arr.sum() - 1.0) > DIST_TOL:
            raise ValidationError(f"not a probability vector (sum={arr.sum()!r}, min={arr.min()!r})")
        arr.setflags(write=False)
        object.__setattr__(self, "mass", arr)

    @property
    def L(self) -> int:
        return self.mass.size - 1

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def __getitem__(self, theta):
        return self.mass[theta]

    def __len__(self):
        return self.mass.size

    def __array__(self, dtype=None, copy=None):
        return self.mass if dtype is None else self.mass.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, ReputationDistribution):
            return NotImplemented
        return self.mass.shape == other.mass.shape and bool((self.mass == other.mass).all())


def _check_dims(dist: ReputationDistribution, scheme: ReputationScheme):
    if dist.L != scheme.L:
        raise DimensionMismatch(f"distribution has L={dist.L}, scheme has L={scheme.L}")


def _push_forward(mass: np.ndarray, params: CommunityParams, scheme: ReputationScheme) -> np.ndarray:
    theta = np.arange(scheme.size)
    out = np.zeros(scheme.size)
    np.add.at(out, scheme.up(theta), (1 - params.alpha) * (1 - params.eps) * mass)
    np.add.at(out, scheme.down(theta), (1 - params.alpha) * params.eps * mass)
    out[scheme.K] += params.alpha
    return out


def evolve_distribution(
    dist: ReputationDistribution, params: CommunityParams, scheme: ReputationScheme
) -> ReputationDistribution:
    """One period of the population dynamics: survivors move up one step with
    probability ``1 - eps`` or drop ``M`` steps with probability ``eps``;
    the departing fraction ``alpha`` is replaced by newcomers at ``K``."""
    _check_dims(dist, scheme)
    out = _push_forward(dist.mass, params, scheme)
    # absorb rounding so that the sum-to-one invariant holds exactly enough
    out /= out.sum()
    return ReputationDistribution(out)


def stationary_closed_form(params: CommunityParams, L: int) -> ReputationDistribution:
    """Stationary distribution of the maximum punishment scheme (``M = K = L``).

    The top reputation takes the remaining mass, which is algebraically equal to
    the printed two-case expression and keeps ``eta(L) == 1`` exact when
    ``alpha = eps = 0``.
    """
    if L < 1:
        raise OutOfRange("L", "L >= 1", L)
    a, e = params.alpha, params.eps
    theta = np.arange(L)
    low = (1 - a) ** (theta + 1) * (1 - e) ** theta * e
    mass = np.empty(L + 1)
    mass[:L] = low
    mass[L] = 1.0 - low.sum()
    return ReputationDistribution(mass)


def stationary_top_mass_formula(params: CommunityParams, L: int) -> float:
    """``eta(L)`` evaluated literally from the two-case closed form."""
    a, e = params.alpha, params.eps
    if a == 0 and e == 0:
        return 1.0
    return ((1 - a) ** (L + 1) * (1 - e) ** L * e + a) / (1 - (1 - a) * (1 - e))


def stationary_general(
    params: CommunityParams,
    scheme: ReputationScheme,
    tol: float = 1e-13,
    max_iter: int = 1_000_000,
) -> ReputationDistribution:
    """Fixed point of ``evolve_distribution`` by iteration from the uniform
    distribution; stops when the sup-norm change drops below ``tol``."""
    mass = np.full(scheme.size, 1.0 / scheme.size)
    for _ in range(max_iter):
        nxt = _push_forward(mass, params, scheme)
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - mass)) < tol:
            return ReputationDistribution(nxt)
        mass = nxt
    raise NoConvergence(
        f"stationary iteration did not converge within {max_iter} steps for {scheme} "
        f"(alpha={params.alpha}, eps={params.eps})"
    )


def stationary(params: CommunityParams, scheme: ReputationScheme) -> ReputationDistribution:
    """Closed form for maximum punishment schemes, fixed-point iteration otherwise."""
    if scheme.is_maximum_punishment:
        return stationary_closed_form(params, scheme.L)
    return stationary_general(params, scheme)


def index_to_bits(indices: np.ndarray, L: int) -> np.ndarray:
    """Decode canonical indices into boolean matrices, shape ``(k, L+1, L+1)``."""
    n = L + 1
    shifts = np.arange(n * n - 1, -1, -1, dtype=np.int64)
    bits = (np.asarray(indices, dtype=np.int64)[:, None] >> shifts) & 1
    return bits.astype(bool).reshape(-1, n, n)


def all_strategy_bits(L: int) -> np.ndarray:
    """Every strategy for ``L`` as a boolean array in canonical-index order."""
    _guard_enumeration(L)
    n = L + 1
    return index_to_bits(np.arange(2 ** (n * n), dtype=np.int64), L)


def _guard_enumeration(L: int, limit: int = MAX_ENUMERATION_L):
    if L < 1:
        raise OutOfRange("L", "L >= 1", L)
    if L > limit:
        raise LTooLarge(L, limit)


def enumerate_strategies(L: int) -> Iterator[SocialStrategy]:
    """Yield all ``2^((L+1)^2)`` strategies in canonical-index order, from all-D
    to all-F."""
    _guard_enumeration(L)
    for serve in all_strategy_bits(L):
        yield SocialStrategy(serve)


def require_maximum_punishment_drop(scheme: ReputationScheme, what: str):
    if scheme.M != scheme.L:
        raise UnsupportedScheme(f"{what} requires M = L (got L={scheme.L}, M={scheme.M})")
