"""Game state, capital accounting and the round-loop engine.

Two forecasting games are supported. In Game I the Skeptic stakes a real
number ``s`` after seeing the forecast and must keep his capital nonnegative
whatever the label turns out to be. In Game II the Skeptic announces a
continuous function ``S: [0, 1] -> R`` before the forecast is made and the
stake is ``S(p)``; there is no restriction on his capital.

Every round runs in this order::

    Reality object -> Skeptic functions -> Forecaster -> Game I stakes
    -> Reality label -> capital updates

Strategies are plain objects with the following duck-typed methods:

* Reality: ``object(history, rng) -> array`` and
  ``label(history, x, p, s_fn, rng) -> int``.
* Forecaster: ``forecast(history, x, s_fn) -> float``; ``s_fn`` is the
  designated Skeptic's function for the round (``None`` if there is none).
* Game II Skeptic: ``announce(history, x) -> SkepticFunction``.
* Game I Skeptic (``game == "I"``): ``stake(history, x, p) -> float``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np


class ProtocolViolation(RuntimeError):
    """A player made an illegal move; the game is aborted."""


@dataclass(frozen=True)
class Round:
    x: tuple[float, ...]
    p: float
    y: int


class History:
    """Append-only record of rounds backed by growable numpy buffers.

    ``p``, ``y`` and ``x`` return read-only views of the first ``len(self)``
    rows. Appending never writes inside an existing view, so a view taken at
    round ``n`` is a stable snapshot of the first ``n`` rounds.
    """

    def __init__(self, dim: int = 0, capacity: int = 64):
        if dim < 0:
            raise ValueError("object dimension must be >= 0")
        self.dim = dim
        self._n = 0
        self._p = np.empty(capacity)
        self._y = np.empty(capacity)
        self._x = np.empty((capacity, dim))

    @classmethod
    def from_rounds(cls, rounds: Iterable[Round | tuple], dim: int | None = None) -> History:
        rounds = [r if isinstance(r, Round) else Round(tuple(r[0]), float(r[1]), int(r[2]))
                  for r in rounds]
        if dim is None:
            dim = len(rounds[0].x) if rounds else 0
        h = cls(dim, capacity=max(len(rounds), 1))
        for r in rounds:
            h.append(r.x, r.p, r.y)
        return h

    @classmethod
    def from_arrays(cls, p, y, x=None) -> History:
        """Build a history from forecast and label arrays (objects optional)."""
        p = np.asarray(p, dtype=float)
        y = np.asarray(y)
        if x is not None and np.ndim(x) == 2:
            x = np.asarray(x, dtype=float)  # keeps the dimension of an empty (0, d) array
        elif x is None or np.size(x) == 0:
            x = np.empty((len(p), 0))
        else:
            x = np.asarray(x, dtype=float).reshape(len(p), -1)
        h = cls(x.shape[1], capacity=max(len(p), 1))
        for i in range(len(p)):
            h.append(x[i], p[i], y[i])
        return h

    def __len__(self) -> int:
        return self._n

    def __iter__(self) -> Iterator[Round]:
        for i in range(self._n):
            yield self[i]

    def __getitem__(self, i: int) -> Round:
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        return Round(tuple(float(v) for v in self._x[i]), float(self._p[i]), int(self._y[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, History):
            return NotImplemented
        return (self.dim == other.dim and len(self) == len(other)
                and np.array_equal(self.p, other.p) and np.array_equal(self.y, other.y)
                and np.array_equal(self.x, other.x))

    def __repr__(self) -> str:
        return f"History(n={self._n}, dim={self.dim})"

    @property
    def p(self) -> np.ndarray:
        return _readonly(self._p[: self._n])

    @property
    def y(self) -> np.ndarray:
        return _readonly(self._y[: self._n])

    @property
    def x(self) -> np.ndarray:
        return _readonly(self._x[: self._n])

    @property
    def rounds(self) -> list[Round]:
        return list(self)

    def append(self, x, p: float, y: int) -> None:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise ValueError(f"object has dimension {x.shape[0]}, history expects {self.dim}")
        if self._n == len(self._p):
            self._grow()
        self._x[self._n] = x
        self._p[self._n] = p
        self._y[self._n] = y
        self._n += 1

    def _grow(self) -> None:
        cap = 2 * len(self._p)
        # fresh buffers: old views keep pointing at the old (unchanged) data
        self._p = np.concatenate([self._p, np.empty(cap - len(self._p))])
        self._y = np.concatenate([self._y, np.empty(cap - len(self._y))])
        self._x = np.concatenate([self._x, np.empty((cap - len(self._x), self.dim))])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = a.view()
    a.flags.writeable = False
    return a


class SkepticFunction:
    """A Skeptic's move in Game II: a continuous map from forecasts to stakes.

    Args:
        fn: the map. If ``vectorized`` it must accept a numpy array of
            forecasts and return an array of the same shape.
        continuous: declared continuity; everything built by this package
            is continuous by construction.
        vectorized: whether ``fn`` broadcasts over arrays.
    """

    def __init__(self, fn: Callable, continuous: bool = True, vectorized: bool = False):
        self.fn = fn
        self.continuous = continuous
        self.vectorized = vectorized

    def __call__(self, p: float) -> float:
        if self.vectorized:
            return float(np.asarray(self.fn(np.asarray([p], dtype=float)))[0])
        return float(self.fn(p))

    def values(self, ps) -> np.ndarray:
        ps = np.asarray(ps, dtype=float)
        if self.vectorized:
            return np.asarray(self.fn(ps), dtype=float)
        return np.array([float(self.fn(p)) for p in ps.ravel()]).reshape(ps.shape)

    @classmethod
    def constant(cls, value: float) -> SkepticFunction:
        value = float(value)
        return cls(lambda ps: np.full(np.shape(ps), value), vectorized=True)


@dataclass
class CapitalLedger:
    """Capital trajectory K_0, K_1, ... of one Skeptic."""

    game_variant: str = "II"
    values: list[float] = field(default_factory=lambda: [1.0])

    def __post_init__(self):
        if self.game_variant not in ("I", "II"):
            raise ValueError(f"unknown game variant {self.game_variant!r}")

    @property
    def capital(self) -> float:
        return self.values[-1]

    def append(self, k: float) -> None:
        self.values.append(float(k))

    def __len__(self) -> int:
        return len(self.values)


def capital_update_game1(k_prev: float, s: float, y: int, p: float) -> float:
    return k_prev + s * (y - p)


def capital_update_game2(k_prev: float, s_fn: SkepticFunction | Callable, p: float, y: int) -> float:
    return k_prev + s_fn(p) * (y - p)


def check_game1_legal(ledger: CapitalLedger, s: float, p: float) -> bool:
    """True iff staking ``s`` at forecast ``p`` keeps capital >= 0 for both labels."""
    if len(ledger) == 0:
        raise ValueError("ledger is empty")
    k = ledger.capital
    return k + s * (1 - p) >= 0 and k - s * p >= 0


def _check_forecast(p, who) -> float:
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ProtocolViolation(f"{who} returned a non-numeric forecast {p!r}") from None
    if not (0.0 <= p <= 1.0):
        raise ProtocolViolation(f"{who} returned forecast {p!r} outside [0, 1]")
    return p


def _check_label(y, who) -> int:
    if isinstance(y, (bool, np.bool_)):
        y = int(y)
    if y not in (0, 1) or (isinstance(y, float) and not y.is_integer()):
        raise ProtocolViolation(f"{who} returned non-binary label {y!r}")
    return int(y)


def _name(obj) -> str:
    return type(obj).__name__


def run_game(forecaster, skeptics: Sequence, reality, n: int, seed: int,
             designated: int | str | None = "first", dim: int | None = None) -> tuple[History, list[CapitalLedger]]:
    """Play ``n`` rounds and return the history and one ledger per Skeptic.

    Args:
        forecaster: Forecaster strategy.
        skeptics: Skeptic strategies observed in the game. Each gets its own
            ledger; only ``skeptics[designated]`` is shown to the Forecaster.
        reality: Reality strategy.
        n: number of rounds, >= 1.
        seed: seed of the game's PCG64 generator (passed to Reality).
        designated: index of the Skeptic whose function the Forecaster sees,
            ``"first"`` for the first Game II Skeptic (if any), or None.
        dim: object dimension; defaults to ``reality.dim`` or 0.

    Raises:
        ProtocolViolation: on an out-of-range forecast, non-binary label,
            non-finite stake, or an illegal Game I stake.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dim is None:
        dim = getattr(reality, "dim", 0)
    rng = np.random.default_rng(seed)
    history = History(dim, capacity=n)
    ledgers = [CapitalLedger(getattr(s, "game", "II")) for s in skeptics]
    if designated == "first":
        designated = next((i for i, led in enumerate(ledgers) if led.game_variant == "II"), None)
    if designated is None:
        pass
    elif not 0 <= designated < len(skeptics) or ledgers[designated].game_variant != "II":
        raise ValueError("designated Skeptic must be a Game II Skeptic in the list")
    game2 = [i for i, led in enumerate(ledgers) if led.game_variant == "II"]
    game1 = [i for i, led in enumerate(ledgers) if led.game_variant == "I"]

    for _ in range(n):
        x = np.asarray(reality.object(history, rng), dtype=float).reshape(-1)
        if x.shape[0] != dim or not np.all(np.isfinite(x)):
            raise ProtocolViolation(f"{_name(reality)} returned an invalid object {x!r}")
        fns: dict[int, SkepticFunction] = {i: skeptics[i].announce(history, x) for i in game2}
        s_fn = fns.get(designated) if designated is not None else None
        p = _check_forecast(forecaster.forecast(history, x, s_fn), _name(forecaster))
        stakes = {}
        for i in game1:
            s = float(skeptics[i].stake(history, x, p))
            if not math.isfinite(s) or not check_game1_legal(ledgers[i], s, p):
                raise ProtocolViolation(
                    f"{_name(skeptics[i])} staked {s!r} at p={p!r} with capital "
                    f"{ledgers[i].capital!r}, violating the nonnegativity restriction")
            stakes[i] = s
        y = _check_label(reality.label(history, x, p, s_fn, rng), _name(reality))
        for i, f in fns.items():
            s = f(p)
            if not math.isfinite(s):
                raise ProtocolViolation(f"{_name(skeptics[i])} announced a function with S({p!r}) = {s!r}")
            ledgers[i].append(ledgers[i].capital + s * (y - p))
        for i, s in stakes.items():
            ledgers[i].append(capital_update_game1(ledgers[i].capital, s, y, p))
        history.append(x, p, y)
    return history, ledgers


# -- serialization ---------------------------------------------------------

def write_history_jsonl(history: History, path) -> None:
    with open(path, "w") as fh:
        for r in history:
            fh.write(json.dumps({"x": list(r.x), "p": r.p, "y": r.y}) + "\n")


def read_history_jsonl(path) -> History:
    rounds = []
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                x = tuple(float(v) for v in rec.get("x", []))
                p = float(rec["p"])
                y = rec["y"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed record ({exc})") from None
            if not 0.0 <= p <= 1.0 or y not in (0, 1):
                raise ValueError(f"{path}:{lineno}: forecast or label out of range")
            if dim is None:
                dim = len(x)
            elif len(x) != dim:
                raise ValueError(f"{path}:{lineno}: object dimension {len(x)} != {dim}")
            rounds.append(Round(x, p, int(y)))
    return History.from_rounds(rounds, dim=dim or 0)


def write_ledger_csv(ledger: CapitalLedger, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["round", "capital"])
        for i, k in enumerate(ledger.values):
            w.writerow([i, repr(float(k))])


def read_ledger_csv(path, game_variant: str = "II") -> CapitalLedger:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return CapitalLedger(game_variant, [float(r["capital"]) for r in rows])
