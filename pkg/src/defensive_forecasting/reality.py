"""Label and object sources.

Random labels come from numpy's PCG64 generator (``np.random.default_rng``)
seeded with the game seed. Stream discipline: exactly one ``rng.random()``
draw per label, in round order, and the label is 1 iff the draw is below the
current probability. Deterministic Realities draw nothing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np


def bernoulli_label(rng: np.random.Generator, theta: float) -> int:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta!r}")
    return int(rng.random() < theta)


def parse_script(text: str) -> list[tuple[int, float]]:
    """Parse ``"1000:0.5,1000:0,1000:1"`` into [(1000, 0.5), (1000, 0.0), (1000, 1.0)]."""
    script = []
    for part in text.split(","):
        count, theta = part.split(":")
        script.append((int(count), float(theta)))
    return _check_script(script)


def _check_script(script) -> list[tuple[int, float]]:
    script = [(int(c), float(t)) for c, t in script]
    if not script:
        raise ValueError("regime script is empty")
    for c, t in script:
        if c < 1:
            raise ValueError("segment counts must be >= 1")
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"segment probability {t!r} outside [0, 1]")
    return script


def regime_sequence(script: Sequence[tuple[int, float]], seed: int) -> np.ndarray:
    """Labels of a piecewise-Bernoulli stream, drawn under the stream discipline."""
    script = _check_script(script)
    rng = np.random.default_rng(seed)
    return np.array([bernoulli_label(rng, t) for c, t in script for _ in range(c)], dtype=int)


def dawid_label(p: float) -> int:
    """1 if p < 0.5 else 0."""
    return 1 if p < 0.5 else 0


def replay_stream(path) -> Iterator[tuple[tuple[float, ...], int]]:
    """Yield (object, label) records from a JSON-lines history or a trajectory CSV.

    JSON-lines records need ``y`` and optionally ``x``; ``p`` is ignored. CSV
    files need a ``y`` column; object features are the ``x0, x1, ...``
    columns.
    """
    path = Path(path)
    if path.suffix == ".csv":
        yield from _replay_csv(path)
        return
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                x = tuple(float(v) for v in rec.get("x", []))
                y = rec["y"]
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed record ({exc})") from None
            yield _replay_record(path, lineno, x, y, dim)
            dim = len(x)


def _replay_csv(path: Path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "y" not in cols:
            raise ValueError(f"{path}: no 'y' column")
        xcols = sorted((c for c in cols if c[:1] == "x" and c[1:].isdigit()), key=lambda c: int(c[1:]))
        for lineno, row in enumerate(reader, 2):
            try:
                x = tuple(float(row[c]) for c in xcols)
                y = float(row["y"])
            except (ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row ({exc})") from None
            yield _replay_record(path, lineno, x, y, len(xcols))


def _replay_record(path, lineno, x, y, dim):
    if y not in (0, 1) or isinstance(y, bool):
        raise ValueError(f"{path}:{lineno}: label {y!r} is not 0 or 1")
    if dim is not None and len(x) != dim:
        raise ValueError(f"{path}:{lineno}: object dimension {len(x)} != {dim}")
    return x, int(y)


# -- Reality strategies for the game engine --------------------------------

class BernoulliReality:
    """i.i.d. Bernoulli(theta) labels; objects are a fixed vector."""

    def __init__(self, theta: float, obj: Sequence[float] = ()):
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {theta!r}")
        self.theta = float(theta)
        self.obj = np.asarray(obj, dtype=float)
        self.dim = self.obj.size

    def object(self, history, rng):
        return self.obj

    def label(self, history, x, p, s_fn, rng):
        return bernoulli_label(rng, self.theta)


class RegimeReality:
    """Bernoulli labels whose probability follows a script of (count, theta) segments.

    Args:
        script: segments, played in order.
        object_rule: ``"none"`` (no objects) or ``"theta"`` (the object is the
            one-dimensional vector holding the current segment's theta).
    """

    def __init__(self, script, object_rule: str = "none"):
        self.script = _check_script(script)
        if object_rule not in ("none", "theta"):
            raise ValueError(f"unknown object rule {object_rule!r}")
        self.object_rule = object_rule
        self.dim = 1 if object_rule == "theta" else 0
        self.thetas = np.repeat([t for _, t in self.script], [c for c, _ in self.script])

    def __len__(self):
        return len(self.thetas)

    def _theta(self, history) -> float:
        n = len(history)
        if n >= len(self.thetas):
            raise IndexError(f"regime script has only {len(self.thetas)} rounds")
        return float(self.thetas[n])

    def object(self, history, rng):
        return [self._theta(history)] if self.dim else []

    def label(self, history, x, p, s_fn, rng):
        return bernoulli_label(rng, self._theta(history))


class DawidReality:
    """Deterministic adversary: label 1 iff the forecast is below 0.5."""

    dim = 0

    def object(self, history, rng):
        return []

    def label(self, history, x, p, s_fn, rng):
        return dawid_label(p)


class AdversarialReality:
    """Picks the label that maximizes the designated Skeptic's capital gain.

    S(p) (y - p) is largest at y = 1 when S(p) >= 0 and at y = 0 otherwise.
    Objects are drawn uniformly from [0, 1]^dim.
    """

    def __init__(self, dim: int = 0):
        self.dim = dim

    def object(self, history, rng):
        return rng.random(self.dim) if self.dim else []

    def label(self, history, x, p, s_fn, rng):
        if s_fn is None:
            return 1
        return 1 if s_fn(p) >= 0 else 0


@dataclass
class ReplayReality:
    """Replays recorded (object, label) pairs in file order."""

    records: list

    @classmethod
    def from_path(cls, path) -> ReplayReality:
        return cls(list(replay_stream(path)))

    @property
    def dim(self) -> int:
        return len(self.records[0][0]) if self.records else 0

    def __len__(self):
        return len(self.records)

    def object(self, history, rng):
        n = len(history)
        if n >= len(self.records):
            raise IndexError(f"replay has only {len(self.records)} records")
        return self.records[n][0]

    def label(self, history, x, p, s_fn, rng):
        return self.records[len(history)][1]


@dataclass
class RealitySpec:
    """Declarative description of a Reality, as used by the CLI."""

    kind: str = "bernoulli"
    theta: float = 0.5
    script: str | None = None
    object_rule: str = "none"
    replay_path: str | None = None

    def build(self):
        if self.kind == "bernoulli":
            obj = [self.theta] if self.object_rule == "theta" else []
            return BernoulliReality(self.theta, obj)
        if self.kind == "regime":
            if not self.script:
                raise ValueError("regime reality needs a script such as '1000:0.5,1000:0,1000:1'")
            return RegimeReality(parse_script(self.script), self.object_rule)
        if self.kind == "dawid":
            return DawidReality()
        if self.kind == "adversarial":
            return AdversarialReality()
        if self.kind == "replay":
            if not self.replay_path:
                raise ValueError("replay reality needs a replay path")
            return ReplayReality.from_path(self.replay_path)
        raise ValueError(f"unknown reality kind {self.kind!r}")
