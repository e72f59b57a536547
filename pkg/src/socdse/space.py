"""Discrete combinatorial design spaces: schema loading, encoding, sampling.

A design space is an ordered list of parameters, each with a finite ordered
candidate list (numeric levels or symbolic labels).  A design point is one
candidate index per parameter.  Numeric embedding min-max scales each
parameter's level to [0, 1] so that downstream distance computations are
commensurate across parameters; symbolic candidates are ordinal-coded in
listed order before scaling.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

# One candidate index per parameter, in parameter order.
DesignPoint = tuple[int, ...]


class SpaceError(ValueError):
    """Malformed design-space document or invalid design point."""


@dataclass(frozen=True)
class ParameterDef:
    """A single design parameter and its ordered candidate values."""

    name: str
    group: str
    candidates: tuple[Any, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise SpaceError(f"parameter {self.name!r}: empty candidate list")
        if len(set(map(repr, self.candidates))) != len(self.candidates):
            raise SpaceError(f"parameter {self.name!r}: duplicate candidates")

    @property
    def levels(self) -> np.ndarray:
        """Numeric level per candidate: the value itself, or the ordinal
        code for symbolic candidates."""
        if all(isinstance(c, (int, float)) and not isinstance(c, bool)
               for c in self.candidates):
            return np.asarray(self.candidates, dtype=float)
        return np.arange(len(self.candidates), dtype=float)

    @property
    def scaled_levels(self) -> np.ndarray:
        """Levels min-max scaled to [0, 1]; a single candidate scales to 0."""
        lv = self.levels
        span = lv.max() - lv.min()
        if span == 0.0:
            return np.zeros_like(lv)
        return (lv - lv.min()) / span


@dataclass(frozen=True)
class DesignSpace:
    """Ordered catalog of parameters; immutable and safely shareable."""

    parameters: tuple[ParameterDef, ...]
    seed: int = 0
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = [p.name for p in self.parameters]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SpaceError(f"duplicate parameter names: {sorted(dupes)}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def __len__(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parameters]

    def parameter(self, name: str) -> ParameterDef:
        return self.parameters[self._index[name]]

    def index_of(self, name: str) -> int:
        return self._index[name]

    def cardinality(self) -> int:
        """Total number of design points (exact, arbitrary precision)."""
        n = 1
        for p in self.parameters:
            n *= len(p.candidates)
        return n

    def validate(self, point: Sequence[int]) -> DesignPoint:
        if len(point) != len(self.parameters):
            raise SpaceError(
                f"point has {len(point)} indices, space has "
                f"{len(self.parameters)} parameters")
        for i, (idx, p) in enumerate(zip(point, self.parameters)):
            if not 0 <= idx < len(p.candidates):
                raise SpaceError(
                    f"parameter {p.name!r} (position {i}): index {idx} out of "
                    f"range 0..{len(p.candidates) - 1}")
        return tuple(int(i) for i in point)

    def values(self, point: Sequence[int]) -> list[Any]:
        """Candidate values selected by ``point``, in parameter order."""
        pt = self.validate(point)
        return [p.candidates[i] for p, i in zip(self.parameters, pt)]

    def point_from_values(self, values: Sequence[Any]) -> DesignPoint:
        """Inverse of :meth:`values`; candidates are matched exactly."""
        if len(values) != len(self.parameters):
            raise SpaceError(
                f"got {len(values)} values for {len(self.parameters)} "
                f"parameters")
        point = []
        for p, v in zip(self.parameters, values):
            try:
                point.append(p.candidates.index(v))
            except ValueError:
                raise SpaceError(
                    f"parameter {p.name!r}: value {v!r} is not a candidate"
                ) from None
        return tuple(point)


def load_space(document: str | dict, *, seed: int = 0,
               source: str = "<document>") -> DesignSpace:
    """Parse a design-space document (YAML/JSON text or a parsed mapping).

    The document holds a top-level ``parameters`` list; each entry carries
    ``name``, ``group``, and a non-empty ``candidates`` list of numbers or
    strings.  Errors name the offending parameter and its position.
    """
    if isinstance(document, str):
        try:
            doc = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise SpaceError(f"{source}: not valid YAML/JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict) or "parameters" not in doc:
        raise SpaceError(f"{source}: missing top-level 'parameters' list")
    entries = doc["parameters"]
    if not isinstance(entries, list) or not entries:
        raise SpaceError(f"{source}: 'parameters' must be a non-empty list")

    params = []
    for pos, entry in enumerate(entries):
        where = f"{source}: parameters[{pos}]"
        if not isinstance(entry, dict):
            raise SpaceError(f"{where}: expected a mapping")
        for key in ("name", "candidates"):
            if key not in entry:
                raise SpaceError(f"{where}: missing {key!r}")
        name = entry["name"]
        cands = entry["candidates"]
        if not isinstance(cands, list) or not cands:
            raise SpaceError(f"{where} ({name!r}): empty candidate list")
        try:
            params.append(ParameterDef(
                name=str(name),
                group=str(entry.get("group", "")),
                candidates=tuple(cands),
            ))
        except SpaceError as exc:
            raise SpaceError(f"{where}: {exc}") from None

    names = [p.name for p in params]
    for n in names:
        if names.count(n) > 1:
            raise SpaceError(f"{source}: duplicate parameter name {n!r}")
    return DesignSpace(parameters=tuple(params), seed=seed)


def load_space_file(path: str, *, seed: int = 0) -> DesignSpace:
    with open(path, "r", encoding="utf-8") as fh:
        return load_space(fh.read(), seed=seed, source=path)


def table1_space(*, seed: int = 0) -> DesignSpace:
    """The bundled full-SoC design space (24 parameters)."""
    text = (importlib.resources.files("socdse") / "data" / "table1.yaml"
            ).read_text(encoding="utf-8")
    return load_space(text, seed=seed, source="table1.yaml")


def table1_document() -> str:
    """Raw text of the bundled full-SoC schema document."""
    return (importlib.resources.files("socdse") / "data" / "table1.yaml"
            ).read_text(encoding="utf-8")


def encode(space: DesignSpace, point: Sequence[int]) -> np.ndarray:
    """Embed a design point into [0, 1]^d via per-parameter scaled levels."""
    pt = space.validate(point)
    return np.array([p.scaled_levels[i]
                     for p, i in zip(space.parameters, pt)], dtype=float)


def encode_many(space: DesignSpace, points: Iterable[Sequence[int]]) -> np.ndarray:
    pts = [space.validate(p) for p in points]
    if not pts:
        return np.empty((0, len(space)), dtype=float)
    idx = np.asarray(pts, dtype=int)
    table = [p.scaled_levels for p in space.parameters]
    out = np.empty((len(pts), len(space)), dtype=float)
    for j, levels in enumerate(table):
        out[:, j] = levels[idx[:, j]]
    return out


def decode(space: DesignSpace, coords: Sequence[float]) -> DesignPoint:
    """Recover the design point whose encoding is nearest to ``coords``.

    Exact inverse of :func:`encode` because scaled levels are distinct
    within each parameter.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (len(space),):
        raise SpaceError(
            f"expected {len(space)} coordinates, got {coords.shape}")
    point = []
    for p, c in zip(space.parameters, coords):
        point.append(int(np.argmin(np.abs(p.scaled_levels - c))))
    return tuple(point)


def sample_uniform(space: DesignSpace, n: int,
                   seed: int | Sequence[int] | None = None
                   ) -> list[DesignPoint]:
    """Draw ``n`` points uniformly and independently per parameter.

    Deterministic under a fixed seed (defaults to ``space.seed``).
    Duplicates are permitted; small spaces force them.
    """
    if n < 1:
        raise SpaceError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(space.seed if seed is None else seed)
    cols = [rng.integers(0, len(p.candidates), size=n)
            for p in space.parameters]
    return [tuple(int(cols[j][i]) for j in range(len(space)))
            for i in range(n)]


def reindex_point(src: DesignSpace, dst: DesignSpace,
                  point: Sequence[int]) -> DesignPoint:
    """Re-express a point of ``src`` in ``dst``'s candidate indices.

    Parameters are matched by position and candidates by value; used to
    lift points sampled from a pruned space back into the full space.
    """
    return dst.point_from_values(src.values(point))
