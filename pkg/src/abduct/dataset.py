"""Partial-example datasets, masking and (de)serialization."""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .formula import UNOBSERVED, TriValue

PartialExample = tuple[int, ...]


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    attribute_names: tuple[str, ...]
    rows: tuple[PartialExample, ...] = ()

    def __post_init__(self):
        if len(set(self.attribute_names)) != len(self.attribute_names):
            raise DatasetFormatError("duplicate attribute names")
        n = len(self.attribute_names)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise DatasetFormatError(f"row {i + 1} has {len(row)} cells, expected {n}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], names: Sequence[str] | None = None) -> "Dataset":
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        if names is None:
            if not rows:
                raise ValueError("need attribute names for an empty dataset")
            names = default_names(len(rows[0]))
        return cls(tuple(names), rows)

    @classmethod
    def from_array(cls, values: np.ndarray, names: Sequence[str] | None = None) -> "Dataset":
        """Build from an (m, n) integer array coded 0/1/2 (2 = unobserved)."""
        values = np.asarray(values, dtype=np.int8)
        if values.ndim != 2:
            raise ValueError("expected a 2-d array")
        if names is None:
            names = default_names(values.shape[1])
        return cls(tuple(names), tuple(map(tuple, values.tolist())))

    @property
    def n(self) -> int:
        return len(self.attribute_names)

    @property
    def m(self) -> int:
        return len(self.rows)

    def to_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.n), dtype=np.int8)
        return np.array(self.rows, dtype=np.int8)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.attribute_names, tuple(self.rows[i] for i in indices))

    def __len__(self) -> int:
        return len(self.rows)


def default_names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(n))


def row_to_str(row: Sequence[int]) -> str:
    return "".join("01*"[v] for v in row)


def parse_row(text: str) -> PartialExample:
    return tuple(int(TriValue.parse(ch)) for ch in text)


# ---------------------------------------------------------------------------
# Masking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Independent:
    """Hide every coordinate independently with probability ``p``."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"hide probability {self.p} outside [0, 1]")


@dataclass(frozen=True)
class FixedSubset:
    hidden: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "hidden", frozenset(self.hidden))
        if any(a < 0 for a in self.hidden):
            raise ValueError("negative attribute index")


@dataclass(frozen=True)
class ValueDependent:
    """Hide probability looked up by ``(attr, value)``; missing keys never hide."""

    table: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for key, p in self.table.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"hide probability {p} for {key} outside [0, 1]")


MaskProcess = Union[Independent, FixedSubset, ValueDependent]


def hide_probabilities(values: np.ndarray, process: MaskProcess) -> np.ndarray:
    """Per-cell hide probability for an (m, n) total 0/1 array."""
    m, n = values.shape
    if isinstance(process, Independent):
        return np.full((m, n), process.p)
    if isinstance(process, FixedSubset):
        if any(a >= n for a in process.hidden):
            raise ValueError(f"hidden attribute outside [0, {n})")
        probs = np.zeros((m, n))
        probs[:, sorted(process.hidden)] = 1.0
        return probs
    if isinstance(process, ValueDependent):
        lookup = np.zeros((n, 2))
        for (attr, value), p in process.table.items():
            if not 0 <= attr < n or value not in (0, 1):
                raise ValueError(f"bad mask table key {(attr, value)}")
            lookup[attr, value] = p
        return lookup[np.arange(n)[None, :], values]
    raise TypeError(f"unknown mask process {process!r}")


def mask_array(values: np.ndarray, process: MaskProcess, rng: np.random.Generator) -> np.ndarray:
    """Mask a whole (m, n) array of total assignments; returns 0/1/2 codes."""
    values = np.asarray(values, dtype=np.int8)
    if np.any((values != 0) & (values != 1)):
        raise ValueError("mask expects total 0/1 assignments")
    probs = hide_probabilities(values, process)
    hidden = rng.random(values.shape) < probs
    out = values.copy()
    out[hidden] = UNOBSERVED
    return out


def mask(assignment: Sequence[int], process: MaskProcess, rng: np.random.Generator) -> PartialExample:
    """Hide coordinates of a single total assignment.  Observed cells are never altered."""
    out = mask_array(np.asarray([assignment]), process, rng)
    return tuple(out[0].tolist())


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------


def _text(source: Union[bytes, str, os.PathLike, io.IOBase]) -> str:
    if isinstance(source, os.PathLike):
        source = Path(source).read_bytes()
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_cells(cells: Sequence[str], lineno: int, n: int) -> PartialExample:
    if len(cells) != n:
        raise DatasetFormatError(f"row {lineno}: ragged row with {len(cells)} cells, expected {n}")
    row = []
    for j, cell in enumerate(cells):
        cell = cell.strip()
        try:
            row.append(int(TriValue.parse(cell)))
        except ValueError:
            raise DatasetFormatError(
                f"row {lineno}, column {j + 1}: illegal cell value {cell!r}"
            ) from None
    return tuple(row)


def load_dataset(source: Union[bytes, str, os.PathLike, io.IOBase], format: str = "csv") -> Dataset:
    """Parse a dataset from bytes, text, a binary/text stream or a ``Path``.

    A plain ``str`` is taken as the file contents, not as a file name.
    """
    text = _text(source)
    if format == "csv":
        return _load_csv(text)
    if format == "jsonl":
        return _load_jsonl(text)
    raise ValueError(f"unknown dataset format {format!r}")


def _load_csv(text: str) -> Dataset:
    lines = [ln for ln in csv.reader(io.StringIO(text)) if ln and any(c.strip() for c in ln)]
    if not lines:
        raise DatasetFormatError("missing header line")
    names = tuple(c.strip() for c in lines[0])
    if len(set(names)) != len(names):
        raise DatasetFormatError("duplicate attribute names in header")
    rows = tuple(_parse_cells(cells, i, len(names)) for i, cells in enumerate(lines[1:], start=1))
    return Dataset(names, rows)


def _load_jsonl(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DatasetFormatError("missing attributes line")
    try:
        header = json.loads(lines[0])
        names = tuple(header["attributes"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DatasetFormatError(f"line 1: bad attributes header ({exc})") from None
    if len(set(names)) != len(names):
        raise DatasetFormatError("duplicate attribute names in header")
    rows = []
    for i, ln in enumerate(lines[1:], start=1):
        try:
            values = json.loads(ln)["values"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetFormatError(f"row {i}: malformed record ({exc})") from None
        rows.append(_parse_cells(list(values), i, len(names)))
    return Dataset(names, tuple(rows))


def save_dataset(d: Dataset, format: str = "csv") -> bytes:
    if format == "csv":
        lines = [",".join(d.attribute_names)]
        lines += [",".join("01*"[v] for v in row) for row in d.rows]
    elif format == "jsonl":
        lines = [json.dumps({"attributes": list(d.attribute_names)}, separators=(",", ":"))]
        lines += [json.dumps({"values": row_to_str(row)}, separators=(",", ":")) for row in d.rows]
    else:
        raise ValueError(f"unknown dataset format {format!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def guess_format(path: str) -> str:
    return "jsonl" if path.endswith((".jsonl", ".json")) else "csv"
