"""Dataset ingestion and generation.

Covers the tab-separated ratings file of the MovieLens-100k distribution,
seeded synthetic low-rank matrices quantized onto an alphabet, train/test
splitting of the known entries, and a small CSV format for exchanging dense
matrices (first line ``rows,cols``, then one matrix row per line).
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError
from .masks import IndexSet, as_matrix
from .regularizer import Alphabet

__all__ = [
    "RatingRecord",
    "Dataset",
    "SplitSpec",
    "SynthResult",
    "parse_movielens",
    "serialize_records",
    "build_matrix",
    "dataset_from_matrix",
    "split",
    "synth_discrete_lowrank",
    "write_matrix_csv",
    "read_matrix_csv",
]

log = logging.getLogger(__name__)

RATING_ALPHABET = Alphabet([1.0, 2.0, 3.0, 4.0, 5.0])


class RatingRecord(NamedTuple):
    user_id: int
    item_id: int
    rating: int
    timestamp: int


@dataclass
class Dataset:
    """Observed matrix with the index set of positions that carry ratings.

    Unknown entries are stored as 0, which lies outside the rating alphabet,
    so any accidental use of an unknown entry is detectable.  Only positions
    in ``known`` may be used for fitting or evaluation.
    """

    O: np.ndarray
    known: IndexSet
    user_count: int
    item_count: int
    duplicate_count: int = 0


@dataclass(frozen=True)
class SplitSpec:
    """Fraction of the known entries revealed to the solver, plus the seed."""

    observe_ratio: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.observe_ratio <= 1.0):
            raise ConfigError(f"observe_ratio must be in (0, 1], got {self.observe_ratio}")


class SynthResult(NamedTuple):
    """Quantized matrix plus the pre-rounding one for diagnostics."""

    quantized: np.ndarray
    lowrank: np.ndarray


def _as_lines(stream) -> list[str]:
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    elif isinstance(stream, io.IOBase) or hasattr(stream, "read"):
        raw = stream.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    else:
        raise DataError(f"unsupported input type {type(stream).__name__}")
    return text.split("\n")


def parse_movielens(stream) -> list[RatingRecord]:
    """Parse ``user<TAB>item<TAB>rating<TAB>timestamp`` lines.

    Accepts bytes, text, or a file object.  Blank lines are skipped; any
    other malformed line raises :class:`DataError` with its line number, as
    does a rating outside 1..5.
    """
    records = []
    for lineno, line in enumerate(_as_lines(stream), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(
                f"line {lineno}: expected 4 tab-separated fields, got {len(parts)}: {line!r}"
            )
        try:
            user, item, rating, ts = (int(p) for p in parts)
        except ValueError:
            raise DataError(f"line {lineno}: non-integer field in {line!r}") from None
        if user <= 0 or item <= 0:
            raise DataError(f"line {lineno}: ids must be positive, got {user}, {item}")
        if not (1 <= rating <= 5):
            raise DataError(f"line {lineno}: rating {rating} outside [1, 5]")
        records.append(RatingRecord(user, item, rating, ts))
    return records


def serialize_records(records) -> str:
    """Inverse of :func:`parse_movielens` (used for round-trip checks)."""
    return "".join(f"{r.user_id}\t{r.item_id}\t{r.rating}\t{r.timestamp}\n" for r in records)


def build_matrix(records) -> Dataset:
    """Assemble a users-by-items rating matrix sized by the largest ids.

    Duplicate (user, item) pairs keep the last record; the number of
    overwrites is reported on the dataset and logged.
    """
    if not records:
        raise DataError("no rating records")
    users = max(r.user_id for r in records)
    items = max(r.item_id for r in records)
    O = np.zeros((users, items), dtype=np.float64)
    seen = np.zeros((users, items), dtype=bool)
    duplicates = 0
    for r in records:
        i, j = r.user_id - 1, r.item_id - 1
        if seen[i, j]:
            duplicates += 1
        seen[i, j] = True
        O[i, j] = float(r.rating)
    if duplicates:
        log.warning("build_matrix: %d duplicate (user, item) pairs, last record kept", duplicates)
    return Dataset(O, IndexSet.from_mask(seen), users, items, duplicates)


def dataset_from_matrix(M, known: IndexSet | None = None) -> Dataset:
    """Wrap a fully or partially known dense matrix as a dataset."""
    M = as_matrix(M, "matrix")
    if known is None:
        known = IndexSet.full(M.shape)
    elif known.shape != M.shape:
        raise DataError(f"known-set shape {known.shape} != matrix shape {M.shape}")
    return Dataset(M, known, M.shape[0], M.shape[1])


def split(ds: Dataset, spec: SplitSpec) -> tuple[IndexSet, IndexSet]:
    """Partition the known positions into observed and held-out sets.

    ``round(ratio * |known|)`` positions are drawn uniformly at random with
    the spec's seed and revealed to the solver; the rest form the evaluation
    set.  Identical specs give identical partitions.
    """
    n = len(ds.known)
    n_train = int(round(spec.observe_ratio * n))
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    flat = ds.known._flat
    train = np.sort(flat[perm[:n_train]])
    test = np.sort(flat[perm[n_train:]])
    return (
        IndexSet._from_flat(ds.known.shape, train),
        IndexSet._from_flat(ds.known.shape, test),
    )


def synth_discrete_lowrank(m: int, n: int, r: int, alphabet: Alphabet, seed: int) -> SynthResult:
    """Seeded low-rank matrix with every entry snapped onto the alphabet.

    A rank-``r`` Gaussian product is affinely rescaled onto the alphabet's
    range and each entry rounded to the nearest letter (ties toward the
    smaller one).  Returns the quantized matrix together with the rescaled
    pre-rounding matrix.
    """
    if m <= 0 or n <= 0:
        raise ConfigError(f"matrix dims must be positive, got {m}x{n}")
    if not (1 <= r <= min(m, n)):
        raise ConfigError(f"rank must be in [1, {min(m, n)}], got {r}")
    if len(alphabet) < 2:
        raise ConfigError("synthetic generation needs at least 2 alphabet letters")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    lo, hi = G.min(), G.max()
    scaled = alphabet.lo + (G - lo) * (alphabet.hi - alphabet.lo) / (hi - lo)
    return SynthResult(alphabet.nearest(scaled), scaled)


def write_matrix_csv(path, M):
    """Write a dense matrix as CSV: header line ``rows,cols``, then the rows."""
    M = as_matrix(M, "matrix")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{M.shape[0]},{M.shape[1]}\n")
        for row in M:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        try:
            rows, cols = (int(t) for t in header.split(","))
        except ValueError:
            raise DataError(f"{path}: bad header {header!r}, expected 'rows,cols'") from None
        try:
            M = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
    if M.shape != (rows, cols):
        raise DataError(f"{path}: header says {rows}x{cols} but body is {M.shape}")
    return M
