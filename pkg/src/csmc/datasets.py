"""Synthetic low-rank instances, MovieLens ratings ingestion, and 8-bit
grayscale image adapters."""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import MaskedMatrix, ObservationSet, as_matrix
from .errors import DataError, DomainError, ParseError
from .sampling import Rng

__all__ = [
    "SyntheticSpec",
    "gen_synthetic",
    "RatingsMatrix",
    "load_movielens",
    "load_image_gray",
    "save_image_gray",
]

MOVIELENS_HEADER = ("userId", "movieId", "rating", "timestamp")


@dataclass(frozen=True)
class SyntheticSpec:
    """Rank-r product of Gaussian factors with optional sparse factor noise."""

    n1: int
    n2: int
    r: int
    noise_density: float = 0.3
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError(f"matrix dimensions must be positive, got {self.n1}x{self.n2}")
        if not 1 <= self.r <= min(self.n1, self.n2):
            raise DomainError(f"rank must lie in [1, {min(self.n1, self.n2)}], got {self.r}")
        if not 0.0 <= self.noise_density <= 1.0:
            raise DomainError(f"noise_density must lie in [0, 1], got {self.noise_density}")


def _sparse_noise(gen: np.random.Generator, shape, density, scale) -> np.ndarray:
    noise = np.zeros(shape)
    count = round(density * noise.size)
    if count:
        flat = gen.permutation(noise.size)[:count]
        noise.flat[flat] = gen.standard_normal(count) * scale
    return noise


def gen_synthetic(spec: SyntheticSpec) -> np.ndarray:
    """(A + N_A)(B + N_B) with A, B standard normal and sparse normal noise
    added to a noise_density fraction of each factor's entries. The output
    rank is at most r by construction."""
    gen = Rng(spec.seed).generator()
    a = gen.standard_normal((spec.n1, spec.r))
    b = gen.standard_normal((spec.r, spec.n2))
    a = a + _sparse_noise(gen, a.shape, spec.noise_density, spec.noise_scale)
    b = b + _sparse_noise(gen, b.shape, spec.noise_density, spec.noise_scale)
    return a @ b


@dataclass
class RatingsMatrix:
    """Masked rating matrix with the original user/item identifiers and scale."""

    matrix: MaskedMatrix
    user_ids: list[int]
    item_ids: list[int]
    scale: tuple[float, float]
    provenance: dict


def _top_by_count(counts: Counter, fraction: float) -> set:
    # most frequent first; ties keep the smaller identifier
    ranked = sorted(counts, key=lambda k: (-counts[k], k))
    keep = max(1, round(fraction * len(ranked)))
    return set(ranked[:keep])


def load_movielens(
    ratings_path,
    user_frac: float = 0.6,
    item_frac: float = 0.5,
    scale: tuple[float, float] = (0.5, 5.0),
    sidecar_dir=None,
) -> RatingsMatrix:
    """Load a MovieLens-style ratings CSV and keep the densest block.

    Users are ranked by rating count (descending, ties to the smaller id) and
    the top user_frac fraction kept; the surviving rows are then filtered the
    same way by movie with item_frac. Rows and columns of the result are the
    kept ids in ascending order.
    """
    ratings_path = Path(ratings_path)
    if not ratings_path.exists():
        raise DataError(f"no such file: {ratings_path}")
    if not 0.0 < user_frac <= 1.0 or not 0.0 < item_frac <= 1.0:
        raise DomainError("user_frac and item_frac must lie in (0, 1]")
    m_min, m_max = scale
    if not m_max > m_min:
        raise DomainError(f"invalid rating scale [{m_min}, {m_max}]")

    triples: list[tuple[int, int, float]] = []
    with open(ratings_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{ratings_path}: empty ratings file") from None
        if tuple(h.strip() for h in header) != MOVIELENS_HEADER:
            raise DataError(
                f"{ratings_path}: expected header {','.join(MOVIELENS_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
            try:
                user, movie, rating = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise ParseError(f"malformed rating row {row!r}", lineno) from None
            if not m_min <= rating <= m_max:
                raise ParseError(
                    f"rating {rating} outside scale [{m_min}, {m_max}]", lineno
                )
            triples.append((user, movie, rating))
    if not triples:
        raise DomainError(f"{ratings_path}: no ratings found")

    user_counts = Counter(t[0] for t in triples)
    kept_users = _top_by_count(user_counts, user_frac)
    survivors = [t for t in triples if t[0] in kept_users]
    item_counts = Counter(t[1] for t in survivors)
    kept_items = _top_by_count(item_counts, item_frac)
    survivors = [t for t in survivors if t[1] in kept_items]
    if not survivors:
        raise DomainError(f"{ratings_path}: filtering removed every rating")

    user_ids = sorted({t[0] for t in survivors})
    item_ids = sorted({t[1] for t in survivors})
    user_pos = {u: i for i, u in enumerate(user_ids)}
    item_pos = {m: j for j, m in enumerate(item_ids)}
    values = np.zeros((len(user_ids), len(item_ids)))
    rows = np.empty(len(survivors), dtype=np.int64)
    cols = np.empty(len(survivors), dtype=np.int64)
    for k, (u, m, r) in enumerate(survivors):
        rows[k], cols[k] = user_pos[u], item_pos[m]
        values[rows[k], cols[k]] = r
    mask = ObservationSet(values.shape, rows, cols)
    matrix = MaskedMatrix(values, mask)

    provenance = {
        "path": str(ratings_path),
        "ratings_total": len(triples),
        "users_total": len(user_counts),
        "items_total": len(set(t[1] for t in triples)),
        "user_frac": user_frac,
        "item_frac": item_frac,
        "users_kept": len(user_ids),
        "items_kept": len(item_ids),
        "ratings_kept": len(survivors),
        "density": matrix.density,
        "scale": [m_min, m_max],
    }
    if sidecar_dir is not None:
        _write_sidecar(sidecar_dir, ratings_path, provenance)
    return RatingsMatrix(
        matrix=matrix,
        user_ids=user_ids,
        item_ids=item_ids,
        scale=(float(m_min), float(m_max)),
        provenance=provenance,
    )


def _write_sidecar(sidecar_dir, source: Path, provenance: dict) -> None:
    sidecar_dir = Path(sidecar_dir)
    sidecar_dir.mkdir(parents=True, exist_ok=True)
    with open(sidecar_dir / (source.stem + ".provenance.json"), "w") as fh:
        json.dump(provenance, fh, indent=2)
        fh.write("\n")


def load_image_gray(path, sidecar_dir=None) -> np.ndarray:
    """8-bit grayscale PNG or PGM as a matrix of pixel values / 255 in [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    try:
        img = Image.open(path)
        img.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise DataError(f"{path}: cannot read image ({exc})") from None
    if img.mode != "L":
        raise DataError(
            f"{path}: expected an 8-bit grayscale image, got mode {img.mode!r}"
        )
    pixels = np.asarray(img, dtype=np.float64) / 255.0
    if sidecar_dir is not None:
        _write_sidecar(
            sidecar_dir,
            path,
            {"path": str(path), "rows": pixels.shape[0], "cols": pixels.shape[1], "bits": 8},
        )
    return pixels


def save_image_gray(x, path) -> None:
    """Clamp to [0, 1], round half-up to 8 bits, and save as PNG or plain PGM."""
    x = as_matrix(x, "image")
    pixels = np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        with open(path, "w") as fh:
            fh.write(f"P2\n{pixels.shape[1]} {pixels.shape[0]}\n255\n")
            for row in pixels:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
    elif path.suffix.lower() == ".png":
        Image.fromarray(pixels, mode="L").save(path)
    else:
        raise DataError(f"unsupported image format {path.suffix!r} (use .png or .pgm)")
