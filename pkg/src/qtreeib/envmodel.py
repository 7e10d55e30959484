"""Grid environments: a prior over finest-resolution cells and a binary relevance variable.

Cells are indexed row-major with row 0 at the top. For a depth ``ell`` the grid
is ``2**ell`` cells on a side and ``relevance[i]`` is ``p(Y=1 | x=i)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

PRIOR_TOL = 1e-12


class EnvironmentFormatError(ValueError):
    """Raised when an environment file cannot be parsed or violates the model."""


@dataclass(frozen=True, eq=False)
class Environment:
    ell: int
    prior: np.ndarray
    relevance: np.ndarray
    side: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.ell, (int, np.integer)) or self.ell < 0:
            raise EnvironmentFormatError(f"ell must be a non-negative integer, got {self.ell!r}")
        prior = np.array(self.prior, dtype=float).ravel()
        relevance = np.array(self.relevance, dtype=float).ravel()
        n = 4 ** int(self.ell)
        if prior.size != n or relevance.size != n:
            raise EnvironmentFormatError(
                f"expected {n} cells for ell={self.ell}, got prior={prior.size}, relevance={relevance.size}"
            )
        if not np.all(np.isfinite(prior)) or np.any(prior < 0):
            raise EnvironmentFormatError("prior entries must be finite and non-negative")
        if abs(prior.sum() - 1.0) > PRIOR_TOL:
            raise EnvironmentFormatError(f"prior sums to {prior.sum()!r}, not 1")
        if not np.all(np.isfinite(relevance)) or np.any(relevance < 0) or np.any(relevance > 1):
            raise EnvironmentFormatError("relevance entries must lie in [0, 1]")
        prior.setflags(write=False)
        relevance.setflags(write=False)
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "relevance", relevance)
        object.__setattr__(self, "side", 2 ** int(self.ell))

    @classmethod
    def uniform(cls, relevance) -> "Environment":
        rel = np.asarray(relevance, dtype=float)
        ell = _ell_from_side(rel.shape[0] if rel.ndim == 2 else math.isqrt(rel.size))
        n = 4**ell
        return cls(ell, np.full(n, 1.0 / n), rel.ravel())

    def prior_grid(self) -> np.ndarray:
        return self.prior.reshape(self.side, self.side)

    def relevance_grid(self) -> np.ndarray:
        return self.relevance.reshape(self.side, self.side)


def _ell_from_side(side: int) -> int:
    if side < 1 or side & (side - 1):
        raise EnvironmentFormatError(f"side length {side} is not a power of two")
    return side.bit_length() - 1


# ---------------------------------------------------------------------------
# file formats


def _read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    tokens = []

    def next_token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise EnvironmentFormatError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise EnvironmentFormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(next_token()) for _ in range(3))
    except ValueError as exc:
        raise EnvironmentFormatError(f"{path}: bad PGM header") from exc
    if width != height:
        raise EnvironmentFormatError(f"{path}: environment must be square, got {width}x{height}")
    if not 0 < maxval <= 65535:
        raise EnvironmentFormatError(f"{path}: maxval {maxval} outside 1..65535")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos : pos + count * dtype.itemsize]
        if len(raw) != count * dtype.itemsize:
            raise EnvironmentFormatError(f"{path}: truncated PGM raster")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        try:
            pixels = np.array([int(next_token()) for _ in range(count)], dtype=np.int64)
        except ValueError as exc:
            raise EnvironmentFormatError(f"{path}: bad PGM pixel value") from exc
    if np.any(pixels > maxval) or np.any(pixels < 0):
        raise EnvironmentFormatError(f"{path}: pixel value exceeds maxval {maxval}")
    return (pixels / maxval).reshape(height, width)


def _read_csv_grid(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise EnvironmentFormatError(f"{path}:{lineno}: non-numeric value") from exc
    side = len(rows)
    if side == 0 or any(len(r) != side for r in rows):
        raise EnvironmentFormatError(f"{path}: grid must be square")
    return np.array(rows, dtype=float)


def load_environment(path, format: str | None = None, prior_path=None) -> Environment:
    """Load an environment from a PGM image or a CSV grid of relevance values.

    ``format`` is ``"pgm"`` or ``"csv"``; when omitted it is inferred from the
    file extension. The prior is uniform unless ``prior_path`` names a CSV grid
    of the same shape.
    """
    if format is None:
        ext = os.path.splitext(str(path))[1].lower()
        format = "pgm" if ext in (".pgm", ".pnm") else "csv"
    if format == "pgm":
        rel = _read_pgm(path)
    elif format == "csv":
        rel = _read_csv_grid(path)
    else:
        raise ValueError(f"unknown environment format {format!r}")
    ell = _ell_from_side(rel.shape[0])
    if prior_path is None:
        prior = np.full(4**ell, 1.0 / 4**ell)
    else:
        prior = _read_csv_grid(prior_path)
        if prior.shape != rel.shape:
            raise EnvironmentFormatError(f"prior shape {prior.shape} differs from relevance shape {rel.shape}")
    return Environment(ell, prior.ravel(), rel.ravel())


def format_value(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def dumps_csv_grid(values: np.ndarray, side: int) -> str:
    grid = np.asarray(values, dtype=float).reshape(side, side)
    return "".join(",".join(format_value(v) for v in row) + "\n" for row in grid)


def save_environment_csv(env: Environment, path, prior_path=None) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_csv_grid(env.relevance, env.side))
    if prior_path is not None:
        with open(prior_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(dumps_csv_grid(env.prior, env.side))


def save_environment_pgm(env: Environment, path, maxval: int = 255) -> None:
    """Write relevance as a binary (P5) PGM, quantized to ``maxval`` levels."""
    pixels = np.rint(env.relevance_grid() * maxval).astype(">u2" if maxval > 255 else "u1")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{env.side} {env.side}\n{maxval}\n".encode("ascii"))
        fh.write(pixels.tobytes())


def random_environment(ell: int, rng: np.random.Generator, nonuniform_prior: bool = False) -> Environment:
    n = 4**ell
    relevance = rng.random(n)
    if nonuniform_prior:
        prior = rng.dirichlet(np.ones(n))
        prior /= prior.sum()
        # force an exact unit sum for the strict validator
        prior[-1] = 1.0 - prior[:-1].sum()
        if prior[-1] < 0:
            prior = np.full(n, 1.0 / n)
    else:
        prior = np.full(n, 1.0 / n)
    return Environment(ell, prior, relevance)


# ---------------------------------------------------------------------------
# information content of the environment itself


def _h2(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    m = (p > 0) & (p < 1)
    q = p[m]
    out[m] = -(q * np.log2(q) + (1 - q) * np.log2(1 - q))
    return out


def entropy_x(env: Environment) -> float:
    p = env.prior[env.prior > 0]
    return float(-np.sum(p * np.log2(p)))


def entropy_y(env: Environment) -> float:
    p1 = float(np.dot(env.prior, env.relevance))
    return float(_h2(np.array([p1]))[0])


def mutual_information_xy(env: Environment) -> float:
    """I(X;Y) = H(Y) - H(Y|X) in bits."""
    h_y_given_x = float(np.dot(env.prior, _h2(env.relevance)))
    return max(entropy_y(env) - h_y_given_x, 0.0)
