"""Two-dimensional signal sets with the symbol orderings used by the mapping tables.

Symbol ``k`` (0-based) of a :class:`Constellation` is the point the tables call
``S_{k+1}``. Every generator returns unit average energy; use
:func:`scale_for_vector` to get the per-symbol energy ``1/n`` needed when ``n``
symbols form one signal vector of unit energy.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


class Kind(str, enum.Enum):
    PSK = "psk"
    SQUARE_QAM = "qam"
    CROSS_QAM = "cross"
    OPTIMUM_8QAM = "opt8qam"


@dataclass(frozen=True)
class Constellation:
    """An ordered 2^m-ary signal set.

    Attributes
    ----------
    points : ndarray of complex
        Read-only; ``points[k]`` is symbol ``S_{k+1}``.
    kind : Kind
    m : int
        Bits per symbol.
    per_symbol_energy : float
        Average of ``|x|**2`` over the points.
    """

    points: np.ndarray
    kind: Kind
    m: int
    per_symbol_energy: float = 1.0
    _check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.complex128)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not self._check:
            return
        if pts.ndim != 1 or len(pts) != 2**self.m:
            raise ValueError(f"expected {2**self.m} points, got {pts.shape}")
        if len(np.unique(np.round(pts, 12))) != len(pts):
            raise ValueError("constellation points must be distinct")
        energy = np.mean(np.abs(pts) ** 2)
        if abs(energy - self.per_symbol_energy) > 1e-12 * self.per_symbol_energy:
            raise ValueError(
                f"mean energy {energy!r} != declared {self.per_symbol_energy!r}"
            )

    @property
    def size(self) -> int:
        return 2**self.m

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, Constellation):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.m == other.m
            and self.per_symbol_energy == other.per_symbol_energy
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self):
        return hash((self.kind, self.m, self.per_symbol_energy, self.points.tobytes()))

    def to_csv(self) -> str:
        """``index,re,im`` rows with 1-based symbol indices."""
        out = io.StringIO()
        out.write("index,re,im\n")
        for k, z in enumerate(self.points, start=1):
            out.write(f"{k},{float(z.real)!r},{float(z.imag)!r}\n")
        return out.getvalue()


def _normalized(raw, energy, kind, m):
    # `energy` is the exact average of |raw|^2, supplied analytically by the caller
    pts = np.asarray(raw, dtype=np.complex128) / np.sqrt(energy)
    return Constellation(pts, kind, m, 1.0)


def make_psk(m: int) -> Constellation:
    """2^m-PSK, S_1 on the positive real axis, indices increasing counter-clockwise."""
    if not 2 <= m <= 10:
        raise ValueError(f"PSK needs 2 <= m <= 10, got {m}")
    M = 2**m
    pts = np.exp(2j * np.pi * np.arange(M) / M)
    # exact quarter-turn points; avoids 1e-17 residue in cos/sin
    pts[:: M // 4] = np.array([1, 1j, -1, -1j])
    return Constellation(pts, Kind.PSK, m, 1.0)


def make_square_qam(m: int) -> Constellation:
    """Square 2^m-QAM on odd-integer coordinates.

    Symbols are numbered column by column from the top-left corner: down each
    column first, then left to right (for 16-QAM, S_1 is top-left, S_4
    bottom-left and S_13 top-right).
    """
    if m % 2 or not 4 <= m <= 10:
        raise ValueError(f"square QAM needs even 4 <= m <= 10, got {m}")
    side = 2 ** (m // 2)
    levels = np.arange(-(side - 1), side, 2)
    col, row = np.divmod(np.arange(side * side), side)
    pts = levels[col] - 1j * levels[row]
    return _normalized(pts, 2 * (side * side - 1) / 3, Kind.SQUARE_QAM, m)


def cross_qam_points(m: int) -> np.ndarray:
    """Unnormalized cross-QAM points in symbol order.

    The symbols are first numbered on the ``2^((m+1)/2) x 2^((m-1)/2)``
    rectangular grid, column by column from the top-left corner. The outer
    columns (``|x| > 3W/4 - 1``) are then folded onto the top and bottom caps,
    keeping the signs of both coordinates::

        |y| <  H/2:  (|x|, |y|) -> (W - |x|, |y| + H)
        |y| >= H/2:  (|x|, |y|) -> (|x| - H, 2H - |y|)

    where ``W`` and ``H`` are the grid width and height in points.
    """
    if m not in (5, 7, 9):
        raise ValueError(f"cross QAM supports m in (5, 7, 9), got {m}")
    W, H = 2 ** ((m + 1) // 2), 2 ** ((m - 1) // 2)
    col, row = np.divmod(np.arange(W * H), H)
    x = (-(W - 1) + 2 * col).astype(float)
    y = ((H - 1) - 2 * row).astype(float)
    ax, ay = np.abs(x), np.abs(y)
    outer = ax > 3 * W // 4 - 1
    inner_half = ay < H / 2
    nx = np.where(inner_half, W - ax, ax - H)
    ny = np.where(inner_half, ay + H, 2 * H - ay)
    x = np.where(outer, np.sign(x) * nx, x)
    y = np.where(outer, np.sign(y) * ny, y)
    return x + 1j * y


def make_cross_qam(m: int, points=None) -> Constellation:
    """Cross 2^m-QAM (m = 5, 7, 9) in the folded-rectangle symbol order.

    ``points`` overrides the built-in ordering with any unnormalized point list
    of the right size; it is rescaled to unit energy.
    """
    if points is None:
        pts = cross_qam_points(m)
        energy = 2 * (31 * 2**m / 32 - 1) / 3
    else:
        if m not in (5, 7, 9):
            raise ValueError(f"cross QAM supports m in (5, 7, 9), got {m}")
        pts = np.asarray(points, dtype=np.complex128)
        energy = float(np.mean(np.abs(pts) ** 2))
    return _normalized(pts, energy, Kind.CROSS_QAM, m)


def load_points_csv(text: str) -> np.ndarray:
    """Parse ``index,re,im`` rows (1-based index, any order) into a point array."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("index"):
            continue
        k, re_, im = line.split(",")
        rows.append((int(k), float(re_), float(im)))
    rows.sort()
    if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
        raise ValueError("point indices must be 1..M without gaps")
    return np.array([complex(r[1], r[2]) for r in rows])


def make_optimum_8qam() -> Constellation:
    """The 8-point two-ring constellation shipped in ``data/opt8qam.csv``."""
    text = resources.files("mdbicm.data").joinpath("opt8qam.csv").read_text()
    pts = load_points_csv(text)
    # inner ring at radius sqrt(2), outer at 1 + sqrt(3): mean energy 3 + sqrt(3)
    return _normalized(pts, 3 + np.sqrt(3), Kind.OPTIMUM_8QAM, 3)


def scale_for_vector(c: Constellation, n: int) -> Constellation:
    """Copy of ``c`` rescaled to per-symbol energy ``1/n`` (unit-energy n-vectors)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    target = 1.0 / n
    if target == c.per_symbol_energy:
        return c
    pts = c.points * np.sqrt(target / c.per_symbol_energy)
    return Constellation(pts, c.kind, c.m, target)


def make_constellation(kind, m: int) -> Constellation:
    kind = Kind(kind)
    if kind is Kind.PSK:
        return make_psk(m)
    if kind is Kind.SQUARE_QAM:
        return make_square_qam(m)
    if kind is Kind.CROSS_QAM:
        return make_cross_qam(m)
    if m != 3:
        raise ValueError("the optimum 8-QAM has m = 3")
    return make_optimum_8qam()


def qam(m: int) -> Constellation:
    """Square QAM for even m, cross QAM for odd m."""
    return make_square_qam(m) if m % 2 == 0 else make_cross_qam(m)
