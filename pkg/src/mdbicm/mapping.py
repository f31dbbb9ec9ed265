"""Multi-dimensional mappings assembled from four 2-D mapping functions.

An ``mN``-bit label ``l = (l_1, ..., l_N)`` is split into ``N`` blocks of ``m``
bits. Its first block picks a point of ``chi_el`` through ``lambda_el`` when the
whole label has even Hamming weight (``lambda_ol`` on the complementary half
``chi_ol`` otherwise); every later block goes through ``lambda_er`` (even) or
``lambda_or`` (odd). The half mappings give each of their ``2^(m-1)`` symbols
two labels that differ only in the most significant bit.

Labels are plain integers read most-significant-bit first: bit position 1 of a
label is its MSB, so a label has a 0 in position 1 exactly when its decimal
value is below ``2^(m-1)``. Symbol indices are 0-based here and 1-based in the
mapping-file format.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .constellation import Constellation, make_constellation, scale_for_vector

ENUMERATION_LIMIT = 24


class MappingError(ValueError):
    """A mapping violates one of its structural invariants."""


class MappingFileError(MappingError):
    """A mapping file could not be read; ``invalid`` marks well-formed text that breaks an invariant."""

    def __init__(self, message, lineno=None, invalid=False):
        self.lineno = lineno
        self.invalid = invalid
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class Label:
    """A fixed-width binary label; ``value`` holds the bits MSB first."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 1 or not 0 <= self.value < 2**self.width:
            raise ValueError(f"value {self.value} does not fit in {self.width} bits")

    @classmethod
    def from_bits(cls, bits) -> "Label":
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        value = 0
        for b in bits:
            value = (value << 1) | b
        return cls(value, len(bits))

    @property
    def bits(self) -> tuple:
        return tuple((self.value >> (self.width - 1 - i)) & 1 for i in range(self.width))

    def blocks(self, m: int) -> tuple:
        """Decimal values of the consecutive ``m``-bit blocks."""
        if self.width % m:
            raise ValueError(f"width {self.width} is not a multiple of {m}")
        n = self.width // m
        mask = (1 << m) - 1
        return tuple((self.value >> (m * (n - 1 - i))) & mask for i in range(n))

    def flip(self, position: int) -> "Label":
        """Flip bit ``position`` (1-based, 1 = most significant)."""
        if not 1 <= position <= self.width:
            raise ValueError(f"bit position {position} outside 1..{self.width}")
        return Label(self.value ^ (1 << (self.width - position)), self.width)


def _value(label):
    return label.value if isinstance(label, Label) else int(label)


def hamming_weight(label) -> int:
    return _value(label).bit_count()


def hamming_distance(a, b) -> int:
    if isinstance(a, Label) and isinstance(b, Label) and a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    return (_value(a) ^ _value(b)).bit_count()


def parity(label) -> Parity:
    return Parity(hamming_weight(label) & 1)


def popcount_parity(values: np.ndarray) -> np.ndarray:
    """Vectorized label parity, 0 for even weight and 1 for odd."""
    return (np.bitwise_count(np.asarray(values, dtype=np.uint64)) & 1).astype(np.int8)


def _as_index_array(values, name):
    arr = np.asarray(values)
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise MappingError(f"{name} must be a 1-D integer array")
    out = arr.astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FullMapping2D:
    """A bijective 2-D mapping (``lambda_er`` or ``lambda_or``).

    ``symbol_of[label]`` is the symbol carrying ``label`` and ``label_of[s]`` is
    the label on symbol ``s``; ``label_of`` is the row printed in the tables.
    The constructor stores both arrays as given; :meth:`validate` checks them.
    """

    symbol_of: np.ndarray
    label_of: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "symbol_of", _as_index_array(self.symbol_of, "symbol_of"))
        object.__setattr__(self, "label_of", _as_index_array(self.label_of, "label_of"))

    @classmethod
    def from_table(cls, labels) -> "FullMapping2D":
        """Build from the label of each symbol, in symbol order."""
        label_of = _as_index_array(labels, "table")
        M = len(label_of)
        if sorted(label_of.tolist()) != list(range(M)):
            raise MappingError("table is not a permutation of 0..M-1")
        symbol_of = np.empty(M, dtype=np.int64)
        symbol_of[label_of] = np.arange(M)
        return cls(symbol_of, label_of)

    @classmethod
    def from_symbols(cls, symbol_of) -> "FullMapping2D":
        symbol_of = _as_index_array(symbol_of, "symbol_of")
        M = len(symbol_of)
        if sorted(symbol_of.tolist()) != list(range(M)):
            raise MappingError("symbol_of is not a permutation of 0..M-1")
        label_of = np.empty(M, dtype=np.int64)
        label_of[symbol_of] = np.arange(M)
        return cls(symbol_of, label_of)

    @property
    def m(self) -> int:
        return len(self.symbol_of).bit_length() - 1

    def validate(self):
        M = len(self.symbol_of)
        if M < 2 or M & (M - 1):
            raise MappingError(f"size {M} is not a power of two")
        if len(self.label_of) != M:
            raise MappingError("symbol_of and label_of differ in length")
        if sorted(self.symbol_of.tolist()) != list(range(M)):
            raise MappingError("mapping is not bijective")
        if not np.array_equal(self.label_of[self.symbol_of], np.arange(M)):
            raise MappingError("label_of is not the inverse of symbol_of")

    def __eq__(self, other):
        if not isinstance(other, FullMapping2D):
            return NotImplemented
        return np.array_equal(self.symbol_of, other.symbol_of) and np.array_equal(
            self.label_of, other.label_of
        )


class Half(str, enum.Enum):
    EL = "el"
    OL = "ol"


@dataclass(frozen=True, eq=False)
class HalfMapping2D:
    """``lambda_el`` or ``lambda_ol``: each symbol of a half-set carries two labels.

    ``symbols[r]`` is the symbol carrying labels ``r`` and ``r + 2^(m-1)``, so the
    pair structure holds by construction.
    """

    symbols: np.ndarray
    half: Half

    def __post_init__(self):
        object.__setattr__(self, "symbols", _as_index_array(self.symbols, "symbols"))
        object.__setattr__(self, "half", Half(self.half))

    @classmethod
    def from_pairs(cls, pairs, chi, half) -> "HalfMapping2D":
        """``pairs[j]`` holds the two labels of symbol ``chi[j]``."""
        chi = list(chi)
        if len(pairs) != len(chi):
            raise MappingError(
                f"lambda_{Half(half).value}: {len(pairs)} pairs for {len(chi)} symbols"
            )
        h = len(chi)
        symbols = np.full(h, -1, dtype=np.int64)
        for (a, b), s in zip(pairs, chi):
            lo, hi = min(a, b), max(a, b)
            if hi - lo != h or not 0 <= lo < h:
                raise MappingError(
                    f"lambda_{Half(half).value} pair ({a},{b}) must differ only in the first bit"
                )
            if symbols[lo] != -1:
                raise MappingError(f"lambda_{Half(half).value} pair ({a},{b}) repeats a label")
            symbols[lo] = s
        return cls(symbols, half)

    @property
    def m(self) -> int:
        return len(self.symbols).bit_length()

    @property
    def symbol_of(self) -> np.ndarray:
        """Symbol for every one of the ``2^m`` labels."""
        return np.concatenate([self.symbols, self.symbols])

    def pairs(self, chi) -> list:
        """Label pairs in the order of ``chi``, as printed in the tables."""
        h = len(self.symbols)
        residue = {int(s): r for r, s in enumerate(self.symbols)}
        return [(residue[int(s)], residue[int(s)] + h) for s in chi]

    def __eq__(self, other):
        if not isinstance(other, HalfMapping2D):
            return NotImplemented
        return self.half == other.half and np.array_equal(self.symbols, other.symbols)


@dataclass(frozen=True, eq=False)
class MDMapping:
    """The mapping ``mu`` from ``mN``-bit labels to ``N``-symbol vectors.

    ``constellation`` is scaled so that a vector of ``n`` symbols has unit average
    energy. Use :func:`build_md_mapping` for a validated instance; the raw
    constructor performs no checks.
    """

    m: int
    n: int
    constellation: Constellation
    lambda_er: FullMapping2D
    lambda_or: FullMapping2D
    lambda_el: HalfMapping2D
    lambda_ol: HalfMapping2D
    chi_el: tuple

    def __eq__(self, other):
        if not isinstance(other, MDMapping):
            return NotImplemented
        return (
            (self.m, self.n) == (other.m, other.n)
            and np.array_equal(self.constellation.points, other.constellation.points)
            and np.array_equal(self.symbol_matrix, other.symbol_matrix)
        )

    __hash__ = None

    @property
    def width(self) -> int:
        return self.m * self.n

    @property
    def num_labels(self) -> int:
        return 2**self.width

    @property
    def chi_ol(self) -> tuple:
        chi = set(self.chi_el)
        return tuple(s for s in range(2**self.m) if s not in chi)

    def _check_enumerable(self):
        if self.width > ENUMERATION_LIMIT:
            raise MappingError(
                f"mN = {self.width} exceeds the enumeration guard ({ENUMERATION_LIMIT})"
            )

    def symbols_for(self, labels) -> np.ndarray:
        """Symbol indices, shape ``(len(labels), n)``, for an array of labels."""
        labels = np.asarray(labels, dtype=np.int64)
        m, n = self.m, self.n
        mask = (1 << m) - 1
        odd = popcount_parity(labels).astype(bool)
        out = np.empty(labels.shape + (n,), dtype=np.int64)
        for i in range(n):
            block = (labels >> (m * (n - 1 - i))) & mask
            if i == 0:
                even_map, odd_map = self.lambda_el.symbol_of, self.lambda_ol.symbol_of
            else:
                even_map, odd_map = self.lambda_er.symbol_of, self.lambda_or.symbol_of
            out[..., i] = np.where(odd, odd_map[block], even_map[block])
        return out

    @cached_property
    def symbol_matrix(self) -> np.ndarray:
        """Symbols of every label in label order, shape ``(2^(mN), n)``."""
        self._check_enumerable()
        out = self.symbols_for(np.arange(self.num_labels))
        out.setflags(write=False)
        return out

    @cached_property
    def vectors(self) -> np.ndarray:
        """Complex signal vectors of every label in label order."""
        out = self.constellation.points[self.symbol_matrix]
        out.setflags(write=False)
        return out

    @cached_property
    def _inverse(self) -> dict:
        keys = self.symbol_matrix @ (2 ** (self.m * np.arange(self.n - 1, -1, -1)))
        return {int(k): lab for lab, k in enumerate(keys)}

    def map_label(self, label) -> tuple:
        """Symbol indices (0-based) of the vector carrying ``label``."""
        if isinstance(label, Label):
            if label.width != self.width:
                raise ValueError(f"label width {label.width} != mN = {self.width}")
            label = label.value
        elif not 0 <= label < self.num_labels:
            raise ValueError(f"label {label} outside 0..2^{self.width}-1")
        return tuple(int(s) for s in self.symbols_for(np.array([label]))[0])

    def demap(self, symbols) -> int:
        """Label carried by a vector given as symbol indices."""
        key = 0
        for s in symbols:
            key = (key << self.m) | int(s)
        try:
            return self._inverse[key]
        except KeyError:
            raise MappingError(f"vector {tuple(symbols)} is not in the image") from None


@dataclass(frozen=True, eq=False)
class TableMapping:
    """An arbitrary bijection stored as one row of symbol indices per label.

    Used for baselines (random or directly switched MD mappings) that do not
    follow the four-function structure. Shares the enumeration interface of
    :class:`MDMapping`.
    """

    m: int
    n: int
    constellation: Constellation
    symbol_matrix: np.ndarray

    def __post_init__(self):
        S = np.array(self.symbol_matrix, dtype=np.int64)
        if S.shape != (2 ** (self.m * self.n), self.n):
            raise MappingError(f"symbol matrix shape {S.shape} does not match m={self.m}, n={self.n}")
        keys = S @ (2 ** (self.m * np.arange(self.n - 1, -1, -1)))
        if len(np.unique(keys)) != len(keys):
            raise MappingError("table mapping is not bijective")
        S.setflags(write=False)
        object.__setattr__(self, "symbol_matrix", S)
        if self.constellation.per_symbol_energy != 1.0 / self.n:
            object.__setattr__(self, "constellation", scale_for_vector(self.constellation, self.n))

    width = MDMapping.width
    num_labels = MDMapping.num_labels
    vectors = MDMapping.vectors
    _inverse = MDMapping._inverse
    demap = MDMapping.demap

    def _check_enumerable(self):
        pass

    def symbols_for(self, labels) -> np.ndarray:
        return self.symbol_matrix[np.asarray(labels, dtype=np.int64)]

    def map_label(self, label) -> tuple:
        return tuple(int(s) for s in self.symbol_matrix[_value(label)])


def random_table_mapping(m: int, n: int, constellation: Constellation, rng) -> TableMapping:
    """A uniformly random bijection between ``mN``-bit labels and ``N``-symbol vectors."""
    if m * n > ENUMERATION_LIMIT:
        raise MappingError(f"mN = {m * n} exceeds the enumeration guard ({ENUMERATION_LIMIT})")
    M = 2**m
    vec = rng.permutation(M**n)
    S = np.stack([(vec // M ** (n - 1 - i)) % M for i in range(n)], axis=1)
    return TableMapping(m, n, constellation, S)


def _validate_partition(chi_el, M):
    h = M // 2
    if len(chi_el) != h or len(set(chi_el)) != h:
        raise MappingError(f"chi_el must hold {h} distinct symbols")
    if any(not 0 <= s < M for s in chi_el):
        raise MappingError("chi_el holds a symbol index outside the constellation")


def build_md_mapping(
    m: int,
    n: int,
    constellation: Constellation,
    lambda_el: HalfMapping2D,
    lambda_ol: HalfMapping2D,
    lambda_er: FullMapping2D,
    lambda_or: FullMapping2D,
    chi_el,
) -> MDMapping:
    """Validate the four 2-D mappings and assemble ``mu``.

    Raises :class:`MappingError` on a broken partition, a broken label pair, or
    a non-bijective result (checked by enumeration when ``mN`` is within the
    enumeration guard).
    """
    if n < 1:
        raise MappingError(f"n must be >= 1, got {n}")
    if constellation.m != m:
        raise MappingError(f"constellation has m = {constellation.m}, expected {m}")
    M, h = 2**m, 2 ** (m - 1)
    for name, lam in (("lambda_er", lambda_er), ("lambda_or", lambda_or)):
        if len(lam.symbol_of) != M:
            raise MappingError(f"{name} has {len(lam.symbol_of)} entries, expected {M}")
        try:
            lam.validate()
        except MappingError as exc:
            raise MappingError(f"{name}: {exc}") from None
    chi_el = tuple(sorted(int(s) for s in chi_el))
    _validate_partition(chi_el, M)
    chi_ol = tuple(s for s in range(M) if s not in set(chi_el))
    for name, lam, half_set in (
        ("lambda_el", lambda_el, chi_el),
        ("lambda_ol", lambda_ol, chi_ol),
    ):
        if len(lam.symbols) != h:
            raise MappingError(f"{name} has {len(lam.symbols)} label pairs, expected {h}")
        if sorted(lam.symbols.tolist()) != list(half_set):
            raise MappingError(
                f"{name} must use each symbol of {'chi_el' if name == 'lambda_el' else 'chi_ol'} exactly once"
            )
    mu = MDMapping(
        m,
        n,
        scale_for_vector(constellation, n) if constellation.per_symbol_energy != 1.0 / n else constellation,
        lambda_er,
        lambda_or,
        lambda_el,
        lambda_ol,
        chi_el,
    )
    if mu.width <= 20:
        if len(mu._inverse) != mu.num_labels:
            raise MappingError("assembled mapping is not bijective")
    return mu


def enumerate_pairs(mu: MDMapping):
    """``(label, symbol tuple)`` for every label, in label order."""
    mu._check_enumerable()
    for label, row in enumerate(mu.symbol_matrix):
        yield label, tuple(int(s) for s in row)


def derive_chi_el(lambda_er: FullMapping2D) -> tuple:
    """Symbols whose ``lambda_er`` label has a 0 in the first bit position."""
    h = len(lambda_er.label_of) // 2
    return tuple(int(s) for s in np.flatnonzero(lambda_er.label_of < h))


# ---------------------------------------------------------------------------
# mapping files

_KEY_RE = re.compile(r"^\s*([A-Za-z_]+)\s*([:=])\s*(.*)$")
_LIST_KEYS = ("lambda_er", "lambda_or", "chi_el", "lambda_el", "lambda_ol")
_PAIR_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def _parse_ints(text, key, lineno):
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise MappingFileError(f"{key}: expected integers", lineno) from None


def _parse_pairs(text, key, lineno):
    pairs = [(int(a), int(b)) for a, b in _PAIR_RE.findall(text)]
    leftover = _PAIR_RE.sub(" ", text).replace(",", " ").strip()
    if leftover:
        raise MappingFileError(f"{key}: unexpected text {leftover[:20]!r}", lineno)
    return pairs


def parse_mapping_file(text: str, n: int | None = None) -> MDMapping:
    """Parse the text mapping format; ``n`` overrides the file's ``n=`` header."""
    header = {}
    body = {}
    where = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        match = _KEY_RE.match(line)
        if match:
            key, sep, rest = match.groups()
            key = key.lower()
            if sep == "=":
                if key not in ("m", "n", "constellation"):
                    raise MappingFileError(f"unknown header {key!r}", lineno)
                header[key] = (rest.strip(), lineno)
                current = None
                continue
            if key not in _LIST_KEYS:
                raise MappingFileError(f"unknown section {key!r}", lineno)
            if key in body:
                raise MappingFileError(f"duplicate section {key!r}", lineno)
            body[key] = [rest]
            where[key] = lineno
            current = key
        elif current is not None:
            body[current].append(line)
        else:
            raise MappingFileError(f"unexpected line {raw.strip()[:30]!r}", lineno)

    for key in ("m", "constellation"):
        if key not in header:
            raise MappingFileError(f"missing header {key}=")
    for key in _LIST_KEYS:
        if key not in body:
            raise MappingFileError(f"missing section {key}:")

    def header_int(key):
        value, lineno = header[key]
        try:
            return int(value)
        except ValueError:
            raise MappingFileError(f"{key}= expects an integer", lineno) from None

    m = header_int("m")
    if n is None:
        n = header_int("n") if "n" in header else 2
    cons_text, cons_line = header["constellation"]
    try:
        kind, _, cm = cons_text.partition(":")
        cm = int(cm) if cm else m
        if cm != m:
            raise ValueError(f"constellation m = {cm} disagrees with m = {m}")
        constellation = make_constellation(kind.strip(), m)
    except ValueError as exc:
        raise MappingFileError(f"constellation: {exc}", cons_line) from None

    M, h = 2**m, 2 ** (m - 1)
    joined = {key: " ".join(body[key]) for key in _LIST_KEYS}
    er = _parse_ints(joined["lambda_er"], "lambda_er", where["lambda_er"])
    orr = _parse_ints(joined["lambda_or"], "lambda_or", where["lambda_or"])
    chi = _parse_ints(joined["chi_el"], "chi_el", where["chi_el"])
    el = _parse_pairs(joined["lambda_el"], "lambda_el", where["lambda_el"])
    ol = _parse_pairs(joined["lambda_ol"], "lambda_ol", where["lambda_ol"])

    for key, values, size in (("lambda_er", er, M), ("lambda_or", orr, M), ("chi_el", chi, h)):
        if len(values) != size:
            raise MappingFileError(f"{key}: expected {size} entries, got {len(values)}", where[key])
    if chi != sorted(chi) or any(not 1 <= s <= M for s in chi):
        raise MappingFileError("chi_el: symbol indices must be ascending within 1..M", where["chi_el"])
    chi0 = [s - 1 for s in chi]
    chi_ol = [s for s in range(M) if s not in set(chi0)]
    try:
        lam_er = FullMapping2D.from_table(er)
    except MappingError as exc:
        raise MappingFileError(f"lambda_er: {exc}", where["lambda_er"], invalid=True) from None
    try:
        lam_or = FullMapping2D.from_table(orr)
    except MappingError as exc:
        raise MappingFileError(f"lambda_or: {exc}", where["lambda_or"], invalid=True) from None
    try:
        lam_el = HalfMapping2D.from_pairs(el, chi0, Half.EL)
    except MappingError as exc:
        raise MappingFileError(str(exc), where["lambda_el"], invalid=True) from None
    try:
        lam_ol = HalfMapping2D.from_pairs(ol, chi_ol, Half.OL)
    except MappingError as exc:
        raise MappingFileError(str(exc), where["lambda_ol"], invalid=True) from None
    try:
        return build_md_mapping(m, n, constellation, lam_el, lam_ol, lam_er, lam_or, chi0)
    except MappingError as exc:
        raise MappingFileError(str(exc), invalid=True) from None


def _wrap(items, per_line=16):
    lines = []
    for start in range(0, len(items), per_line):
        lines.append(" ".join(items[start:start + per_line]))
    return ("\n    ").join(lines)


def serialize_mapping_file(mu: MDMapping) -> str:
    """Canonical text form; :func:`parse_mapping_file` inverts it."""
    chi_ol = mu.chi_ol
    parts = [
        f"m={mu.m}",
        f"n={mu.n}",
        f"constellation={mu.constellation.kind.value}:{mu.m}",
        "lambda_er: " + _wrap([str(v) for v in mu.lambda_er.label_of]),
        "lambda_or: " + _wrap([str(v) for v in mu.lambda_or.label_of]),
        "chi_el: " + _wrap([str(s + 1) for s in mu.chi_el]),
        "lambda_el: " + _wrap([f"({a},{b})" for a, b in mu.lambda_el.pairs(mu.chi_el)], 8),
        "lambda_ol: " + _wrap([f"({a},{b})" for a, b in mu.lambda_ol.pairs(chi_ol)], 8),
    ]
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# structural checks


@dataclass
class PropositionReport:
    bijective: bool | None = None
    max_neighbor_distance: int | None = None
    neighbor_bound_ok: bool | None = None
    parity_ok: bool | None = None
    guard_exceeded: bool = False
    failures: list = None

    def __post_init__(self):
        if self.failures is None:
            self.failures = []

    @property
    def ok(self) -> bool:
        return not self.failures and not self.guard_exceeded


def _min_distance_pairs(points: np.ndarray, rtol=1e-9):
    """Index pairs at the minimum Euclidean distance of a real point cloud."""
    from scipy.spatial import cKDTree

    tree = cKDTree(points)
    dist, _ = tree.query(points, k=2)
    dmin = dist[:, 1].min()
    pairs = tree.query_pairs(dmin * (1 + rtol), output_type="ndarray")
    return dmin, pairs


def check_propositions(mu: MDMapping, limit: int = 20) -> PropositionReport:
    """Check bijectivity, the ``m + 1`` nearest-neighbour label bound and parity structure.

    Failures are collected in the report rather than raised. Above ``limit`` bits
    only the component-level checks run and ``guard_exceeded`` is set.
    """
    report = PropositionReport()
    M = 2**mu.m
    for name, lam in (("lambda_er", mu.lambda_er), ("lambda_or", mu.lambda_or)):
        try:
            lam.validate()
        except MappingError as exc:
            report.failures.append(f"{name}: {exc}")
    for name, lam, half_set in (
        ("lambda_el", mu.lambda_el, mu.chi_el),
        ("lambda_ol", mu.lambda_ol, mu.chi_ol),
    ):
        if sorted(lam.symbols.tolist()) != list(half_set):
            report.failures.append(f"{name} pair: symbols do not cover the half-set exactly once")
    if mu.width > limit:
        report.guard_exceeded = True
        report.failures.append(f"guard exceeded: mN = {mu.width} > {limit}; enumeration checks skipped")
        return report

    labels = np.arange(mu.num_labels)
    S = mu.symbols_for(labels)
    keys = S @ (M ** np.arange(mu.n - 1, -1, -1))
    report.bijective = len(np.unique(keys)) == mu.num_labels and not report.failures
    if not report.bijective:
        report.failures.append("mapping is not bijective")

    odd = popcount_parity(labels).astype(bool)
    first = S[:, 0]
    chi_el = np.zeros(M, dtype=bool)
    chi_el[list(mu.chi_el)] = True
    report.parity_ok = bool(np.all(chi_el[first[~odd]]) and not np.any(chi_el[first[odd]]))
    if not report.parity_ok:
        report.failures.append("parity structure: first symbols do not follow chi_el/chi_ol")

    X = mu.constellation.points[S]
    R = np.concatenate([X.real, X.imag], axis=1)
    worst = 0
    for subset in (~odd, odd):
        idx = np.flatnonzero(subset)
        _, pairs = _min_distance_pairs(R[idx])
        a, b = idx[pairs[:, 0]], idx[pairs[:, 1]]
        dh = np.bitwise_count((a ^ b).astype(np.uint64))
        if np.any(dh % 2):
            report.parity_ok = False
            report.failures.append("parity structure: odd Hamming distance inside one parity class")
        worst = max(worst, int(dh.max()))
    report.max_neighbor_distance = worst
    report.neighbor_bound_ok = worst <= mu.m + 1
    if not report.neighbor_bound_ok:
        report.failures.append(
            f"nearest neighbours differ in {worst} bits, more than m + 1 = {mu.m + 1}"
        )
    return report
