"""Exact algebra of multi-site Pauli operators.

A PauliString is a tensor product of single-site operators from {I, X, Y, Z},
encoded symplectically by two bitmasks over sites:

    (x_bit, z_bit) = (0,0) -> I,  (1,0) -> X,  (0,1) -> Z,  (1,1) -> Y

Bit ``s`` of each mask refers to lattice site ``s``.  Strings are phase-free
canonical representatives; all phases live in the complex coefficients of a
PauliSum.  In matrix representations site 0 is the most significant qubit,
so ``to_matrix`` of a string equals ``kron(op_site0, op_site1, ...)``.

A PauliSum is a sparse complex combination of PauliStrings.  Coefficients
with magnitude below PRUNE_THRESHOLD are dropped after every algebraic
operation.  All operations are pure; instances are treated as immutable.
"""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping

import numpy as np

# Pruning keeps sums sparse without disturbing 1e-12 level checks.
PRUNE_THRESHOLD = 1e-14

# Largest site count for which dense 2^L x 2^L matrices may be built.
DENSE_SITE_LIMIT = 14

_CODE_TO_CHAR = "IXZY"  # code = x_bit + 2*z_bit
_CHAR_TO_CODE = {"I": 0, "X": 1, "Z": 2, "Y": 3}

# phase[a][b] in {1, i, -1, -i} such that sigma_a . sigma_b = phase * sigma_{a xor b},
# with codes I=0, X=1, Z=2, Y=3.
_PHASE = (
    (1, 1, 1, 1),
    (1, 1, -1j, 1j),
    (1, 1j, 1, -1j),
    (1, -1j, 1j, 1),
)

_SINGLE_SITE_MATRICES = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
    3: np.array([[0, -1j], [1j, 0]], dtype=complex),
}


class DimensionError(ValueError):
    """Operands are defined over different site counts."""


class CapacityError(ValueError):
    """Requested dense representation exceeds the configured site limit."""


class PauliString:
    """Immutable multi-site Pauli word with symplectic bitmask encoding."""

    __slots__ = ("x_mask", "z_mask", "nsites", "_hash")

    def __init__(self, x_mask: int, z_mask: int, nsites: int):
        if nsites < 1:
            raise ValueError(f"nsites must be positive, got {nsites}")
        full = (1 << nsites) - 1
        if x_mask & ~full or z_mask & ~full:
            raise ValueError("mask bits outside the declared site range")
        object.__setattr__(self, "x_mask", x_mask)
        object.__setattr__(self, "z_mask", z_mask)
        object.__setattr__(self, "nsites", nsites)
        object.__setattr__(self, "_hash", hash((x_mask, z_mask, nsites)))

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def identity(cls, nsites: int) -> "PauliString":
        return cls(0, 0, nsites)

    @classmethod
    def from_word(cls, word: str) -> "PauliString":
        """Build from a string over {I,X,Y,Z}; character ``s`` acts on site ``s``."""
        x = z = 0
        for s, ch in enumerate(word):
            try:
                code = _CHAR_TO_CODE[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {word!r}") from None
            x |= (code & 1) << s
            z |= (code >> 1) << s
        return cls(x, z, len(word))

    @classmethod
    def single(cls, site: int, axis: str, nsites: int) -> "PauliString":
        code = _CHAR_TO_CODE[axis.upper()]
        if not 0 <= site < nsites:
            raise ValueError(f"site {site} outside 0..{nsites - 1}")
        return cls((code & 1) << site, (code >> 1) << site, nsites)

    def code(self, site: int) -> int:
        return ((self.x_mask >> site) & 1) + 2 * ((self.z_mask >> site) & 1)

    def word(self) -> str:
        return "".join(_CODE_TO_CHAR[self.code(s)] for s in range(self.nsites))

    def support(self) -> tuple[int, ...]:
        mask = self.x_mask | self.z_mask
        return tuple(s for s in range(self.nsites) if (mask >> s) & 1)

    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def n_y(self) -> int:
        return (self.x_mask & self.z_mask).bit_count()

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.x_mask == other.x_mask
            and self.z_mask == other.z_mask
            and self.nsites == other.nsites
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"PauliString({self.word()!r})"


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Product of two strings: a.b = phase * c with phase in {1, i, -1, -i}."""
    if a.nsites != b.nsites:
        raise DimensionError(f"site counts differ: {a.nsites} vs {b.nsites}")
    phase = 1 + 0j
    overlap = (a.x_mask | a.z_mask) & (b.x_mask | b.z_mask)
    while overlap:
        site = (overlap & -overlap).bit_length() - 1
        phase *= _PHASE[a.code(site)][b.code(site)]
        overlap &= overlap - 1
    return phase, PauliString(a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, a.nsites)


class PauliSum:
    """Sparse complex combination of PauliStrings over a fixed site count."""

    __slots__ = ("nsites", "_terms", "_spectral_cache")

    def __init__(self, nsites: int, terms: Mapping[PauliString, complex] | None = None):
        self.nsites = nsites
        self._terms: dict[PauliString, complex] = {}
        self._spectral_cache = None
        if terms:
            for string, coeff in terms.items():
                if string.nsites != nsites:
                    raise DimensionError(
                        f"term on {string.nsites} sites in a {nsites}-site sum"
                    )
                if abs(coeff) > PRUNE_THRESHOLD:
                    self._terms[string] = complex(coeff)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nsites: int) -> "PauliSum":
        return cls(nsites)

    @classmethod
    def identity(cls, nsites: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(nsites, {PauliString.identity(nsites): coeff})

    @classmethod
    def from_string(cls, string: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(string.nsites, {string: coeff})

    @classmethod
    def single(cls, site: int, axis: str, nsites: int, coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.single(site, axis, nsites), coeff)

    # -- inspection ---------------------------------------------------------

    def terms(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> list[tuple[PauliString, complex]]:
        """Terms in canonical (lexicographic word) order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].word())

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get(string, 0j)

    def n_terms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def support(self) -> tuple[int, ...]:
        mask = 0
        for string in self._terms:
            mask |= string.x_mask | string.z_mask
        return tuple(s for s in range(self.nsites) if (mask >> s) & 1)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        # Strings are self-adjoint, so hermiticity == real coefficients.
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def dagger(self) -> "PauliSum":
        return PauliSum(self.nsites, {s: c.conjugate() for s, c in self._terms.items()})

    def hs_norm(self) -> float:
        """Normalized Hilbert-Schmidt norm sqrt(Tr(A^dag A)/2^L)."""
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    # -- arithmetic ---------------------------------------------------------

    def _check_sites(self, other: "PauliSum") -> None:
        if self.nsites != other.nsites:
            raise DimensionError(f"site counts differ: {self.nsites} vs {other.nsites}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_sites(other)
        out = dict(self._terms)
        for string, coeff in other._terms.items():
            out[string] = out.get(string, 0j) + coeff
        return PauliSum(self.nsites, out)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.nsites, {s: -c for s, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check_sites(other)
            out: dict[PauliString, complex] = {}
            for sa, ca in self._terms.items():
                for sb, cb in other._terms.items():
                    phase, sc = multiply(sa, sb)
                    out[sc] = out.get(sc, 0j) + ca * cb * phase
            return PauliSum(self.nsites, out)
        return PauliSum(self.nsites, {s: c * other for s, c in self._terms.items()})

    def __rmul__(self, scalar) -> "PauliSum":
        return self * scalar

    def __truediv__(self, scalar) -> "PauliSum":
        return self * (1.0 / scalar)

    def __repr__(self) -> str:
        parts = [f"({c:+.6g})*{s.word()}" for s, c in self.sorted_terms()[:6]]
        if self.n_terms() > 6:
            parts.append("...")
        return f"PauliSum[{self.nsites}]({' '.join(parts) or '0'})"


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """ab - ba, exact and pruned."""
    if a.nsites != b.nsites:
        raise DimensionError(f"site counts differ: {a.nsites} vs {b.nsites}")
    out: dict[PauliString, complex] = {}
    for sa, ca in a.terms():
        for sb, cb in b.terms():
            # Strings either commute or anticommute; skip the commuting pairs.
            anti = ((sa.x_mask & sb.z_mask).bit_count() + (sa.z_mask & sb.x_mask).bit_count()) & 1
            if not anti:
                continue
            phase, sc = multiply(sa, sb)
            out[sc] = out.get(sc, 0j) + 2.0 * ca * cb * phase
    return PauliSum(a.nsites, out)


def anticommutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a * b + b * a


def hs_inner(a: PauliSum, b: PauliSum) -> complex:
    """Tr(a^dag b)/2^L from string orthonormality; conjugate-symmetric."""
    if a.nsites != b.nsites:
        raise DimensionError(f"site counts differ: {a.nsites} vs {b.nsites}")
    small, large = (a, b) if a.n_terms() <= b.n_terms() else (b, a)
    acc = 0j
    for string, coeff in small.terms():
        other = large.coefficient(string)
        if other:
            if small is a:
                acc += coeff.conjugate() * other
            else:
                acc += other.conjugate() * coeff
    return acc


def _index_mask(mask: int, nsites: int) -> int:
    """Site-space mask -> basis-index mask (site 0 is the most significant bit)."""
    out = 0
    for s in range(nsites):
        if (mask >> s) & 1:
            out |= 1 << (nsites - 1 - s)
    return out


def _parity(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values) & 1


def matvec(a: PauliSum, v: np.ndarray) -> np.ndarray:
    """Apply a PauliSum to a state vector without materializing the matrix."""
    dim = 1 << a.nsites
    if v.shape[0] != dim:
        raise DimensionError(f"state has dim {v.shape[0]}, operator needs {dim}")
    idx = np.arange(dim, dtype=np.int64)
    complex_out = any(
        s.n_y() % 2 == 1 or abs(c.imag) > 0 for s, c in a.terms()
    ) or np.iscomplexobj(v)
    out = np.zeros(v.shape, dtype=complex if complex_out else float)
    for string, coeff in a.terms():
        xm = _index_mask(string.x_mask, a.nsites)
        zm = _index_mask(string.z_mask, a.nsites)
        amp = coeff * (1j) ** string.n_y()
        if not complex_out:
            amp = amp.real
        signs = 1.0 - 2.0 * _parity(idx & zm)
        if string.x_mask:
            out[idx ^ xm] += (amp * signs) * v if v.ndim == 1 else (amp * signs)[:, None] * v
        else:
            out += (amp * signs) * v if v.ndim == 1 else (amp * signs)[:, None] * v
    return out


def to_sparse(a: PauliSum, dense_limit: int = DENSE_SITE_LIMIT):
    """CSR matrix of a PauliSum; each string contributes one entry per column."""
    import scipy.sparse

    if a.nsites > dense_limit:
        raise CapacityError(
            f"sparse matrix needs L <= {dense_limit}, got L = {a.nsites}"
        )
    dim = 1 << a.nsites
    idx = np.arange(dim, dtype=np.int64)
    complex_out = any(s.n_y() % 2 == 1 or abs(c.imag) > 0 for s, c in a.terms())
    rows, cols, data = [], [], []
    for string, coeff in a.terms():
        xm = _index_mask(string.x_mask, a.nsites)
        zm = _index_mask(string.z_mask, a.nsites)
        amp = coeff * (1j) ** string.n_y()
        if not complex_out:
            amp = amp.real
        rows.append(idx ^ xm)
        cols.append(idx)
        data.append(amp * (1.0 - 2.0 * _parity(idx & zm)))
    if not rows:
        return scipy.sparse.csr_matrix((dim, dim), dtype=float)
    return scipy.sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )


def to_matrix(a: PauliSum, dense_limit: int = DENSE_SITE_LIMIT) -> np.ndarray:
    """Dense 2^L x 2^L matrix; real dtype when every entry is real."""
    if a.nsites > dense_limit:
        raise CapacityError(
            f"dense matrix needs L <= {dense_limit}, got L = {a.nsites}"
        )
    dim = 1 << a.nsites
    idx = np.arange(dim, dtype=np.int64)
    complex_out = any(s.n_y() % 2 == 1 or abs(c.imag) > 0 for s, c in a.terms())
    mat = np.zeros((dim, dim), dtype=complex if complex_out else float)
    for string, coeff in a.terms():
        xm = _index_mask(string.x_mask, a.nsites)
        zm = _index_mask(string.z_mask, a.nsites)
        amp = coeff * (1j) ** string.n_y()
        if not complex_out:
            amp = amp.real
        signs = 1.0 - 2.0 * _parity(idx & zm)
        mat[idx ^ xm, idx] += amp * signs
    return mat


def single_site_matrix(code: int) -> np.ndarray:
    return _SINGLE_SITE_MATRICES[code].copy()


# -- textual serialization --------------------------------------------------
#
# One term per line: "coeff_re coeff_im pauli_word", word over {I,X,Y,Z}.


def to_text(a: PauliSum) -> str:
    lines = [
        f"{c.real:.17g} {c.imag:.17g} {s.word()}" for s, c in a.sorted_terms()
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str, nsites: int | None = None) -> PauliSum:
    terms: dict[PauliString, complex] = {}
    length = nsites
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected 'coeff_re coeff_im word'")
        re_part, im_part, word = fields
        if length is None:
            length = len(word)
        elif len(word) != length:
            raise ValueError(f"line {lineno}: word length {len(word)} != {length}")
        string = PauliString.from_word(word)
        terms[string] = terms.get(string, 0j) + complex(float(re_part), float(im_part))
    if length is None:
        raise ValueError("no terms found and no site count given")
    return PauliSum(length, terms)


def tensor_product(factors: Iterable[PauliSum]) -> PauliSum:
    """Product of sums with pairwise disjoint supports (plain multiplication)."""
    result = None
    for factor in factors:
        result = factor if result is None else result * factor
    if result is None:
        raise ValueError("empty tensor product")
    return result
