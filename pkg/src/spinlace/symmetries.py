"""Verification and discovery of strictly local dynamical symmetries.

The central objects are eigenoperators of the adjoint map X -> [H, X].
``verify_eigenoperator`` measures how well a candidate satisfies
[H, A] = omega * A in the normalized Hilbert-Schmidt norm.
``eigenoperator_search`` solves the constrained eigenproblem exactly on a
small support: enumerate the Pauli-string basis there, intersect the exact
null spaces of the commutator maps with the constraint generators, compress
the adjoint map of the local Hamiltonian onto that subspace, eigendecompose,
and keep only eigenpairs whose *uncompressed* residual survives.  The final
residual filter is what removes compression artifacts; degenerate compressed
groups are disentangled by diagonalizing the exact residual Gram form inside
each group.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import TermRegistry
from .paulis import CapacityError, PauliString, PauliSum, commutator, hs_inner

SEARCH_SITE_LIMIT = 6

# Eigenvalues closer than this (relative to the largest |omega|) are treated
# as one degenerate group; separates exact degeneracy from double-precision
# splitting.
DEGENERACY_RTOL = 1e-9
_DEGENERACY_FLOOR = 1e-12


@dataclass
class EigenoperatorResult:
    """One verified eigenpair of the adjoint map.

    ``operator`` has unit Hilbert-Schmidt norm and canonical phase (first
    nonzero coefficient in lexicographic term order is real positive);
    ``residual`` is ||[H, operator] - omega*operator||_HS.
    """

    omega: float
    operator: PauliSum
    residual: float


@dataclass
class CommutantConstraint:
    """Generators the solution must commute with exactly."""

    generators: list[PauliSum]


@dataclass
class OverlapRow:
    """Hilbert-Schmidt overlaps of one observable with a symmetry and its charge."""

    index: int
    symmetry_overlap: complex
    charge_overlap: complex


def _normalized(op: PauliSum) -> PauliSum:
    norm = op.hs_norm()
    if norm == 0:
        raise ValueError("cannot normalize the zero operator")
    out = op / norm
    for _, coeff in out.sorted_terms():
        if abs(coeff) > 1e-12:
            return out * (abs(coeff) / coeff)
    return out


def verify_eigenoperator(h: PauliSum, a: PauliSum) -> EigenoperatorResult:
    """Best-fit eigenfrequency and residual of [H, A] = omega * A.

    omega minimizes ||[H, A] - omega*A||_HS at fixed A; only its real part
    is reported and any imaginary part is folded into the residual.  The
    returned omega is invariant under rescaling or rephasing of A.
    """
    if a.is_zero():
        raise ValueError("candidate operator is zero")
    comm = commutator(h, a)
    norm_sq = hs_inner(a, a).real
    omega = (hs_inner(a, comm) / norm_sq).real
    residual = (comm - a * omega).hs_norm() / np.sqrt(norm_sq)
    return EigenoperatorResult(omega=omega, operator=_normalized(a), residual=residual)


def verify_conserved(h: PauliSum, c: PauliSum) -> float:
    """||[H, C]||_HS; zero iff C is conserved."""
    return commutator(h, c).hs_norm()


def check_delta_structure(
    registry: TermRegistry,
    symmetries: Sequence[PauliSum],
    nodes: Sequence[int],
) -> np.ndarray:
    """Residual matrix of [H_p, A_q] = omega_q * A_q * delta_pq over cells.

    H_p is the disjoint cell of node p from the registry (the cells sum to
    the full Hamiltonian); omega_q is the best-fit eigenfrequency of A_q
    against the full Hamiltonian.  Entry (p, q) must vanish for p != q and
    for p == q up to the eigenoperator residual.
    """
    if len(symmetries) != len(nodes):
        raise ValueError(
            f"{len(symmetries)} symmetry operators for {len(nodes)} node indices"
        )
    h_total = registry.total()
    omegas = [verify_eigenoperator(h_total, a).omega for a in symmetries]
    cells = [registry.cell(p) for p in nodes]
    out = np.zeros((len(nodes), len(nodes)))
    for i, cell in enumerate(cells):
        for j, (a, omega) in enumerate(zip(symmetries, omegas)):
            comm = commutator(cell, a)
            if i == j:
                comm = comm - a * omega
            out[i, j] = comm.hs_norm() / a.hs_norm()
    return out


def overlap_report(
    observable: PauliSum, symmetries: Sequence[PauliSum], indices: Sequence[int] | None = None
) -> list[OverlapRow]:
    """Overlaps <A_p, O> and <A_p^dag A_p, O> deciding long-time behavior.

    Observables orthogonal to every symmetry and every charge relax; overlap
    with a symmetry inherits its oscillation, overlap with a charge pins a
    constant component.
    """
    if indices is None:
        indices = list(range(len(symmetries)))
    rows = []
    for idx, a in zip(indices, symmetries):
        charge = a.dagger() * a
        rows.append(
            OverlapRow(
                index=idx,
                symmetry_overlap=hs_inner(a, observable),
                charge_overlap=hs_inner(charge, observable),
            )
        )
    return rows


# -- constrained eigenoperator search ---------------------------------------


def _interior_basis(
    interior: Sequence[int], nsites: int, basis_order: Sequence[int] | None
) -> list[PauliString]:
    sites = sorted(interior)
    strings = []
    for codes in itertools.product(range(4), repeat=len(sites)):
        x = z = 0
        for site, code in zip(sites, codes):
            x |= (code & 1) << site
            z |= (code >> 1) << site
        strings.append(PauliString(x, z, nsites))
    if basis_order is not None:
        if sorted(basis_order) != list(range(len(strings))):
            raise ValueError("basis_order must be a permutation of the basis indices")
        strings = [strings[i] for i in basis_order]
    return strings


def _commutator_columns(
    op: PauliSum, basis: list[PauliString], index: dict[PauliString, int]
):
    """Commutator of op with each basis string, split into in-basis
    coefficients and any strings that leave the basis support."""
    dim = len(basis)
    inside = np.zeros((dim, dim), dtype=complex)
    outside: list[dict[PauliString, complex]] = [dict() for _ in range(dim)]
    for col, string in enumerate(basis):
        comm = commutator(PauliSum.from_string(string), op)
        for term, coeff in comm.terms():
            row = index.get(term)
            if row is None:
                outside[col][term] = coeff
            else:
                inside[row, col] = coeff
    return inside, outside


def _constraint_gram(
    generators: Sequence[PauliSum],
    basis: list[PauliString],
    index: dict[PauliString, int],
) -> np.ndarray:
    """Gram matrix of the stacked maps A -> [A, g]; exact, including any
    commutator components that leave the basis support."""
    dim = len(basis)
    gram = np.zeros((dim, dim), dtype=complex)
    for g in generators:
        inside, outside = _commutator_columns(g, basis, index)
        gram += inside.conj().T @ inside
        carrying = [col for col in range(dim) if outside[col]]
        for i in carrying:
            for j in carrying:
                acc = 0j
                small, large = (i, j) if len(outside[i]) <= len(outside[j]) else (j, i)
                for term, coeff in outside[small].items():
                    other = outside[large].get(term)
                    if other is not None:
                        acc += coeff.conjugate() * other if small == i else other.conjugate() * coeff
                gram[i, j] += acc
    return gram


def _group_indices(values: np.ndarray) -> list[np.ndarray]:
    """Cluster eigenvalues into degenerate groups by gap tolerance."""
    if len(values) == 0:
        return []
    tol = DEGENERACY_RTOL * max(np.max(np.abs(values)), 1.0) + _DEGENERACY_FLOOR
    order = np.lexsort((values.imag, values.real))
    groups: list[list[int]] = [[order[0]]]
    for idx in order[1:]:
        if abs(values[idx] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.asarray(g) for g in groups]


def _vector_to_sum(vec: np.ndarray, basis: list[PauliString], nsites: int) -> PauliSum:
    terms = {s: c for s, c in zip(basis, vec) if abs(c) > 0}
    return PauliSum(nsites, terms)


def eigenoperator_search(
    h_local: PauliSum,
    interior: Sequence[int],
    constraints: CommutantConstraint | None = None,
    tol: float = 1e-9,
    site_limit: int = SEARCH_SITE_LIMIT,
    basis_order: Sequence[int] | None = None,
) -> list[EigenoperatorResult]:
    """All eigenoperators of X -> [h_local, X] supported on ``interior`` that
    commute exactly with every constraint generator.

    Returns verified pairs sorted by omega, the omega = 0 block (commutant
    and conserved structures) included.  Results are independent of the
    basis enumeration order up to rotations inside degenerate groups.
    """
    interior = sorted(set(interior))
    if len(interior) > site_limit:
        raise CapacityError(
            f"search supports at most {site_limit} sites, got {len(interior)}"
        )
    nsites = h_local.nsites
    basis = _interior_basis(interior, nsites, basis_order)
    index = {s: i for i, s in enumerate(basis)}
    dim = len(basis)

    # Exact null space of the stacked constraint maps.
    if constraints is not None and constraints.generators:
        for g in constraints.generators:
            if not set(g.support()) & set(interior):
                raise ValueError(
                    f"constraint generator supported on {g.support()} does not "
                    f"touch the search support {tuple(interior)}"
                )
        gram = _constraint_gram(constraints.generators, basis, index)
        evals, evecs = np.linalg.eigh(gram)
        scale = max(evals[-1], 1.0)
        null_mask = evals <= 1e-12 * scale
        null_basis = evecs[:, null_mask]
        if null_basis.shape[1] == 0:
            warnings.warn("constraint null space is empty; nothing commutes with all generators")
            return []
    else:
        null_basis = np.eye(dim)

    # Compress the adjoint map onto the constraint null space.  Components of
    # [h, X] outside the basis support vanish against in-basis strings, so
    # dropping them here is an orthogonal projection; the exact residual
    # check below catches whatever the compression hides.
    adjoint_inside, _ = _commutator_columns(h_local, basis, index)
    adjoint_inside = -adjoint_inside  # columns were [X, h]; we need [h, X]
    compressed = null_basis.conj().T @ adjoint_inside @ null_basis
    evals, evecs = np.linalg.eig(compressed)

    results: list[EigenoperatorResult] = []
    for group in _group_indices(evals):
        vectors = evecs[:, group]
        # eig need not return an orthonormal set inside a degenerate group.
        vectors, _ = np.linalg.qr(vectors)
        candidates = [
            _vector_to_sum(null_basis @ vectors[:, k], basis, nsites)
            for k in range(vectors.shape[1])
        ]
        omega_group = float(np.mean(evals[group].real))
        images = [commutator(h_local, c) - c * omega_group for c in candidates]
        gram = np.array(
            [[hs_inner(ri, rj) for rj in images] for ri in images], dtype=complex
        )
        gvals, gvecs = np.linalg.eigh(gram)
        # Round-off in the Gram form scales with its largest eigenvalue, so
        # the cut is relative; the exact residual filter below is what
        # ultimately decides which directions survive.
        cut = max(tol**2, 1e-12 * max(float(gvals[-1].real), 1.0))
        for k in range(len(gvals)):
            if gvals[k].real > cut:
                continue
            combo = sum(
                (candidates[m] * gvecs[m, k] for m in range(len(candidates))),
                PauliSum.zero(nsites),
            )
            if combo.hs_norm() < 1e-10:
                continue
            results.append(verify_eigenoperator(h_local, combo))
    results = [r for r in results if r.residual <= tol]
    results.sort(key=lambda r: (r.omega, r.residual))
    return results


def omega_zero_projector_distance(
    results: Sequence[EigenoperatorResult], candidate: PauliSum, atol: float = 1e-9
) -> float:
    """Distance of a candidate from the span of the omega = 0 results."""
    block = [r.operator for r in results if abs(r.omega) <= atol]
    if not block:
        return float(candidate.hs_norm())
    gram = np.array([[hs_inner(a, b) for b in block] for a in block], dtype=complex)
    rhs = np.array([hs_inner(a, candidate) for a in block], dtype=complex)
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    recon = sum((b * c for b, c in zip(block, coeffs)), PauliSum.zero(candidate.nsites))
    return (candidate - recon).hs_norm()
