"""Construction of XYZ spin-lace Hamiltonians and their named constituents.

Lattice layout (open boundaries, R >= 2 rungs):

    node 1 -- double 1 -- node 2 -- double 2 -- ... -- double R -- node R+1

Nodes are single sites; a "double" is a rung of two legs (top, bottom).
Linear site order goes left to right, node first, then the two legs of the
following rung: node r -> 3(r-1); double r legs -> 3(r-1)+1, 3(r-1)+2.
Total L = 3R + 1 sites.

Hamiltonian terms, registered per label (kind, index):

    node_field r    field * sigma^z on node r                      r = 1..R+1
    double_field r  field * (sigma^z_top + sigma^z_bot) on rung r  r = 1..R
    bond_right r    sum_a J^a_r sigma^a_{node r} S^a_{rung r}      r = 1..R
    bond_left r     sum_a J^a_{r-1} sigma^a_{node r} S^a_{rung r-1}  r = 2..R+1

where S^a is the total spin of a rung.  Coupling triple r belongs to rung r
and is shared by the two bonds attached to that rung.  The sum of all
registered terms is the full Hamiltonian; defects replace whole terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .paulis import PauliSum, PauliString, tensor_product

TermLabel = tuple[str, int]

_KINDS = ("node_field", "double_field", "bond_right", "bond_left", "site_field")
_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class Defect:
    """Whole-term replacement: ``target`` is a term label or a single site."""

    target: TermLabel | int
    replacement: PauliSum


@dataclass(frozen=True)
class SpinLaceSpec:
    """Declarative description of a spin-lace model."""

    plaquettes: int
    node_fields: tuple[float, ...]
    double_fields: tuple[float, ...]
    couplings: tuple[tuple[float, float, float], ...]
    defects: tuple[Defect, ...] = field(default=())

    def __post_init__(self):
        r = self.plaquettes
        if r < 2:
            raise ValueError(f"need at least 2 rungs, got {r}")
        if len(self.node_fields) != r + 1:
            raise ValueError(f"expected {r + 1} node fields, got {len(self.node_fields)}")
        if len(self.double_fields) != r:
            raise ValueError(f"expected {r} double-site fields, got {len(self.double_fields)}")
        if len(self.couplings) != r:
            raise ValueError(f"expected {r} coupling triples, got {len(self.couplings)}")
        for triple in self.couplings:
            if len(triple) != 3:
                raise ValueError(f"coupling triple must have 3 entries, got {triple}")

    @property
    def nsites(self) -> int:
        return 3 * self.plaquettes + 1

    @property
    def is_ordered(self) -> bool:
        return (
            len(set(self.node_fields)) == 1
            and len(set(self.double_fields)) == 1
            and self.node_fields[0] == self.double_fields[0]
            and len(set(self.couplings)) == 1
        )

    @classmethod
    def ordered(
        cls,
        plaquettes: int,
        node_field: float = np.pi,
        couplings: tuple[float, float, float] = (1.0, 2.0, 0.5),
    ) -> "SpinLaceSpec":
        """Uniform model: every node and rung field equal, one coupling triple."""
        r = plaquettes
        return cls(
            plaquettes=r,
            node_fields=(node_field,) * (r + 1),
            double_fields=(node_field,) * r,
            couplings=(tuple(couplings),) * r,
        )

    @classmethod
    def disordered(
        cls,
        plaquettes: int,
        node_field: float = np.pi,
        seed: int = 0,
        coupling_scale: float = 1.0,
        field_scale: float = 1.0,
    ) -> "SpinLaceSpec":
        """Random rung fields and couplings; node fields stay uniform so all
        local symmetries share one frequency."""
        rng = np.random.default_rng(seed)
        r = plaquettes
        return cls(
            plaquettes=r,
            node_fields=(node_field,) * (r + 1),
            double_fields=tuple(field_scale * rng.uniform(0.2, 2.0, size=r)),
            couplings=tuple(
                tuple(coupling_scale * rng.uniform(0.2, 2.0, size=3)) for _ in range(r)
            ),
        )


class SiteMap:
    """Bijection between lattice roles (node r, rung r leg) and site indices."""

    def __init__(self, plaquettes: int):
        self.plaquettes = plaquettes
        self.nsites = 3 * plaquettes + 1

    def node(self, r: int) -> int:
        if not 1 <= r <= self.plaquettes + 1:
            raise ValueError(f"node index {r} outside 1..{self.plaquettes + 1}")
        return 3 * (r - 1)

    def double(self, r: int, leg: int) -> int:
        if not 1 <= r <= self.plaquettes:
            raise ValueError(f"rung index {r} outside 1..{self.plaquettes}")
        if leg not in (1, 2):
            raise ValueError(f"leg must be 1 (top) or 2 (bottom), got {leg}")
        return 3 * (r - 1) + leg

    def interior_nodes(self) -> tuple[int, ...]:
        """Nodes with a rung on both sides; one local symmetry lives at each."""
        return tuple(range(2, self.plaquettes + 1))

    def role_of(self, site: int) -> tuple[str, int]:
        if not 0 <= site < self.nsites:
            raise ValueError(f"site {site} outside 0..{self.nsites - 1}")
        r, offset = divmod(site, 3)
        return ("node", r + 1) if offset == 0 else ("double", r + 1)


class TermRegistry:
    """Labelled local terms whose sum is the full Hamiltonian."""

    def __init__(self, nsites: int, terms: Mapping[TermLabel, PauliSum]):
        self.nsites = nsites
        self._terms = dict(terms)

    def labels(self) -> tuple[TermLabel, ...]:
        return tuple(self._terms)

    def term(self, label: TermLabel) -> PauliSum:
        try:
            return self._terms[label]
        except KeyError:
            raise KeyError(f"unknown term label {label!r}") from None

    def __contains__(self, label: TermLabel) -> bool:
        return label in self._terms

    def items(self):
        return self._terms.items()

    def total(self) -> PauliSum:
        acc = PauliSum.zero(self.nsites)
        for term in self._terms.values():
            acc = acc + term
        return acc

    def cell(self, r: int) -> PauliSum:
        """All terms belonging to cell r: node r's field and bonds plus rung r.

        The cells partition the registry, so summing them over r = 1..R+1
        reproduces the Hamiltonian exactly; site-targeted defect terms are
        assigned to the cell of the rung or node they sit on.
        """
        acc = PauliSum.zero(self.nsites)
        for label, term in self._terms.items():
            if self._cell_of(label) == r:
                acc = acc + term
        return acc

    def _cell_of(self, label: TermLabel) -> int:
        kind, index = label
        if kind == "site_field":
            quotient, offset = divmod(index, 3)
            return quotient + 1
        return index

    def replaced(self, label: TermLabel, replacement: PauliSum) -> "TermRegistry":
        out = dict(self._terms)
        out[label] = replacement
        return TermRegistry(self.nsites, out)


def _total_spin_sum(site_map: SiteMap, r: int, axis: str, coeff: float = 1.0) -> PauliSum:
    top = PauliSum.single(site_map.double(r, 1), axis, site_map.nsites, coeff)
    bot = PauliSum.single(site_map.double(r, 2), axis, site_map.nsites, coeff)
    return top + bot


def total_spin(r: int, axis: str, site_map: SiteMap) -> PauliSum:
    """Total spin component of rung r: sigma^a_top + sigma^a_bot."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    return _total_spin_sum(site_map, r, axis)


def singlet_projector(r: int, site_map: SiteMap) -> PauliSum:
    """Rank-1 projector onto the two-spin singlet of rung r.

    Outer product of (|ud> - |du>)/sqrt(2), i.e. (I - XX - YY - ZZ)/4 on the
    legs; annihilated by every total spin component of the rung, which is
    what decouples it from the bonds.
    """
    L = site_map.nsites
    top, bot = site_map.double(r, 1), site_map.double(r, 2)
    acc = PauliSum.identity(L, 0.25)
    for axis in _AXES:
        pair = PauliSum.single(top, axis, L) * PauliSum.single(bot, axis, L)
        acc = acc + pair * (-0.25)
    return acc


def lowering_op(site: int, nsites: int) -> PauliSum:
    """sigma^- = (X - iY)/2; the convention is fixed once, here."""
    return (
        PauliSum.single(site, "x", nsites, 0.5)
        + PauliSum.single(site, "y", nsites, -0.5j)
    )


def dynamical_symmetry_op(p: int, site_map: SiteMap) -> PauliSum:
    """Five-site eigenoperator at interior node p: P_{p-1} sigma^-_p P_p.

    Nilpotent, supported on the node and its two rungs only.  With the fixed
    sigma^- convention the full Hamiltonian satisfies [H, A] = -2*B_p*A.
    """
    if p not in site_map.interior_nodes():
        raise ValueError(
            f"node {p} is not interior (needs a rung on both sides, "
            f"valid: {site_map.interior_nodes()})"
        )
    return tensor_product(
        [
            singlet_projector(p - 1, site_map),
            lowering_op(site_map.node(p), site_map.nsites),
            singlet_projector(p, site_map),
        ]
    )


def symmetry_charge(p: int, site_map: SiteMap) -> PauliSum:
    """Strictly local conserved charge A^dag A at interior node p."""
    a = dynamical_symmetry_op(p, site_map)
    return a.dagger() * a


def build(spec: SpinLaceSpec) -> tuple[PauliSum, TermRegistry, SiteMap]:
    """Assemble the Hamiltonian, its term registry, and the site map."""
    site_map = SiteMap(spec.plaquettes)
    L = site_map.nsites
    terms: dict[TermLabel, PauliSum] = {}

    for r in range(1, spec.plaquettes + 2):
        terms[("node_field", r)] = PauliSum.single(
            site_map.node(r), "z", L, spec.node_fields[r - 1]
        )
    for r in range(1, spec.plaquettes + 1):
        terms[("double_field", r)] = _total_spin_sum(
            site_map, r, "z", spec.double_fields[r - 1]
        )

    def bond(node_r: int, rung_r: int) -> PauliSum:
        acc = PauliSum.zero(L)
        for axis, coupling in zip(_AXES, spec.couplings[rung_r - 1]):
            node_op = PauliSum.single(site_map.node(node_r), axis, L, coupling)
            acc = acc + node_op * total_spin(rung_r, axis, site_map)
        return acc

    for r in range(1, spec.plaquettes + 1):
        terms[("bond_right", r)] = bond(r, r)
    for r in range(2, spec.plaquettes + 2):
        terms[("bond_left", r)] = bond(r, r - 1)

    registry = TermRegistry(L, terms)
    for defect in spec.defects:
        registry = apply_defect(registry, defect)
    return registry.total(), registry, site_map


def local_hamiltonian(p: int, registry: TermRegistry, site_map: SiteMap) -> PauliSum:
    """Two-plaquette Hamiltonian associated with the symmetry at node p.

    Eight terms spanning nodes p-1, p, p+1 and rungs p-1, p (7 sites); the
    symmetry operator's support stays away from the two boundary nodes, so
    the eigenoperator relation survives arbitrary changes outside.
    """
    if p not in site_map.interior_nodes():
        raise ValueError(f"node {p} is not interior")
    labels = [
        ("node_field", p),
        ("double_field", p),
        ("bond_right", p),
        ("bond_left", p),
        ("node_field", p - 1),
        ("bond_right", p - 1),
        ("node_field", p + 1),
        ("bond_left", p + 1),
    ]
    acc = PauliSum.zero(registry.nsites)
    for label in labels:
        acc = acc + registry.term(label)
    return acc


def apply_defect(registry: TermRegistry, defect: Defect) -> TermRegistry:
    """Replace one labelled term (or plant a single-site term); pure."""
    replacement = defect.replacement
    if replacement.nsites != registry.nsites:
        raise ValueError(
            f"replacement on {replacement.nsites} sites, lattice has {registry.nsites}"
        )
    if isinstance(defect.target, int):
        site = defect.target
        if not 0 <= site < registry.nsites:
            raise KeyError(f"defect site {site} outside the lattice")
        allowed = {site}
        label = ("site_field", site)
    else:
        label = defect.target
        if label not in registry:
            raise KeyError(f"defect targets unknown term {label!r}")
        allowed = set(registry.term(label).support())
    extra = set(replacement.support()) - allowed
    if extra:
        raise ValueError(
            f"replacement support {sorted(extra)} leaves the target region {sorted(allowed)}"
        )
    return registry.replaced(label, replacement)
