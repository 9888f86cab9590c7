"""Exact quantum time evolution and thermal correlation functions.

Two evolution routes are provided and cross-checked against each other:

* ``full_diagonalization`` -- spectral decomposition of the dense matrix,
  exact to machine precision, limited to DENSE_SITE_LIMIT sites;
* ``krylov`` -- matrix-free Lanczos propagation with full
  reorthogonalization, adaptive step splitting, and an a-posteriori error
  estimate per step.

Correlators C(t) = Tr(rho O(t) B) with a stationary rho (Gibbs at inverse
temperature beta, uniform at beta = 0) are computed either exactly from the
spectral decomposition or statistically from random states (dynamical
typicality, error ~ 2^{-L/2} per sample).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .paulis import (
    DENSE_SITE_LIMIT,
    CapacityError,
    DimensionError,
    PauliSum,
    matvec,
    to_matrix,
    to_sparse,
)


@dataclass
class EvolutionPlan:
    """How to apply exp(-iHt): dense spectral route or adaptive Lanczos."""

    method: str = "krylov"
    dt: float = 0.05
    t_max: float = 20.0
    krylov_dim: int = 30
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.method not in ("krylov", "full_diagonalization"):
            raise ValueError(f"unknown evolution method {self.method!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be at least 2")


@dataclass
class ThermalSpec:
    """Stationary reference state exp(-beta H)/Z; beta = 0 is the default."""

    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


@dataclass
class TimeSeries:
    """Uniformly sampled complex correlator with provenance metadata."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        steps = np.diff(self.times)
        return bool(len(steps) == 0 or np.all(np.abs(steps - steps[0]) <= rtol * steps[0]))

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# schema=spinlace.timeseries.v1\n")
        for key in sorted(self.meta):
            out.write(f"# {key}={self.meta[key]}\n")
        out.write(f"# label={self.label}\n")
        columns = "t,re,im,abs" + (",stderr" if self.stderr is not None else "")
        out.write(columns + "\n")
        for i, t in enumerate(self.times):
            v = self.values[i]
            row = f"{t:.17g},{v.real:.17g},{v.imag:.17g},{abs(v):.17g}"
            if self.stderr is not None:
                row += f",{self.stderr[i]:.17g}"
            out.write(row + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TimeSeries":
        meta: dict = {}
        label = ""
        times, re, im, err = [], [], [], []
        have_err = False
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    if key == "label":
                        label = value
                    elif key != "schema":
                        meta[key] = value
                continue
            if line.startswith("t,"):
                have_err = line.endswith(",stderr")
                continue
            fields = line.split(",")
            times.append(float(fields[0]))
            re.append(float(fields[1]))
            im.append(float(fields[2]))
            if have_err:
                err.append(float(fields[4]))
        values = np.array(re) + 1j * np.array(im)
        return cls(
            times=np.array(times),
            values=values,
            label=label,
            stderr=np.array(err) if have_err else None,
            meta=meta,
        )


def basis_state(nsites: int, index: int = 0) -> np.ndarray:
    v = np.zeros(1 << nsites, dtype=complex)
    v[index] = 1.0
    return v


def random_state(nsites: int, seed: int | None = None) -> np.ndarray:
    """Normalized Gaussian random vector; E[|psi><psi|] is the uniform state."""
    rng = np.random.default_rng(seed)
    dim = 1 << nsites
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def expectation(op: PauliSum, state: np.ndarray) -> complex:
    return complex(np.vdot(state, matvec(op, state)))


# -- spectral decomposition cache --------------------------------------------


class _Spectral:
    """Eigen-decomposition of a Hermitian PauliSum, with basis transforms."""

    def __init__(self, h: PauliSum):
        if h.nsites > DENSE_SITE_LIMIT:
            raise CapacityError(
                f"dense diagonalization needs L <= {DENSE_SITE_LIMIT}, got L = {h.nsites}"
            )
        mat = to_matrix(h)
        self.real_basis = not np.iscomplexobj(mat)
        self.eigenvalues, self.vectors = np.linalg.eigh(mat)
        self.nsites = h.nsites
        self._transforms: dict[int, tuple[PauliSum, np.ndarray]] = {}

    def transform(self, op: PauliSum) -> np.ndarray:
        """V^dag O V, splitting real/imag parts to stay in real BLAS.

        Transforms are cached per operator instance; repeated correlators
        over the same observables reuse them.
        """
        cached = self._transforms.get(id(op))
        if cached is not None and cached[0] is op:
            return cached[1]
        ov = to_sparse(op) @ self.vectors
        v = self.vectors
        if self.real_basis and np.iscomplexobj(ov):
            # Stride-2 .real/.imag views defeat BLAS; copy them contiguous.
            out = v.T @ np.ascontiguousarray(ov.real) + 1j * (
                v.T @ np.ascontiguousarray(ov.imag)
            )
        else:
            out = v.conj().T @ ov
        self._transforms[id(op)] = (op, out)
        return out

    def evolve(self, state: np.ndarray, t: float) -> np.ndarray:
        v = self.vectors
        if self.real_basis and np.iscomplexobj(state):
            coeffs = v.T @ np.ascontiguousarray(state.real) + 1j * (
                v.T @ np.ascontiguousarray(state.imag)
            )
            coeffs = coeffs * np.exp(-1j * self.eigenvalues * t)
            return v @ np.ascontiguousarray(coeffs.real) + 1j * (
                v @ np.ascontiguousarray(coeffs.imag)
            )
        coeffs = v.conj().T @ state
        coeffs = coeffs * np.exp(-1j * self.eigenvalues * t)
        return v @ coeffs


def spectral(h: PauliSum) -> _Spectral:
    if not h.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    if h._spectral_cache is None:
        h._spectral_cache = _Spectral(h)
    return h._spectral_cache


# -- Lanczos propagation ------------------------------------------------------


def _lanczos_attempt(
    apply_h: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    tau: float,
    dim_cap: int,
    tol: float,
):
    """One exp(-i tau H) v attempt; returns (result, error_estimate)."""
    norm0 = np.linalg.norm(v)
    if norm0 == 0:
        return v.copy(), 0.0
    basis = [v / norm0]
    alphas: list[float] = []
    betas: list[float] = []
    for m in range(dim_cap):
        w = apply_h(basis[m])
        alpha = float(np.vdot(basis[m], w).real)
        w = w - alpha * basis[m]
        if m > 0:
            w = w - betas[m - 1] * basis[m - 1]
        # Full reorthogonalization: cheap at these subspace sizes and keeps
        # the propagated norm exact to round-off.
        for b in basis:
            w = w - np.vdot(b, w) * b
        alphas.append(alpha)
        beta = float(np.linalg.norm(w))
        ew, ev = scipy.linalg.eigh_tridiagonal(alphas, betas)
        small = ev @ (np.exp(-1j * ew * tau) * ev[0, :].conj())
        err = beta * abs(small[-1]) * abs(tau)
        if err <= tol or beta < 1e-14:
            result = norm0 * np.sum(
                [small[k] * basis[k] for k in range(len(basis))], axis=0
            )
            return result, err
        betas.append(beta)
        basis.append(w / beta)
    result = norm0 * np.sum([small[k] * basis[k] for k in range(len(small))], axis=0)
    return result, err


def _krylov_evolve(
    apply_h: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    t: float,
    dim_cap: int,
    tol: float,
) -> np.ndarray:
    if t == 0:
        return v.copy()
    nsteps = 1
    while True:
        tau = t / nsteps
        state = v
        budget = tol / nsteps
        ok = True
        for _ in range(nsteps):
            state, err = _lanczos_attempt(apply_h, state, tau, dim_cap, budget)
            if err > budget:
                ok = False
                break
        if ok:
            return state
        nsteps *= 2
        if nsteps > 1 << 20:
            raise RuntimeError("Krylov propagation failed to converge")


def evolve_state(
    h: PauliSum, state: np.ndarray, t: float, plan: EvolutionPlan | None = None
) -> np.ndarray:
    """exp(-iHt) applied to a state, within the plan's tolerance."""
    plan = plan or EvolutionPlan()
    if state.shape[0] != 1 << h.nsites:
        raise DimensionError(
            f"state dim {state.shape[0]} does not match 2^{h.nsites}"
        )
    if not h.is_hermitian():
        raise ValueError("evolution requires a Hermitian Hamiltonian")
    if plan.method == "full_diagonalization":
        return spectral(h).evolve(np.asarray(state, dtype=complex), t)
    return _krylov_evolve(
        lambda x: matvec(h, x),
        np.asarray(state, dtype=complex),
        t,
        plan.krylov_dim,
        plan.tolerance,
    )


# -- thermal correlators ------------------------------------------------------


def _gibbs_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    if beta == 0:
        return np.full(len(eigenvalues), 1.0 / len(eigenvalues))
    shifted = -beta * (eigenvalues - eigenvalues.min())
    w = np.exp(shifted)
    return w / w.sum()


def _phase_sum(g: np.ndarray, eigenvalues: np.ndarray, times: np.ndarray) -> np.ndarray:
    """sum_{ab} G_ab exp(i (lam_a - lam_b) t) for every t."""
    phases = np.exp(1j * np.outer(times, eigenvalues))
    conj_t = phases.conj().T
    if not np.iscomplexobj(g):
        weighted = (g @ np.ascontiguousarray(conj_t.real)) + 1j * (
            g @ np.ascontiguousarray(conj_t.imag)
        )
    else:
        weighted = g @ conj_t
    return np.einsum("ta,at->t", phases, weighted)


def _thermal_correlator(
    spec: _Spectral,
    o_eig: np.ndarray,
    b_eig: np.ndarray,
    times: np.ndarray,
    beta: float,
    operator_first: bool = True,
) -> np.ndarray:
    """Tr(rho O(t) B) if operator_first else Tr(rho B O(t))."""
    w = _gibbs_weights(spec.eigenvalues, beta)
    if operator_first:
        g = (w[:, None] * o_eig) * b_eig.T
    else:
        g = o_eig * (w[:, None] * b_eig).T
    return _phase_sum(g, spec.eigenvalues, times)


def correlation(
    h: PauliSum,
    observable: PauliSum,
    probe: PauliSum,
    times: np.ndarray,
    thermal: ThermalSpec | None = None,
    mode: str = "exact_trace",
    n_samples: int = 50,
    seed: int = 0,
    label: str = "",
) -> TimeSeries:
    """C(t) = Tr(rho O(t) B) with O(t) = exp(iHt) O exp(-iHt).

    ``exact_trace`` uses the spectral decomposition (L capped by the dense
    limit, any beta >= 0).  ``typicality`` estimates the beta = 0 trace from
    seeded Gaussian random states evolved by Krylov, with the standard error
    of the sample mean reported alongside.
    """
    thermal = thermal or ThermalSpec()
    times = np.asarray(times, dtype=float)
    for op in (observable, probe):
        if op.nsites != h.nsites:
            raise DimensionError("operators must live on the Hamiltonian's lattice")

    if mode == "exact_trace":
        spec = spectral(h)
        values = _thermal_correlator(
            spec,
            spec.transform(observable),
            spec.transform(probe),
            times,
            thermal.beta,
        )
        return TimeSeries(times=times, values=values, label=label, meta={"mode": mode})

    if mode == "typicality":
        if thermal.beta != 0:
            raise ValueError("typicality mode supports beta = 0 only")
        if n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        rng = np.random.default_rng(seed)
        dim = 1 << h.nsites
        plan = EvolutionPlan(method="krylov")
        samples = np.zeros((n_samples, len(times)), dtype=complex)
        for s in range(n_samples):
            psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            psi /= np.linalg.norm(psi)
            phi = matvec(probe, psi)
            t_prev = 0.0
            left, right = psi, phi
            for k, t in enumerate(times):
                if t != t_prev:
                    left = _krylov_evolve(
                        lambda x: matvec(h, x), left, t - t_prev, plan.krylov_dim, plan.tolerance
                    )
                    right = _krylov_evolve(
                        lambda x: matvec(h, x), right, t - t_prev, plan.krylov_dim, plan.tolerance
                    )
                    t_prev = t
                samples[s, k] = np.vdot(left, matvec(observable, right))
        mean = samples.mean(axis=0)
        if n_samples > 1:
            stderr = np.sqrt(
                (samples.real.var(axis=0, ddof=1) + samples.imag.var(axis=0, ddof=1))
                / n_samples
            )
        else:
            stderr = np.zeros(len(times))
        return TimeSeries(
            times=times,
            values=mean,
            label=label,
            stderr=stderr,
            meta={"mode": mode, "n_samples": n_samples, "seed": seed},
        )

    raise ValueError(f"unknown correlation mode {mode!r}")


def _kick_unitary(h_pert: PauliSum, eps: float) -> np.ndarray:
    terms = list(h_pert.terms())
    if len(terms) == 1 and not terms[0][0].is_identity():
        # exp(-i eps c P) = cos(eps c) I - i sin(eps c) P for a single string.
        string, coeff = terms[0]
        if abs(coeff.imag) < 1e-14:
            dim = 1 << h_pert.nsites
            p_mat = to_matrix(PauliSum.from_string(string))
            return np.cos(eps * coeff.real) * np.eye(dim) - 1j * np.sin(
                eps * coeff.real
            ) * p_mat
    mat = to_matrix(h_pert)
    if not np.allclose(mat, mat.conj().T, atol=1e-12):
        raise ValueError("kick Hamiltonian must be Hermitian")
    ew, ev = scipy.linalg.eigh(mat)
    return (ev * np.exp(-1j * eps * ew)) @ ev.conj().T


def kicked_evolution(
    h: PauliSum,
    h_pert: PauliSum,
    eps: float,
    observable: PauliSum,
    times: np.ndarray,
    thermal: ThermalSpec | None = None,
    label: str = "",
) -> TimeSeries:
    """Nonperturbative kick response (<O(t)>_kicked - <O>)/eps.

    The instantaneous kick applies exp(-i eps H_pert) to the stationary state
    at t = 0; as eps -> 0 the series converges to the linear response at
    first order in eps.
    """
    if eps == 0:
        raise ValueError("eps must be nonzero")
    thermal = thermal or ThermalSpec()
    times = np.asarray(times, dtype=float)
    spec = spectral(h)
    w = _gibbs_weights(spec.eigenvalues, thermal.beta)
    v = spec.vectors

    u = _kick_unitary(h_pert, eps)
    rho = (v * w) @ v.conj().T
    rho_kicked = u @ rho @ u.conj().T
    rho_eig = v.conj().T @ rho_kicked @ v

    o_eig = spec.transform(observable)
    g = o_eig * rho_eig.T
    kicked = _phase_sum(g, spec.eigenvalues, times)
    baseline = np.sum(w * np.diagonal(o_eig))
    values = (kicked - baseline) / eps
    return TimeSeries(
        times=times, values=values, label=label, meta={"mode": "kicked", "eps": eps}
    )


def connected_correlator(
    h: PauliSum,
    op_left: PauliSum,
    op_right: PauliSum,
    times: np.ndarray,
    thermal: ThermalSpec | None = None,
    label: str = "",
) -> TimeSeries:
    """C(t) - <O_p(t)><O_q>; the subtracted means are time-independent
    because the reference state is stationary."""
    thermal = thermal or ThermalSpec()
    full = correlation(h, op_left, op_right, times, thermal, mode="exact_trace")
    spec = spectral(h)
    w = _gibbs_weights(spec.eigenvalues, thermal.beta)
    mean_left = np.sum(w * np.diagonal(spec.transform(op_left)))
    mean_right = np.sum(w * np.diagonal(spec.transform(op_right)))
    values = full.values - mean_left * mean_right
    return TimeSeries(times=times, values=values, label=label, meta={"mode": "connected"})
