"""Generalized Gibbs (GGE) and conventional Gibbs (GE) predictions.

Both ensembles are diagonal in a single-particle mode basis of the evolution
Hamiltonian: momentum modes for the plain periodic chain, eigenvectors of h
otherwise (for open boundaries the mode label is just an eigenstate index).
The GGE fixes one Lagrange multiplier per mode from the initial occupations,

    lambda_k = ln[(1 - n_k) / n_k],      n_k = <n^F_k>_0,

while the GE keeps only (beta, mu) fitted to the initial energy and particle
number.  The bosonic one-particle density matrix of either ensemble comes
from the determinant identity

    rho_ij = Z^{-1} { det[I + (I+A) O1 e^{-X} O2] - det[I + O1 e^{-X} O2] }

for i != j (A = e_i e_j^T, O1/O2 the Jordan-Wigner sign strings of sites j/i,
X = W diag(lambda) W^dag), and from rho_ii = (W diag(n_k) W^dag)_ii on the
diagonal.  Determinants are evaluated in the log domain throughout, so the
exponentially large prefactor Z never materializes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import SlaterState, fermion_correlations, momentum_distribution
from .model import HoppingMatrix, momentum_grid

OCCUPATION_CLAMP = 1e-12
FIT_TOL = 1e-10
FIT_MAX_ITER = 500
LAMBDA_MAX = 500.0          # exp(-lambda) stays finite in double precision
TRACE_CONSISTENCY = 1e-8


class FitError(RuntimeError):
    """Gibbs fit failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GGESpec:
    """Multipliers lambda_k over the conserved mode occupations."""

    multipliers: np.ndarray      # length L
    modes: np.ndarray            # L x L unitary, column k = mode vector
    labels: np.ndarray           # mode labels (momentum integers or eigenindices)
    log_z: float
    occupations: np.ndarray      # clamped initial occupations n_k


@dataclass(frozen=True)
class GESpec:
    """Inverse temperature and chemical potential fitted to (E, N)."""

    beta: float
    mu: float
    beta_mu: float               # beta*mu kept separately: regular at beta -> 0
    spectrum: np.ndarray         # single-particle energies eps_k
    modes: np.ndarray
    labels: np.ndarray
    log_z: float


def single_particle_modes(hopping: HoppingMatrix):
    """(energies, mode matrix W, labels) of the evolution Hamiltonian.

    Plain periodic chain: the analytic Fourier modes W_mk = e^{-i 2 pi k m/L}
    / sqrt(L) on the integer momentum grid (eigh would mix the degenerate
    +/-k pairs arbitrarily, which the GGE must not do).  Every other case:
    dense eigenvectors, labelled by eigenstate index.
    """
    spec = hopping.spec
    L = spec.sites
    if spec.boundary == "periodic" and spec.potential is None:
        k = momentum_grid(L)
        m = np.arange(L)
        W = np.exp(-2j * np.pi * np.outer(m, k) / L) / np.sqrt(L)
        energies = -2.0 * spec.w * np.cos(2.0 * np.pi * k / L)
        return energies, W, k
    energies, W = np.linalg.eigh(hopping.matrix)
    return energies, W, np.arange(L)


def mode_occupations(state: SlaterState, modes: np.ndarray) -> np.ndarray:
    """<n_k> = sum_mn W_mk Lambda_mn conj(W_nk) for each mode column k."""
    lam = fermion_correlations(state)
    return np.einsum("mk,mn,nk->k", modes, lam, modes.conj()).real


def _fermi(x: np.ndarray) -> np.ndarray:
    """1/(1 + e^x), overflow-safe."""
    return 0.5 * (1.0 - np.tanh(0.5 * np.clip(x, -LAMBDA_MAX, LAMBDA_MAX)))


def gge_from_initial(state: SlaterState, hopping: HoppingMatrix,
                     clamp: float = OCCUPATION_CLAMP) -> GGESpec:
    """Fix every multiplier from the initial mode occupations.

    Occupations are clamped to [clamp, 1-clamp] before the log, so Fock
    states (occupations exactly 0 or 1 in some bases) stay finite.
    """
    energies, W, labels = single_particle_modes(hopping)
    n0 = np.clip(mode_occupations(state, W), clamp, 1.0 - clamp)
    lam = np.log((1.0 - n0) / n0)
    log_z = float(np.sum(np.logaddexp(0.0, -lam)))
    return GGESpec(lam, W, labels, log_z, n0)


def ge_fit(state: SlaterState, hopping: HoppingMatrix,
           tol: float = FIT_TOL, max_iter: int = FIT_MAX_ITER) -> GESpec:
    """Fit (beta, mu) to the initial energy and particle number.

    Damped Newton in the variables (beta, c = beta*mu) with the analytic
    Fermi-function Jacobian.  The (beta, c) parametrization makes the
    infinite-temperature point beta = 0 an ordinary interior point, which is
    exactly where Fock initial states land.
    """
    eps, W, labels = single_particle_modes(hopping)
    n0 = mode_occupations(state, W)
    L = len(eps)
    n_bar = float(np.sum(n0))
    e_bar = float(np.sum(eps * n0))

    nb = min(max(n_bar, 1e-9), L - 1e-9)
    beta, c = 0.0, float(np.log(nb / (L - nb)))

    def residual(b, cc):
        f = _fermi(b * eps - cc)
        return np.array([np.sum(f) - n_bar, np.sum(eps * f) - e_bar]), f

    res, f = residual(beta, c)
    for _ in range(max_iter):
        if np.max(np.abs(res)) < tol:
            break
        fp = f * (1.0 - f)                       # -d fermi/dx
        # d/d beta brings eps, d/dc brings -1, and d fermi/dx = -fp
        J = np.array([[np.sum(-fp * eps), np.sum(fp)],
                      [np.sum(-fp * eps * eps), np.sum(fp * eps)]])
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            raise FitError("singular Jacobian in Gibbs fit", float(np.max(np.abs(res))))
        scale = 1.0
        base = np.linalg.norm(res)
        for _ in range(50):
            trial_res, trial_f = residual(beta + scale * step[0], c + scale * step[1])
            if np.linalg.norm(trial_res) < base:
                break
            scale *= 0.5
        beta, c = beta + scale * step[0], c + scale * step[1]
        res, f = trial_res, trial_f
    else:
        raise FitError(f"Gibbs fit did not converge in {max_iter} iterations",
                       float(np.max(np.abs(res))))

    mu = c / beta if abs(beta) > 1e-13 else 0.0
    lam = beta * eps - c
    log_z = float(np.sum(np.logaddexp(0.0, -lam)))
    return GESpec(float(beta), float(mu), float(c), eps, W, labels, log_z)


def _multipliers(spec) -> np.ndarray:
    if isinstance(spec, GGESpec):
        return spec.multipliers
    if isinstance(spec, GESpec):
        return spec.beta * spec.spectrum - spec.beta_mu
    raise TypeError(f"expected GGESpec or GESpec, got {type(spec)}")


def ensemble_density_matrix(spec) -> np.ndarray:
    """Bosonic rho_ij of the ensemble via log-domain determinant differences.

    Each determinant is exponentially large (comparable to Z), but its
    log-magnitude minus log Z is O(1), so signs and log-magnitudes from
    slogdet recombine without overflow at any chain length.
    """
    lam = np.clip(_multipliers(spec), -LAMBDA_MAX, LAMBDA_MAX)
    W = spec.modes
    L = len(lam)
    n_k = _fermi(lam)
    log_z = float(np.sum(np.logaddexp(0.0, -lam)))

    exp_neg_x = (W * np.exp(-lam)) @ W.conj().T
    rho = np.zeros((L, L), dtype=complex)
    rho[np.diag_indices(L)] = np.einsum("ik,k,ik->i", W, n_k, W.conj()).real

    eye = np.eye(L, dtype=complex)
    for i in range(L):
        o2 = np.where(np.arange(L) < i, -1.0, 1.0)
        for j in range(i + 1, L):
            o1 = np.where(np.arange(L) < j, -1.0, 1.0)
            B = (o1[:, None] * exp_neg_x) * o2[None, :]
            m1 = eye + B
            m2 = m1.copy()
            m2[i, :] += B[j, :]                  # (I + A) B adds row j of B to row i
            s1, ld1 = np.linalg.slogdet(m1)
            s2, ld2 = np.linalg.slogdet(m2)
            val = s2 * np.exp(ld2 - log_z) - s1 * np.exp(ld1 - log_z)
            rho[i, j] = val
            rho[j, i] = np.conj(val)

    trace_defect = abs(np.trace(rho).real - float(np.sum(n_k)))
    if trace_defect > TRACE_CONSISTENCY:
        raise RuntimeError(
            f"ensemble diagonal inconsistent with mode occupations by {trace_defect:.2e}")
    return rho


def ensemble_momentum_distribution(spec) -> np.ndarray:
    """Bosonic momentum distribution of the ensemble's density matrix."""
    return momentum_distribution(ensemble_density_matrix(spec))
