"""Compile a fermionic Gaussian state into X gates plus nearest-neighbour
Givens rotations by nulling its correlation matrix.

The loop grows the leading principal block of Lambda until an eigenvalue
sits within `tol` of 0 or 1.  That block eigenvector (zero-padded) is an
approximate eigenvector of the full matrix; a descending chain of plane
rotations maps it onto the first active site, the matrix is conjugated
accordingly, and the procedure deflates to the next site.  The result is a
diagonal 0/1 pattern: X gates recreate the pattern, and the rotations applied
in reverse order rotate it into the target state.

The printed rotation acting on sites (i, i+1) is

    V_i = [[cos t, -sin t], [sin t, cos t]],

with the branch of each angle chosen to zero the lower vector component.
Complex correlation matrices (generic superlattice phases) need one extra
phase per elimination; it is folded into the two-qubit gate as the `phi`
field of the Givens gate, an extension of the real scheme in the wire format.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, givens_gate, givens_mode_matrix, x_gate

NULLING_TOL = 1e-9
SKIP_TOL = 1e-13        # elimination skipped when the component is already zero


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation on sites (i, i+1): angle theta, optional phase phi."""

    i: int
    theta: float
    phi: float = 0.0


@dataclass(frozen=True)
class PrepPlan:
    """X-gate pattern plus rotations (in nulling application order)."""

    n_sites: int
    occupied_sites: tuple[int, ...]
    rotations: tuple[GivensRotation, ...]
    residual: float         # max deviation of the transformed Lambda from its 0/1 diagonal


def _elimination(x: complex, y: complex) -> tuple[float, float]:
    """(theta, phi) with row 2 of givens_mode_matrix(theta, phi) @ (x, y) = 0.

    The condition is sin(t) x + cos(t) e^{i phi} y = 0.  phi is wrapped into
    (-pi/2, pi/2] so real vectors come out with phi = 0 exactly.
    """
    if abs(x) < SKIP_TOL:
        return -math.pi / 2.0, 0.0
    ratio = y / x
    phi = -cmath.phase(ratio)
    r = abs(ratio)
    if phi <= -math.pi / 2.0:
        phi += math.pi
        r = -r
    elif phi > math.pi / 2.0:
        phi -= math.pi
        r = -r
    theta = -math.atan(r)
    return theta, phi


def _apply_rotation(mat: np.ndarray, vec: np.ndarray | None, i: int,
                    theta: float, phi: float) -> None:
    """In-place update mat <- U mat U^dag (and vec <- U vec) on the (i, i+1) plane."""
    u = givens_mode_matrix(theta, phi)
    rows = mat[[i, i + 1], :]
    mat[[i, i + 1], :] = u @ rows
    cols = mat[:, [i, i + 1]]
    mat[:, [i, i + 1]] = cols @ u.conj().T
    if vec is not None:
        vec[[i, i + 1]] = u @ vec[[i, i + 1]]


def givens_sequence(lam: np.ndarray, tol: float = NULLING_TOL) -> PrepPlan:
    """Nulling plan for a pure-state correlation matrix Lambda.

    Raises ValueError when no block eigenvalue ever reaches 0 or 1 within
    `tol`, which signals that Lambda does not describe a pure Gaussian state.
    """
    M = np.array(lam, dtype=complex)
    L = M.shape[0]
    if M.shape != (L, L):
        raise ValueError("Lambda must be square")
    if np.max(np.abs(M - M.conj().T)) > 1e-9:
        raise ValueError("Lambda must be Hermitian")

    occupied: list[int] = []
    rotations: list[GivensRotation] = []
    for s in range(L):
        found = None
        for e in range(s, L):
            block = M[s:e + 1, s:e + 1]
            vals, vecs = np.linalg.eigh(block)
            dist = np.minimum(np.abs(vals), np.abs(vals - 1.0))
            order = np.lexsort((np.arange(len(vals)), dist))
            best = order[0]
            if dist[best] <= tol:
                found = (e, float(np.round(vals[best].real)), vecs[:, best])
                break
        if found is None:
            raise ValueError(
                "no block eigenvalue reached 0 or 1 within tolerance; "
                "input is not a pure Gaussian correlation matrix")
        e, w, v = found
        vec = np.zeros(L, dtype=complex)
        vec[s:e + 1] = v
        for i in range(e - 1, s - 1, -1):
            if abs(vec[i + 1]) < SKIP_TOL:
                continue
            theta, phi = _elimination(vec[i], vec[i + 1])
            _apply_rotation(M, vec, i, theta, phi)
            rotations.append(GivensRotation(i, theta, phi))
        if w == 1.0:
            occupied.append(s)

    pattern = np.zeros(L)
    pattern[occupied] = 1.0
    residual = float(np.max(np.abs(M - np.diag(pattern))))
    return PrepPlan(L, tuple(occupied), tuple(rotations), residual)


def plan_to_circuit(plan: PrepPlan) -> Circuit:
    """X gates on the occupied pattern, then the rotations in reverse order.

    The last rotation applied during nulling acts first on the state; each
    two-qubit gate is the number-conserving Givens unitary of the same
    single-particle rotation.
    """
    c = Circuit(plan.n_sites)
    for s in plan.occupied_sites:
        c.append(x_gate(s))
    for r in reversed(plan.rotations):
        c.append(givens_gate(r.i, r.theta, r.phi))
    return c


def prepare_slater_circuit(state, tol: float = NULLING_TOL) -> Circuit:
    """Convenience: correlation matrix -> nulling plan -> circuit."""
    from .gaussian import fermion_correlations

    return plan_to_circuit(givens_sequence(fermion_correlations(state), tol))
