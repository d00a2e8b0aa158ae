"""Dense statevector execution of circuits and Pauli-correlator measurement.

Qubit j is bit j of the basis index (little-endian), matching the lattice
site convention of the circuit format.  The bosonic one-particle density
matrix is assembled from Pauli expectation values,

    rho_jl = 1/4 [<X_j X_l> + <Y_j Y_l> + i <X_j Y_l> - i <Y_j X_l>],

with the diagonal rho_jj = <(1 - Z_j)/2>.  Expectations are exact statevector
contractions by default; an optional shot-sampling mode draws finite-shot
estimates from the grouped measurement settings an experiment would run.

The dense many-body reference `exact_hcb_reference` builds the full 2^L
hard-core boson Hamiltonian and serves as the brute-force oracle for the
Gaussian engine and the circuit pipeline (L <= 12).
"""

from __future__ import annotations

import math

import numpy as np

from .circuits import Circuit, Gate, gate_matrix
from .model import HamiltonianSpec, potential_diagonal

STATEVECTOR_MAX_QUBITS = 26     # ~1 GiB of complex amplitudes
ORACLE_MAX_QUBITS = 12          # dense 2^L x 2^L matrices
NORM_TOL = 1e-10


def init_bitstring(n_qubits: int, occupied_sites) -> np.ndarray:
    """Computational basis state with X flips on the listed qubits."""
    if n_qubits > STATEVECTOR_MAX_QUBITS:
        raise ValueError(f"dense statevector capped at {STATEVECTOR_MAX_QUBITS} qubits, "
                         f"got {n_qubits}")
    sites = list(occupied_sites)
    if sites and not all(0 <= s < n_qubits for s in sites):
        raise ValueError(f"sites out of range 0..{n_qubits - 1}: {sites}")
    if len(set(sites)) != len(sites):
        raise ValueError(f"occupied sites must be distinct: {sites}")
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[sum(1 << s for s in sites)] = 1.0
    return psi


def _apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 matrix on qubit q; trailing batch columns pass through."""
    orig = psi.shape
    a = psi.reshape([2] * n + [-1])
    ax = n - 1 - q
    a = np.moveaxis(a, ax, 0)
    rest = a.shape[1:]
    a = (u @ a.reshape(2, -1)).reshape((2,) + rest)
    a = np.moveaxis(a, 0, ax)
    return a.reshape(orig)


def _apply_2q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 4x4 matrix on qubits (q, q+1); block index = bit_q + 2 bit_{q+1}."""
    orig = psi.shape
    a = psi.reshape([2] * n + [-1])
    ax_lo = n - 1 - q
    ax_hi = n - 1 - (q + 1)
    a = np.moveaxis(a, (ax_hi, ax_lo), (0, 1))      # (hi, lo, ...) so C-index = 2*hi + lo
    rest = a.shape[2:]
    a = (u @ a.reshape(4, -1)).reshape((2, 2) + rest)
    a = np.moveaxis(a, (0, 1), (ax_hi, ax_lo))
    return a.reshape(orig)


def apply_gate(psi: np.ndarray, g: Gate, n_qubits: int) -> np.ndarray:
    if g.kind == "x":
        return _apply_1q(psi, gate_matrix(g), g.q[0], n_qubits)
    return _apply_2q(psi, gate_matrix(g), g.q[0], n_qubits)


def apply_circuit(psi: np.ndarray, circuit: Circuit) -> np.ndarray:
    """Run the gate list in order; includes the circuit's global phase."""
    n = circuit.n_qubits
    if psi.shape[0] != 1 << n:
        raise ValueError(f"state has {psi.shape[0]} amplitudes, circuit wants {1 << n}")
    out = psi
    for g in circuit.gates:
        out = apply_gate(out, g, n)
    if circuit.phase != 0.0:
        out = out * np.exp(1j * circuit.phase)
    if psi.ndim == 1:
        if abs(np.linalg.norm(out) - np.linalg.norm(psi)) > NORM_TOL:
            raise RuntimeError("statevector norm drifted beyond tolerance")
    return out


def _popcount(arr: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(arr).astype(np.int64)
    v = arr.astype(np.int64).copy()
    out = np.zeros_like(v)
    while v.any():
        out += v & 1
        v >>= 1
    return out


def apply_pauli_string(psi: np.ndarray, pauli: str) -> np.ndarray:
    """P|psi> for a Pauli string over all qubits (string length = qubit count).

    Site j of the string acts on bit j.  Implemented with one index gather:
    P|b> = phase(b) |b ^ flips> where the phase collects Z signs and the
    i (-1)^{b_j} factors of every Y.
    """
    n = len(pauli)
    if psi.shape[0] != 1 << n:
        raise ValueError("Pauli string length must equal qubit count")
    flip = z_mask = y_mask = 0
    n_y = 0
    for j, letter in enumerate(pauli):
        if letter == "X":
            flip |= 1 << j
        elif letter == "Y":
            flip |= 1 << j
            y_mask |= 1 << j
            n_y += 1
        elif letter == "Z":
            z_mask |= 1 << j
        elif letter != "I":
            raise ValueError(f"bad Pauli letter {letter!r}")
    idx = np.arange(1 << n, dtype=np.int64)
    src = idx ^ flip
    signs = 1 - 2 * ((_popcount(idx & z_mask) + _popcount(src & y_mask)) & 1)
    return (1j) ** n_y * signs * psi[src]


def expectation(psi: np.ndarray, pauli: str) -> float:
    """<psi|P|psi>; asserts the value is real (Hermitian P)."""
    val = np.vdot(psi, apply_pauli_string(psi, pauli))
    assert abs(val.imag) < 1e-12, f"expectation not real: {val}"
    return float(val.real)


def _pair_string(n: int, j: int, a: str, l: int, b: str) -> str:
    s = ["I"] * n
    s[j] = a
    s[l] = b
    return "".join(s)


def measurement_group_count(n_qubits: int) -> int:
    """Distinct X/Y measurement settings covering all pairwise XX, YY, XY, YX.

    All-X and all-Y cover the like-basis pairs; every mixed pair (j, l) is
    separated by some bit of the site index, so bit-mask assignments and
    their complements cover both orderings: 2 ceil(log2 L) + 2 settings.
    """
    if n_qubits < 2:
        return 2
    return 2 * math.ceil(math.log2(n_qubits)) + 2


def _measurement_groups(n_qubits: int) -> list[str]:
    groups = ["X" * n_qubits, "Y" * n_qubits]
    if n_qubits > 1:
        for bit in range(math.ceil(math.log2(n_qubits))):
            g = "".join("Y" if (j >> bit) & 1 else "X" for j in range(n_qubits))
            groups.append(g)
            groups.append("".join("X" if c == "Y" else "Y" for c in g))
    return groups


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_Y_TO_Z = _HADAMARD @ np.diag([1.0, -1.0j])     # maps the Y eigenbasis onto Z


def _sample_measurement_group(psi: np.ndarray, bases: str, shots: int,
                              rng: np.random.Generator) -> np.ndarray:
    """Per-site +/-1 outcomes of `shots` measurements, every site in basis X or Y."""
    n = len(bases)
    rotated = psi
    for j, b in enumerate(bases):
        rotated = _apply_1q(rotated, _HADAMARD if b == "X" else _Y_TO_Z, j, n)
    probs = np.abs(rotated) ** 2
    outcomes = rng.choice(len(probs), size=shots, p=probs / probs.sum())
    bits = (outcomes[:, None] >> np.arange(n)[None, :]) & 1
    return 1 - 2 * bits


def measure_density_matrix(psi: np.ndarray, shots: int | None = None,
                           seed: int | None = None) -> np.ndarray:
    """Assemble rho_jl from pairwise Pauli correlators of the state.

    With shots=None every expectation is an exact contraction.  With finite
    shots the grouped measurement settings (see `measurement_group_count`)
    are each sampled `shots` times, plus one computational-basis setting for
    the densities; entries converge at the 1/sqrt(shots) rate.
    """
    n = int(round(math.log2(psi.shape[0])))
    rho = np.zeros((n, n), dtype=complex)

    if shots is None:
        for j in range(n):
            rho[j, j] = 0.5 * (1.0 - expectation(psi, _pair_string(n, j, "Z", j, "Z")))
            for l in range(j + 1, n):
                xx = expectation(psi, _pair_string(n, j, "X", l, "X"))
                yy = expectation(psi, _pair_string(n, j, "Y", l, "Y"))
                xy = expectation(psi, _pair_string(n, j, "X", l, "Y"))
                yx = expectation(psi, _pair_string(n, j, "Y", l, "X"))
                rho[j, l] = 0.25 * (xx + yy + 1j * xy - 1j * yx)
                rho[l, j] = np.conj(rho[j, l])
        return rho

    rng = np.random.default_rng(seed)
    corr: dict[tuple[int, str, int, str], float] = {}
    for bases in _measurement_groups(n):
        samples = _sample_measurement_group(psi, bases, shots, rng)
        for j in range(n):
            for l in range(j + 1, n):
                key = (j, bases[j], l, bases[l])
                if key not in corr:
                    corr[key] = float(np.mean(samples[:, j] * samples[:, l]))
    probs = np.abs(psi) ** 2
    outcomes = rng.choice(len(probs), size=shots, p=probs / probs.sum())
    bits = (outcomes[:, None] >> np.arange(n)[None, :]) & 1
    densities = bits.mean(axis=0)
    for j in range(n):
        rho[j, j] = densities[j]
        for l in range(j + 1, n):
            xx = corr[(j, "X", l, "X")]
            yy = corr[(j, "Y", l, "Y")]
            xy = corr[(j, "X", l, "Y")]
            yx = corr[(j, "Y", l, "X")]
            rho[j, l] = 0.25 * (xx + yy + 1j * xy - 1j * yx)
            rho[l, j] = np.conj(rho[j, l])
    return rho


def fermion_correlations_from_statevector(psi: np.ndarray) -> np.ndarray:
    """Lambda_ij = <f_i^dag f_j> including the Jordan-Wigner string Z_{i+1..j-1}."""
    n = int(round(math.log2(psi.shape[0])))
    idx = np.arange(1 << n, dtype=np.int64)
    lam = np.zeros((n, n), dtype=complex)
    for i in range(n):
        ni = (idx >> i) & 1
        lam[i, i] = np.sum(np.abs(psi) ** 2 * ni)
        for j in range(i + 1, n):
            string_mask = ((1 << j) - 1) & ~((1 << (i + 1)) - 1)
            nj = (idx >> j) & 1
            valid = (nj == 1) & (ni == 0)
            src = idx[valid]
            dst = src ^ ((1 << i) | (1 << j))
            sign = 1 - 2 * (_popcount(src & string_mask) & 1)
            val = np.sum(np.conj(psi[dst]) * sign * psi[src])
            lam[i, j] = val
            lam[j, i] = np.conj(val)
    return lam


def _dense_hcb_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    """Full 2^L matrix of H = -w/2 sum (XX + YY) + sum_j V_j n_j (literal form)."""
    L = spec.sites
    dim = 1 << L
    idx = np.arange(dim, dtype=np.int64)
    H = np.zeros((dim, dim), dtype=complex)
    bonds = [(j, j + 1) for j in range(L - 1)]
    if spec.boundary == "periodic":
        bonds.append((L - 1, 0))
    for (a, b) in bonds:
        # -w/2 (XX + YY) = -w (S+_a S-_b + S-_a S+_b): hop between a and b
        occ_a = (idx >> a) & 1
        occ_b = (idx >> b) & 1
        src = idx[occ_a != occ_b]
        dst = src ^ ((1 << a) | (1 << b))
        H[dst, src] += -spec.w
    V = potential_diagonal(spec)
    diag = np.zeros(dim)
    for j in range(L):
        diag += V[j] * ((idx >> j) & 1)
    H[np.diag_indices(dim)] += diag
    return H


def exact_hcb_reference(spec: HamiltonianSpec, occupied_sites, t: float) -> np.ndarray:
    """Brute-force rho(t) for a Fock quench: dense 2^L eigensolve of the HCB chain."""
    if spec.sites > ORACLE_MAX_QUBITS:
        raise ValueError(f"dense oracle capped at {ORACLE_MAX_QUBITS} sites, got {spec.sites}")
    psi0 = init_bitstring(spec.sites, occupied_sites)
    H = _dense_hcb_hamiltonian(spec)
    energies, vecs = np.linalg.eigh(H)
    psi_t = vecs @ (np.exp(-1j * energies * t) * (vecs.conj().T @ psi0))
    return measure_density_matrix(psi_t)
