"""Trotter brick circuits for the XY/HCB chain and their compression to
depth = number of qubits.

A matchgate g(alpha, beta) = exp[i(alpha XX + beta YY)] conjugates the six
Majorana operators of any three adjacent sites by an SO(6) rotation that
splits into two independent 3-dimensional sectors; each gate contributes one
plane rotation per sector.  The turnover identity (rewriting gates on bonds
a,b,a as gates on b,a,b) is solved numerically in this representation: a
damped Gauss-Newton iteration over the three output angles of each sector,
started from deterministic seeds (Euler-style extraction plus fixed octant
points), followed by an 8x8 verification that also extracts the global phase
of the rewrite.  Phases are accumulated on the circuit so compressed and
original circuits compare exactly, not merely up to phase.

Compression follows the brick -> triangle -> brick route: every gate of the
input stream is absorbed into a triangular canonical form (a staircase of
descending rotation chains) via a cascade of turnovers ending in one fusion;
the triangle is then drained back into an L-layer brick by the reverse
cascades.  The triangle bounds the gate count at L(L-1)/2 regardless of the
number of Trotter steps, and `compressed_trotter` exponentiates the step
brick by repeated squaring, so circuits equivalent to millions of Trotter
steps compress in logarithmic time.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .circuits import Circuit, Gate, matchgate, matchgate_matrix
from .model import HamiltonianSpec

TURNOVER_TOL = 1e-10
SOLVER_TOL = 1e-12
TRIVIAL_ANGLE = 1e-14
ORACLE_MAX_QUBITS = 12

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _kron_sites(letters: str) -> np.ndarray:
    """Operator product over sites, site 0 on the least significant bit."""
    m = np.eye(1, dtype=complex)
    for letter in letters:
        m = np.kron(_PAULI[letter], m)
    return m


def _majoranas3() -> list[np.ndarray]:
    """gamma_{2j} = Z..Z X_j, gamma_{2j+1} = Z..Z Y_j on three sites."""
    gams = []
    for j in range(3):
        for p in ("X", "Y"):
            letters = "Z" * j + p + "I" * (2 - j)
            gams.append(_kron_sites(letters))
    return gams


def _build_sector_tables():
    """Map (local bond, alpha/beta) to its sector, plane and rotation sign.

    The generator of the adjoint action of exp(i theta P) on the Majoranas is
    computed from commutators; each is a single-plane antisymmetric matrix
    with entries +-2.  The two connected components of the resulting plane
    graph are the decoupled sectors.
    """
    gams = _majoranas3()
    raw = {}
    adjacency = [set() for _ in range(6)]
    for bond in (0, 1):
        for part, letter in (("alpha", "X"), ("beta", "Y")):
            letters = ["I"] * 3
            letters[bond] = letter
            letters[bond + 1] = letter
            op = _kron_sites("".join(letters))
            gen = np.zeros((6, 6))
            for m in range(6):
                comm = 1j * (op @ gams[m] - gams[m] @ op)
                for n in range(6):
                    gen[m, n] = np.trace(comm @ gams[n]).real / 8.0
            nz = np.argwhere(np.abs(gen) > 1.0)
            (p, q) = sorted({tuple(sorted(t)) for t in nz}.pop())
            raw[(bond, part)] = (p, q, gen[p, q] / 2.0)
            adjacency[p].add(q)
            adjacency[q].add(p)

    def component(start):
        seen, stack = set(), [start]
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(adjacency[x])
        return tuple(sorted(seen))

    sector0 = component(0)
    sector1 = component(next(i for i in range(6) if i not in sector0))
    sectors = (sector0, sector1)
    table = {}
    for key, (p, q, sign) in raw.items():
        sid = 0 if p in sector0 else 1
        local = sectors[sid]
        table[key] = (sid, (local.index(p), local.index(q)), float(sign))
    return sectors, table


_SECTORS, _SECTOR_TABLE = _build_sector_tables()


def _rot3(plane: tuple[int, int], sign: float, theta: float) -> np.ndarray:
    """exp(theta * G) for the single-plane generator G with G[p, q] = 2*sign."""
    p, q = plane
    a = 2.0 * sign * theta
    r = np.eye(3)
    c, s = math.cos(a), math.sin(a)
    r[p, p] = r[q, q] = c
    r[p, q] = s
    r[q, p] = -s
    return r


def _gen3(plane: tuple[int, int], sign: float) -> np.ndarray:
    p, q = plane
    g = np.zeros((3, 3))
    g[p, q] = 2.0 * sign
    g[q, p] = -2.0 * sign
    return g


def _gate_sector_rotation(g: Gate, local_bond: int, sector: int) -> np.ndarray:
    """The 3x3 rotation this gate applies within one sector."""
    for part, angle in (("alpha", g.alpha), ("beta", g.beta)):
        sid, plane, sign = _SECTOR_TABLE[(local_bond, part)]
        if sid == sector:
            return _rot3(plane, sign, angle)
    raise AssertionError("each gate touches every sector exactly once")


def _sector_target(gates_and_bonds, sector: int) -> np.ndarray:
    """Adjoint rotation of a time-ordered gate word, restricted to one sector.

    Row convention R[m, n]: U gamma_m U^dag = sum_n R[m, n] gamma_n makes the
    word compose left-to-right in time order.
    """
    r = np.eye(3)
    for g, local_bond in gates_and_bonds:
        r = r @ _gate_sector_rotation(g, local_bond, sector)
    return r


def _sector_pattern(bonds_out, sector):
    """(plane, sign, part) of each output slot's contribution to the sector."""
    pattern = []
    for local_bond in bonds_out:
        for part in ("alpha", "beta"):
            sid, plane, sign = _SECTOR_TABLE[(local_bond, part)]
            if sid == sector:
                pattern.append((plane, sign, part))
    return pattern


def _euler_seeds(target: np.ndarray, planes, signs) -> list[tuple[float, float, float]]:
    """Closed-form Euler extraction for the (P, Q, P) rotation pattern.

    With u the axis fixed by the P rotations, target[u, u] = cos of the
    middle rotation angle; the outer angles follow from the u column and
    row.  Both middle branches are returned (the outer equations select the
    consistent one); the Gauss-Newton polish handles the gimbal-locked case.
    """
    P, Q = planes[0], planes[1]
    u = ({0, 1, 2} - set(P)).pop()
    c_mid = min(1.0, max(-1.0, float(target[u, u])))
    p1, p2 = P
    seeds = []
    if abs(c_mid) > 1.0 - 1e-12:
        # gimbal lock: the middle rotation is trivial (or a pi flip) and only
        # the combined outer angle is determined
        mid_rot = 0.0 if c_mid > 0 else math.pi
        t_mid = mid_rot / (2.0 * signs[1])
        m = target @ _rot3(Q, signs[1], -t_mid)
        tot = math.atan2(m[p1, p2], m[p1, p1])
        seeds.append((tot / (2.0 * signs[0]), t_mid, 0.0))
        seeds.append((0.0, t_mid, tot / (2.0 * signs[2])))
        seeds.append((tot / (4.0 * signs[0]), t_mid, tot / (4.0 * signs[2])))
    for half in (math.acos(c_mid), -math.acos(c_mid)):
        t_mid = half / (2.0 * signs[1])
        rq = _rot3(Q, signs[1], t_mid)
        y1, y2 = rq[p1, u], rq[p2, u]
        x1, x2 = rq[u, p1], rq[u, p2]
        # column u: target[:, u] = R_P(a) @ y with rotation angle A = 2 signs[0] a
        dot_a = y1 * target[p1, u] + y2 * target[p2, u]
        crs_a = y1 * target[p2, u] - y2 * target[p1, u]
        # row u: target[u, :] = x @ R_P(c) with rotation angle C = 2 signs[2] c
        dot_c = x1 * target[u, p1] + x2 * target[u, p2]
        crs_c = x1 * target[u, p2] - x2 * target[u, p1]
        ang_a = math.atan2(-crs_a, dot_a) if (abs(crs_a) + abs(dot_a)) > 1e-300 else 0.0
        ang_c = math.atan2(crs_c, dot_c) if (abs(crs_c) + abs(dot_c)) > 1e-300 else 0.0
        seeds.append((ang_a / (2.0 * signs[0]), t_mid, ang_c / (2.0 * signs[2])))
    return seeds


_HALF_PI = math.pi / 2.0
_FALLBACK_SEEDS = [
    (0.0, 0.0, 0.0),
    (0.5, 0.5, 0.5),
    (-0.5, 0.5, -0.5),
    (0.5, -0.5, 0.5),
    (_HALF_PI, 0.0, 0.0),
    (0.0, _HALF_PI, 0.0),
    (0.0, 0.0, _HALF_PI),
    (_HALF_PI, _HALF_PI, _HALF_PI),
    (1.2, 0.3, -0.7),
    (-1.2, -0.3, 0.7),
    (0.9, -1.1, 0.2),
    (-0.2, 1.4, -0.9),
]


def _solve_sector(target: np.ndarray, pattern) -> tuple[float, float, float]:
    """Angles (t0, t1, t2) with R0(t0) R1(t1) R2(t2) = target.

    Damped Newton (Levenberg-Marquardt) on the 3x3 sector representation,
    started from the deterministic Euler seeds and fixed fallback points.
    """
    planes = [p for (p, s, part) in pattern]
    signs = [s for (p, s, part) in pattern]
    gens = [_gen3(p, s) for (p, s, part) in pattern]

    def residual(ths):
        mats = [_rot3(planes[k], signs[k], ths[k]) for k in range(3)]
        prod = mats[0] @ mats[1] @ mats[2]
        return (prod - target).ravel(), mats

    seeds = _euler_seeds(target, planes, signs) + _FALLBACK_SEEDS
    eye3 = np.eye(3)
    for seed in seeds:
        ths = np.array(seed, dtype=float)
        res, mats = residual(ths)
        lam = 1e-10
        ok = False
        for _ in range(120):
            nrm = math.sqrt(float(res @ res))
            if nrm < SOLVER_TOL:
                ok = True
                break
            J = np.empty((9, 3))
            J[:, 0] = (gens[0] @ mats[0] @ mats[1] @ mats[2]).ravel()
            J[:, 1] = (mats[0] @ gens[1] @ mats[1] @ mats[2]).ravel()
            J[:, 2] = (mats[0] @ mats[1] @ gens[2] @ mats[2]).ravel()
            jtj = J.T @ J
            jtr = J.T @ res
            step = -np.linalg.solve(jtj + lam * eye3, jtr)
            tres, tmats = residual(ths + step)
            if math.sqrt(float(tres @ tres)) < nrm:
                ths, res, mats = ths + step, tres, tmats
                lam = max(lam * 0.25, 1e-12)
            else:
                lam *= 10.0
                if lam > 1e8:
                    break
        if ok:
            return tuple(float(_wrap_angle(t)) for t in ths)
    raise RuntimeError("turnover solver failed from all seeds")


def _wrap_angle(x: float) -> float:
    w = (x + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if w == -math.pi else w


def _is_pi_multiple(x: float, tol: float = TRIVIAL_ANGLE) -> bool:
    return abs(x - math.pi * round(x / math.pi)) <= tol


def _trivial_sign(g: Gate) -> int | None:
    """+1/-1 when the matchgate is proportional to the identity, else None."""
    if _is_pi_multiple(g.alpha) and _is_pi_multiple(g.beta):
        parity = (round(g.alpha / math.pi) + round(g.beta / math.pi)) % 2
        return -1 if parity else 1
    return None


def fuse(g1: Gate, g2: Gate) -> Gate:
    """Matchgates on one bond combine by adding angles (XX and YY commute)."""
    if g1.kind != "match" or g2.kind != "match":
        raise ValueError("fuse expects matchgates")
    if g1.q != g2.q:
        raise ValueError(f"cannot fuse gates on different bonds {g1.q} and {g2.q}")
    return matchgate(g1.bond, _wrap_angle(g1.alpha + g2.alpha), _wrap_angle(g1.beta + g2.beta))


def _embed_matchgate3(m4: np.ndarray, local_bond: int) -> np.ndarray:
    """m4 on qubits (local_bond, local_bond+1) of three qubits, site 0 on the
    least significant bit."""
    full = np.zeros((8, 8), dtype=complex)
    if local_bond == 0:                  # kron(I2, m4)
        full[:4, :4] = m4
        full[4:, 4:] = m4
    else:                                # kron(m4, I2)
        full[0::2, 0::2] = m4
        full[1::2, 1::2] = m4
    return full


def _local_unitary(gates_and_bonds) -> np.ndarray:
    """8x8 unitary of a time-ordered word on three adjacent qubits."""
    u = np.eye(8, dtype=complex)
    for g, local_bond in gates_and_bonds:
        u = _embed_matchgate3(matchgate_matrix(g.alpha, g.beta), local_bond) @ u
    return u


def turnover(g1: Gate, g2: Gate, g3: Gate,
             tol: float = TURNOVER_TOL) -> tuple[Gate, Gate, Gate, float]:
    """Rewrite the word (g1 on a, g2 on b, g3 on a) as (g4 on b, g5 on a, g6 on b).

    Returns the three new gates and the global phase phi such that the 8x8
    unitaries satisfy U_new = e^{-i phi} U_old, i.e. adding phi to the
    circuit phase keeps the total exact.  Raises if |a - b| != 1 or if the
    solver cannot reach the verification tolerance (the identity guarantees a
    solution exists, so this signals a bug rather than bad input).
    """
    for g in (g1, g2, g3):
        if g.kind != "match":
            raise ValueError("turnover expects matchgates")
    a, b = g1.bond, g2.bond
    if g3.bond != a or abs(a - b) != 1:
        raise ValueError(f"turnover needs bonds (a, b, a) with |a-b| = 1, "
                         f"got {g1.q}, {g2.q}, {g3.q}")

    s2 = _trivial_sign(g2)
    if s2 is not None:
        g5 = fuse(g1, g3)
        phase = 0.0 if s2 == 1 else math.pi
        return matchgate(b, 0.0, 0.0), g5, matchgate(b, 0.0, 0.0), phase
    s1 = _trivial_sign(g1)
    if s1 is not None:
        return g2, g3, matchgate(b, 0.0, 0.0), (0.0 if s1 == 1 else math.pi)
    s3 = _trivial_sign(g3)
    if s3 is not None:
        return matchgate(b, 0.0, 0.0), g1, g2, (0.0 if s3 == 1 else math.pi)

    base = min(a, b)
    la, lb = a - base, b - base
    word_in = [(g1, la), (g2, lb), (g3, la)]
    bonds_out = (lb, la, lb)

    angles = {}
    for sector in (0, 1):
        target = _sector_target(word_in, sector)
        pattern = _sector_pattern(bonds_out, sector)
        sol = _solve_sector(target, pattern)
        for slot, (plane, sign, part) in enumerate(pattern):
            angles[(slot, part)] = sol[slot]

    g4 = matchgate(b, angles[(0, "alpha")], angles[(0, "beta")])
    g5 = matchgate(a, angles[(1, "alpha")], angles[(1, "beta")])
    g6 = matchgate(b, angles[(2, "alpha")], angles[(2, "beta")])

    u_old = _local_unitary(word_in)
    u_new = _local_unitary([(g4, lb), (g5, la), (g6, lb)])
    tr = np.trace(u_new.conj().T @ u_old)
    phase = float(np.angle(tr))
    residual = np.linalg.norm(u_old - np.exp(1j * phase) * u_new)
    if residual > tol:
        raise RuntimeError(f"turnover verification failed, residual {residual:.2e}")
    return g4, g5, g6, phase


ALPHA_SIGN = -1.0       # rotation angle of the XX part is -2*alpha in its plane
BETA_SIGN = 1.0         # rotation angle of the YY part is +2*beta


def _alpha_sector(bond: int) -> int:
    """Sector index hosting the XX part of a gate on `bond`; YY takes the other.

    Sector 0 collects Majoranas with index mod 4 in {0, 3}, sector 1 those
    with {1, 2}; in both, a gate on bond j rotates the local plane (j, j+1).
    """
    return 1 if bond % 2 == 0 else 0


def _apply_plane_right(R: np.ndarray, j: int, a: float) -> None:
    """R <- R @ G where G rotates plane (j, j+1) by angle a."""
    c, s = math.cos(a), math.sin(a)
    cj = R[:, j].copy()
    R[:, j] = c * cj - s * R[:, j + 1]
    R[:, j + 1] = s * cj + c * R[:, j + 1]


def _apply_plane_left(R: np.ndarray, p: int, a: float) -> None:
    """R <- G @ R where G rotates plane (p, p+1) by angle a."""
    c, s = math.cos(a), math.sin(a)
    rp = R[p, :].copy()
    R[p, :] = c * rp + s * R[p + 1, :]
    R[p + 1, :] = -s * rp + c * R[p + 1, :]


def sector_rotations(gates, n_qubits: int) -> list[np.ndarray]:
    """The two L x L orthogonal sector rotations of a time-ordered gate word."""
    rs = [np.eye(n_qubits), np.eye(n_qubits)]
    for g in gates:
        j = g.bond
        sa = _alpha_sector(j)
        _apply_plane_right(rs[sa], j, 2.0 * ALPHA_SIGN * g.alpha)
        _apply_plane_right(rs[1 - sa], j, 2.0 * BETA_SIGN * g.beta)
    return rs


def _mesh_decompose(R: np.ndarray) -> list[tuple[int, float]]:
    """Tile an orthogonal matrix into the L-layer nearest-neighbour mesh.

    Clements-style nulling: anti-diagonals of the lower triangle are zeroed
    alternately by column rotations (gates at the end of the word, traversed
    towards the corner) and row rotations (gates at the front, traversed away
    from it), leaving a +-1 diagonal that is commuted to the front and
    absorbed into gate angles as pi offsets.  Returns the time-ordered list
    of (plane, rotation angle).
    """
    n = R.shape[0]
    work = R.copy()
    left: list[tuple[int, float]] = []
    right: list[tuple[int, float]] = []
    for d in range(1, n):
        if d % 2 == 1:
            for j in range(d - 1, -1, -1):
                i = n - d + j
                a = math.atan2(work[i, j], work[i, j + 1])
                _apply_plane_right(work, j, a)
                right.append((j, a))
        else:
            for j in range(d):
                i = n - d + j
                a = math.atan2(work[i, j], work[i - 1, j])
                _apply_plane_left(work, i - 1, a)
                left.append((i - 1, a))
    diag = np.diag(work).copy()
    if (np.max(np.abs(work - np.diag(diag))) > 1e-8
            or np.max(np.abs(np.abs(diag) - 1.0)) > 1e-8):
        raise RuntimeError("mesh reduction did not reach a +-1 diagonal")

    word = [(p, -a) for (p, a) in left] + [(p, -a) for (p, a) in reversed(right)]
    # commute the +-1 diagonal forward through the row-rotation prefix
    d_sign = np.where(diag < 0, -1.0, 1.0)
    for idx in range(len(left) - 1, -1, -1):
        p, a = word[idx]
        word[idx] = (p, a * d_sign[p] * d_sign[p + 1])
    # express the diagonal as adjacent-pair flips and merge them into angles
    minus = [i for i in range(n) if d_sign[i] < 0]
    if len(minus) % 2:
        raise RuntimeError("sector rotation has determinant -1")
    flips = [0] * (n - 1)
    for lo, hi in zip(minus[0::2], minus[1::2]):
        for p in range(lo, hi):
            flips[p] ^= 1
    for p0 in range(n - 1):
        if not flips[p0]:
            continue
        for idx, (p, a) in enumerate(word):
            if p == p0:
                word[idx] = (p, a + math.pi)
                break
            if abs(p - p0) == 1:
                word[idx] = (p, -a)
        else:
            raise RuntimeError(f"no mesh slot found for plane {p0} sign flip")
    return word


def _brick_from_sectors(n_qubits: int, rs: list[np.ndarray]) -> list[Gate]:
    """Brick gate list whose sector rotations equal the given pair."""
    words = [_mesh_decompose(rs[0]), _mesh_decompose(rs[1])]
    if [p for p, _ in words[0]] != [p for p, _ in words[1]]:
        raise RuntimeError("sector meshes disagree on the slot pattern")
    gates = []
    for (j, a0), (_, a1) in zip(words[0], words[1]):
        if _alpha_sector(j) == 0:
            alpha, beta = a0 / (2.0 * ALPHA_SIGN), a1 / (2.0 * BETA_SIGN)
        else:
            alpha, beta = a1 / (2.0 * ALPHA_SIGN), a0 / (2.0 * BETA_SIGN)
        gates.append(matchgate(j, _wrap_angle(alpha), _wrap_angle(beta)))
    return gates


class _Triangle:
    """Staircase canonical form: chain c holds one gate per bond c-1 .. 0."""

    def __init__(self, n_qubits: int):
        if n_qubits < 2:
            raise ValueError("need at least 2 qubits")
        self.L = n_qubits
        self.chains: list[list[Gate]] = [[]] + [
            [matchgate(bond, 0.0, 0.0) for bond in range(c)] for c in range(1, n_qubits)
        ]
        self.phase = 0.0

    def copy(self) -> "_Triangle":
        t = _Triangle.__new__(_Triangle)
        t.L = self.L
        t.chains = [list(ch) for ch in self.chains]
        t.phase = self.phase
        return t

    def absorb(self, g: Gate) -> None:
        """Append one gate after the triangle and restore the canonical form.

        The gate percolates down the chains, one turnover per chain, until it
        fuses into the bond-0 slot of chain L-1-bond.
        """
        exc = g
        e = g.bond
        c = self.L - 1
        while e >= 1:
            g4, g5, g6, ph = turnover(self.chains[c][e], self.chains[c][e - 1], exc)
            self.phase += ph
            self.chains[c][e] = g5
            self.chains[c][e - 1] = g6
            exc = g4
            e -= 1
            c -= 1
        self.chains[c][0] = fuse(self.chains[c][0], exc)

    def gates(self) -> list[Gate]:
        out = []
        for c in range(1, self.L):
            out.extend(self.chains[c][::-1])
        return out

    def drain(self) -> tuple[list[Gate], float]:
        """Convert the triangle into a brick of depth <= L.

        The brick angles come from re-tiling the triangle's two sector
        rotations into the mesh pattern, which is exact on the free-fermion
        content (asserted); the remaining freedom is a global phase, fixed by
        a vacuum statevector probe of the two gate words.
        """
        word = self.gates()
        rs_orig = sector_rotations(word, self.L)
        brick = _brick_from_sectors(self.L, rs_orig)
        rs_check = sector_rotations(brick, self.L)
        err = max(np.max(np.abs(rs_check[0] - rs_orig[0])),
                  np.max(np.abs(rs_check[1] - rs_orig[1])))
        if err > 1e-9:
            raise RuntimeError(f"brick sector rotations deviate by {err:.2e}")
        if self.L <= _PROBE_MAX_QUBITS:
            return brick, self.phase + _probe_phase(word, brick, self.L)
        warnings.warn("global phase of the compressed circuit is not tracked "
                      f"beyond {_PROBE_MAX_QUBITS} qubits; set to 0", stacklevel=2)
        return brick, 0.0


_PROBE_MAX_QUBITS = 20


def _probe_phase(word_old, word_new, n_qubits: int) -> float:
    """Phase delta with U_old = e^{i delta} U_new, from a vacuum statevector
    probe; also certifies the full-state equality of the two words."""
    from .simulator import apply_gate

    psi_old = np.zeros(1 << n_qubits, dtype=complex)
    psi_old[0] = 1.0
    psi_new = psi_old.copy()
    for g in word_old:
        psi_old = apply_gate(psi_old, g, n_qubits)
    for g in word_new:
        psi_new = apply_gate(psi_new, g, n_qubits)
    ov = np.vdot(psi_new, psi_old)
    if abs(abs(ov) - 1.0) > 1e-8:
        raise RuntimeError(f"probe overlap magnitude {abs(ov):.6f}; words differ")
    return float(np.angle(ov))


def trotter_circuit(spec: HamiltonianSpec, t: float, n_steps: int) -> Circuit:
    """First-order split: n_steps repetitions of the odd-bond then even-bond
    layer, each bond carrying g(w dt/2, w dt/2).

    The convention exp(-i H dt) = prod exp(+i w dt (XX+YY)/2) per bond fixes
    the angle signs; it is pinned by the two-site exact-evolution test.
    Compression needs the open-boundary brick pattern, so periodic specs and
    superlattice terms are rejected.
    """
    if spec.boundary != "open":
        raise ValueError("trotter_circuit supports open boundaries only; the periodic "
                         "wrap gate breaks the brick pattern needed for compression")
    if spec.potential is not None:
        raise ValueError("trotter_circuit evolves the plain hopping chain; on-site "
                         "superlattice terms are not matchgates")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    c = Circuit(spec.sites)
    if n_steps == 0:
        if t != 0.0:
            raise ValueError("n_steps = 0 only represents t = 0")
        return c
    angle = spec.w * (t / n_steps) / 2.0
    for _ in range(n_steps):
        for parity in (0, 1):       # 1-based odd bonds first = 0-based even
            for bond in range(parity, spec.sites - 1, 2):
                c.append(matchgate(bond, angle, angle))
    return c


def _validate_brick(circuit: Circuit) -> list[list[Gate]]:
    layers = []
    level_parity = None
    current: list[Gate] = []
    used: set[int] = set()
    for n, g in enumerate(circuit.gates):
        if g.kind != "match":
            raise ValueError(f"gate {n} ({g.kind}) is not a matchgate; "
                             "compress expects a matchgate brick circuit")
        parity = g.bond % 2
        overlap = bool(used & set(g.q))
        if current and (parity != level_parity or overlap):
            layers.append(current)
            current, used = [], set()
        if current and parity != level_parity:
            raise ValueError(f"gate {n} on bond {g.bond} breaks the brick layer parity")
        level_parity = parity
        current.append(g)
        used |= set(g.q)
    if current:
        layers.append(current)
    for k in range(1, len(layers)):
        if circuit.n_qubits > 2 and layers[k][0].bond % 2 == layers[k - 1][0].bond % 2:
            raise ValueError(f"layers {k - 1} and {k} share parity; not a brick circuit")
    return layers


def compress(circuit: Circuit) -> Circuit:
    """Compress a matchgate brick circuit to depth <= number of qubits.

    Rewrites are 8x8-local (turnover and fusion only); the full unitary is
    preserved exactly, with the accumulated global phase stored on the
    result.  Circuits already at depth <= L are returned unchanged.
    """
    _validate_brick(circuit)
    L = circuit.n_qubits
    if circuit.depth <= L:
        return Circuit(L, list(circuit.gates), phase=circuit.phase)
    tri = _Triangle(L)
    for g in circuit.gates:
        tri.absorb(g)
    gates, phase = tri.drain()
    out = Circuit(L, gates, phase=circuit.phase + phase)
    assert out.depth <= L
    return out


def compressed_trotter(spec: HamiltonianSpec, t: float, n_steps: int) -> Circuit:
    """Compressed form of trotter_circuit(spec, t, n_steps) in O(log n_steps)
    work: the running powers of the step brick are kept as triangle words and
    squared by absorption, so the step count never materializes as gates."""
    if n_steps <= 0 or t == 0.0:
        return trotter_circuit(spec, t, max(n_steps, 0))
    step = trotter_circuit(spec, t / n_steps, 1)
    L = spec.sites

    def absorb_word(tri: _Triangle, word: list[Gate]) -> None:
        for g in word:
            tri.absorb(g)

    def square(word: list[Gate], phase: float) -> tuple[list[Gate], float]:
        tri = _Triangle(L)
        absorb_word(tri, word)
        absorb_word(tri, word)
        return tri.gates(), 2.0 * phase + tri.phase

    result = _Triangle(L)
    result_phase = 0.0
    cur_word, cur_phase = list(step.gates), 0.0
    n = n_steps
    while True:
        if n & 1:
            absorb_word(result, cur_word)
            result_phase += cur_phase
        n >>= 1
        if n == 0:
            break
        cur_word, cur_phase = square(cur_word, cur_phase)
    gates, phase = result.drain()
    return Circuit(L, gates, phase=result_phase + phase)


def auto_compressed_trotter(spec: HamiltonianSpec, t: float,
                            dt_target: float = 1e-8) -> Circuit:
    """Compressed Trotter circuit with the step size pushed to dt_target, so
    the splitting error is negligible; n_steps is a power of two to keep the
    squaring ladder short."""
    if t == 0.0:
        return Circuit(spec.sites)
    n = 1 << max(0, math.ceil(math.log2(abs(t) / dt_target)))
    return compressed_trotter(spec, t, n)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2^L unitary of the gate list, including the global phase."""
    if circuit.n_qubits > ORACLE_MAX_QUBITS:
        raise ValueError(f"circuit_unitary capped at {ORACLE_MAX_QUBITS} qubits")
    from .simulator import apply_gate

    dim = 1 << circuit.n_qubits
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        u = apply_gate(u, g, circuit.n_qubits)
    return np.exp(1j * circuit.phase) * u
