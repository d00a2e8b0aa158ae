"""Shared gate-list circuit representation and its JSON wire format.

Gates act on a chain of L qubits, qubit j <-> lattice site j (0-based,
little-endian: basis index n has occupation of site j in bit j).  Three gate
kinds exist:

    x       single-qubit X on qubit i
    givens  number-conserving rotation on qubits (i, i+1), angle theta plus
            an optional phase phi (phi = 0 recovers the plain real rotation)
    match   exp[i(alpha XX + beta YY)] on qubits (i, i+1)

JSON format (shared by state preparation, compression and simulation):

    {"qubits": L, "phase": phi_global,
     "gates": [{"kind": "x", "q": [i]},
               {"kind": "givens", "q": [i, i+1], "theta": t},
               {"kind": "match", "q": [i, i+1], "alpha": a, "beta": b}]}

Angles are radians, qubit indices 0-based.  A "givens" entry may carry an
extra "phi" field when a complex mode rotation is required; it is omitted
when zero so the plain format round-trips unchanged.  "phase" is a global
phase tracked through circuit rewrites so that unitary comparisons can be
exact; it defaults to 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

CNOTS_PER_MATCHGATE = 3
CNOTS_PER_GIVENS = 2


@dataclass(frozen=True)
class Gate:
    kind: str                 # "x" | "givens" | "match"
    q: tuple[int, ...]
    theta: float = 0.0
    phi: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("x", "givens", "match"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n = 1 if self.kind == "x" else 2
        if len(self.q) != n:
            raise ValueError(f"{self.kind} gate needs {n} qubit(s), got {self.q}")
        if n == 2 and self.q[1] != self.q[0] + 1:
            raise ValueError("two-qubit gates act on nearest neighbours (i, i+1)")

    @property
    def bond(self) -> int:
        """Lower qubit index of a two-qubit gate."""
        return self.q[0]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "q": list(self.q)}
        if self.kind == "givens":
            d["theta"] = self.theta
            if self.phi != 0.0:
                d["phi"] = self.phi
        elif self.kind == "match":
            d["alpha"] = self.alpha
            d["beta"] = self.beta
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        kind = d["kind"]
        q = tuple(int(i) for i in d["q"])
        if kind == "x":
            return cls("x", q)
        if kind == "givens":
            return cls("givens", q, theta=float(d["theta"]), phi=float(d.get("phi", 0.0)))
        if kind == "match":
            return cls("match", q, alpha=float(d["alpha"]), beta=float(d["beta"]))
        raise ValueError(f"unknown gate kind {kind!r}")


def x_gate(i: int) -> Gate:
    return Gate("x", (i,))


def givens_gate(i: int, theta: float, phi: float = 0.0) -> Gate:
    return Gate("givens", (i, i + 1), theta=theta, phi=phi)


def matchgate(i: int, alpha: float, beta: float) -> Gate:
    return Gate("match", (i, i + 1), alpha=alpha, beta=beta)


def matchgate_matrix(alpha: float, beta: float) -> np.ndarray:
    """4x4 unitary of exp[i(alpha XX + beta YY)].

    Basis order (00, 01, 10, 11) with the low bit = lower qubit; the gate is
    symmetric under exchanging the two qubits so the pair ordering is moot.
    """
    cm, sm = math.cos(alpha - beta), math.sin(alpha - beta)
    cp, sp = math.cos(alpha + beta), math.sin(alpha + beta)
    return np.array(
        [[cm, 0, 0, 1j * sm],
         [0, cp, 1j * sp, 0],
         [0, 1j * sp, cp, 0],
         [1j * sm, 0, 0, cm]],
        dtype=complex,
    )


def givens_mode_matrix(theta: float, phi: float = 0.0) -> np.ndarray:
    """2x2 single-particle rotation on modes (i, i+1): R(theta) @ diag(1, e^{i phi})."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s * np.exp(1j * phi)], [s, c * np.exp(1j * phi)]])


def givens_matrix(theta: float, phi: float = 0.0) -> np.ndarray:
    """4x4 unitary of the two-qubit Givens gate.

    Acts as the identity on |00>, as U^T on the single-excitation block
    (basis |site i occupied>, |site i+1 occupied>), and as det(U) = e^{i phi}
    on |11>, where U = givens_mode_matrix(theta, phi).  Nearest-neighbour
    number-conserving gates pick up no Jordan-Wigner string, so the fermionic
    and qubit gates coincide.
    """
    u = givens_mode_matrix(theta, phi)
    g = np.eye(4, dtype=complex)
    # basis index 1 = |01> = low qubit (site i) occupied, 2 = |10> = site i+1
    g[1, 1], g[1, 2] = u[0, 0], u[1, 0]
    g[2, 1], g[2, 2] = u[0, 1], u[1, 1]
    g[3, 3] = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    return g


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if g.kind == "givens":
        return givens_matrix(g.theta, g.phi)
    return matchgate_matrix(g.alpha, g.beta)


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    phase: float = 0.0      # global phase metadata, exp(i*phase) times the gate product

    def append(self, gate: Gate) -> None:
        if max(gate.q) >= self.n_qubits:
            raise ValueError(f"gate {gate} out of range for {self.n_qubits} qubits")
        self.gates.append(gate)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def layers(self) -> list[list[Gate]]:
        """Greedy ASAP layering; gates in one layer act on disjoint qubits."""
        layers: list[list[Gate]] = []
        level_of_qubit = [0] * self.n_qubits
        for g in self.gates:
            lvl = max(level_of_qubit[q] for q in g.q)
            if lvl == len(layers):
                layers.append([])
            layers[lvl].append(g)
            for q in g.q:
                level_of_qubit[q] = lvl + 1
        return layers

    @property
    def depth(self) -> int:
        return len(self.layers())

    def cnot_equivalents(self) -> int:
        """CNOT count of the standard decompositions (3 per matchgate, 2 per Givens)."""
        n = 0
        for g in self.gates:
            if g.kind == "match":
                n += CNOTS_PER_MATCHGATE
            elif g.kind == "givens":
                n += CNOTS_PER_GIVENS
        return n

    def to_dict(self) -> dict:
        return {
            "qubits": self.n_qubits,
            "phase": self.phase,
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        c = cls(int(d["qubits"]), phase=float(d.get("phase", 0.0)))
        for gd in d.get("gates", []):
            c.append(Gate.from_dict(gd))
        return c

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "Circuit":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
