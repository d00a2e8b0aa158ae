"""Single-particle Hamiltonian data for the hard-core boson chain.

The chain of L sites carries the tight-binding Hamiltonian

    H = -w sum_j (b_j^dag b_{j+1} + h.c.)            (hopping w, default 1)

optionally supplemented by a deep superlattice potential of period p sites.
In the fermion picture the same quadratic form h_mn applies, so everything
downstream (Slater dynamics, ensembles, circuits) consumes the L x L matrix
built here.

Conventions.  Sites are 1-based in formulas quoted in docstrings and 0-based
everywhere in code; the serialized spec states this.  The superlattice
diagonal is

    h_jj = -V cos(2 pi j / p)        (1-based j)

i.e. wells of depth -V on sites p, 2p, ..., L, one well per period, L/p wells
in total.  This phase convention puts the low-energy manifold on the sites
j = n p that the approximate eigenmodes of `superlattice_modes` live on.
(The potential is only defined up to a global site shift; this choice pins
it so the n-th well sits on site n p.)
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class SuperlatticePotential:
    V: float
    p: int


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters of the chain: size, hopping, boundary, optional potential."""

    sites: int
    w: float = 1.0
    boundary: str = "open"
    potential: SuperlatticePotential | None = None

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.sites}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if self.potential is not None:
            p = self.potential.p
            if p < 1:
                raise ValueError(f"potential period must be positive, got {p}")
            if self.sites % p != 0:
                raise ValueError(f"period p={p} must divide L={self.sites}")

    def to_dict(self) -> dict:
        pot = None
        if self.potential is not None:
            pot = {"V": self.potential.V, "p": self.potential.p}
        return {"sites": self.sites, "w": self.w, "boundary": self.boundary, "potential": pot}

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        pot = d.get("potential")
        potential = None if pot is None else SuperlatticePotential(float(pot["V"]), int(pot["p"]))
        return cls(int(d["sites"]), float(d.get("w", 1.0)), d.get("boundary", "open"), potential)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "HamiltonianSpec":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class HoppingMatrix:
    """L x L Hermitian single-particle matrix together with the spec it came from."""

    matrix: np.ndarray
    spec: HamiltonianSpec


def potential_diagonal(spec: HamiltonianSpec) -> np.ndarray:
    """On-site energies; zero without a potential, -V cos(2 pi j / p) with one."""
    L = spec.sites
    if spec.potential is None:
        return np.zeros(L)
    V, p = spec.potential.V, spec.potential.p
    j = np.arange(1, L + 1)          # 1-based site index in the formula
    return -V * np.cos(2.0 * np.pi * j / p)


def build_hopping_matrix(spec: HamiltonianSpec) -> HoppingMatrix:
    """Nearest-neighbour hopping -w on every bond (wrap bond iff periodic),
    superlattice on-site terms on the diagonal."""
    L = spec.sites
    h = np.zeros((L, L), dtype=complex)
    for j in range(L - 1):
        h[j, j + 1] = h[j + 1, j] = -spec.w
    if spec.boundary == "periodic":
        h[0, L - 1] = h[L - 1, 0] = -spec.w
    h[np.diag_indices(L)] = potential_diagonal(spec)
    assert np.max(np.abs(h - h.conj().T)) <= HERMITICITY_TOL
    return HoppingMatrix(h, spec)


def momentum_grid(n_sites: int) -> np.ndarray:
    """Integer mode indices k = -L//2 .. L-1-L//2; physical momentum is 2 pi k / L."""
    return np.arange(n_sites) - n_sites // 2


def dispersion(spec: HamiltonianSpec, k: int) -> float:
    """Free-fermion band energy -2w cos(2 pi k / L) of momentum mode k (PBC only)."""
    if spec.boundary != "periodic":
        raise ValueError("dispersion needs periodic boundary; open-chain eigenvalues "
                         "carry no momentum label, only an eigenstate index")
    return -2.0 * spec.w * math.cos(2.0 * math.pi * k / spec.sites)


def superlattice_modes(spec: HamiltonianSpec, q: int) -> np.ndarray:
    """Approximate low-band eigenmode of the deep superlattice.

    Amplitude sqrt(p/L) on sites j = n p (n = 1..L/p) with Bloch phase
    e^{i n q 2 pi/(L/p)}, zero elsewhere.  Valid for V >> w; used only for
    cross-checks against exact eigenvectors of h.
    """
    if spec.potential is None:
        raise ValueError("superlattice_modes needs a potential in the spec")
    V, p = spec.potential.V, spec.potential.p
    L = spec.sites
    n_wells = L // p
    if not 0 <= q < n_wells:
        raise ValueError(f"q must lie in 0..{n_wells - 1}, got {q}")
    if abs(V) < 10 * abs(spec.w):
        warnings.warn(f"superlattice approximation assumes V >> w; V={V}, w={spec.w}",
                      stacklevel=2)
    mode = np.zeros(L, dtype=complex)
    n = np.arange(1, n_wells + 1)
    mode[n * p - 1] = math.sqrt(p / L) * np.exp(2j * np.pi * n * q / n_wells)
    return mode
