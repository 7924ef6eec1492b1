"""Critical spin-chain models: local terms, blocking, shifts, and oracles.

All Hamiltonians decompose as translation-invariant sums of one local term.
One-site pieces are symmetrized into the two-site term as (1/2)(z x I + I x z)
so that a periodic chain of bond terms reproduces the model exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ArgumentError, CapacityError, ShapeError
from .symmetry import IN, OUT, ChargedIndex, ChargeGroup, representation
from .tensor import Tensor

PAULI_I = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.diag([1.0, -1.0])

# three-state clock matrices: diagonal field and cyclic shift
POTTS_Z = np.diag([-1.0, 2.0, -1.0])
POTTS_X = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])

ZIGZAG_J2_CRITICAL = 0.24116

ED_DIM_CAP = 2**16


@dataclass(frozen=True)
class ExactReference:
    """Reference ground energy per site with its provenance tag."""

    energy_per_site: float
    source: str
    correlator: Optional[Callable[[int], float]] = None


def xx_exact_correlator(d: int) -> float:
    """Free-fermion two-point function -sin(pi d / 2) / (pi d)."""
    if d < 1:
        raise ArgumentError("distance must be >= 1")
    if d % 2 == 0:
        return 0.0
    return float(-np.sin(np.pi * d / 2) / (np.pi * d))


@dataclass(frozen=True)
class ModelSpec:
    """Which critical chain, its couplings, site dimension, and symmetry."""

    name: str
    d: int
    couplings: tuple = ()
    group: Optional[ChargeGroup] = None
    site_charges: tuple = ()
    string_element: object = None  # group element generating the Z2-like string
    reference: Optional[ExactReference] = None

    def coupling(self, key: str, default=None):
        return dict(self.couplings).get(key, default)

    def site_index(self, direction: int) -> ChargedIndex:
        if self.group is None:
            raise ArgumentError(f"model {self.name} declares no symmetry group")
        sectors = []
        seen = {}
        for q in self.site_charges:
            seen[q] = seen.get(q, 0) + 1
        for q in sorted(seen):
            sectors.append((q, seen[q]))
        return ChargedIndex(self.group, direction, tuple(sectors))


ISING = ModelSpec(
    name="ising",
    d=2,
    group=ChargeGroup.z_n(2),
    site_charges=(0, 1),
    string_element=1,
    reference=ExactReference(-4.0 / np.pi, "exact free-fermion solution"),
)

POTTS3 = ModelSpec(
    name="potts3",
    d=3,
    group=ChargeGroup.z_n(3),
    site_charges=(0, 1, 2),
    string_element=1,
    reference=ExactReference(-2.4359911239, "mps-extrapolated reference"),
)

XX = ModelSpec(
    name="xx",
    d=2,
    group=ChargeGroup.u1(),
    site_charges=(1, -1),
    string_element=np.pi,
    reference=ExactReference(
        -4.0 / np.pi, "exact free-fermion solution", xx_exact_correlator
    ),
)

HEISENBERG_ZIGZAG = ModelSpec(
    name="heisenberg_zigzag",
    d=2,
    couplings=(("j2", ZIGZAG_J2_CRITICAL),),
    group=ChargeGroup.u1(),
    site_charges=(1, -1),
    string_element=np.pi,
    reference=ExactReference(-1.607784749, "mps-extrapolated reference"),
)

MODELS = {m.name: m for m in (ISING, POTTS3, XX, HEISENBERG_ZIGZAG)}


def model_by_name(name: str) -> ModelSpec:
    key = name.lower().replace("-", "_")
    if key not in MODELS:
        raise ArgumentError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    return MODELS[key]


@dataclass
class LocalTerm:
    """A two- or three-site Hamiltonian coupling on a uniform chain.

    `shift` records the total multiple of the identity subtracted so far, so
    reported energies can be un-shifted exactly.  `orig_sites_per_site` is 1
    on the bare lattice and grows under preliminary blocking.
    """

    support: int
    site_dim: int
    matrix: Tensor
    shift: float = 0.0
    orig_sites_per_site: int = 1
    site_index: Optional[ChargedIndex] = None

    def __post_init__(self):
        dim = self.site_dim**self.support
        if self.matrix.shape != (dim, dim):
            raise ShapeError(
                f"term matrix shape {self.matrix.shape} != {(dim, dim)}"
            )
        if np.linalg.norm(self.matrix - self.matrix.conj().T) > 1e-12 * max(
            np.linalg.norm(self.matrix), 1.0
        ):
            raise ShapeError("local term must be Hermitian")

    def as_tensor(self) -> Tensor:
        """Operator as a 2*support-leg tensor (out legs, then in legs)."""
        s, d = self.support, self.site_dim
        return self.matrix.reshape((d,) * (2 * s))


def _sym2(one_site: np.ndarray) -> np.ndarray:
    eye = np.eye(one_site.shape[0])
    return 0.5 * (np.kron(one_site, eye) + np.kron(eye, one_site))


def _heis(a: int, b: int, n: int) -> np.ndarray:
    """sigma(a).sigma(b) embedded in an n-site window (Pauli convention)."""
    total = np.zeros((2**n, 2**n), dtype=complex)
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        ops = [np.eye(2)] * n
        ops[a] = pauli
        ops[b] = pauli.copy()
        acc = np.array([[1.0]])
        for op in ops:
            acc = np.kron(acc, op)
        total += acc
    return total.real


def build_local_term(spec: ModelSpec) -> LocalTerm:
    """Translation-invariant local coupling of the given model."""
    if spec.name == "ising":
        mat = _sym2(PAULI_Z) - np.kron(PAULI_X, PAULI_X)
        return LocalTerm(2, 2, mat, site_index=spec.site_index(OUT))
    if spec.name == "xx":
        mat = np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y)
        return LocalTerm(2, 2, mat.real, site_index=spec.site_index(OUT))
    if spec.name == "potts3":
        mat = (
            _sym2(POTTS_Z)
            - np.kron(POTTS_X, POTTS_X.conj().T)
            - np.kron(POTTS_X.conj().T, POTTS_X)
        )
        return LocalTerm(2, 3, mat, site_index=spec.site_index(OUT))
    if spec.name == "heisenberg_zigzag":
        j2 = spec.coupling("j2", ZIGZAG_J2_CRITICAL)
        mat = 0.5 * _heis(0, 1, 3) + 0.5 * _heis(1, 2, 3) + j2 * _heis(0, 2, 3)
        return LocalTerm(3, 2, mat, site_index=spec.site_index(OUT))
    raise ArgumentError(f"unknown model {spec.name!r}")


def _fused_site_index(index: ChargedIndex, b: int):
    """Sector structure and sorting permutation of b fused sites."""
    charges = index.charge_of_basis()
    fused = np.zeros(1, dtype=np.int64)
    for _ in range(b):
        fused = (fused[:, None] + charges[None, :]).ravel()
    if index.group.kind == "zn":
        fused = np.mod(fused, index.group.modulus)
    order = np.argsort(fused, kind="stable")
    sorted_charges = fused[order]
    sectors = []
    for q in np.unique(sorted_charges):
        sectors.append((int(q), int(np.sum(sorted_charges == q))))
    new_index = ChargedIndex(index.group, index.direction, tuple(sectors))
    return new_index, order


def preliminary_block(
    term: LocalTerm, sites_per_block: int, dim_cap: int = 64
) -> LocalTerm:
    """Re-express the chain on blocks of `sites_per_block` sites.

    Returns a nearest-neighbor two-site term on the blocked lattice whose
    periodic chain has exactly the same spectrum as the original chain.
    Couplings fully inside one block are shared half-and-half between the
    two bonds that see them.  When the model carries a symmetry, the blocked
    basis is permuted to sector order and the term conjugated accordingly.
    """
    b = int(sites_per_block)
    if b < 2:
        raise ArgumentError("sites_per_block must be >= 2")
    d, s = term.site_dim, term.support
    if b < s - 1:
        raise ArgumentError("block too small for the term's support")
    big_d = d**b
    if big_d > dim_cap:
        raise CapacityError(f"blocked dimension {big_d} exceeds cap {dim_cap}")

    window = 2 * b
    dim = d**window
    acc = np.zeros((dim, dim), dtype=complex)
    eye = lambda k: np.eye(d**k)
    for p in range(0, window - s + 1):
        inside = (p + s <= b) or (p >= b)
        weight = 0.5 if inside else 1.0
        embedded = np.kron(np.kron(eye(p), term.matrix), eye(window - s - p))
        acc += weight * embedded

    new_index = None
    if term.site_index is not None:
        new_index, order = _fused_site_index(term.site_index, b)
        perm = np.zeros((big_d, big_d))
        perm[np.arange(big_d), order] = 1.0  # sorted basis m <- product basis order[m]
        two = np.kron(perm, perm)
        acc = two @ acc @ two.T
    if np.linalg.norm(acc.imag) < 1e-14 * max(np.linalg.norm(acc.real), 1.0):
        acc = acc.real
    return LocalTerm(
        support=2,
        site_dim=big_d,
        matrix=acc,
        shift=term.shift * b,
        orig_sites_per_site=term.orig_sites_per_site * b,
        site_index=new_index,
    )


def shift_spectrum(term: LocalTerm) -> LocalTerm:
    """Subtract the largest eigenvalue so the term is negative semidefinite."""
    alpha = float(np.linalg.eigvalsh(term.matrix)[-1])
    dim = term.matrix.shape[0]
    return replace(
        term, matrix=term.matrix - alpha * np.eye(dim), shift=term.shift + alpha
    )


# ---------------------------------------------------------------------------
# exact diagonalization oracle

def _embed(op: np.ndarray, sites, n: int, d: int) -> sp.spmatrix:
    """Sparse embedding of an operator on arbitrary distinct lattice sites."""
    sites = list(sites)
    k = len(sites)
    rest = [r for r in range(n) if r not in sites]
    idx = np.arange(d**n)
    digit = lambda pos: (idx // d ** (n - 1 - pos)) % d
    # product-space index with op sites leading, remaining sites in order
    prod = np.zeros_like(idx)
    for site in sites + rest:
        prod = prod * d + digit(site)
    big = sp.kron(
        sp.csr_matrix(op), sp.identity(d ** (n - k), format="csr"), format="csr"
    )
    q = sp.csr_matrix((np.ones(d**n), (prod, idx)), shape=(d**n, d**n))
    return q.T @ big @ q


def _ed_bonds(spec: ModelSpec, n: int, periodic: bool):
    """(sites, operator) pairs whose sum is the n-site Hamiltonian."""
    if spec.name == "heisenberg_zigzag":
        j2 = spec.coupling("j2", ZIGZAG_J2_CRITICAL)
        ss = _heis(0, 1, 2)
        rng1 = range(n) if periodic else range(n - 1)
        rng2 = range(n) if periodic else range(n - 2)
        for r in rng1:
            yield (r, (r + 1) % n), ss
        for r in rng2:
            yield (r, (r + 2) % n), j2 * ss
        return
    term = build_local_term(spec)
    rng = range(n) if periodic else range(n - 1)
    for r in rng:
        yield (r, (r + 1) % n), term.matrix


def hamiltonian_matrix(
    spec: ModelSpec, n_sites: int, periodic: bool, cap: int = ED_DIM_CAP
) -> sp.spmatrix:
    d = spec.d
    if d**n_sites > cap:
        raise CapacityError(f"Hilbert dimension {d**n_sites} exceeds cap {cap}")
    dim = d**n_sites
    ham = sp.csr_matrix((dim, dim), dtype=complex)
    for sites, op in _ed_bonds(spec, n_sites, periodic):
        ham = ham + _embed(op, sites, n_sites, d)
    return ham


def exact_diag_ground(
    spec: ModelSpec, n_sites: int, periodic: bool, cap: int = ED_DIM_CAP
):
    """Ground energy per site and ground vector of the finite chain."""
    ham = hamiltonian_matrix(spec, n_sites, periodic, cap=cap)
    dim = ham.shape[0]
    if dim <= 64:
        vals, vecs = np.linalg.eigh(ham.toarray())
        return float(vals[0]) / n_sites, vecs[:, 0]
    vals, vecs = spla.eigsh(ham, k=1, which="SA", tol=1e-12, maxiter=5000)
    return float(vals[0]) / n_sites, vecs[:, 0]


def term_chain_spectrum(term: LocalTerm, n_sites: int, periodic: bool = True):
    """Full spectrum of a chain of identical local terms (test oracle)."""
    d, s = term.site_dim, term.support
    dim = d**n_sites
    if dim > 4096:
        raise CapacityError(f"dense spectrum of dimension {dim} refused")
    ham = np.zeros((dim, dim), dtype=complex)
    rng = range(n_sites) if periodic else range(n_sites - s + 1)
    for r in rng:
        sites = [(r + j) % n_sites for j in range(s)]
        ham += _embed(term.matrix, sites, n_sites, d).toarray()
    return np.linalg.eigvalsh(ham)


def xx_mode_sum_energy(n_sites: int, periodic: bool = True) -> float:
    """Free-fermion mode-sum ground energy of the XX chain (test oracle).

    The string transformation maps the chain to free fermions with boundary
    conditions tied to fermion parity; both parity sectors are minimized.
    """
    if not periodic:
        # open chain: plain hopping modes k = pi m / (n+1)
        k = np.pi * np.arange(1, n_sites + 1) / (n_sites + 1)
        eps = 4.0 * np.cos(k)
        return float(eps[eps < 0].sum())

    best = np.inf
    for parity in (0, 1):
        if parity == 0:  # even fermion number: antiperiodic momenta
            k = 2.0 * np.pi * (np.arange(n_sites) + 0.5) / n_sites
        else:
            k = 2.0 * np.pi * np.arange(n_sites) / n_sites
        eps = np.sort(4.0 * np.cos(k))
        fill = int(np.sum(eps < 0))
        if fill % 2 != parity:
            # flip one mode at the Fermi edge to fix the particle parity
            candidates = []
            if fill < n_sites:
                candidates.append(eps[:fill].sum() + eps[fill])
            if fill > 0:
                candidates.append(eps[: fill - 1].sum())
            energy = min(candidates)
        else:
            energy = eps[:fill].sum()
        best = min(best, float(energy))
    return best
