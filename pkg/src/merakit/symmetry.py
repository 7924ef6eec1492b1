"""Abelian symmetric tensors: Z_n and U(1) charge-conserving block storage.

A :class:`SymTensor` stores only blocks whose signed charges sum to zero
(outgoing minus incoming), which enforces invariance under the group action
by construction.  The dense path is the reference: every operation here is
required to commute with :meth:`SymTensor.to_dense`.

Dense basis convention: each charged index enumerates its sectors in listed
order, degeneracy-major, and dense tensors are row-major over those bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ArgumentError, ChargeError, ShapeError
from .tensor import Tensor, _svd_matrix

OUT = 1
IN = -1


@dataclass(frozen=True)
class ChargeGroup:
    """Z_n (modulus n >= 2) or U(1); fusion is (modular) integer addition."""

    kind: str  # "zn" | "u1"
    modulus: int | None = None

    @classmethod
    def z_n(cls, n: int) -> "ChargeGroup":
        if n < 2:
            raise ArgumentError("Z_n needs modulus n >= 2")
        return cls("zn", n)

    @classmethod
    def u1(cls) -> "ChargeGroup":
        return cls("u1", None)

    def fuse(self, *charges: int) -> int:
        total = int(sum(charges))
        return total % self.modulus if self.kind == "zn" else total

    def dual(self, charge: int) -> int:
        return (-charge) % self.modulus if self.kind == "zn" else -charge

    def elements(self):
        """Group elements, for group-averaging; only enumerable for Z_n."""
        if self.kind != "zn":
            raise ArgumentError("U(1) has no finite element list")
        return range(self.modulus)

    def phase(self, g, charge: int) -> complex:
        """Character of group element `g` on a charge.

        For Z_n, `g` is an integer exponent; for U(1), `g` is an angle.
        """
        if self.kind == "zn":
            return np.exp(2j * np.pi * (g % self.modulus) * charge / self.modulus)
        return np.exp(1j * g * charge)


@dataclass(frozen=True)
class ChargedIndex:
    """One tensor leg: a direction and an ordered list of (charge, degeneracy)."""

    group: ChargeGroup
    direction: int
    sectors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.direction not in (OUT, IN):
            raise ArgumentError("direction must be OUT (+1) or IN (-1)")
        charges = [q for q, _ in self.sectors]
        if len(set(charges)) != len(charges):
            raise ChargeError("sector charges must be distinct")
        if any(d < 1 for _, d in self.sectors):
            raise ChargeError("sector degeneracies must be >= 1")

    @property
    def dim(self) -> int:
        return sum(d for _, d in self.sectors)

    def slices(self) -> dict:
        out, offset = {}, 0
        for q, d in self.sectors:
            out[q] = slice(offset, offset + d)
            offset += d
        return out

    def charge_of_basis(self) -> np.ndarray:
        return np.concatenate([[q] * d for q, d in self.sectors])

    def dual(self) -> "ChargedIndex":
        return ChargedIndex(self.group, -self.direction, self.sectors)

    def matches(self, other: "ChargedIndex") -> bool:
        """Contractable against `other`: same sectors, opposite direction."""
        return (
            self.group == other.group
            and self.sectors == other.sectors
            and self.direction == -other.direction
        )


def representation(index: ChargedIndex, g) -> np.ndarray:
    """Diagonal unitary representing group element `g` on this index."""
    phases = np.array([index.group.phase(g, q) for q in index.charge_of_basis()])
    return np.diag(phases)


def _net_charge(group, indices, charges) -> int:
    signed = [idx.direction * q for idx, q in zip(indices, charges)]
    return group.fuse(*signed) if signed else 0


def allowed_block_keys(indices: Sequence[ChargedIndex]):
    """All charge assignments with zero net charge (outgoing minus incoming)."""
    group = indices[0].group
    keys = [()]
    for idx in indices:
        keys = [k + (q,) for k in keys for q, _ in idx.sectors]
    return [k for k in keys if _net_charge(group, indices, k) == 0]


def charge_mask(indices: Sequence[ChargedIndex]) -> np.ndarray:
    """Boolean dense mask of entries allowed by charge conservation."""
    group = indices[0].group
    total = 0
    for ax, idx in enumerate(indices):
        signed = idx.direction * idx.charge_of_basis()
        shape = [1] * len(indices)
        shape[ax] = idx.dim
        total = total + signed.reshape(shape)
    if group.kind == "zn":
        total = np.mod(total, group.modulus)
    return total == 0


class SymTensor:
    """Charge-labeled block-sparse tensor; stores only net-charge-zero blocks."""

    def __init__(self, indices: Sequence[ChargedIndex], blocks: dict):
        self.indices = tuple(indices)
        self.group = self.indices[0].group
        for key, block in blocks.items():
            if _net_charge(self.group, self.indices, key) != 0:
                raise ChargeError(f"block {key} violates charge conservation")
            expect = tuple(dict(idx.sectors)[q] for idx, q in zip(self.indices, key))
            if np.shape(block) != expect:
                raise ShapeError(f"block {key} has shape {np.shape(block)}, expected {expect}")
        self.blocks = {k: np.asarray(v) for k, v in blocks.items()}

    @property
    def shape(self) -> tuple:
        return tuple(idx.dim for idx in self.indices)

    def to_dense(self) -> Tensor:
        dense = np.zeros(self.shape, dtype=complex)
        slices = [idx.slices() for idx in self.indices]
        for key, block in self.blocks.items():
            dense[tuple(sl[q] for sl, q in zip(slices, key))] = block
        return dense

    def norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks.values())))

    def conj(self) -> "SymTensor":
        return SymTensor(
            [idx.dual() for idx in self.indices],
            {k: np.conj(b) for k, b in self.blocks.items()},
        )

    def __add__(self, other: "SymTensor") -> "SymTensor":
        if self.indices != other.indices:
            raise ChargeError("cannot add tensors with different index structure")
        out = dict(self.blocks)
        for k, b in other.blocks.items():
            out[k] = out[k] + b if k in out else b
        return SymTensor(self.indices, out)

    def __mul__(self, scalar) -> "SymTensor":
        return SymTensor(self.indices, {k: scalar * b for k, b in self.blocks.items()})

    __rmul__ = __mul__


def project_symmetric(dense: Tensor, indices: Sequence[ChargedIndex]) -> SymTensor:
    """Keep only the net-charge-zero blocks of a dense tensor.

    Idempotent; equals the group average over conjugations for Z_n.
    """
    dense = np.asarray(dense)
    if dense.shape != tuple(idx.dim for idx in indices):
        raise ShapeError(
            f"dense shape {dense.shape} does not match indices "
            f"{tuple(idx.dim for idx in indices)}"
        )
    slices = [idx.slices() for idx in indices]
    blocks = {}
    for key in allowed_block_keys(indices):
        block = dense[tuple(sl[q] for sl, q in zip(slices, key))]
        if np.any(block != 0):
            blocks[key] = block.copy()
    return SymTensor(indices, blocks)


def sym_contract(a: SymTensor, b: SymTensor, pairs: Sequence[tuple]) -> SymTensor:
    """Blockwise contraction; equals the dense contraction after to_dense."""
    pairs = list(pairs)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    if len(set(ax_a)) != len(ax_a) or len(set(ax_b)) != len(ax_b):
        raise ArgumentError("an index may be paired at most once")
    for ia, ib in pairs:
        if not a.indices[ia].matches(b.indices[ib]):
            raise ChargeError(
                f"paired legs {ia},{ib} have mismatched sectors or directions"
            )
    keep_a = [i for i in range(len(a.indices)) if i not in ax_a]
    keep_b = [i for i in range(len(b.indices)) if i not in ax_b]
    out_indices = [a.indices[i] for i in keep_a] + [b.indices[i] for i in keep_b]

    by_key = {}
    for kb, block_b in b.blocks.items():
        key = tuple(kb[i] for i in ax_b)
        by_key.setdefault(key, []).append((kb, block_b))

    blocks: dict = {}
    for ka, block_a in a.blocks.items():
        key = tuple(ka[i] for i in ax_a)
        for kb, block_b in by_key.get(key, ()):
            out_key = tuple(ka[i] for i in keep_a) + tuple(kb[i] for i in keep_b)
            term = np.tensordot(block_a, block_b, axes=(ax_a, ax_b))
            if out_key in blocks:
                blocks[out_key] = blocks[out_key] + term
            else:
                blocks[out_key] = term
    if not out_indices:  # full contraction to a scalar
        return sum(blocks.values()) if blocks else 0.0
    return SymTensor(out_indices, blocks)


class SymSvdResult(NamedTuple):
    """Per-charge-sector SVD factors assembled as SymTensors."""

    u: SymTensor
    s: dict
    vh: SymTensor


def sym_svd(a: SymTensor, left_axes: Sequence[int]) -> SymSvdResult:
    """Blockwise SVD over the charge-diagonal matricization.

    The new bond index carries one sector per fused row charge with
    degeneracy equal to that sector's rank.  Equivalent to the dense SVD up
    to rotations inside degenerate singular subspaces.
    """
    left = list(left_axes)
    if not left or len(left) >= len(a.indices) or len(set(left)) != len(left):
        raise ArgumentError("left index set must be a proper non-empty subset")
    right = [i for i in range(len(a.indices)) if i not in left]
    group = a.group

    def row_charge(key):
        return group.fuse(*[a.indices[i].direction * key[i] for i in left])

    # organize row/column charge combinations per fused sector
    sectors: dict = {}
    for key in a.blocks:
        q = row_charge(key)
        rows, cols = sectors.setdefault(q, (set(), set()))
        rows.add(tuple(key[i] for i in left))
        cols.add(tuple(key[i] for i in right))

    dims = lambda axes, combo: [
        dict(a.indices[i].sectors)[q] for i, q in zip(axes, combo)
    ]
    u_blocks, s_by_q, vh_blocks, bond_sectors = {}, {}, {}, []
    for q in sorted(sectors):
        rows = sorted(sectors[q][0])
        cols = sorted(sectors[q][1])
        rdims = [int(np.prod(dims(left, r))) for r in rows]
        cdims = [int(np.prod(dims(right, c))) for c in cols]
        roff = np.concatenate([[0], np.cumsum(rdims)])
        coff = np.concatenate([[0], np.cumsum(cdims)])
        mat = np.zeros((roff[-1], coff[-1]), dtype=complex)
        for key, block in a.blocks.items():
            if row_charge(key) != q:
                continue
            ri = rows.index(tuple(key[i] for i in left))
            ci = cols.index(tuple(key[i] for i in right))
            mat[roff[ri]:roff[ri + 1], coff[ci]:coff[ci + 1]] = np.transpose(
                block, left + right
            ).reshape(rdims[ri], cdims[ci])
        umat, svals, vhmat = _svd_matrix(mat)
        rank = len(svals)
        if rank == 0:
            continue
        s_by_q[q] = svals
        bond_sectors.append((q, rank))
        for ri, r in enumerate(rows):
            u_blocks[r + (q,)] = umat[roff[ri]:roff[ri + 1], :].reshape(
                *dims(left, r), rank
            )
        for ci, c in enumerate(cols):
            vh_blocks[(q,) + c] = vhmat[:, coff[ci]:coff[ci + 1]].reshape(
                rank, *dims(right, c)
            )

    bond_u = ChargedIndex(group, IN, tuple(bond_sectors))
    u_indices = [a.indices[i] for i in left] + [bond_u]
    vh_indices = [bond_u.dual()] + [a.indices[i] for i in right]
    return SymSvdResult(
        SymTensor(u_indices, u_blocks),
        s_by_q,
        SymTensor(vh_indices, vh_blocks),
    )
