"""Dense tensor algebra: contraction, index surgery, factorizations, eigensolvers.

Tensors are plain numpy arrays (complex or real double precision) with
row-major entry order.  All functions are pure; nothing mutates its inputs.
Contractions route through :func:`ncon`, which plans pairwise contraction
orders with opt_einsum and tallies theoretical multiply-add counts into any
active :class:`FlopMeter` (used by the cost-scaling benchmarks).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
import opt_einsum as oe
import scipy.sparse.linalg as spla

from .errors import (
    ArgumentError,
    CapacityError,
    ConvergenceError,
    FactorizationError,
    ShapeError,
)

Tensor = np.ndarray

EIG_ALL_DIM_CAP = 4096


def norm(a: Tensor) -> float:
    """Frobenius norm of a tensor of any rank."""
    return float(np.linalg.norm(np.asarray(a).ravel()))


def assert_finite(a: Tensor, what: str = "tensor") -> Tensor:
    if not np.all(np.isfinite(a)):
        raise FactorizationError(f"{what} contains non-finite entries")
    return a


# ---------------------------------------------------------------------------
# contraction planning / flop accounting

_METERS: list["FlopMeter"] = []


class FlopMeter:
    """Context manager accumulating planned multiply-add counts.

    Counts are opt_einsum's theoretical costs for the executed contraction
    paths, so they measure algorithmic scaling rather than wall-clock noise.
    """

    def __init__(self) -> None:
        self.total = 0.0

    def __enter__(self) -> "FlopMeter":
        _METERS.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _METERS.remove(self)


def _tally(cost: float) -> None:
    for meter in _METERS:
        meter.total += cost


@lru_cache(maxsize=None)
def _plan(eq: str, shapes: tuple) -> tuple:
    path, info = oe.contract_path(eq, *shapes, shapes=True, optimize="dp")
    return path, float(info.opt_cost)


def _ncon_equation(connects: Sequence[Sequence[int]]) -> str:
    """Translate ncon-style integer labels into an einsum equation.

    Positive labels are contracted, negative labels are open output legs
    ordered -1, -2, ...
    """
    flat = [lab for conn in connects for lab in conn]
    out = sorted({lab for lab in flat if lab < 0}, reverse=True)
    symbol = {lab: oe.get_symbol(i) for i, lab in enumerate(sorted(set(flat)))}
    terms = ["".join(symbol[lab] for lab in conn) for conn in connects]
    return ",".join(terms) + "->" + "".join(symbol[lab] for lab in out)


def ncon(tensors: Sequence[Tensor], connects: Sequence[Sequence[int]]):
    """Contract a tensor network given ncon-style index labels.

    Each entry of `connects` lists the labels of the corresponding tensor's
    legs; equal positive labels are summed over, negative labels become
    output legs in the order -1, -2, ...  A fully closed network returns a
    scalar.
    """
    if len(tensors) != len(connects):
        raise ArgumentError("one connect list per tensor required")
    for t, conn in zip(tensors, connects):
        if np.ndim(t) != len(conn):
            raise ShapeError(
                f"tensor of rank {np.ndim(t)} given {len(conn)} labels"
            )
    eq = _ncon_equation(tuple(tuple(c) for c in connects))
    shapes = tuple(np.shape(t) for t in tensors)
    path, cost = _plan(eq, shapes)
    _tally(cost)
    result = oe.contract(eq, *tensors, optimize=path)
    return result[()] if np.ndim(result) == 0 else result


def ncon_cost(shapes: Sequence[tuple], connects: Sequence[Sequence[int]]) -> float:
    """Planned multiply-add count of a contraction, without executing it."""
    eq = _ncon_equation(tuple(tuple(c) for c in connects))
    _, cost = _plan(eq, tuple(tuple(s) for s in shapes))
    return cost


# ---------------------------------------------------------------------------
# index surgery

def contract(a: Tensor, b: Tensor, pairs: Sequence[tuple[int, int]]) -> Tensor:
    """Contract `a` with `b` over the given (axis-of-a, axis-of-b) pairs.

    The result carries a's unpaired legs followed by b's unpaired legs.
    Implemented as permute + fuse + matrix multiply, so the cost is the
    product of all distinct dimensions involved.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    pairs = list(pairs)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    if len(set(ax_a)) != len(ax_a) or len(set(ax_b)) != len(ax_b):
        raise ArgumentError("an index may be paired at most once")
    for ia, ib in pairs:
        if not (0 <= ia < a.ndim and 0 <= ib < b.ndim):
            raise ArgumentError(f"axis pair ({ia},{ib}) out of range")
        if a.shape[ia] != b.shape[ib]:
            raise ShapeError(
                f"paired axes have dims {a.shape[ia]} != {b.shape[ib]}"
            )
    return np.tensordot(a, b, axes=(ax_a, ax_b))


def permute(a: Tensor, order: Sequence[int]) -> Tensor:
    """Reorder tensor legs; `order[i]` gives the old position of new leg i."""
    a = np.asarray(a)
    if sorted(order) != list(range(a.ndim)):
        raise ArgumentError(f"{order!r} is not a permutation of {a.ndim} axes")
    return np.transpose(a, order)


def fuse(a: Tensor, groups: Sequence[Sequence[int]]) -> Tensor:
    """Fuse groups of legs into single legs (row-major within each group).

    `groups` must partition the axes; the output carries one leg per group,
    in the given order.  Inverse of :func:`split` for the matching shape.
    """
    a = np.asarray(a)
    flat = [ax for g in groups for ax in g]
    if sorted(flat) != list(range(a.ndim)):
        raise ArgumentError("groups must partition the tensor's axes")
    a = np.transpose(a, flat)
    shape = []
    pos = 0
    for g in groups:
        dim = 1
        for _ in g:
            dim *= a.shape[pos]
            pos += 1
        shape.append(dim)
    return a.reshape(shape)


def split(a: Tensor, shape: Sequence[int]) -> Tensor:
    """Split legs by reshaping to `shape` (row-major index mapping)."""
    a = np.asarray(a)
    if int(np.prod(shape)) != a.size:
        raise ShapeError(
            f"cannot split size-{a.size} tensor into shape {tuple(shape)}"
        )
    return a.reshape(tuple(shape))


# ---------------------------------------------------------------------------
# factorizations

class SvdResult(NamedTuple):
    """Singular value decomposition a ≈ u @ diag(s) @ vh (matricized)."""

    u: Tensor
    s: np.ndarray
    vh: Tensor


def _svd_matrix(mat: np.ndarray) -> tuple:
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:  # gesdd occasionally fails where gesvd converges
        import scipy.linalg as sla

        return sla.svd(mat, full_matrices=False, lapack_driver="gesvd")
    except Exception as exc:  # pragma: no cover - double LAPACK failure
        raise FactorizationError(
            "SVD failed to converge",
            diagnostics={"shape": mat.shape, "norm": norm(mat)},
        ) from exc


def svd(a: Tensor, left_axes: Sequence[int]) -> SvdResult:
    """SVD of `a` matricized with `left_axes` as rows, the rest as columns.

    Returns u with shape (left dims..., k) and vh with shape (k, right
    dims...), k = min of the matricized dimensions; both factors isometric.
    """
    a = np.asarray(a)
    left = list(left_axes)
    if not left or len(left) >= a.ndim or len(set(left)) != len(left):
        raise ArgumentError("left index set must be a proper non-empty subset")
    right = [ax for ax in range(a.ndim) if ax not in left]
    ldims = [a.shape[ax] for ax in left]
    rdims = [a.shape[ax] for ax in right]
    mat = np.transpose(a, left + right).reshape(int(np.prod(ldims)), -1)
    u, s, vh = _svd_matrix(mat)
    k = s.shape[0]
    return SvdResult(u.reshape(*ldims, k), s, vh.reshape(k, *rdims))


class EigResult(NamedTuple):
    """Eigenpairs sorted by descending eigenvalue modulus."""

    values: np.ndarray
    vectors: list


def eig_all(mat: Tensor, cap: int = EIG_ALL_DIM_CAP) -> EigResult:
    """All eigenpairs of an explicit square matrix, sorted by |eigenvalue|."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {mat.shape}")
    n = mat.shape[0]
    if n > cap:
        raise CapacityError(f"matrix dimension {n} exceeds cap {cap}")
    values, vectors = np.linalg.eig(mat)
    order = np.argsort(-np.abs(values), kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    scale = max(norm(mat), 1e-300)
    residual = norm(mat @ vectors - vectors * values[None, :]) / scale
    if residual > 1e-8 * np.sqrt(n):
        raise FactorizationError(
            "eigendecomposition residual too large",
            diagnostics={"residual": residual},
        )
    return EigResult(values, [vectors[:, i] for i in range(n)])


def dominant_eig(
    apply_map: Callable[[Tensor], Tensor],
    start: Tensor,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> EigResult:
    """Leading eigenpair of a linear map given as a black-box applier.

    Uses implicitly restarted Arnoldi (warm-started from `start`); small
    problems are materialized and solved densely.  Raises
    :class:`ConvergenceError` carrying the best residual if the iteration
    budget is exhausted.
    """
    start = np.asarray(start)
    if norm(start) == 0.0:
        raise ArgumentError("start vector must be non-zero")
    shape = start.shape
    n = start.size

    if n < 16:
        basis = np.eye(n, dtype=complex)
        cols = [apply_map(basis[:, i].reshape(shape)).ravel() for i in range(n)]
        mat = np.stack(cols, axis=1)
        res = eig_all(mat, cap=max(n, 16))
        lam = res.values[0]
        # within a modulus-degenerate dominant group, follow the start vector
        group = [
            v for w, v in zip(res.values, res.vectors)
            if abs(w - lam) <= 1e-12 * max(abs(lam), 1.0)
        ]
        span = np.stack(group, axis=1)
        coeff, *_ = np.linalg.lstsq(span, start.ravel(), rcond=None)
        vec = span @ coeff
        if norm(vec) <= 1e-12 * norm(start):
            vec = res.vectors[0]
        vec = vec / norm(vec)
        return EigResult(np.array([lam]), [vec.reshape(shape)])

    dtype = np.promote_types(start.dtype, np.float64)

    def matvec(v):
        return apply_map(v.reshape(shape)).ravel()

    op = spla.LinearOperator((n, n), matvec=matvec, dtype=dtype)
    try:
        values, vectors = spla.eigs(
            op, k=1, which="LM", v0=start.ravel(), tol=tol, maxiter=max_iter
        )
        lam, vec = values[0], vectors[:, 0]
    except spla.ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            lam, vec = exc.eigenvalues[0], exc.eigenvectors[:, 0]
            resid = norm(matvec(vec) - lam * vec) / norm(vec)
            raise ConvergenceError(
                f"dominant eigensolver stalled at residual {resid:.2e}",
                residual=resid,
                best=EigResult(np.array([lam]), [vec.reshape(shape)]),
            ) from exc
        raise ConvergenceError(
            "dominant eigensolver produced no Ritz pairs", residual=np.inf
        ) from exc

    resid = norm(matvec(vec) - lam * vec) / norm(vec)
    if resid > 10 * tol * max(abs(lam), 1.0):
        raise ConvergenceError(
            f"dominant eigenpair residual {resid:.2e} exceeds tolerance",
            residual=resid,
            best=EigResult(np.array([lam]), [vec.reshape(shape)]),
        )
    return EigResult(np.array([lam]), [vec.reshape(shape)])


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> Tensor:
    """Random isometry (rows x cols, rows >= cols) from the SVD of a
    Gaussian matrix; deterministic given the generator state."""
    if cols > rows:
        raise ShapeError(f"isometry needs rows >= cols, got {rows} < {cols}")
    mat = rng.standard_normal((rows, cols))
    u, _, vh = np.linalg.svd(mat, full_matrices=False)
    return u @ vh
