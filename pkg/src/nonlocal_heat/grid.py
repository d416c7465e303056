"""Uniform tensor grids, discrete norms, and divergence-form diffusion operators.

Everything operates on the interior nodes of an interval (1D) or axis-aligned
rectangle (2D) under homogeneous Dirichlet conditions: boundary values are
identically zero and never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "EIGEN_SIZE_LIMIT",
    "SpatialGrid",
    "GridFunction",
    "SpatialOperator",
    "build_grid",
    "assemble_diffusion",
    "norm",
    "operator_norm_p_to_inf",
]

# Dense eigendecompositions are refused beyond this many unknowns.
EIGEN_SIZE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Interior nodes of a uniform tensor grid.

    Along axis ``i`` the nodes sit at ``a_i + k*h_i`` for ``k = 1..n_i`` with
    ``h_i = (b_i - a_i)/(n_i + 1)``; every node carries the quadrature weight
    ``prod_i h_i`` (its cell volume).  Nodes are enumerated in C order, first
    axis slowest.
    """

    dimension: int
    endpoints: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]
    axes: tuple[np.ndarray, ...]
    spacing: tuple[float, ...]
    nodes: np.ndarray
    weights: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, SpatialGrid):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.endpoints == other.endpoints
            and self.shape == other.shape
        )

    def __hash__(self):
        return hash((self.dimension, self.endpoints, self.shape))

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        """Measure of the full domain, boundary cells included."""
        return float(np.prod([b - a for a, b in self.endpoints]))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real-valued function sampled on the interior nodes of a grid."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.node_count,):
            raise ValueError(
                f"values have shape {values.shape}, expected ({self.grid.node_count},)"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: SpatialGrid, fn) -> "GridFunction":
        """Sample ``fn`` at the grid nodes; ``fn`` maps (N, dim) points to (N,)."""
        values = np.asarray(fn(grid.nodes), dtype=float)
        return cls(grid, np.broadcast_to(values, (grid.node_count,)).copy())

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.node_count))

    @classmethod
    def constant(cls, grid: SpatialGrid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.node_count, float(value)))


class SpatialOperator:
    """Discrete divergence-form diffusion operator on a grid.

    Holds the sparse matrix acting on interior node values.  The matrix is
    symmetric with non-negative off-diagonal entries, negative diagonal and
    non-positive row sums, hence negative definite: its largest eigenvalue
    ``spectral_bound`` is strictly below zero.
    """

    def __init__(self, grid: SpatialGrid, matrix: sp.spmatrix):
        self.grid = grid
        self.matrix = sp.csr_matrix(matrix)
        self._eig: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def node_count(self) -> int:
        return self.grid.node_count

    def eigendecomposition(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense symmetric eigendecomposition (ascending eigenvalues).

        Cached after the first call.  Refused above EIGEN_SIZE_LIMIT unknowns.
        """
        if self._eig is None:
            n = self.node_count
            if n > EIGEN_SIZE_LIMIT:
                raise ValueError(
                    f"eigen_exact size limit: {n} unknowns exceeds {EIGEN_SIZE_LIMIT}"
                )
            w, v = np.linalg.eigh(self.matrix.toarray())
            self._eig = (w, v)
        return self._eig

    @property
    def spectral_bound(self) -> float:
        """Largest eigenvalue s0 < 0."""
        if self.node_count <= EIGEN_SIZE_LIMIT:
            return float(self.eigendecomposition()[0][-1])
        # Too big for a dense solve: Lanczos with a fixed start vector keeps
        # the result deterministic.
        v0 = np.ones(self.node_count)
        w = spla.eigsh(
            self.matrix, k=1, which="LA", v0=v0, return_eigenvectors=False
        )
        return float(w[0])


def build_grid(dimension: int, endpoints, n) -> SpatialGrid:
    """Build the interior-node grid of an interval or rectangle.

    ``endpoints`` is ``(a, b)`` in 1D or ``((a1, b1), (a2, b2))`` in 2D;
    ``n`` is the interior node count per axis (int or per-axis tuple).
    """
    if dimension not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {dimension}")

    pairs = _normalize_endpoints(dimension, endpoints)
    counts = _normalize_counts(dimension, n)

    axes = []
    spacing = []
    for (a, b), ni in zip(pairs, counts):
        h = (b - a) / (ni + 1)
        axes.append(a + h * np.arange(1, ni + 1))
        spacing.append(h)

    if dimension == 1:
        nodes = axes[0][:, None].copy()
    else:
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])

    cell = float(np.prod(spacing))
    weights = np.full(nodes.shape[0], cell)
    return SpatialGrid(
        dimension=dimension,
        endpoints=tuple(pairs),
        shape=tuple(counts),
        axes=tuple(ax for ax in axes),
        spacing=tuple(spacing),
        nodes=nodes,
        weights=weights,
    )


def _normalize_endpoints(dimension, endpoints) -> list[tuple[float, float]]:
    eps = np.asarray(endpoints, dtype=float)
    if dimension == 1 and eps.shape == (2,):
        eps = eps[None, :]
    if eps.shape != (dimension, 2):
        raise ValueError(f"endpoints {endpoints!r} do not describe {dimension} axes")
    pairs = []
    for a, b in eps:
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ValueError(f"endpoints must satisfy a < b, got ({a}, {b})")
        pairs.append((float(a), float(b)))
    return pairs


def _normalize_counts(dimension, n) -> list[int]:
    if np.isscalar(n):
        counts = [n] * dimension
    else:
        counts = list(n)
    if len(counts) != dimension:
        raise ValueError(f"need {dimension} node counts, got {counts!r}")
    out = []
    for ni in counts:
        if int(ni) != ni or int(ni) < 1:
            raise ValueError(f"node count must be a positive integer, got {ni!r}")
        out.append(int(ni))
    return out


def assemble_diffusion(grid: SpatialGrid, d) -> SpatialOperator:
    """Assemble div(d grad .) on interior nodes in conservative flux form.

    ``d`` is a positive scalar field: a constant or a callable mapping an
    (m, dim) array of points to m values.  It is sampled at the midpoints of
    the edges joining adjacent nodes (boundary edges included), which keeps
    the matrix symmetric and its row sums non-positive.
    """
    dim = grid.dimension
    sample = _field_sampler(d)

    if dim == 1:
        return _assemble_1d(grid, sample)
    return _assemble_2d(grid, sample)


def _field_sampler(d):
    if np.isscalar(d):
        value = float(d)
        return lambda pts: np.full(pts.shape[0], value)
    return lambda pts: np.asarray(d(pts), dtype=float)


def _check_positive(values: np.ndarray, points: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise ValueError("diffusivity evaluated to a non-finite value")
    bad = np.flatnonzero(values <= 0)
    if bad.size:
        where = points[bad[0]]
        raise ValueError(
            f"diffusivity must be positive; got {values[bad[0]]:g} at {tuple(where)}"
        )


def _assemble_1d(grid: SpatialGrid, sample) -> SpatialOperator:
    (a, _b), = grid.endpoints
    (n,) = grid.shape
    (h,) = grid.spacing
    # n+1 edge midpoints: a + (k + 1/2) h, k = 0..n
    mids = a + h * (np.arange(n + 1) + 0.5)
    dm = sample(mids[:, None])
    _check_positive(dm, mids[:, None])

    inv_h2 = 1.0 / (h * h)
    diag = -(dm[:-1] + dm[1:]) * inv_h2
    off = dm[1:-1] * inv_h2
    matrix = sp.diags([off, diag, off], offsets=[-1, 0, 1], format="csr")
    return SpatialOperator(grid, matrix)


def _assemble_2d(grid: SpatialGrid, sample) -> SpatialOperator:
    n1, n2 = grid.shape
    h1, h2 = grid.spacing
    x, y = grid.axes
    (a1, _), (a2, _) = grid.endpoints

    # Edge midpoints, x-direction: (a1 + (i+1/2) h1, y_j), i = 0..n1
    mx = a1 + h1 * (np.arange(n1 + 1) + 0.5)
    px = np.column_stack(
        [np.repeat(mx, n2), np.tile(y, n1 + 1)]
    )
    dx = sample(px).reshape(n1 + 1, n2)
    _check_positive(dx.ravel(), px)

    my = a2 + h2 * (np.arange(n2 + 1) + 0.5)
    py = np.column_stack(
        [np.repeat(x, n2 + 1), np.tile(my, n1)]
    )
    dy = sample(py).reshape(n1, n2 + 1)
    _check_positive(dy.ravel(), py)

    idx = np.arange(n1 * n2).reshape(n1, n2)
    rows, cols, vals = [], [], []
    inv_h1s = 1.0 / (h1 * h1)
    inv_h2s = 1.0 / (h2 * h2)

    diag = -(dx[:-1, :] + dx[1:, :]) * inv_h1s - (dy[:, :-1] + dy[:, 1:]) * inv_h2s
    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())

    # couplings along axis 0 (shared edge midpoint dx[i+1, j])
    c = dx[1:-1, :] * inv_h1s
    rows.append(idx[:-1, :].ravel())
    cols.append(idx[1:, :].ravel())
    vals.append(c.ravel())
    rows.append(idx[1:, :].ravel())
    cols.append(idx[:-1, :].ravel())
    vals.append(c.ravel())

    # couplings along axis 1
    c = dy[:, 1:-1] * inv_h2s
    rows.append(idx[:, :-1].ravel())
    cols.append(idx[:, 1:].ravel())
    vals.append(c.ravel())
    rows.append(idx[:, 1:].ravel())
    cols.append(idx[:, :-1].ravel())
    vals.append(c.ravel())

    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n1 * n2, n1 * n2),
    )
    return SpatialOperator(grid, matrix.tocsr())


def norm(v: GridFunction, which, *, theta: float | None = None,
         operator: SpatialOperator | None = None) -> float:
    """Discrete norm of a grid function.

    ``which`` selects the norm:

    * a float ``q`` in (1, inf): quadrature-weighted Lq norm
      ``(sum_i w_i |v_i|^q)^(1/q)``;
    * ``"inf"`` (or ``math.inf``): sup norm over the nodes;
    * ``"h2theta"``: spectral Sobolev proxy
      ``(sum_k (1+|l_k|)^(2 theta) vhat_k^2)^(1/2)`` where ``vhat`` are the
      L2-normalized coefficients of ``v`` in the eigenbasis of ``operator``
      (required, together with ``theta`` in [0, 1]).
    """
    values = v.values
    if isinstance(which, str) and which.lower() in ("inf", "sup", "linf"):
        which = math.inf

    if which == "h2theta":
        if theta is None or operator is None:
            raise ValueError("h2theta norm needs theta and the diffusion operator")
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        lam, vecs = operator.eigendecomposition()
        coeff = math.sqrt(v.grid.cell_volume) * (vecs.T @ values)
        return float(np.sqrt(np.sum((1.0 + np.abs(lam)) ** (2.0 * theta) * coeff**2)))

    if isinstance(which, (int, float)):
        q = float(which)
        if math.isinf(q):
            return float(np.max(np.abs(values))) if values.size else 0.0
        if q <= 1.0:
            raise ValueError(f"Lq norm requires q > 1, got {q}")
        return float(np.sum(v.grid.weights * np.abs(values) ** q) ** (1.0 / q))

    raise ValueError(f"unknown norm selector {which!r}")


def operator_norm_p_to_inf(M, grid: SpatialGrid, p: float) -> float:
    """Exact operator norm from weighted Lp to sup norm of a nodal matrix.

    By duality the norm is ``max_i (sum_j w_j^(1-p') |M_ij|^(p'))^(1/p')``
    with ``1/p + 1/p' = 1``; for ``p = inf`` it is the maximum absolute row
    sum.  ``p`` must exceed 1.
    """
    if sp.issparse(M):
        M = M.toarray()
    M = np.asarray(M, dtype=float)
    if M.shape != (grid.node_count, grid.node_count):
        raise ValueError(
            f"matrix shape {M.shape} does not match grid with {grid.node_count} nodes"
        )
    p = float(p)
    if p <= 1.0:
        raise ValueError(f"operator norm requires p > 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.sum(np.abs(M), axis=1)))
    pc = p / (p - 1.0)
    row = np.sum(grid.weights ** (1.0 - pc) * np.abs(M) ** pc, axis=1) ** (1.0 / pc)
    return float(np.max(row))
