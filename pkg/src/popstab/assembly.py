"""Assembly of the discretized generator matrices.

For a 2-D model the matrix acts on values of the integrated state at the
inner tensor grid (the left-endpoint row and column of each axis carry
zero boundary values and are dropped):

    generator = -Gx.Dx - Gy.Dy + A + B - M

where Dx = D_x (x) I, Dy = I (x) D_y are Kronecker lifts of the trimmed
differentiation matrices, Gx, Gy sample the velocities at the inner
nodes, the boundary blocks A and B integrate the kernels against the
mixed derivative of the interpolant, and M applies mortality inside the
double cumulative integral.  The kernel integrals use tensor
Clenshaw-Curtis cubature; all cumulative integrals are factorization
solves with the trimmed matrices (inverses are never formed).

The 1-D matrix is -D + 1*(w^T E D) - D^{-1} diag(mu) D, with the
rank-one term realizing the scalar renewal integral of the derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ChebGrid, DiffOps, cheb_grid, diff_ops, interp_matrix
from .linalg import lu_solve
from .model import Model1D, Model2D, NonpositiveVelocity
from .quad import cc_weights


@dataclass(frozen=True)
class CollocationGrids:
    """Per-axis grids with differentiation operators; y is None in 1-D."""

    x: ChebGrid
    dx: DiffOps
    y: ChebGrid | None = None
    dy: DiffOps | None = None

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def m(self) -> int | None:
        return None if self.y is None else self.y.n

    @property
    def theta_x(self) -> np.ndarray:
        """Inner x nodes x_1 < ... < x_n = x_bar (x_0 excluded)."""
        return self.x.nodes[1:]

    @property
    def theta_y(self) -> np.ndarray:
        return self.y.nodes[1:]


def collocation_grids(model: Model2D, n: int, m: int) -> CollocationGrids:
    dom = model.domain
    gx = cheb_grid(dom.x0, dom.x_bar, n)
    gy = cheb_grid(dom.y0, dom.y_bar, m)
    return CollocationGrids(gx, diff_ops(gx), gy, diff_ops(gy))


@dataclass(frozen=True)
class GeneratorMatrix:
    """Discretized generator with its grids and constituent blocks.

    Entries are indexed by inner-node pairs (i, j) in lexicographic order;
    ``flat_index`` maps 1-based (i, j) to the 0-based row position.
    """

    matrix: np.ndarray
    grids: CollocationGrids
    a_block: np.ndarray | None
    b_block: np.ndarray | None
    m_block: np.ndarray | None

    @property
    def n(self) -> int:
        return self.grids.n

    @property
    def m(self) -> int | None:
        return self.grids.m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def flat_index(self, i: int, j: int) -> int:
        m = self.grids.m
        if not (1 <= i <= self.n and 1 <= j <= m):
            raise IndexError(f"(i, j) = ({i}, {j}) outside 1..{self.n} x 1..{m}")
        return (i - 1) * m + (j - 1)

    def pair_index(self, flat: int) -> tuple[int, int]:
        m = self.grids.m
        if not 0 <= flat < self.dim:
            raise IndexError(f"flat index {flat} outside 0..{self.dim - 1}")
        return flat // m + 1, flat % m + 1


def _mixed_derivative_kron(grids: CollocationGrids) -> np.ndarray:
    """kron(D_x, D_y): maps inner values of psi to inner values of its
    mixed derivative."""
    return np.kron(grids.dx.trimmed, grids.dy.trimmed)


def assemble_mortality(model: Model2D, grids: CollocationGrids) -> np.ndarray:
    """The mortality block: double cumulative integral of mu times the
    mixed derivative.

    Realized as Dx^{-1} Dy^{-1} diag(mu) Dx Dy on the inner tensor grid.
    A constant mu short-circuits to mu * I, which is the exact value of
    the block in that case.
    """
    n, m = grids.n, grids.m
    if model.mu.is_constant:
        return float(model.mu(0.0, 0.0)) * np.eye(n * m)
    mu_vals = np.broadcast_to(
        np.asarray(
            model.mu(grids.theta_x[:, None], grids.theta_y[None, :]), dtype=float
        ),
        (n, m),
    ).reshape(n * m)
    kron_d = _mixed_derivative_kron(grids)
    return lu_solve(kron_d, mu_vals[:, None] * kron_d)


def _kernel_cubature_rows(coef, points, x_rule, y_rule) -> np.ndarray:
    """Rows of kernel-weighted cubature: row k maps samples of f on the
    cubature tensor grid to the integral of coef(points[k], ., .) * f."""
    kern = coef(
        points[:, None, None],
        x_rule.nodes[None, :, None],
        y_rule.nodes[None, None, :],
    )
    weighted = np.asarray(kern, dtype=float) * np.outer(x_rule.weights, y_rule.weights)
    return np.broadcast_to(
        weighted, (points.size, x_rule.nodes.size, y_rule.nodes.size)
    ).reshape(points.size, -1)


def assemble_boundary(
    model: Model2D,
    grids: CollocationGrids,
    axis: str,
    oversample: int = 2,
    _kron_d: np.ndarray | None = None,
) -> np.ndarray:
    """Boundary-kernel block for the given axis ("x" uses alpha, "y" beta).

    Pipeline: interpolate the mixed derivative of the interpolant from the
    inner tensor grid to the cubature grid, apply the kernel-weighted
    cubature at each inner node of the axis, then take the cumulative
    integral along the axis.  The result is constant across the other
    index, so rows replicate.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if oversample < 1:
        raise ValueError("oversample factor must be at least 1")
    n, m = grids.n, grids.m
    dom = model.domain
    x_rule = cc_weights(cheb_grid(dom.x0, dom.x_bar, oversample * n))
    y_rule = cc_weights(cheb_grid(dom.y0, dom.y_bar, oversample * m))
    ex = interp_matrix(grids.theta_x, x_rule.nodes)
    ey = interp_matrix(grids.theta_y, y_rule.nodes)
    if _kron_d is None:
        _kron_d = _mixed_derivative_kron(grids)
    if axis == "x":
        rows = _kernel_cubature_rows(model.alpha, grids.theta_x, x_rule, y_rule)
        trimmed = grids.dx.trimmed
    else:
        rows = _kernel_cubature_rows(model.beta, grids.theta_y, x_rule, y_rule)
        trimmed = grids.dy.trimmed
    # rows @ kron(ex, ey) without forming the large Kronecker factor
    rows3 = rows.reshape(rows.shape[0], x_rule.nodes.size, y_rule.nodes.size)
    collocated = np.einsum("kpq,pi,qj->kij", rows3, ex, ey).reshape(rows.shape[0], n * m)
    cumulative = lu_solve(trimmed, collocated @ _kron_d)
    if axis == "x":
        return np.repeat(cumulative, m, axis=0)
    return np.tile(cumulative, (n, 1))


def _velocity_samples(coef, nodes, name: str) -> np.ndarray:
    values = np.broadcast_to(np.asarray(coef(nodes), dtype=float), nodes.shape)
    if np.any(values <= 0):
        raise NonpositiveVelocity(f"{name} must be strictly positive at the nodes")
    return values


def assemble_2d(
    model: Model2D, n: int, m: int | None = None, oversample: int = 2
) -> GeneratorMatrix:
    """Discretized generator of a 2-D model at degrees (n, m)."""
    if m is None:
        m = n
    if n < 1 or m < 1:
        raise ValueError("degrees must be at least 1")
    grids = collocation_grids(model, n, m)
    gx_all = _velocity_samples(model.gx, grids.x.nodes, "gx")
    gy_all = _velocity_samples(model.gy, grids.y.nodes, "gy")
    kron_d = _mixed_derivative_kron(grids)
    a_block = assemble_boundary(model, grids, "x", oversample, _kron_d=kron_d)
    b_block = assemble_boundary(model, grids, "y", oversample, _kron_d=kron_d)
    m_block = assemble_mortality(model, grids)
    dx_big = np.kron(grids.dx.trimmed, np.eye(m))
    dy_big = np.kron(np.eye(n), grids.dy.trimmed)
    gx_flat = np.repeat(gx_all[1:], m)
    gy_flat = np.tile(gy_all[1:], n)
    matrix = (
        -(gx_flat[:, None] * dx_big)
        - (gy_flat[:, None] * dy_big)
        + a_block
        + b_block
        - m_block
    )
    return GeneratorMatrix(matrix, grids, a_block, b_block, m_block)


def assemble_1d(model: Model1D, n: int, oversample: int = 2) -> GeneratorMatrix:
    """Discretized generator of a 1-D model at degree n."""
    if n < 1:
        raise ValueError("degree must be at least 1")
    g = cheb_grid(model.x0, model.x_bar, n)
    ops = diff_ops(g)
    grids = CollocationGrids(g, ops)
    trimmed = ops.trimmed
    rule = cc_weights(cheb_grid(model.x0, model.x_bar, oversample * n))
    e = interp_matrix(g.nodes[1:], rule.nodes)
    beta_w = rule.weights * np.broadcast_to(
        np.asarray(model.beta(rule.nodes), dtype=float), rule.nodes.shape
    )
    renewal_row = beta_w @ e @ trimmed
    b_block = np.tile(renewal_row, (n, 1))
    if model.mu.is_constant:
        m_block = float(model.mu(0.0)) * np.eye(n)
    else:
        mu_vals = np.broadcast_to(
            np.asarray(model.mu(g.nodes[1:]), dtype=float), (n,)
        )
        m_block = lu_solve(trimmed, mu_vals[:, None] * trimmed)
    matrix = -trimmed + b_block - m_block
    return GeneratorMatrix(matrix, grids, None, b_block, m_block)
