"""Single-layer potential and Neumann-Poincare operator on a boundary mesh.

Nystrom discretization with the bounded-kernel diagonal limit kappa/(4*pi).
A small diagonal correction enforces the exact discrete counterpart of the
column identity (the weighted integral of the kernel over the boundary is
1/2); the correction is a quadrature-error term of size O(h^2) and vanishes
identically on a disc, where the kernel is constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .background import HarmonicBackground
from .geometry import BoundaryMesh

#: evaluation points closer than this many local spacings to the boundary
#: get a proximity flag on the result.
NEAR_FACTOR = 2.0


class SolverError(RuntimeError):
    """Raised when the density system is singular or ill-conditioned."""


@dataclass(frozen=True)
class DensityVector:
    """Layer density sampled at the mesh nodes."""

    values: NDArray
    mesh: BoundaryMesh = field(repr=False)

    def weighted_total(self) -> float:
        return float(np.dot(self.mesh.weights, self.values))


@dataclass(frozen=True)
class NpMatrix:
    """Dense Nystrom matrix for the NP operator composed with weights.

    ``matrix[i, j] = k(x_i, x_j) * w_j`` with the NP kernel
    k(x, y) = <x - y, nu_x> / (2*pi*|x - y|^2) and diagonal kernel limit
    kappa/(4*pi) (plus the column-identity correction).
    """

    matrix: NDArray
    mesh: BoundaryMesh = field(repr=False)
    diag_correction: NDArray = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, values: NDArray) -> NDArray:
        return self.matrix @ values

    def weighted_column_sums(self) -> NDArray:
        """Sum_i w_i k(x_i, x_j) for every column j; 1/2 in the continuum."""
        w = self.mesh.weights
        return (w @ self.matrix) / w

    def raw_weighted_column_sums(self) -> NDArray:
        """Column sums with the pure kappa/(4*pi) diagonal (no correction)."""
        w = self.mesh.weights
        raw = self.matrix.copy()
        raw[np.diag_indices_from(raw)] -= self.diag_correction * w
        return (w @ raw) / w

    def eigenvalues(self) -> NDArray:
        return np.linalg.eigvals(self.matrix)


def assemble_np(mesh: BoundaryMesh, correct_columns: bool = True) -> NpMatrix:
    """Assemble the Nystrom NP matrix for ``mesh``."""
    x = mesh.points
    nu = mesh.normals
    w = mesh.weights

    dx = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", dx, dx)
    np.fill_diagonal(r2, 1.0)
    kern = np.einsum("ijk,ik->ij", dx, nu) / (2.0 * np.pi * r2)
    np.fill_diagonal(kern, mesh.curvatures / (4.0 * np.pi))

    if correct_columns:
        correction = (0.5 - (w @ kern)) / w
        kern[np.diag_indices_from(kern)] += correction
    else:
        correction = np.zeros(len(mesh))

    return NpMatrix(matrix=kern * w[None, :], mesh=mesh,
                    diag_correction=correction)


def neumann_data(mesh: BoundaryMesh, bg: HarmonicBackground) -> DensityVector:
    """Normal derivative of the background sampled at the mesh nodes."""
    g = bg.grad(mesh.points)
    return DensityVector(values=np.einsum("ij,ij->i", g, mesh.normals),
                         mesh=mesh)


def solve_density(np_matrix: NpMatrix, lam: float,
                  rhs: DensityVector, residual_tol: float = 1e-10) -> DensityVector:
    """Solve ``(lam*I - K)[phi] = rhs`` for the nodal density.

    The contrast constant satisfies |lam| > 1/2 for any admissible
    conductivity, which keeps the system away from the NP spectrum.
    """
    system = lam * np.eye(np_matrix.n) - np_matrix.matrix
    b = rhs.values
    try:
        lu, piv = scipy.linalg.lu_factor(system)
        phi = scipy.linalg.lu_solve((lu, piv), b)
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(f"density system is singular (lam={lam})") from exc

    # scale by the data only: a near-singular system yields a huge phi
    # whose backward error looks tiny relative to phi itself
    scale = max(np.linalg.norm(b), 1e-300)
    residual = np.linalg.norm(system @ phi - b) / scale
    if not np.isfinite(residual) or residual > residual_tol:
        cond = np.linalg.cond(system)
        raise SolverError(
            f"density solve residual {residual:.2e} exceeds {residual_tol:.1e} "
            f"(condition estimate {cond:.2e}, lam={lam})")
    return DensityVector(values=phi, mesh=np_matrix.mesh)


def _near_flags(mesh: BoundaryMesh, pts: NDArray) -> NDArray:
    d = np.linalg.norm(pts[:, None, :] - mesh.points[None, :, :], axis=2)
    j = np.argmin(d, axis=1)
    return d[np.arange(len(pts)), j] < NEAR_FACTOR * mesh.weights[j]


def single_layer(mesh: BoundaryMesh, phi: DensityVector,
                 x) -> tuple[NDArray, NDArray]:
    """Evaluate the single-layer potential of ``phi`` at points ``x``.

    Returns ``(values, near)``; ``near`` flags points closer to the
    boundary than NEAR_FACTOR local spacings, where midpoint quadrature
    degrades.  Accepts a single point or an (n, 2) array.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    d = pts[:, None, :] - mesh.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    vals = (np.log(r2) / (4.0 * np.pi)) @ (phi.values * mesh.weights)
    near = _near_flags(mesh, pts)
    if np.asarray(x).ndim == 1:
        return vals[0], near[0]
    return vals, near


def single_layer_grad(mesh: BoundaryMesh, phi: DensityVector,
                      x) -> tuple[NDArray, NDArray]:
    """Gradient of the single-layer potential (kernel differentiated exactly)."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    d = pts[:, None, :] - mesh.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    coef = (phi.values * mesh.weights) / (2.0 * np.pi * r2)
    grads = np.einsum("ij,ijk->ik", coef, d)
    near = _near_flags(mesh, pts)
    if np.asarray(x).ndim == 1:
        return grads[0], near[0]
    return grads, near


def dump_density_csv(phi: DensityVector, path: str) -> None:
    mesh = phi.mesh
    import csv

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "x1", "x2", "phi"])
        for i in range(len(mesh)):
            w.writerow([i, repr(float(mesh.points[i, 0])), repr(float(mesh.points[i, 1])),
                        repr(float(phi.values[i]))])
