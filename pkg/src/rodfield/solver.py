"""Forward transmission solve: u = H + S[phi] with phi from the NP system.

Also carries the analytic disc solution (the only exact case, reached via
L = 0), and offset-point physical checks: flux transmission across the
boundary and trace-formula consistency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .background import HarmonicBackground
from .geometry import BoundaryMesh, RodSpec, ValidationError, build_mesh, default_counts
from .potentials import (DensityVector, NpMatrix, assemble_np, neumann_data,
                         single_layer, single_layer_grad, solve_density)


def lambda_of_sigma(sigma0: float) -> float:
    """Contrast constant (sigma0 + 1) / (2 (sigma0 - 1)); |lam| > 1/2."""
    if sigma0 <= 0:
        raise ValidationError(f"sigma0 must be > 0, got {sigma0}")
    if sigma0 == 1.0:
        raise ValidationError("sigma0 = 1: no contrast, no inclusion")
    return (sigma0 + 1.0) / (2.0 * (sigma0 - 1.0))


@dataclass(frozen=True)
class ForwardSolution:
    """Solved transmission problem for one rod and one background."""

    mesh: BoundaryMesh = field(repr=False)
    phi: DensityVector = field(repr=False)
    lam: float = 0.0
    background: HarmonicBackground = None
    np_matrix: NpMatrix = field(default=None, repr=False)

    @property
    def spec(self) -> RodSpec:
        return self.mesh.spec


def solve_forward(spec: RodSpec, bg: HarmonicBackground,
                  n_cap: int | None = None,
                  n_facade: int | None = None) -> ForwardSolution:
    """Compose mesh build, NP assembly and the density solve."""
    dc, df = default_counts(spec)
    mesh = build_mesh(spec, n_cap if n_cap is not None else dc,
                      n_facade if n_facade is not None else df)
    np_matrix = assemble_np(mesh)
    lam = lambda_of_sigma(spec.sigma0)
    rhs = neumann_data(mesh, bg)
    phi = solve_density(np_matrix, lam, rhs)
    return ForwardSolution(mesh=mesh, phi=phi, lam=lam, background=bg,
                           np_matrix=np_matrix)


def eval_u(sol: ForwardSolution, x) -> tuple[NDArray, NDArray]:
    """Total potential u = H + S[phi] at exterior/interior points."""
    s, near = single_layer(sol.mesh, sol.phi, x)
    return sol.background.value(np.asarray(x, dtype=float)) + s, near


def eval_grad_u(sol: ForwardSolution, x) -> tuple[NDArray, NDArray]:
    """Gradient of the total potential."""
    g, near = single_layer_grad(sol.mesh, sol.phi, x)
    return sol.background.grad(np.asarray(x, dtype=float)) + g, near


def transmission_check(sol: ForwardSolution, n_probe: int = 16,
                       h_factor: float = 5.0) -> dict:
    """Flux continuity report: exterior vs sigma0 * interior normal derivative.

    Normal derivatives are approximated at offset points x +- h*nu with
    h = ``h_factor`` local spacings, avoiding on-boundary principal values.
    """
    mesh = sol.mesh
    idx = np.linspace(0, len(mesh) - 1, n_probe).round().astype(int)
    pts = mesh.points[idx]
    nus = mesh.normals[idx]
    h = h_factor * mesh.weights[idx][:, None]

    g_out, _ = eval_grad_u(sol, pts + h * nus)
    g_in, _ = eval_grad_u(sol, pts - h * nus)
    flux_out = np.einsum("ij,ij->i", g_out, nus)
    flux_in = np.einsum("ij,ij->i", g_in, nus)

    sigma0 = sol.spec.sigma0
    scale = max(float(np.abs(flux_out).max()), float(np.abs(flux_in).max()), 1e-300)
    mismatch = np.abs(flux_out - sigma0 * flux_in) / scale
    return {
        "max_mismatch": float(mismatch.max()),
        "mismatch": mismatch,
        "flux_out": flux_out,
        "flux_in": flux_in,
        "probe_indices": idx,
        "scale": scale,
    }


# ---------------------------------------------------------------------------
# Analytic disc oracle (independent of the Nystrom machinery)

def disc_exterior_u(a, radius: float, sigma0: float, x) -> NDArray:
    """Exact exterior potential for a disc at the origin in H = a.x.

    Separation of variables gives
    u = a.x - ((sigma0-1)/(sigma0+1)) * radius^2 * <a, x>/|x|^2.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    r2 = np.einsum("...i,...i->...", x, x)
    m = (sigma0 - 1.0) / (sigma0 + 1.0)
    return x @ a - m * radius**2 * (x @ a) / r2


def disc_interior_u(a, radius: float, sigma0: float, x) -> NDArray:
    """Exact interior potential: the uniform field 2/(sigma0+1) * a.x."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    return (2.0 / (sigma0 + 1.0)) * (x @ a)


def disc_exterior_grad(a, radius: float, sigma0: float, x) -> NDArray:
    """Gradient of :func:`disc_exterior_u` (dipole field differentiated)."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    r2 = np.einsum("...i,...i->...", x, x)
    m = (sigma0 - 1.0) / (sigma0 + 1.0)
    ax = x @ a
    dip = (a[..., :] * r2[..., None] - 2.0 * ax[..., None] * x) / (r2**2)[..., None]
    return a - m * radius**2 * dip


def dump_field_csv(sol: ForwardSolution, pts: NDArray, path: str) -> None:
    u, near = eval_u(sol, pts)
    g, _ = eval_grad_u(sol, pts)
    import csv

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x1", "x2", "u", "ux", "uy", "near_boundary_flag"])
        for i in range(len(pts)):
            w.writerow([repr(float(pts[i, 0])), repr(float(pts[i, 1])), repr(float(u[i])),
                        repr(float(g[i, 0])), repr(float(g[i, 1])),
                        int(near[i])])
