"""Built-in cross-check suite: every analytic identity the code must honor.

Each check compares a computed quantity against an independent reference
(closed form, analytic disc solution, quadrature of another route) and
records the measured margin next to its tolerance.  The CLI prints one
line per check; the test suite asserts on the same records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotics import a_delta_apply, f_sq_sum, f_sq_sum_cap_form
from .background import HarmonicBackground
from .geometry import BoundaryMesh, RodSpec, build_mesh
from .potentials import assemble_np, neumann_data, single_layer_grad, solve_density
from .solver import (disc_exterior_u, eval_u, lambda_of_sigma, solve_forward,
                     transmission_check)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tol: float
    detail: str = ""

    def line(self, verbose: bool = False) -> str:
        status = "PASS" if self.passed else "FAIL"
        s = f"[{status}] {self.name}: {self.measured:.3e} (tol {self.tol:.1e})"
        if verbose and self.detail:
            s += f"  {self.detail}"
        return s


def check_mesh_closure(mesh: BoundaryMesh) -> list[CheckResult]:
    spec = mesh.spec
    w, nu, x = mesh.weights, mesh.normals, mesh.points
    perim_err = abs(w.sum() - spec.perimeter) / spec.perimeter
    closure = float(np.linalg.norm(w @ nu))
    area = 0.5 * float(np.dot(w, np.einsum("ij,ij->i", x - np.asarray(spec.center), nu)))
    area_err = abs(area - spec.area) / spec.area
    return [
        CheckResult("mesh perimeter (relative)", perim_err <= 1e-10, perim_err, 1e-10),
        CheckResult("mesh closure |sum w*nu|", closure <= 1e-8, closure, 1e-8),
        CheckResult("mesh area (relative)", area_err <= 1e-6, area_err, 1e-6),
    ]


def _suite_meshes() -> list[BoundaryMesh]:
    return [
        build_mesh(RodSpec(L=0.0, delta=1.0), n_cap=64),
        build_mesh(RodSpec(L=2.0, delta=0.1), n_cap=32, n_facade=64),
        build_mesh(RodSpec(L=2.0, delta=0.05, angle=0.3, center=(0.5, -0.2)),
                   n_cap=32, n_facade=96),
    ]


def run_validation(verbose: bool = False) -> list[CheckResult]:
    checks: list[CheckResult] = []
    meshes = _suite_meshes()

    for mesh in meshes:
        checks.extend(check_mesh_closure(mesh))

    # NP column identity (uncorrected diagonal) and spectrum bound
    for mesh in meshes:
        npm = assemble_np(mesh)
        col_err = float(np.abs(npm.raw_weighted_column_sums() - 0.5).max())
        checks.append(CheckResult("NP weighted column sums vs 1/2",
                                  col_err <= 1e-3, col_err, 1e-3,
                                  f"mesh n={len(mesh)}"))
        ev = npm.eigenvalues()
        margin = float(max(np.abs(ev.real).max() - 0.5, 0.0))
        checks.append(CheckResult("NP spectrum bound overshoot",
                                  margin <= 1e-3, margin, 1e-3,
                                  f"mesh n={len(mesh)}"))

    # zero-total density for harmonic backgrounds
    bg_quad = HarmonicBackground.polynomial([0.0, 0.0, 0.0, 1.0, 0.0])
    for bg in (HarmonicBackground.linear([1.0, 1.0]), bg_quad):
        mesh = meshes[1]
        npm = assemble_np(mesh)
        phi = solve_density(npm, lambda_of_sigma(2.0), neumann_data(mesh, bg))
        rel = abs(phi.weighted_total()) / max(np.abs(phi.values).max(), 1e-300)
        checks.append(CheckResult("zero weighted total of density", rel <= 1e-8,
                                  rel, 1e-8))

    # analytic disc oracle
    a = np.array([1.0, 0.0])
    sol = solve_forward(RodSpec(L=0.0, delta=1.0, sigma0=2.0),
                        HarmonicBackground.linear(a), n_cap=128)
    theta = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    pts = 3.0 * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    u, _ = eval_u(sol, pts)
    exact = disc_exterior_u(a, 1.0, 2.0, pts)
    err = float(np.abs(u - exact).max() / np.abs(exact - pts @ a).max())
    checks.append(CheckResult("disc oracle (relative)", err <= 1e-3, err, 1e-3))

    # axis averaging operator moments
    worst = 0.0
    for n in (0, 1, 2):
        for x1 in (0.0, 0.5, -0.5):
            got = a_delta_apply(lambda y, n=n: y**n, 1e-3, 2.0, x1)
            worst = max(worst, abs(got - 0.5 * x1**n))
    checks.append(CheckResult("axis averaging moments", worst <= 0.05, worst, 0.05))

    # two routes to f1^2 + f2^2
    rng = np.random.default_rng(7)
    pts = rng.uniform(-3.0, 3.0, size=(100, 2))
    pts = pts[np.abs(pts[:, 1]) > 1e-3]
    gap = float(np.abs(f_sq_sum(pts, 2.0) - f_sq_sum_cap_form(pts, 2.0)).max())
    checks.append(CheckResult("gradient localisation identity", gap <= 1e-12,
                              gap, 1e-12))

    # trace formula at offset points (facade)
    mesh = build_mesh(RodSpec(L=2.0, delta=0.1), n_cap=64, n_facade=256)
    npm = assemble_np(mesh)
    bg = HarmonicBackground.linear([0.0, 1.0])
    phi = solve_density(npm, lambda_of_sigma(2.0), neumann_data(mesh, bg))
    mask = (mesh.tag_mask("facade_top") | mesh.tag_mask("facade_bottom"))
    mask &= np.abs(mesh.points[:, 0]) < 0.7
    idx = np.flatnonzero(mask)[::8]
    h = 5.0 * mesh.weights[idx][:, None]
    kphi = npm.apply(phi.values)
    worst = 0.0
    for sgn in (+1.0, -1.0):
        g, _ = single_layer_grad(mesh, phi, mesh.points[idx] + sgn * h * mesh.normals[idx])
        dn = np.einsum("ij,ij->i", g, mesh.normals[idx])
        ref = sgn * 0.5 * phi.values[idx] + kphi[idx]
        worst = max(worst, float(np.abs(dn - ref).max() / np.abs(phi.values).max()))
    checks.append(CheckResult("trace formula at offset points", worst <= 0.05,
                              worst, 0.05))

    # flux transmission
    sol = solve_forward(RodSpec(L=0.0, delta=1.0, sigma0=2.0),
                        HarmonicBackground.linear([1.0, 0.0]), n_cap=512)
    rep = transmission_check(sol, n_probe=16)
    checks.append(CheckResult("disc flux transmission", rep["max_mismatch"] <= 0.02,
                              rep["max_mismatch"], 0.02))
    sol = solve_forward(RodSpec(L=2.0, delta=0.1, sigma0=2.0),
                        HarmonicBackground.linear([1.0, 1.0]),
                        n_cap=64, n_facade=256)
    # probe only the facade midsection, away from the caps
    mask = (sol.mesh.tag_mask("facade_top") | sol.mesh.tag_mask("facade_bottom"))
    mask &= np.abs(sol.mesh.points[:, 0]) < 0.5
    rep = _facade_transmission(sol, np.flatnonzero(mask)[::16])
    checks.append(CheckResult("rod flux transmission (facade)", rep <= 0.05,
                              rep, 0.05))

    return checks


def _facade_transmission(sol, idx) -> float:
    from .solver import eval_grad_u

    mesh = sol.mesh
    nus = mesh.normals[idx]
    h = 5.0 * mesh.weights[idx][:, None]
    g_out, _ = eval_grad_u(sol, mesh.points[idx] + h * nus)
    g_in, _ = eval_grad_u(sol, mesh.points[idx] - h * nus)
    fo = np.einsum("ij,ij->i", g_out, nus)
    fi = np.einsum("ij,ij->i", g_in, nus)
    scale = max(float(np.abs(fo).max()), float(np.abs(fi).max()), 1e-300)
    return float(np.abs(fo - sol.spec.sigma0 * fi).max() / scale)
