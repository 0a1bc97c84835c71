"""Synthetic data generation: discrete-ordinates upwind finite-volume
transport solver with source iteration, plus a ballistic line-integral oracle.

Cell unknowns are piecewise constant per (triangle, direction).  Each sweep
processes triangles sorted by the projection of their centroid onto the
direction, which resolves upwind dependencies on convex domains.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .errors import MeshError, NumericsError
from .mesh import BoundaryCurve, Triangulation
from .phantoms import Medium

log = logging.getLogger(__name__)

__all__ = [
    "AngularGrid",
    "BoundaryMeasurement",
    "solve_forward",
    "angular_resample",
    "ballistic_forward",
    "ballistic_measurement",
    "read_measurement",
    "write_measurement",
]


@dataclass(frozen=True)
class AngularGrid:
    """N equispaced directions theta_n = 2 pi n / N."""

    N: int

    def __post_init__(self):
        if self.N < 4:
            raise NumericsError("need at least 4 directions")

    @property
    def thetas(self):
        return 2.0 * np.pi * np.arange(self.N) / self.N

    @property
    def xis(self):
        th = self.thetas
        return np.stack([np.cos(th), np.sin(th)], axis=1)


@dataclass(frozen=True)
class BoundaryMeasurement:
    """Outflow samples at K boundary points x N directions.

    ``args`` are curve parameters (increasing), ``zeta`` the boundary points
    on the true curve, ``dzeta`` the complex parameterization derivatives.
    Rows are zero at incoming directions.
    """

    curve: BoundaryCurve
    args: np.ndarray      # (K,)
    zeta: np.ndarray      # (K, 2)
    dzeta: np.ndarray     # (K,) complex
    N: int
    values: np.ndarray    # (K, N) real, >= 0

    @property
    def K(self):
        return len(self.args)

    @property
    def thetas(self):
        return 2.0 * np.pi * np.arange(self.N) / self.N

    def normals(self):
        """Outer unit normals at the measurement points."""
        c = self.curve
        n = np.stack([self.zeta[:, 0] / c.a**2, self.zeta[:, 1] / c.b**2], axis=1)
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def outgoing_mask(self):
        xis = AngularGrid(self.N).xis
        return self.normals() @ xis.T > 0.0

    def scaled(self, c):
        return BoundaryMeasurement(self.curve, self.args, self.zeta, self.dzeta,
                                   self.N, c * self.values)


def measurement_points(curve: BoundaryCurve, K: int):
    """K boundary points equispaced in the curve parameter."""
    w = 2.0 * np.pi * np.arange(K) / K
    return w, curve.point(w), curve.derivative(w)


def _kernel_matrix(kernel, N, mode_cap=40):
    """(2pi/N)-weighted scattering matrix rows sum to 2pi p_0 exactly."""
    th = 2.0 * np.pi * np.arange(N) / N
    tau = th[:, None] - th[None, :]
    p = np.full((N, N), kernel.mode(0)) if mode_cap == 0 else None
    if p is None:
        p = np.full((N, N), kernel.mode(0))
        for m in range(1, mode_cap + 1):
            pm = kernel.mode(m)
            if pm == 0.0:
                continue
            p += 2.0 * pm * np.cos(m * tau)
    return p


@njit(parallel=True, cache=True)
def _sweep(I, order, xis, en, nbr, mut_a, src):
    """One transport sweep, all directions; updates I in place.

    I: (nt, N); order: (N, nt) sweep order per direction; en: (nt, 3, 2)
    outward edge normals scaled by edge length; nbr: (nt, 3) neighbors or -1;
    mut_a: (nt,) mu_t * area; src: (nt, N) source * area.
    """
    nt, N = I.shape
    for n in prange(N):
        xi0 = xis[n, 0]
        xi1 = xis[n, 1]
        for idx in range(nt):
            ell = order[n, idx]
            denom = mut_a[ell]
            rhs = src[ell, n]
            for j in range(3):
                flux = xi0 * en[ell, j, 0] + xi1 * en[ell, j, 1]
                if flux > 0.0:
                    denom += flux
                else:
                    nb = nbr[ell, j]
                    if nb >= 0:
                        rhs += (-flux) * I[nb, n]
            I[ell, n] = rhs / denom


def _edge_geometry(mesh: Triangulation):
    v, t = mesh.vertices, mesh.triangles
    en = np.empty((len(t), 3, 2))
    for j in range(3):
        a = v[t[:, (j + 1) % 3]]
        b = v[t[:, (j + 2) % 3]]
        e = b - a
        en[:, j, 0] = e[:, 1]    # outward normal of a CCW triangle, length-scaled
        en[:, j, 1] = -e[:, 0]
    return en


def solve_forward(mesh_fwd: Triangulation, medium: Medium, source, N_dir: int,
                  tol: float = 1e-6, max_iters: int = 5000, K: int = 1024,
                  kernel_mode_cap: int = 40, N_out: int | None = None):
    """Discrete-ordinates solve of the transport problem with no inflow.

    Returns (cell angular fluxes (nt, N_dir), BoundaryMeasurement at K points
    equispaced in the curve parameter).  ``N_out`` resamples the outflow onto
    a finer angular grid (periodic linear interpolation); the outflow is
    smooth away from grazing so this supports mode counts beyond N_dir/2.
    Raises on non-convergence.
    """
    if tol <= 0:
        raise NumericsError("tol must be positive")
    if mesh_fwd.curve is None:
        raise MeshError("forward mesh needs its boundary curve")
    grid = AngularGrid(N_dir)
    xis = grid.xis
    cent = mesh_fwd.centroids
    areas = mesh_fwd.areas
    mut = medium.mut_at(cent)
    mus = medium.mus_at(cent)
    qc = np.asarray(source(cent), dtype=float)
    en = _edge_geometry(mesh_fwd)
    nbr = mesh_fwd.neighbors
    order = np.argsort(cent @ xis.T, axis=0, kind="stable").T.copy()  # (N, nt)
    P = _kernel_matrix(medium.kernel, N_dir, kernel_mode_cap)
    wq = 2.0 * np.pi / N_dir

    nt = mesh_fwd.n_triangles
    I = np.zeros((nt, N_dir))
    mut_a = mut * areas
    prev_res = None
    ratios = []
    for it in range(max_iters):
        scat = (I @ P.T) * (wq * mus[:, None]) if np.any(mus) else np.zeros_like(I)
        src = (scat + qc[:, None]) * areas[:, None]
        I_old = I.copy()
        _sweep(I, order, xis, en, nbr, mut_a, src)
        res = float(np.max(np.abs(I - I_old)))
        if prev_res is not None and prev_res > 0:
            ratios.append(res / prev_res)
        prev_res = res
        if res < tol:
            break
    else:
        raise NumericsError(
            f"source iteration did not converge in {max_iters} iterations "
            f"(residual {prev_res:.3e}, tol {tol:.3e})"
        )
    if ratios:
        log.info("source iteration: %d sweeps, final contraction ratio %.4f",
                 it + 1, ratios[-1])

    meas = _sample_outflow(mesh_fwd, medium.curve, I, grid, K)
    if N_out is not None and N_out != N_dir:
        meas = angular_resample(meas, N_out)
    return I, meas


def angular_resample(meas: BoundaryMeasurement, N_new: int) -> BoundaryMeasurement:
    """Periodic linear interpolation of the outflow onto N_new directions."""
    if N_new < 4:
        raise NumericsError("need at least 4 directions")
    th_old = meas.thetas
    th_new = 2.0 * np.pi * np.arange(N_new) / N_new
    vals = np.empty((meas.K, N_new))
    for k in range(meas.K):
        vals[k] = np.interp(th_new, th_old, meas.values[k], period=2.0 * np.pi)
    out = BoundaryMeasurement(curve=meas.curve, args=meas.args, zeta=meas.zeta,
                              dzeta=meas.dzeta, N=N_new, values=vals)
    vals = np.where(out.outgoing_mask(), vals, 0.0)
    return BoundaryMeasurement(curve=meas.curve, args=meas.args, zeta=meas.zeta,
                               dzeta=meas.dzeta, N=N_new, values=vals)


def _boundary_edges(mesh: Triangulation):
    """(edge midpoint argument, owning triangle) for each boundary edge, sorted."""
    t, nbr = mesh.triangles, mesh.neighbors
    tri_idx, loc = np.nonzero(nbr < 0)
    a = mesh.vertices[t[tri_idx, (loc + 1) % 3]]
    b = mesh.vertices[t[tri_idx, (loc + 2) % 3]]
    mid = 0.5 * (a + b)
    args = np.mod(np.arctan2(mid[:, 1], mid[:, 0]), 2.0 * np.pi)
    srt = np.argsort(args)
    return args[srt], tri_idx[srt]


def _sample_outflow(mesh, curve, I, grid, K):
    w, zeta, dzeta = measurement_points(curve, K)
    edge_args, edge_tri = _boundary_edges(mesh)
    zarg = np.mod(np.arctan2(zeta[:, 1], zeta[:, 0]), 2.0 * np.pi)
    # nearest boundary edge by argument (piecewise-constant trace)
    pos = np.searchsorted(edge_args, zarg)
    left = (pos - 1) % len(edge_args)
    right = pos % len(edge_args)
    dl = np.abs(np.angle(np.exp(1j * (zarg - edge_args[left]))))
    dr = np.abs(np.angle(np.exp(1j * (edge_args[right] - zarg))))
    nearest = np.where(dl <= dr, left, right)
    values = I[edge_tri[nearest]]
    meas = BoundaryMeasurement(curve=curve, args=w, zeta=zeta, dzeta=dzeta,
                               N=grid.N, values=values)
    out = meas.outgoing_mask()
    values = np.where(out, values, 0.0)
    return BoundaryMeasurement(curve=curve, args=w, zeta=zeta, dzeta=dzeta,
                               N=grid.N, values=values)


def ballistic_forward(medium: Medium, source, zeta, xi, quad_points: int = 100) -> float:
    """Attenuated line integral of the source along the chord ending at zeta.

    Valid as measurement data only when mu_s vanishes.
    """
    zeta = np.asarray(zeta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    L = float(medium.curve.exit_distance(zeta, -xi))
    if L <= 0:
        return 0.0
    dt = L / quad_points
    t = (np.arange(quad_points) + 0.5) * dt
    pts = zeta[None, :] - t[:, None] * xi[None, :]
    mu = medium.mut_at(pts)
    q = np.asarray(source(pts), dtype=float)
    tau = dt * (np.cumsum(mu) - 0.5 * mu)
    return float(np.sum(q * np.exp(-tau)) * dt)


def ballistic_measurement(medium: Medium, source, K: int, N: int,
                          quad_points: int = 100) -> BoundaryMeasurement:
    """Full boundary data from the ballistic oracle (mu_s = 0 media)."""
    w, zeta, dzeta = measurement_points(medium.curve, K)
    grid = AngularGrid(N)
    xis = grid.xis
    values = np.zeros((K, N))
    for n in range(N):
        xi = xis[n]
        L = medium.curve.exit_distance(zeta, -xi[None, :])
        dt = L / quad_points
        t = (np.arange(quad_points) + 0.5)[None, :] * dt[:, None]
        pts = zeta[:, None, :] - t[:, :, None] * xi[None, None, :]
        flat = pts.reshape(-1, 2)
        mu = medium.mut_at(flat).reshape(K, quad_points)
        q = np.asarray(source(flat), dtype=float).reshape(K, quad_points)
        tau = dt[:, None] * (np.cumsum(mu, axis=1) - 0.5 * mu)
        values[:, n] = np.sum(q * np.exp(-tau), axis=1) * dt
    meas = BoundaryMeasurement(curve=medium.curve, args=w, zeta=zeta, dzeta=dzeta,
                               N=N, values=values)
    values = np.where(meas.outgoing_mask(), values, 0.0)
    return BoundaryMeasurement(curve=medium.curve, args=w, zeta=zeta, dzeta=dzeta,
                               N=N, values=values)


def write_measurement(path, meas: BoundaryMeasurement):
    with open(path, "w") as f:
        f.write(f"RTE-BOUNDARY v1,K={meas.K},N={meas.N},curve={meas.curve.describe()}\n")
        for k in range(meas.K):
            f.write(f"{meas.args[k]:.17g},{meas.zeta[k,0]:.17g},{meas.zeta[k,1]:.17g},"
                    f"{meas.dzeta[k].real:.17g},{meas.dzeta[k].imag:.17g}\n")
        for k in range(meas.K):
            f.write(",".join(f"{v:.17g}" for v in meas.values[k]) + "\n")


def read_measurement(path) -> BoundaryMeasurement:
    with open(path) as f:
        header = f.readline().strip()
        parts = header.split(",")
        if parts[0] != "RTE-BOUNDARY v1" or len(parts) != 4:
            raise NumericsError(f"bad measurement header {header!r}")
        K = int(parts[1].split("=")[1])
        N = int(parts[2].split("=")[1])
        curve = BoundaryCurve.from_description(parts[3].split("=")[1])
        meta = np.array([[float(x) for x in f.readline().split(",")] for _ in range(K)])
        values = np.array([[float(x) for x in f.readline().split(",")] for _ in range(K)])
    if values.shape != (K, N):
        raise NumericsError("measurement value block has wrong shape")
    return BoundaryMeasurement(curve=curve, args=meta[:, 0], zeta=meta[:, 1:3],
                               dzeta=meta[:, 3] + 1j * meta[:, 4], N=N, values=values)
