"""Source reconstruction pipeline: boundary least-squares interpolation,
P1 Poisson cascade, source extraction, the imaginary-part truncation
criterion, pseudo-error diagnostics, and the truncation-order sweep.

The heavy, truncation-order-independent artifacts (integrating-factor modes,
boundary mode transforms, interior Cauchy evaluations) live in a
``ReconWorkspace`` so a sweep over truncation orders pays for them once.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .aanalytic import ModeStack, boundary_fourier_modes, cauchy_interior_stack, modes_to_I, modes_to_J
from .errors import NumericsError, StageError
from .forward import BoundaryMeasurement
from .mesh import P1Field, Triangulation, all_affine_coefficients
from .phantoms import Medium, Phantom
from .rayxforms import factor_modes, h_samples

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

__all__ = [
    "ReconParams",
    "ReconstructionReport",
    "BoundaryTrace",
    "BoundaryInterpolator",
    "interpolate_boundary",
    "PoissonSolver",
    "poisson_step",
    "ReconWorkspace",
    "reconstruct",
    "e_imag",
    "pseudo_error",
    "continuity_mask",
    "sweep_M",
    "write_report",
]


@dataclass(frozen=True)
class ReconParams:
    """Truncation order M, mode cap S, and numerical knobs."""

    M: int
    S: int
    quad_points: int = 100
    hilbert_grid: int = 100
    dw_rule: str = "characteristic"   # or "trapezoidal"
    solver_tol: float = 1e-10
    eps_bd: float | None = None       # default: local boundary edge length

    def __post_init__(self):
        if self.M < 0:
            raise NumericsError("M must be >= 0")
        if self.S < self.M + 3:
            raise NumericsError(f"need S >= M+3, got M={self.M}, S={self.S}")
        if self.dw_rule not in ("characteristic", "trapezoidal"):
            raise NumericsError(f"unknown dw rule {self.dw_rule!r}")
        if self.quad_points <= 0 or self.hilbert_grid <= 0 or self.solver_tol <= 0:
            raise NumericsError("quadrature resolutions and tolerances must be positive")


@dataclass
class ReconstructionReport:
    """Per-triangle reconstructed source plus diagnostics."""

    q_real: np.ndarray
    q_imag: np.ndarray
    e_imag: float
    params: ReconParams
    timings: dict = field(default_factory=dict)
    pseudo_error: float | None = None
    fields: dict = field(default_factory=dict)   # mode index -> P1Field (I modes)


@dataclass(frozen=True)
class BoundaryTrace:
    """P1 coefficients on the mesh's boundary loop (one per loop vertex)."""

    mesh: Triangulation
    coeffs: np.ndarray


class BoundaryInterpolator:
    """L2 projection of arc-wise constant boundary data onto periodic P1 hats.

    Minimizes || sum_l a_l phi_l - sum_k X_k chi_k ||_{L2(dw)} where chi_k is
    the characteristic function of the measurement arc [w_k, w_{k+1}) and the
    hats sit at the mesh boundary vertex parameters.  The Gram system is
    assembled once and factorized; ``fit`` handles one or many data rows.
    """

    def __init__(self, meas_args, node_args):
        w = np.asarray(meas_args, dtype=float)
        om = np.asarray(node_args, dtype=float)
        if np.any(np.diff(w) <= 0) or np.any(np.diff(om) <= 0):
            raise NumericsError("arguments must be strictly increasing")
        K, L = len(w), len(om)
        if L > K:
            log.warning("boundary interpolation: more hats (%d) than data arcs (%d)", L, K)
        gaps = np.diff(np.concatenate([om, [om[0] + TWO_PI]]))
        gram = np.zeros((L, L))
        idx = np.arange(L)
        gram[idx, idx] = (gaps + np.roll(gaps, 1)) / 3.0
        gram[idx, (idx + 1) % L] = gaps / 6.0
        gram[(idx + 1) % L, idx] = gaps / 6.0
        self._lu = scipy.linalg.lu_factor(gram)
        self.gram = gram
        self.C = self._overlap_matrix(w, om)   # (L, K)

    @staticmethod
    def _overlap_matrix(w, om):
        K, L = len(w), len(om)
        C = np.zeros((L, K))
        # breakpoints of the piecewise structure over one period, anchored at om[0]
        start = om[0]
        wm = np.sort(np.mod(w - start, TWO_PI))
        omm = np.sort(np.mod(om - start, TWO_PI))
        k_order = np.argsort(np.mod(w - start, TWO_PI))
        l_order = np.argsort(np.mod(om - start, TWO_PI))
        pts = np.unique(np.concatenate([wm, omm, [TWO_PI]]))
        for u0, u1 in zip(pts[:-1], pts[1:]):
            if u1 - u0 < 1e-15:
                continue
            k = k_order[np.searchsorted(wm, u0, side="right") - 1]
            j = np.searchsorted(omm, u0, side="right") - 1
            o0 = omm[j]
            o1 = omm[j + 1] if j + 1 < L else TWO_PI + omm[0]
            g = o1 - o0
            # hat descending from node j and ascending into node j+1 on [o0, o1]
            asc0, asc1 = (u0 - o0) / g, (u1 - o0) / g
            seg = u1 - u0
            jj = l_order[j]
            jn = l_order[(j + 1) % L]
            C[jj, k] += seg * (1.0 - 0.5 * (asc0 + asc1))
            C[jn, k] += seg * 0.5 * (asc0 + asc1)
        return C

    def fit(self, X):
        """Best-approximation hat coefficients for data rows X over the arcs."""
        X = np.asarray(X)
        b = self.C @ X.T if X.ndim > 1 else self.C @ X
        return scipy.linalg.lu_solve(self._lu, b).T


def interpolate_boundary(values, meas_args, mesh: Triangulation) -> BoundaryTrace:
    """Least-squares P1 boundary trace from per-measurement-point values."""
    interp = BoundaryInterpolator(meas_args, mesh.boundary_params)
    return BoundaryTrace(mesh=mesh, coeffs=interp.fit(np.asarray(values)))


# 3-point Gauss rule on the reference triangle (edge midpoints, degree 2)
_GAUSS_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


class PoissonSolver:
    """P1 FEM Poisson solver with cached stiffness factorization.

    The stiffness matrix (interior block after Dirichlet elimination) is
    symmetric positive definite and shared by every cascade step on a mesh.
    """

    def __init__(self, mesh: Triangulation, medium: Medium | None = None):
        self.mesh = mesh
        v, t = mesh.vertices, mesh.triangles
        areas = mesh.areas
        p = v[t]
        # hat gradients: grad lambda_i = rot90(opposite edge) / (2A)
        e = np.empty((len(t), 3, 2))
        for i in range(3):
            d = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
            e[:, i, 0] = -d[:, 1]
            e[:, i, 1] = d[:, 0]
        self.grads = e / (2.0 * areas)[:, None, None]
        rows, cols, vals = [], [], []
        for i in range(3):
            for j in range(3):
                rows.append(t[:, i])
                cols.append(t[:, j])
                vals.append(areas * np.einsum("td,td->t", self.grads[:, i], self.grads[:, j]))
        K = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(mesh.n_vertices, mesh.n_vertices),
        ).tocsr()
        bmask = mesh.is_boundary_vertex
        self.interior = np.nonzero(~bmask)[0]
        self.boundary = np.nonzero(bmask)[0]
        self.Kii = K[self.interior][:, self.interior].tocsc()
        self.Kib = K[self.interior][:, self.boundary].tocsr()
        self._lu = spla.splu(self.Kii)
        # wirtinger derivative of each local hat, constant per triangle
        self.dphi = 0.5 * (self.grads[:, :, 0] - 1j * self.grads[:, :, 1])
        # Gauss points per triangle
        self.gauss_pts = np.einsum("gi,tid->tgd", _GAUSS_BARY, p)
        if medium is not None:
            gp = self.gauss_pts.reshape(-1, 2)
            self.mus_g = medium.mus_at(gp).reshape(len(t), 3)
            self.mut_g = medium.mut_at(gp).reshape(len(t), 3)
        else:
            self.mus_g = self.mut_g = None

    def spd_check(self):
        """Symmetry/positive-definiteness diagnostic of the interior block."""
        asym = abs(self.Kii - self.Kii.T).max()
        x = np.random.default_rng(0).standard_normal(self.Kii.shape[0])
        return float(asym), float(x @ (self.Kii @ x))

    def solve_dirichlet(self, rhs_full, boundary_values):
        """Solve K u = rhs with Dirichlet data on the boundary loop."""
        u = np.zeros(self.mesh.n_vertices, dtype=complex)
        u[self.mesh.boundary_loop] = boundary_values
        b = rhs_full[self.interior] - self.Kib @ u[self.boundary]
        u[self.interior] = self._lu.solve(b.real) + 1j * self._lu.solve(b.imag)
        return u

    def step(self, I_next2: P1Field, I_next1: P1Field, p_mode: float,
             boundary: BoundaryTrace) -> P1Field:
        """One Poisson cascade step: laplacian I_m = 4 d/dz {source bracket}."""
        if self.mus_g is None:
            raise NumericsError("PoissonSolver needs the medium for cascade steps")
        mesh = self.mesh
        if I_next2.mesh is not mesh or I_next1.mesh is not mesh or boundary.mesh is not mesh:
            raise NumericsError("fields and boundary trace must share the solver mesh")
        t = mesh.triangles
        areas = mesh.areas
        a2, b2, _ = all_affine_coefficients(I_next2)
        d_next2 = 0.5 * (a2 - 1j * b2)                   # per-triangle d/dz, constant
        vals1 = I_next1.values[t]                        # (nt, 3)
        I1_g = vals1 @ _GAUSS_BARY.T                     # I_{m+1} at Gauss points
        coeff = TWO_PI * self.mus_g * p_mode - self.mut_g
        integral = areas * (-d_next2) + (areas / 3.0) * np.sum(coeff * I1_g, axis=1)
        rhs = np.zeros(mesh.n_vertices, dtype=complex)
        for i in range(3):
            np.add.at(rhs, t[:, i], 4.0 * self.dphi[:, i] * integral)
        u = self.solve_dirichlet(rhs, boundary.coeffs)
        return P1Field(mesh, u)


def poisson_step(mesh: Triangulation, I_next2: P1Field, I_next1: P1Field,
                 medium: Medium, p_mode: float, boundary: BoundaryTrace) -> P1Field:
    """Single cascade solve (assembles and factorizes; see PoissonSolver to reuse)."""
    return PoissonSolver(mesh, medium).step(I_next2, I_next1, p_mode, boundary)


def e_imag(I0: P1Field, medium: Medium, mesh: Triangulation) -> float:
    """Weighted L2 norm of the imaginary part of the reconstructed source."""
    z = mesh.centroids
    w = medium.mut_at(z) - TWO_PI * medium.mus_at(z) * medium.kernel.mode(0)
    im = I0.at_centroids().imag
    return float(np.sqrt(np.sum(mesh.areas * (w * im) ** 2)))


def continuity_mask(q_true: Phantom, mesh: Triangulation) -> np.ndarray:
    """Triangles whose closure avoids every discontinuity interface of the phantom.

    A triangle is excluded when any piecewise-constant entry classifies its
    vertices and centroid inconsistently (smooth additive entries are ignored).
    """
    t = mesh.triangles
    pts = [mesh.vertices[t[:, i]] for i in range(3)] + [mesh.centroids]
    mask = np.ones(mesh.n_triangles, dtype=bool)
    probe = Phantom.build([(k, p, 1.0, False) for k, p, _, _ in q_true.entries
                           if k != "gauss"])
    # classify against each shape individually
    for kind, params, _, _ in probe.entries:
        single = Phantom.build([(kind, params, 1.0, False)])
        flags = [single(p) > 0.5 for p in pts]
        same = (flags[0] == flags[1]) & (flags[0] == flags[2]) & (flags[0] == flags[3])
        mask &= same
    return mask


def pseudo_error(q_rec, q_true: Phantom, mesh: Triangulation, mask=None) -> float:
    """L2 discrepancy to the true source over continuity-masked triangles."""
    if mask is None:
        mask = continuity_mask(q_true, mesh)
    z = mesh.centroids
    diff = np.asarray(q_true(z), dtype=float) - np.asarray(q_rec, dtype=float)
    return float(np.sqrt(np.sum(mesh.areas[mask] * np.abs(diff[mask]) ** 2)))


def _dw_weights(args, rule):
    w = np.asarray(args, dtype=float)
    if rule == "characteristic":
        return np.diff(np.concatenate([w, [w[0] + TWO_PI]]))
    nxt = np.roll(w, -1).copy()
    prv = np.roll(w, 1).copy()
    nxt[-1] += TWO_PI
    prv[0] -= TWO_PI
    return 0.5 * (nxt - prv)


class ReconWorkspace:
    """Truncation-order-independent reconstruction artifacts.

    Holds the integrating-factor modes at measurement points and mesh
    vertices, the measured boundary modes, the A-analytic boundary stack for
    every order >= ``m_lo``, its interior Cauchy evaluation, and the boundary
    interpolator / Poisson factorization for the reconstruction mesh.
    """

    def __init__(self, meas: BoundaryMeasurement, mesh: Triangulation,
                 medium: Medium, params: ReconParams, m_lo: int | None = None):
        if mesh.curve is not None and meas.curve != mesh.curve:
            raise StageError("setup", "measurement and mesh domains differ")
        self.meas, self.mesh, self.medium, self.params = meas, mesh, medium, params
        self.m_lo = params.M if m_lo is None else m_lo
        S, N = params.S, meas.N
        if N < 2 * S + 2:
            raise StageError("setup", f"N={N} too small for S={S}")
        self.timings = {}
        thetas = meas.thetas

        t0 = time.perf_counter()
        try:
            bverts = mesh.vertices[mesh.boundary_loop]
            interior_idx = np.nonzero(~mesh.is_boundary_vertex)[0]
            self.interior_idx = interior_idx
            hv = h_samples(medium, np.vstack([meas.zeta, mesh.vertices]), thetas,
                           params.quad_points, params.hilbert_grid)
            self.alpha = factor_modes(medium, meas.zeta, "-", S, N,
                                      h_values=hv[: meas.K])
            self.beta = factor_modes(medium, mesh.vertices, "+", S, N,
                                     h_values=hv[meas.K:])
        except NumericsError as e:
            raise StageError("integrating-factor", str(e)) from e
        self.timings["factor_modes"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        try:
            self.I_modes = boundary_fourier_modes(meas, S)
            self.J_modes = modes_to_J(self.I_modes, self.alpha, self.m_lo, S)
        except NumericsError as e:
            raise StageError("boundary-modes", str(e)) from e
        self.timings["boundary_modes"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        try:
            self.dw = _dw_weights(meas.args, params.dw_rule)
            zeta_c = meas.zeta[:, 0] + 1j * meas.zeta[:, 1]
            zs = mesh.vertices[interior_idx]
            eps_bd = params.eps_bd
            if eps_bd is None:
                bl = bverts
                eps_bd = float(np.median(np.linalg.norm(np.roll(bl, -1, axis=0) - bl, axis=1)))
            self.J_interior = cauchy_interior_stack(
                self.J_modes, zeta_c, meas.dzeta, self.dw,
                zs[:, 0] + 1j * zs[:, 1], self.m_lo, S - 2, eps_bd=eps_bd)
        except NumericsError as e:
            raise StageError("cauchy-interior", str(e)) from e
        self.timings["cauchy_interior"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        try:
            self.interp = BoundaryInterpolator(meas.args, mesh.boundary_params)
            # J traces on boundary vertices for every mode m_lo..S-2
            J_bd = self.interp.fit(self.J_modes.values[: S - 2 - self.m_lo + 1])
            nv = mesh.n_vertices
            vals = np.zeros((S - 2 - self.m_lo + 1, nv), dtype=complex)
            vals[:, interior_idx] = self.J_interior
            vals[:, mesh.boundary_loop] = J_bd
            self.J_vertices = ModeStack(self.m_lo, vals, site_tag="vertices")
            self.poisson = PoissonSolver(mesh, medium)
        except NumericsError as e:
            raise StageError("boundary-interpolation", str(e)) from e
        self.timings["interpolation_setup"] = time.perf_counter() - t0


def _reconstruct_from_workspace(ws: ReconWorkspace, M: int,
                                q_true: Phantom | None = None) -> ReconstructionReport:
    params = ws.params
    if M < ws.m_lo:
        raise StageError("setup", f"M={M} below workspace floor {ws.m_lo}")
    if params.S < M + 3:
        raise StageError("setup", f"need S >= M+3, got M={M}, S={params.S}")
    mesh, medium = ws.mesh, ws.medium
    S = params.S
    timings = dict(ws.timings)

    t0 = time.perf_counter()
    try:
        # interior modes I_M, I_{M+1} via beta convolution capped at S-2
        I_vert = modes_to_I(ws.J_vertices, ws.beta, [M, M + 1], S - 2)
        # measured boundary traces for m = 0..M+1
        traces = ws.interp.fit(ws.I_modes.values[: M + 2])
        fields = {}
        for m in (M, M + 1):
            v = I_vert.mode(m).copy()
            v[mesh.boundary_loop] = traces[m]
            fields[m] = P1Field(mesh, v)
    except NumericsError as e:
        raise StageError("mode-recovery", str(e)) from e
    timings["mode_recovery"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        for m in range(M - 1, -1, -1):
            bd = BoundaryTrace(mesh, traces[m])
            fields[m] = ws.poisson.step(fields[m + 2], fields[m + 1],
                                        medium.kernel.mode(m + 1), bd)
    except NumericsError as e:
        raise StageError("poisson-cascade", str(e)) from e
    timings["poisson_cascade"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        a1, b1, _ = all_affine_coefficients(fields[1])
        z = mesh.centroids
        weight = medium.mut_at(z) - TWO_PI * medium.mus_at(z) * medium.kernel.mode(0)
        I0_c = fields[0].at_centroids()
        q_real = a1.real + b1.imag + weight * I0_c.real
        q_imag = weight * I0_c.imag
        ei = e_imag(fields[0], medium, mesh)
    except NumericsError as e:
        raise StageError("source-extraction", str(e)) from e
    timings["source_extraction"] = time.perf_counter() - t0

    pe = None
    if q_true is not None:
        pe = pseudo_error(q_real, q_true, mesh)
    rep_params = replace(params, M=M)
    return ReconstructionReport(q_real=q_real, q_imag=q_imag, e_imag=ei,
                                params=rep_params, timings=timings,
                                pseudo_error=pe, fields=fields)


def reconstruct(meas: BoundaryMeasurement, mesh: Triangulation, medium: Medium,
                params: ReconParams, q_true: Phantom | None = None) -> ReconstructionReport:
    """Full pipeline: modes, convolutions, Cauchy interior, cascade, source."""
    ws = ReconWorkspace(meas, mesh, medium, params)
    return _reconstruct_from_workspace(ws, params.M, q_true=q_true)


def select_local_min(M_values, e_values):
    """Smallest M at a local minimum; an endpoint qualifies when strictly
    below its single neighbor."""
    e = list(e_values)
    n = len(e)
    if n == 1:
        return M_values[0]
    for i in range(n):
        left_ok = i == 0 or e[i] < e[i - 1]
        right_ok = i == n - 1 or e[i] < e[i + 1]
        if left_ok and right_ok:
            return M_values[i]
    return M_values[int(np.argmin(e))]


def sweep_M(meas: BoundaryMeasurement, mesh: Triangulation, medium: Medium,
            params_base: ReconParams, M_range, q_true: Phantom | None = None):
    """Reconstruct for each M; report the E_imag table and the selected order."""
    M_range = sorted(M_range)
    if not M_range:
        raise NumericsError("M_range must be nonempty")
    if params_base.S < max(M_range) + 3:
        raise NumericsError(f"S={params_base.S} too small for max M={max(M_range)}")
    ws = ReconWorkspace(meas, mesh, medium, params_base, m_lo=min(M_range))
    reports = {}
    for M in M_range:
        reports[M] = _reconstruct_from_workspace(ws, M, q_true=q_true)
        log.info("sweep: M=%d E_imag=%.6e", M, reports[M].e_imag)
    table = [(M, reports[M].e_imag) for M in M_range]
    selected = select_local_min(M_range, [reports[M].e_imag for M in M_range])
    return table, selected, reports


def write_report(path_csv, path_summary, mesh: Triangulation,
                 report: ReconstructionReport):
    """Per-triangle CSV plus a key=value summary sidecar."""
    z = mesh.centroids
    with open(path_csv, "w") as f:
        f.write("cx,cy,q_real,q_imag\n")
        for ell in range(mesh.n_triangles):
            f.write(f"{z[ell,0]:.17g},{z[ell,1]:.17g},"
                    f"{report.q_real[ell]:.17g},{report.q_imag[ell]:.17g}\n")
    with open(path_summary, "w") as f:
        f.write(f"M={report.params.M}\n")
        f.write(f"S={report.params.S}\n")
        f.write(f"E_imag={report.e_imag:.17g}\n")
        if report.pseudo_error is not None:
            f.write(f"pseudo_error={report.pseudo_error:.17g}\n")
        for stage, dt in report.timings.items():
            f.write(f"time_{stage}_s={dt:.17g}\n")
