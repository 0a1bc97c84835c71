"""Divergent-beam / Radon transforms, the principal-value Hilbert transform,
and the angular Fourier modes of the integrating-factor exponentials.

All quadratures are midpoint rules.  Radon profiles are sampled at the
midpoints of a uniform offset grid on [-rho, rho], where rho is the
circumradius of the domain, so profile values vanish at the interval ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .phantoms import Medium

__all__ = [
    "RadonProfile",
    "IntegratingFactorModes",
    "divergent_beam",
    "radon_profile",
    "hilbert_pv",
    "integrating_factor_h",
    "factor_modes",
]


def _perp(v):
    """CCW rotation by pi/2."""
    return np.stack([-np.asarray(v)[..., 1], np.asarray(v)[..., 0]], axis=-1)


def divergent_beam(medium: Medium, x, xi, quad_points: int = 100) -> float:
    """Midpoint-rule integral of mu_t along the ray from x in direction xi."""
    if quad_points < 2:
        raise NumericsError("quad_points must be >= 2")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    L = float(medium.curve.exit_distance(x, xi))
    if L <= 0.0:
        return 0.0
    t = (np.arange(quad_points) + 0.5) * (L / quad_points)
    pts = x[None, :] + t[:, None] * xi[None, :]
    return float(medium.mut_at(pts).sum() * (L / quad_points))


def _divergent_beam_batch(medium, sites, xi, quad_points):
    """Divergent-beam transform at many sites for one direction."""
    L = medium.curve.exit_distance(sites, xi[None, :])  # (n,)
    frac = (np.arange(quad_points) + 0.5) / quad_points
    pts = sites[:, None, :] + (L[:, None] * frac[None, :])[:, :, None] * xi[None, None, :]
    vals = medium.mut_at(pts.reshape(-1, 2)).reshape(len(sites), quad_points)
    return vals.sum(axis=1) * (L / quad_points)


def _chord_interval(curve, base, xi):
    """Parameter interval (u0, u1) where base + u*xi lies inside the domain."""
    base = np.atleast_2d(base)
    a, b = curve.a, curve.b
    d1, d2 = xi[0] / a, xi[1] / b
    u1c, u2c = base[:, 0] / a, base[:, 1] / b
    A = d1 * d1 + d2 * d2
    B = 2.0 * (u1c * d1 + u2c * d2)
    C = u1c * u1c + u2c * u2c - 1.0
    disc = B * B - 4.0 * A * C
    hit = disc > 0.0
    sq = np.sqrt(np.maximum(disc, 0.0))
    u0 = np.where(hit, (-B - sq) / (2.0 * A), 0.0)
    u1 = np.where(hit, (-B + sq) / (2.0 * A), 0.0)
    return u0, u1


@dataclass(frozen=True)
class RadonProfile:
    """Radon transform of mu_t for offsets along a fixed unit vector."""

    direction: np.ndarray   # offset axis (the xi-perp of the h formula)
    t: np.ndarray           # midpoint offset grid on [-rho, rho]
    values: np.ndarray
    rho: float

    @property
    def cell(self):
        return self.t[1] - self.t[0]

    def eval(self, s):
        """Linear interpolation; zero at and beyond +-rho."""
        return np.interp(s, self.t, self.values, left=0.0, right=0.0)


def radon_profile(medium: Medium, e, P: int = 100, quad_points: int = 100) -> RadonProfile:
    """Line integrals of mu_t over lines offset by t*e, integrated along e-perp."""
    if P < 8:
        raise NumericsError("P must be >= 8")
    e = np.asarray(e, dtype=float)
    line_dir = _perp(e)
    rho = medium.curve.circumradius
    dt = 2.0 * rho / P
    t = -rho + (np.arange(P) + 0.5) * dt
    base = t[:, None] * e[None, :]
    u0, u1 = _chord_interval(medium.curve, base, line_dir)
    frac = (np.arange(quad_points) + 0.5) / quad_points
    u = u0[:, None] + (u1 - u0)[:, None] * frac[None, :]
    pts = base[:, None, :] + u[:, :, None] * line_dir[None, None, :]
    vals = medium.mut_at(pts.reshape(-1, 2)).reshape(P, quad_points)
    values = vals.sum(axis=1) * ((u1 - u0) / quad_points)
    return RadonProfile(direction=e, t=t, values=values, rho=rho)


def hilbert_pv(values, a: float, b: float, s):
    """(1/pi) PV integral of f(t)/(s-t) dt for f sampled at uniform midpoints.

    ``values`` are f at the midpoints of a uniform grid on [a, b]; f must be
    compactly supported inside (a, b) up to grid tolerance.  The singular
    case splits off f(s) log((s-a)/(b-s)) and integrates the bounded
    difference quotient; s at or outside the interval ends uses the regular
    Riemann-integrable forms.  Scalar or array ``s``.
    """
    f = np.asarray(values, dtype=float)
    n = len(f)
    if n < 4:
        raise NumericsError("need at least 4 samples")
    dt = (b - a) / n
    t = a + (np.arange(n) + 0.5) * dt
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s_arr)

    # centered-difference derivative for the removable g(s, t) = f'(s) case
    fprime = np.gradient(f, dt)

    eps = 1e-12 * max(abs(a), abs(b), 1.0)
    interior = (s_arr > a + eps) & (s_arr < b - eps)
    at_a = np.abs(s_arr - a) <= eps
    at_b = np.abs(s_arr - b) <= eps
    exterior = ~(interior | at_a | at_b)

    if np.any(interior):
        si = s_arr[interior]
        fs = np.interp(si, t, f, left=0.0, right=0.0)
        diff = si[:, None] - t[None, :]
        small = np.abs(diff) < 1e-9 * dt
        g = np.where(small, 0.0, (fs[:, None] - f[None, :]) / np.where(small, 1.0, diff))
        if np.any(small):
            idx = np.nonzero(small)
            g[idx] = fprime[idx[1]]
        out[interior] = fs * np.log((si - a) / (b - si)) - g.sum(axis=1) * dt
    if np.any(at_a):
        out[at_a] = np.sum(f / (a - t)) * dt
    if np.any(at_b):
        out[at_b] = np.sum(f / (b - t)) * dt
    if np.any(exterior):
        se = s_arr[exterior]
        out[exterior] = ((f[None, :] / (se[:, None] - t[None, :])).sum(axis=1)) * dt

    out /= math.pi
    return out if np.asarray(s).ndim > 0 else float(out[0])


def integrating_factor_h(medium: Medium, x, xi, quad_points: int = 100,
                         hilbert_grid: int = 100, _imag_sign: float = 1.0) -> complex:
    """h[mu_t](x, xi) = Div - (1/2)(I - i Hilb) Radon at (x.xi_perp, xi_perp).

    ``_imag_sign`` exists only for the validation suite's mutation check.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    e = _perp(xi)
    prof = radon_profile(medium, e, P=hilbert_grid, quad_points=quad_points)
    s = float(x @ e)
    div = divergent_beam(medium, x, xi, quad_points)
    r = float(prof.eval(s))
    hil = float(hilbert_pv(prof.values, -prof.rho, prof.rho, s))
    return div - 0.5 * r + _imag_sign * 0.5j * hil


@dataclass(frozen=True)
class IntegratingFactorModes:
    """Angular Fourier modes 0..S of exp(-h) (sign '-') or exp(+h) (sign '+')."""

    sites: np.ndarray        # (n, 2)
    sign: str                # '-' -> alpha modes, '+' -> beta modes
    modes: np.ndarray        # (S+1, n) complex
    spectrum: np.ndarray     # full length-N DFT, (N, n) complex, diagnostics
    N: int

    @property
    def S(self):
        return self.modes.shape[0] - 1

    def negative_mode(self, s):
        """Diagnostic: DFT coefficient at negative index -|s|."""
        return self.spectrum[self.N - abs(int(s))]

    def max_negative_mode(self, s_max=None):
        s_max = s_max or self.S
        neg = self.spectrum[self.N - s_max: self.N]
        return float(np.abs(neg).max())


def h_samples(medium: Medium, sites, thetas, quad_points: int = 100,
              hilbert_grid: int = 100, _imag_sign: float = 1.0) -> np.ndarray:
    """h[mu_t](site, xi(theta)) for all sites x thetas; (n_sites, n_theta) complex.

    The Radon profile for each direction is computed once and shared by all
    sites; this is the dominant-cost kernel of the reconstruction.
    """
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty((len(sites), len(thetas)), dtype=complex)
    for j, th in enumerate(thetas):
        xi = np.array([math.cos(th), math.sin(th)])
        e = _perp(xi)
        prof = radon_profile(medium, e, P=hilbert_grid, quad_points=quad_points)
        s = sites @ e
        div = _divergent_beam_batch(medium, sites, xi, quad_points)
        r = prof.eval(s)
        hil = hilbert_pv(prof.values, -prof.rho, prof.rho, s)
        out[:, j] = div - 0.5 * r + _imag_sign * 0.5j * hil
    return out


def factor_modes(medium: Medium, sites, sign: str, S: int, N: int,
                 quad_points: int = 100, hilbert_grid: int = 100,
                 h_values=None) -> IntegratingFactorModes:
    """Modes 0..S of exp(-h) at boundary sites ('-') or exp(+h) interior ('+').

    ``h_values`` can supply precomputed ``h_samples`` output to share the
    expensive transform evaluations between the alpha and beta passes.
    """
    if S < 1:
        raise NumericsError("S must be >= 1")
    if N < 2 * S + 2:
        raise NumericsError(f"N={N} too small for S={S} (need N >= 2S+2)")
    if sign not in ("+", "-"):
        raise NumericsError("sign must be '+' or '-'")
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    thetas = 2.0 * np.pi * np.arange(N) / N
    if h_values is None:
        h_values = h_samples(medium, sites, thetas, quad_points, hilbert_grid)
    expo = np.exp(-h_values) if sign == "-" else np.exp(h_values)
    # mode_s = (1/N) sum_n E_n exp(-i s theta_n): plain forward DFT
    spectrum = np.fft.fft(expo, axis=1).T / N   # (N, n_sites)
    return IntegratingFactorModes(sites=sites, sign=sign,
                                  modes=spectrum[: S + 1].copy(),
                                  spectrum=spectrum, N=N)
