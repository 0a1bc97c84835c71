"""Discrete Bukhgeim-Cauchy boundary-to-interior evaluation and the
convolution maps between attenuated modes {I_m} and A-analytic modes {J_m}."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .rayxforms import IntegratingFactorModes

log = logging.getLogger(__name__)

__all__ = [
    "ModeStack",
    "boundary_fourier_modes",
    "modes_to_J",
    "modes_to_I",
    "cauchy_interior",
    "cauchy_interior_stack",
]


@dataclass(frozen=True)
class ModeStack:
    """Indexed family of complex mode vectors over a common site set.

    ``values[i]`` holds mode ``m_lo + i`` at every site.
    """

    m_lo: int
    values: np.ndarray   # (n_modes, n_sites) complex
    site_tag: str = ""

    @property
    def m_hi(self):
        return self.m_lo + len(self.values) - 1

    def mode(self, m):
        if not self.m_lo <= m <= self.m_hi:
            raise NumericsError(f"mode {m} outside stack range [{self.m_lo}, {self.m_hi}]")
        return self.values[m - self.m_lo]


def boundary_fourier_modes(meas, S: int) -> ModeStack:
    """Modes 0..S of the measured outflow: (1/N) sum_n I(zeta_k, theta_n) e^{+im theta_n}."""
    if meas.N < 2 * S + 2:
        raise NumericsError(f"S={S} too large for N={meas.N} directions (need N >= 2S+2)")
    # +im theta sign matches I = sum I_m e^{-im theta}; that's numpy's ifft kernel
    modes = np.fft.ifft(meas.values, axis=1)[:, : S + 1].T.copy()
    return ModeStack(m_lo=0, values=modes, site_tag="measurement")


def modes_to_J(I_modes: ModeStack, alpha: IntegratingFactorModes, M: int, S: int) -> ModeStack:
    """J_m = sum_{0<=s, s+m<=S} alpha_s I_{s+m} for M <= m <= S."""
    if S < M + 3:
        raise NumericsError(f"need S >= M+3, got M={M}, S={S}")
    if I_modes.m_lo != 0 or I_modes.m_hi < S:
        raise NumericsError("I mode stack must cover 0..S")
    if alpha.S < S:
        raise NumericsError("alpha modes do not reach S")
    n_sites = I_modes.values.shape[1]
    if alpha.modes.shape[1] != n_sites:
        raise NumericsError("alpha sites do not match mode stack sites")
    out = np.zeros((S - M + 1, n_sites), dtype=complex)
    for m in range(M, S + 1):
        s_max = S - m
        out[m - M] = np.sum(alpha.modes[: s_max + 1] * I_modes.values[m: m + s_max + 1], axis=0)
    return ModeStack(m_lo=M, values=out, site_tag=I_modes.site_tag)


def modes_to_I(J_modes: ModeStack, beta: IntegratingFactorModes, m_list, S_eff: int) -> ModeStack:
    """I_m = sum_{0<=s, s+m<=S_eff} beta_s J_{s+m} for each requested m (contiguous)."""
    m_list = list(m_list)
    if m_list != list(range(m_list[0], m_list[-1] + 1)):
        raise NumericsError("m_list must be contiguous ascending")
    if J_modes.m_hi < S_eff:
        raise NumericsError("J mode stack does not reach S_eff")
    n_sites = J_modes.values.shape[1]
    if beta.modes.shape[1] != n_sites:
        raise NumericsError("beta sites do not match mode stack sites")
    out = np.zeros((len(m_list), n_sites), dtype=complex)
    for i, m in enumerate(m_list):
        s_max = min(S_eff - m, beta.S)
        if s_max < 0:
            raise NumericsError(f"mode {m} exceeds S_eff={S_eff}")
        block = J_modes.values[m - J_modes.m_lo: m - J_modes.m_lo + s_max + 1]
        out[i] = np.sum(beta.modes[: s_max + 1] * block, axis=0)
    return ModeStack(m_lo=m_list[0], values=out, site_tag=J_modes.site_tag)


def cauchy_interior_stack(J_boundary: ModeStack, zeta, dzeta, dw, zs,
                          m_lo: int, m_hi: int, eps_bd: float = 0.0,
                          block: int = 512) -> np.ndarray:
    """Evaluate modes m_lo..m_hi of an A-analytic stack at interior points.

    ``zeta``/``dzeta`` are complex boundary points and parameterization
    derivatives, ``dw`` the quadrature weights (parameter gaps), ``zs`` the
    complex interior evaluation points.  Points within ``eps_bd`` of the
    boundary polygon are evaluated anyway but logged (near-singular kernel).
    Returns (m_hi - m_lo + 1, len(zs)) complex.
    """
    zeta = np.asarray(zeta, dtype=complex)
    dzeta = np.asarray(dzeta, dtype=complex)
    dw = np.asarray(dw, dtype=float)
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    S = J_boundary.m_hi
    if not (J_boundary.m_lo <= m_lo and m_hi <= S - 2):
        raise NumericsError(f"requested modes [{m_lo}, {m_hi}] outside valid range "
                            f"[{J_boundary.m_lo}, {S - 2}]")
    if eps_bd > 0.0:
        dmin = np.min(np.abs(zs[:, None] - zeta[None, :]), axis=1)
        n_close = int(np.count_nonzero(dmin < eps_bd))
        if n_close:
            log.warning("cauchy_interior: %d of %d points within eps_bd=%g of the boundary",
                        n_close, len(zs), eps_bd)

    out = np.empty((m_hi - m_lo + 1, len(zs)), dtype=complex)
    Jv = J_boundary.values
    for b0 in range(0, len(zs), block):
        zb = zs[b0: b0 + block]
        dz = zeta[None, :] - zb[:, None]            # (nz, K)
        kern = (dzeta[None, :] / dz) * dw[None, :]
        A = kern / (2.0j * np.pi)                   # first-term kernel
        C = kern.imag / np.pi                       # imaginary-part kernel
        r = np.conj(dz) / dz                        # power ratio, |r| = 1
        # first term for all requested modes at once
        i0 = m_lo - J_boundary.m_lo
        first = Jv[i0: m_hi - J_boundary.m_lo + 1] @ A.T
        # series term via descending recursion G_m = r (J_{m+2} + G_{m+2})
        G = {S - 1: np.zeros_like(r), S: np.zeros_like(r)}
        for m in range(S - 2, m_lo - 1, -1):
            Gm = r * (Jv[m + 2 - J_boundary.m_lo][None, :] + G.pop(m + 2))
            G[m] = Gm
            if m <= m_hi:
                out[m - m_lo, b0: b0 + len(zb)] = first[m - m_lo] + np.sum(C * Gm, axis=1)
    return out


def cauchy_interior(J_boundary: ModeStack, zeta, dzeta, dw, z, m: int, S: int,
                    eps_bd: float = 0.0) -> complex:
    """Single-point, single-mode Bukhgeim-Cauchy evaluation."""
    if not J_boundary.m_lo <= m <= S - 2:
        raise NumericsError(f"mode m={m} must satisfy {J_boundary.m_lo} <= m <= S-2")
    vals = cauchy_interior_stack(J_boundary, zeta, dzeta, dw, [complex(z)],
                                 m_lo=m, m_hi=m, eps_bd=eps_bd)
    return complex(vals[0, 0])
