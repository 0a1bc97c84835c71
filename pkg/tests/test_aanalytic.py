import numpy as np
import pytest

from radsource.aanalytic import (ModeStack, boundary_fourier_modes,
                                 cauchy_interior, cauchy_interior_stack,
                                 modes_to_I, modes_to_J)
from radsource.errors import NumericsError
from radsource.forward import BoundaryMeasurement, measurement_points
from radsource.mesh import BoundaryCurve
from radsource.rayxforms import IntegratingFactorModes


def make_measurement(curve, K, N, values):
    w, zeta, dzeta = measurement_points(curve, K)
    return BoundaryMeasurement(curve=curve, args=w, zeta=zeta, dzeta=dzeta,
                               N=N, values=values)


def delta_factor(n_sites, S, N, sign="-"):
    """Synthetic factor modes of the zero medium: alpha_0 = 1, rest 0."""
    modes = np.zeros((S + 1, n_sites), dtype=complex)
    modes[0] = 1.0
    spectrum = np.zeros((N, n_sites), dtype=complex)
    spectrum[0] = 1.0
    return IntegratingFactorModes(sites=np.zeros((n_sites, 2)), sign=sign,
                                  modes=modes, spectrum=spectrum, N=N)


class TestBoundaryModes:
    def test_constant_data(self, unit_circle):
        K, N = 16, 64
        meas = make_measurement(unit_circle, K, N, np.full((K, N), 3.0))
        st = boundary_fourier_modes(meas, S=8)
        assert np.allclose(st.mode(0), 3.0)
        for m in range(1, 9):
            assert np.max(np.abs(st.mode(m))) < 1e-12

    def test_cosine_data(self, unit_circle):
        K, N = 16, 64
        th = 2 * np.pi * np.arange(N) / N
        meas = make_measurement(unit_circle, K, N, np.tile(np.cos(th), (K, 1)))
        st = boundary_fourier_modes(meas, S=8)
        assert np.allclose(st.mode(1), 0.5, atol=1e-12)
        assert np.max(np.abs(st.mode(0))) < 1e-12
        assert np.max(np.abs(st.mode(2))) < 1e-12

    def test_conjugate_symmetry(self, unit_circle):
        rng = np.random.default_rng(2)
        K, N = 4, 32
        vals = rng.standard_normal((K, N))
        meas = make_measurement(unit_circle, K, N, vals)
        st = boundary_fourier_modes(meas, S=8)
        full = np.fft.ifft(vals, axis=1)
        for m in range(1, 9):
            assert np.max(np.abs(st.mode(m) - np.conj(full[:, N - m]))) < 1e-12

    def test_rejects_large_S(self, unit_circle):
        meas = make_measurement(unit_circle, 4, 32, np.zeros((4, 32)))
        with pytest.raises(NumericsError):
            boundary_fourier_modes(meas, S=16)


class TestModeConvolutions:
    def test_identity_alpha(self):
        rng = np.random.default_rng(0)
        S, n = 12, 5
        I = ModeStack(0, rng.standard_normal((S + 1, n))
                      + 1j * rng.standard_normal((S + 1, n)))
        J = modes_to_J(I, delta_factor(n, S, 32), M=2, S=S)
        assert J.m_lo == 2 and J.m_hi == S
        for m in range(2, S + 1):
            assert np.allclose(J.mode(m), I.mode(m))

    def test_single_shifted_alpha(self):
        # alpha with only alpha_1 = a gives J_m = a I_{m+1}
        rng = np.random.default_rng(1)
        S, n = 10, 3
        I = ModeStack(0, rng.standard_normal((S + 1, n)) + 0j)
        fm = delta_factor(n, S, 32)
        fm.modes[0] = 0.0
        fm.modes[1] = 0.7 - 0.2j
        J = modes_to_J(I, fm, M=1, S=S)
        for m in range(1, S):
            assert np.allclose(J.mode(m), (0.7 - 0.2j) * I.mode(m + 1))
        assert np.allclose(J.mode(S), 0.0)

    def test_round_trip_with_synthetic_factors(self):
        # alpha from a random positive-mode exponential; beta its reciprocal
        rng = np.random.default_rng(3)
        S, N, n = 24, 128, 4
        th = 2 * np.pi * np.arange(N) / N
        h = sum(rng.standard_normal() * 0.2 * np.exp(-1j * m * th)
                for m in range(1, 5))
        ea, eb = np.exp(-h), np.exp(h)
        def fm(sig, vals):
            spec = np.tile((np.fft.fft(vals) / N)[:, None], (1, n))
            return IntegratingFactorModes(np.zeros((n, 2)), sig,
                                          spec[: S + 1].copy(), spec, N)
        al, be = fm("-", ea), fm("+", eb)
        I = ModeStack(0, rng.standard_normal((S + 1, n)) + 0j)
        J = modes_to_J(I, al, M=0, S=S)
        back = modes_to_I(J, be, list(range(0, S // 2)), S)
        for m in range(S // 2):
            assert np.max(np.abs(back.mode(m) - I.mode(m))) < 1e-6

    def test_rejects_bad_ranges(self):
        I = ModeStack(0, np.zeros((5, 2), dtype=complex))
        with pytest.raises(NumericsError):
            modes_to_J(I, delta_factor(2, 4, 16), M=3, S=4)


def circle_boundary(K):
    w = 2 * np.pi * np.arange(K) / K
    zeta = np.exp(1j * w)
    return zeta, 1j * zeta, np.full(K, 2 * np.pi / K)


class TestCauchyInterior:
    def test_constant_stack(self):
        K, S = 512, 8
        zeta, dzeta, dw = circle_boundary(K)
        c = 1.3 - 0.4j
        Jb = ModeStack(0, np.tile(np.array([c]), (S + 1, K)))
        for z in (0.1 + 0.2j, -0.5 + 0.1j):
            got = cauchy_interior(Jb, zeta, dzeta, dw, z, m=2, S=S)
            assert abs(got - c) < 1e-3

    def test_a_analytic_family(self):
        # (J_m, J_{m+1}, ..., J_{m+4}) = (zbar, 0, -z, 0, c): satisfies
        # dbar J_m + d J_{m+2} = 0 for every pair
        K, S, M = 512, 10, 2
        zeta, dzeta, dw = circle_boundary(K)
        c = 0.3 + 0.8j
        vals = np.zeros((S - M + 1, K), dtype=complex)
        vals[0] = np.conj(zeta)
        vals[2] = -zeta
        vals[4] = c
        Jb = ModeStack(M, vals)
        zs = np.array([0.2 - 0.1j, -0.3 + 0.4j, 0.05 + 0.05j, 0.6 + 0.1j, -0.5j])
        got = cauchy_interior_stack(Jb, zeta, dzeta, dw, zs, M, S - 2)
        expect = np.zeros_like(got)
        expect[0] = np.conj(zs)
        expect[2] = -zs
        expect[4] = c
        assert np.max(np.abs(got - expect)) < 1e-3

    def test_linearity(self):
        rng = np.random.default_rng(4)
        K, S = 128, 6
        zeta, dzeta, dw = circle_boundary(K)
        A = ModeStack(0, rng.standard_normal((S + 1, K))
                      + 1j * rng.standard_normal((S + 1, K)))
        B = ModeStack(0, rng.standard_normal((S + 1, K)) + 0j)
        C = ModeStack(0, 2.0 * A.values - 0.5 * B.values)
        z = 0.3 + 0.2j
        va = cauchy_interior(A, zeta, dzeta, dw, z, 1, S)
        vb = cauchy_interior(B, zeta, dzeta, dw, z, 1, S)
        vc = cauchy_interior(C, zeta, dzeta, dw, z, 1, S)
        assert abs(vc - (2.0 * va - 0.5 * vb)) < 1e-12

    def test_convergence_in_K(self):
        # near the boundary the kernel is sharply peaked, so the quadrature
        # error is visible and must drop as K doubles
        z = 0.9 + 0.05j
        errs = []
        for K in (64, 128, 256):
            zeta, dzeta, dw = circle_boundary(K)
            Jb = ModeStack(0, np.tile(np.array([1.0 + 0j]), (6, K)))
            got = cauchy_interior(Jb, zeta, dzeta, dw, z, 1, 5)
            errs.append(abs(got - 1.0) + 1e-15)
        assert errs[1] < errs[0] and errs[2] < errs[1]

    def test_power_ratio_modulus(self):
        zeta, _, _ = circle_boundary(32)
        z = 0.3 - 0.2j
        r = np.conj(zeta - z) / (zeta - z)
        assert np.allclose(np.abs(r), 1.0)

    def test_rejects_out_of_range_mode(self):
        K, S = 64, 6
        zeta, dzeta, dw = circle_boundary(K)
        Jb = ModeStack(0, np.zeros((S + 1, K), dtype=complex))
        with pytest.raises(NumericsError):
            cauchy_interior(Jb, zeta, dzeta, dw, 0.1, m=S - 1, S=S)
