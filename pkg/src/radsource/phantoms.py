"""Medium coefficients, source phantoms, and scattering kernels.

Phantoms are painter's-order lists of geometric primitives: later entries
overwrite earlier ones where they overlap (``add=True`` entries accumulate
instead, used for smooth bumps and the Shepp-Logan preset).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericsError
from .mesh import BoundaryCurve

TWO_PI = 2.0 * math.pi

__all__ = [
    "Phantom",
    "HenyeyGreenstein",
    "TableKernel",
    "Medium",
    "hg_mode",
    "hg_kernel",
    "truncation_error_sq",
    "evaluate_medium",
    "shepp_logan_entries",
]


def hg_mode(g: float, m: int) -> float:
    """Angular Fourier mode of the Henyey-Greenstein kernel: g^|m| / 2pi."""
    if not 0.0 <= g < 1.0:
        raise NumericsError(f"anisotropy g must be in [0, 1), got {g}")
    return g ** abs(m) / TWO_PI

def hg_kernel(g: float, cos_theta) -> float:
    """Pointwise Henyey-Greenstein kernel value at scattering cosine cos_theta."""
    if not 0.0 <= g < 1.0:
        raise NumericsError(f"anisotropy g must be in [0, 1), got {g}")
    c = np.asarray(cos_theta, dtype=float)
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise NumericsError("|cos_theta| must be <= 1")
    return (1.0 - g * g) / (TWO_PI * (1.0 - 2.0 * g * c + g * g))

def truncation_error_sq(g: float, M: int) -> float:
    """Squared L2(D x S1) discrepancy of the order-M kernel truncation."""
    if not 0.0 <= g < 1.0:
        raise NumericsError(f"anisotropy g must be in [0, 1), got {g}")
    if M < 0:
        raise NumericsError("M must be >= 0")
    return g ** (2 * M + 2) / (1.0 - g * g)


class HenyeyGreenstein:
    """Henyey-Greenstein scattering kernel with anisotropy g in [0, 1)."""

    def __init__(self, g: float):
        if not 0.0 <= g < 1.0:
            raise NumericsError(f"anisotropy g must be in [0, 1), got {g}")
        self.g = float(g)

    def mode(self, m: int) -> float:
        return self.g ** abs(m) / TWO_PI

    def value(self, cos_theta):
        return hg_kernel(self.g, cos_theta)

    def truncated(self, M: int) -> "TableKernel":
        """Symmetric truncation |m| <= M as an explicit mode table."""
        return TableKernel([self.mode(m) for m in range(M + 1)])


class TableKernel:
    """Kernel given by its nonnegative angular modes p_0..p_M (p_{-m} = p_m)."""

    def __init__(self, modes):
        self.modes = np.asarray(modes, dtype=float)
        if self.modes.ndim != 1 or len(self.modes) == 0:
            raise NumericsError("mode table must be a nonempty 1D sequence")

    def mode(self, m: int) -> float:
        m = abs(m)
        return float(self.modes[m]) if m < len(self.modes) else 0.0

    def value(self, cos_theta):
        theta = np.arccos(np.clip(np.asarray(cos_theta, dtype=float), -1.0, 1.0))
        out = np.full_like(theta, self.modes[0])
        for m in range(1, len(self.modes)):
            out = out + 2.0 * self.modes[m] * np.cos(m * theta)
        return out


@dataclass(frozen=True)
class Phantom:
    """Piecewise-constant (plus optional smooth additive) spatial field.

    entries: list of (kind, params, value, add) with kinds
      disc      params (cx, cy, r)
      rect      params (x0, x1, y0, y1)
      ellipse   params (cx, cy, ra, rb, rot_deg)
      gauss     params (cx, cy, sigma)   -- additive Gaussian bump
    """

    entries: tuple = ()
    background: float = 0.0

    @staticmethod
    def build(entries, background=0.0):
        norm = []
        for e in entries:
            kind, params, value = e[0], tuple(float(p) for p in e[1]), float(e[2])
            add = bool(e[3]) if len(e) > 3 else (kind == "gauss")
            norm.append((kind, params, value, add))
        return Phantom(entries=tuple(norm), background=float(background))

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        out = np.full(len(pts), self.background, dtype=float)
        for kind, params, value, add in self.entries:
            if kind == "disc":
                cx, cy, r = params
                mask = (x - cx) ** 2 + (y - cy) ** 2 < r * r
                contrib = value
            elif kind == "rect":
                x0, x1, y0, y1 = params
                mask = (x > x0) & (x < x1) & (y > y0) & (y < y1)
                contrib = value
            elif kind == "ellipse":
                cx, cy, ra, rb, rot = params
                phi = math.radians(rot)
                dx, dy = x - cx, y - cy
                u = dx * math.cos(phi) + dy * math.sin(phi)
                v = -dx * math.sin(phi) + dy * math.cos(phi)
                mask = (u / ra) ** 2 + (v / rb) ** 2 < 1.0
                contrib = value
            elif kind == "gauss":
                cx, cy, sigma = params
                r2 = (x - cx) ** 2 + (y - cy) ** 2
                out = out + value * np.exp(-0.5 * r2 / sigma**2)
                continue
            else:
                raise NumericsError(f"unknown phantom shape {kind!r}")
            if add:
                out = out + np.where(mask, contrib, 0.0)
            else:
                out = np.where(mask, contrib, out)
        return out if np.asarray(points).ndim > 1 else float(out[0])

    def integral_hint(self):
        """Exact integral for painter-free additive/disjoint piecewise layouts.

        Only valid when entries do not overlap each other; used by tests.
        """
        total = 0.0
        for kind, params, value, add in self.entries:
            if kind == "disc":
                total += value * math.pi * params[2] ** 2
            elif kind == "rect":
                x0, x1, y0, y1 = params
                total += value * (x1 - x0) * (y1 - y0)
            elif kind == "ellipse":
                total += value * math.pi * params[2] * params[3]
            elif kind == "gauss":
                total += value * TWO_PI * params[2] ** 2
        return total


# Standard modified Shepp-Logan ellipses: (A, ra, rb, cx, cy, rot_deg), additive.
_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def shepp_logan_entries(amplitude=1.0):
    """Additive phantom entries for the modified Shepp-Logan layout."""
    return [
        ("ellipse", (cx, cy, ra, rb, rot), amplitude * A, True)
        for A, ra, rb, cx, cy, rot in _SHEPP_LOGAN
    ]


def _as_field(f):
    if callable(f):
        return f
    return Phantom.build([], background=float(f))


@dataclass(frozen=True)
class Medium:
    """Absorption/scattering coefficients plus a scattering kernel on a domain.

    Both coefficient fields are extended by zero outside the domain curve.
    """

    curve: BoundaryCurve
    mua: object
    mus: object
    kernel: object = field(default_factory=lambda: HenyeyGreenstein(0.0))

    def __post_init__(self):
        object.__setattr__(self, "mua", _as_field(self.mua))
        object.__setattr__(self, "mus", _as_field(self.mus))

    def _masked(self, f, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.asarray(f(pts), dtype=float)
        vals = np.where(self.curve.contains(pts), vals, 0.0)
        return vals

    def mua_at(self, points):
        return self._masked(self.mua, points)

    def mus_at(self, points):
        return self._masked(self.mus, points)

    def mut_at(self, points):
        return self.mua_at(points) + self.mus_at(points)


def evaluate_medium(medium: Medium, point):
    """(mu_a, mu_s, mu_t) at one point, zero outside the domain."""
    mua = float(medium.mua_at(point)[0])
    mus = float(medium.mus_at(point)[0])
    return mua, mus, mua + mus
