"""Unstructured triangular meshes on strictly convex domains and P1 fields.

The mesh generator builds a layered polar/elliptic template and Delaunay
triangulates it, so the triangulation carries no information about any
medium or source geometry placed on top of it later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshError

__all__ = [
    "BoundaryCurve",
    "Triangulation",
    "P1Field",
    "generate_mesh",
    "affine_coefficients",
    "wirtinger_derivative",
    "read_mesh",
    "write_mesh",
]


class BoundaryCurve:
    """Parameterized strictly convex boundary curve zeta(w), w in [0, 2pi).

    Supported kinds: ``circle`` (radius) and ``ellipse`` (semi-axes a, b).
    The domain contains the origin and Arg zeta(w) increases strictly in w.
    """

    def __init__(self, kind, *, radius=None, a=None, b=None):
        if kind == "circle":
            if radius is None or radius <= 0:
                raise MeshError(f"circle needs a positive radius, got {radius}")
            self.a = self.b = float(radius)
        elif kind == "ellipse":
            if a is None or b is None or a <= 0 or b <= 0:
                raise MeshError(f"ellipse needs positive semi-axes, got a={a}, b={b}")
            self.a, self.b = float(a), float(b)
        else:
            raise MeshError(f"unknown curve kind {kind!r}")
        self.kind = kind

    def point(self, w):
        w = np.asarray(w, dtype=float)
        return np.stack([self.a * np.cos(w), self.b * np.sin(w)], axis=-1)

    def derivative(self, w):
        """zeta'(w) as a complex number (dx/dw + i dy/dw)."""
        w = np.asarray(w, dtype=float)
        return -self.a * np.sin(w) + 1j * self.b * np.cos(w)

    def param_of(self, points):
        """Curve parameter w of points on (or near) the boundary, in [0, 2pi)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.arctan2(pts[:, 1] / self.b, pts[:, 0] / self.a)
        w = np.mod(w, 2.0 * np.pi)
        return w if np.asarray(points).ndim > 1 else float(w[0])

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (pts[:, 0] / self.a) ** 2 + (pts[:, 1] / self.b) ** 2 < 1.0

    @property
    def circumradius(self):
        return max(self.a, self.b)

    def perimeter(self):
        # Ramanujan's approximation; only used to size mesh rings.
        a, b = self.a, self.b
        h = (a - b) ** 2 / (a + b) ** 2
        return math.pi * (a + b) * (1.0 + 3 * h / (10 + math.sqrt(4 - 3 * h)))

    def exit_distance(self, x, xi):
        """Distance from x (inside or on the boundary) to the curve along xi.

        Vectorized over leading axes of ``x``; ``xi`` broadcasts.
        Returns 0 where the forward ray misses the domain.
        """
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        u1, u2 = x[..., 0] / self.a, x[..., 1] / self.b
        d1, d2 = xi[..., 0] / self.a, xi[..., 1] / self.b
        dd = d1 * d1 + d2 * d2
        ud = u1 * d1 + u2 * d2
        disc = ud * ud - dd * ((u1 * u1 + u2 * u2) - 1.0)
        disc = np.maximum(disc, 0.0)
        t = (-ud + np.sqrt(disc)) / dd
        return np.maximum(t, 0.0)

    def __eq__(self, other):
        return (
            isinstance(other, BoundaryCurve)
            and self.kind == other.kind
            and self.a == other.a
            and self.b == other.b
        )

    def describe(self):
        if self.kind == "circle":
            return f"circle:{self.a!r}"
        return f"ellipse:{self.a!r}:{self.b!r}"

    @staticmethod
    def from_description(desc):
        parts = desc.split(":")
        if parts[0] == "circle" and len(parts) == 2:
            return BoundaryCurve("circle", radius=float(parts[1]))
        if parts[0] == "ellipse" and len(parts) == 3:
            return BoundaryCurve("ellipse", a=float(parts[1]), b=float(parts[2]))
        raise MeshError(f"bad curve description {desc!r}")


@dataclass(frozen=True)
class Triangulation:
    """Immutable triangular mesh with an ordered boundary vertex loop.

    Triangles are CCW, pairwise disjoint, and their union is an inscribed
    polygonal approximation of the domain.  ``boundary_loop`` lists boundary
    vertex indices by strictly increasing argument.
    """

    vertices: np.ndarray        # (nv, 2)
    triangles: np.ndarray       # (nt, 3) int, CCW
    boundary_loop: np.ndarray   # (nb,) int
    curve: BoundaryCurve | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v, t = self.vertices, self.triangles
        if t.min(initial=0) < 0 or t.max(initial=-1) >= len(v):
            raise MeshError("triangle vertex index out of range")
        areas = _signed_areas(v, t)
        bad = np.nonzero(areas <= 0)[0]
        if bad.size:
            raise MeshError(f"triangle {bad[0]} is not CCW (signed area {areas[bad[0]]:g})")
        args = np.arctan2(v[self.boundary_loop, 1], v[self.boundary_loop, 0])
        args = np.mod(args, 2.0 * np.pi)
        if np.any(np.diff(args) <= 0):
            raise MeshError("boundary loop arguments are not strictly increasing")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def areas(self):
        if "areas" not in self._cache:
            self._cache["areas"] = _signed_areas(self.vertices, self.triangles)
        return self._cache["areas"]

    @property
    def centroids(self):
        if "centroids" not in self._cache:
            self._cache["centroids"] = self.vertices[self.triangles].mean(axis=1)
        return self._cache["centroids"]

    @property
    def neighbors(self):
        """(nt, 3) neighbor triangle across the edge opposite local vertex j, or -1."""
        if "neighbors" not in self._cache:
            self._cache["neighbors"] = _build_neighbors(self.triangles)
        return self._cache["neighbors"]

    @property
    def is_boundary_vertex(self):
        if "bmask" not in self._cache:
            m = np.zeros(self.n_vertices, dtype=bool)
            m[self.boundary_loop] = True
            self._cache["bmask"] = m
        return self._cache["bmask"]

    @property
    def boundary_params(self):
        """Curve parameter w of each boundary-loop vertex (increasing)."""
        if "bparams" not in self._cache:
            if self.curve is not None:
                w = self.curve.param_of(self.vertices[self.boundary_loop])
            else:
                bv = self.vertices[self.boundary_loop]
                w = np.mod(np.arctan2(bv[:, 1], bv[:, 0]), 2.0 * np.pi)
            self._cache["bparams"] = w
        return self._cache["bparams"]

    def max_diameter(self):
        v, t = self.vertices, self.triangles
        e = np.stack(
            [
                np.linalg.norm(v[t[:, 0]] - v[t[:, 1]], axis=1),
                np.linalg.norm(v[t[:, 1]] - v[t[:, 2]], axis=1),
                np.linalg.norm(v[t[:, 2]] - v[t[:, 0]], axis=1),
            ]
        )
        return float(e.max())

    def equals(self, other):
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
            and np.array_equal(self.boundary_loop, other.boundary_loop)
        )


@dataclass(frozen=True)
class P1Field:
    """Piecewise-linear continuous complex field: one value per mesh vertex."""

    mesh: Triangulation
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.mesh.n_vertices:
            raise MeshError("field length does not match vertex count")

    def at_centroids(self):
        return self.values[self.mesh.triangles].mean(axis=1)


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _build_neighbors(triangles):
    nt = len(triangles)
    nb = -np.ones((nt, 3), dtype=np.int64)
    edge_owner = {}
    for ell in range(nt):
        tri = triangles[ell]
        for j in range(3):
            a, b = tri[(j + 1) % 3], tri[(j + 2) % 3]
            key = (min(a, b), max(a, b))
            if key in edge_owner:
                other, oj = edge_owner.pop(key)
                nb[ell, j] = other
                nb[other, oj] = ell
            else:
                edge_owner[key] = (ell, j)
    return nb


def generate_mesh(curve: BoundaryCurve, target_edge_length: float) -> Triangulation:
    """Layered template mesh of the domain bounded by ``curve``.

    Boundary vertices are placed exactly on the curve; interior rings are
    staggered scaled copies.  Raises if the edge length would produce fewer
    than 16 boundary vertices.
    """
    h = float(target_edge_length)
    if h <= 0:
        raise MeshError("target_edge_length must be positive")
    # never fewer than 16 boundary vertices, however coarse the request
    n_bd = max(16, int(round(curve.perimeter() / h)))
    n_rings = max(2, int(round(curve.circumradius / h)))
    pts = [np.zeros((1, 2))]
    for i in range(1, n_rings + 1):
        s = i / n_rings
        if i == n_rings:
            m = n_bd
        else:
            ring = BoundaryCurve("ellipse", a=s * curve.a, b=s * curve.b)
            m = max(8, int(round(ring.perimeter() / h)))
        w = 2.0 * np.pi * (np.arange(m) + 0.5 * (i % 2)) / m
        ring_pts = np.stack([s * curve.a * np.cos(w), s * curve.b * np.sin(w)], axis=1)
        if i == n_rings:
            ring_pts = curve.point(w)  # exactly on the curve
            bd_start = sum(len(p) for p in pts)
        pts.append(ring_pts)
    vertices = np.vstack(pts)
    tri = Delaunay(vertices)
    simplices = tri.simplices.astype(np.int64)
    areas = _signed_areas(vertices, simplices)
    flip = areas < 0
    simplices[flip] = simplices[flip][:, ::-1]
    keep = np.abs(areas) > 1e-14 * curve.circumradius**2
    simplices = simplices[keep]

    bd_idx = np.arange(bd_start, bd_start + n_bd)
    args = np.mod(np.arctan2(vertices[bd_idx, 1], vertices[bd_idx, 0]), 2.0 * np.pi)
    loop = bd_idx[np.argsort(args)]
    return Triangulation(vertices=vertices, triangles=simplices,
                         boundary_loop=loop, curve=curve)


def affine_coefficients(fld: P1Field, triangle_index: int):
    """Complex (a, b, c) with a*x1 + b*x2 + c matching the vertex values."""
    tri = fld.mesh.triangles[triangle_index]
    p = fld.mesh.vertices[tri]
    A = np.column_stack([p[:, 0], p[:, 1], np.ones(3)])
    det = np.linalg.det(A)
    if abs(det) < 1e-300:
        raise MeshError(f"triangle {triangle_index} is degenerate")
    a, b, c = np.linalg.solve(A, fld.values[tri])
    return a, b, c


def all_affine_coefficients(fld: P1Field):
    """Vectorized (a, b, c) arrays for every triangle."""
    mesh = fld.mesh
    p = mesh.vertices[mesh.triangles]        # (nt, 3, 2)
    v = fld.values[mesh.triangles]           # (nt, 3)
    x, y = p[..., 0], p[..., 1]
    two_area = 2.0 * mesh.areas
    # inverse of [[x, y, 1]] rows via cofactors
    a = (v[:, 0] * (y[:, 1] - y[:, 2])
         + v[:, 1] * (y[:, 2] - y[:, 0])
         + v[:, 2] * (y[:, 0] - y[:, 1])) / two_area
    b = (v[:, 0] * (x[:, 2] - x[:, 1])
         + v[:, 1] * (x[:, 0] - x[:, 2])
         + v[:, 2] * (x[:, 1] - x[:, 0])) / two_area
    c = (v[:, 0] * (x[:, 1] * y[:, 2] - x[:, 2] * y[:, 1])
         + v[:, 1] * (x[:, 2] * y[:, 0] - x[:, 0] * y[:, 2])
         + v[:, 2] * (x[:, 0] * y[:, 1] - x[:, 1] * y[:, 0])) / two_area
    return a, b, c


def wirtinger_derivative(fld: P1Field, triangle_index: int) -> complex:
    """d/dz of the affine restriction: (a - i b) / 2."""
    a, b, _ = affine_coefficients(fld, triangle_index)
    return (a - 1j * b) / 2.0


def write_mesh(path, mesh: Triangulation):
    with open(path, "w") as f:
        f.write("RTE-MESH v1\n")
        f.write(f"{mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_loop)}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        for i in mesh.boundary_loop:
            f.write(f"{i}\n")


def read_mesh(path, curve: BoundaryCurve | None = None) -> Triangulation:
    with open(path) as f:
        header = f.readline().strip()
        if header != "RTE-MESH v1":
            raise MeshError(f"bad mesh header {header!r}")
        try:
            nv, nt, nb = map(int, f.readline().split())
        except ValueError as e:
            raise MeshError(f"bad mesh count line: {e}") from None
        try:
            vertices = np.array(
                [[float(t) for t in f.readline().split()] for _ in range(nv)]
            ).reshape(nv, 2)
            triangles = np.array(
                [[int(t) for t in f.readline().split()] for _ in range(nt)],
                dtype=np.int64,
            ).reshape(nt, 3)
            loop = np.array([int(f.readline()) for _ in range(nb)], dtype=np.int64)
        except ValueError as e:
            raise MeshError(f"malformed mesh body: {e}") from None
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshError("triangle vertex index out of range")
    areas = _signed_areas(vertices, triangles)
    bad = np.nonzero(areas <= 0)[0]
    if bad.size:
        raise MeshError(f"triangle {bad[0]} in {path} is clockwise or degenerate")
    return Triangulation(vertices=vertices, triangles=triangles,
                         boundary_loop=loop, curve=curve)
