"""Reconstruction of radiative sources in 2D scattering media from boundary outflow."""

from .errors import ConfigError, MeshError, NumericsError, RadSourceError, StageError
from .mesh import BoundaryCurve, P1Field, Triangulation, generate_mesh, read_mesh, write_mesh
from .phantoms import HenyeyGreenstein, Medium, Phantom, TableKernel
from .forward import BoundaryMeasurement, ballistic_measurement, solve_forward
from .recon import ReconParams, ReconstructionReport, reconstruct, sweep_M

__version__ = "0.1.0"
