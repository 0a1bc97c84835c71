import numpy as np
import pytest

from radsource.mesh import BoundaryCurve, generate_mesh
from radsource.phantoms import HenyeyGreenstein, Medium, Phantom


@pytest.fixture(scope="session")
def unit_circle():
    return BoundaryCurve("circle", radius=1.0)


@pytest.fixture(scope="session")
def coarse_mesh(unit_circle):
    return generate_mesh(unit_circle, 0.2)


@pytest.fixture(scope="session")
def medium_mesh(unit_circle):
    return generate_mesh(unit_circle, 0.08)


@pytest.fixture(scope="session")
def unit_medium(unit_circle):
    """mu_t = 1 on the unit disc, no scattering."""
    return Medium(curve=unit_circle, mua=1.0, mus=0.0)


@pytest.fixture(scope="session")
def gaussian_medium(unit_circle):
    """Smooth radial absorber, peak 1, width 0.3."""
    mua = Phantom.build([("gauss", (0.0, 0.0, 0.3), 1.0)])
    return Medium(curve=unit_circle, mua=mua, mus=0.0)


@pytest.fixture(scope="session")
def exp1_medium(unit_circle):
    r3 = np.sqrt(3.0) / 4.0
    mua = Phantom.build([("disc", (0.5, 0.0, 0.3), 2.0),
                         ("disc", (-0.25, r3, 0.2), 1.0)], background=0.1)
    return Medium(curve=unit_circle, mua=mua, mus=5.0,
                  kernel=HenyeyGreenstein(0.5))


@pytest.fixture(scope="session")
def exp1_source():
    r3 = np.sqrt(3.0) / 4.0
    return Phantom.build([("rect", (-0.25, 0.5, -0.15, 0.15), 2.0),
                          ("disc", (-0.25, r3, 0.2), 1.0)])
