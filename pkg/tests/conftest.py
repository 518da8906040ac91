import numpy as np
import pytest

import foamlab as fl


@pytest.fixture(scope="session")
def material():
    return fl.WallMaterial(E0=61700.0, nu0=0.3, rho0=2700.0)


@pytest.fixture(scope="session")
def validation_geom():
    """The experimental-validation configuration: H=30, 109 cells, mu=8.52%."""
    cfg = fl.RveConfig(H=30.0, n_cells=109, mu_target=0.0852, rng_seed=7)
    return fl.generate_rve(cfg)


@pytest.fixture(scope="session")
def small_geom():
    cfg = fl.RveConfig(H=30.0, n_cells=12, mu_target=0.0852, rng_seed=3)
    return fl.generate_rve(cfg)


def single_wall_geometry(H=30.0, t=0.1142, x=15.0):
    """One vertical wall spanning bottom to top (axial-column oracle)."""
    return fl.RveGeometry(
        H=H,
        vertices=np.array([[x, 0.0], [x, H]]),
        walls=np.array([[0, 1]], dtype=np.int64),
        boundary_pairs=np.empty((0, 2), dtype=np.int64),
        bottom_vertices=np.array([0], dtype=np.int64),
        top_vertices=np.array([1], dtype=np.int64),
        n_cells=0,
        L_cell=H,
        t_cell=t,
        mu_realized=t * H / (H * H),
        density_mode="t",
    )
