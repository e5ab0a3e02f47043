import os

# Pin BLAS/OpenMP pools before numpy loads: latency-sensitive tests are
# specified single-threaded and this box overcommits its second vCPU.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np
import pytest

from softshadow import CameraPose, build_bases, ground_for
from softshadow.procgen import make_cube, make_pole, make_sphere, make_torus

CUBE_OBJ = """\
# unit cube, vertices in [0, 10]^3
v 0 0 0
v 10 0 0
v 10 0 10
v 0 0 10
v 0 10 0
v 10 10 0
v 10 10 10
v 0 10 10
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
"""


@pytest.fixture(scope="session")
def cube_mesh():
    return make_cube()


@pytest.fixture(scope="session")
def sphere_mesh():
    return make_sphere(n_lat=12, n_lon=18)


@pytest.fixture(scope="session")
def torus_mesh():
    return make_torus(n_major=24, n_minor=16)


@pytest.fixture(scope="session")
def pole_mesh():
    return make_pole()


@pytest.fixture(scope="session")
def pose48():
    return CameraPose(yaw=0.0, pitch=15.0, image_size=(48, 48))


@pytest.fixture(scope="session")
def cube_bases48(cube_mesh, pose48):
    return build_bases(cube_mesh, pose48, ground_for(cube_mesh))


@pytest.fixture()
def cube_obj_path(tmp_path):
    path = tmp_path / "cube.obj"
    path.write_text(CUBE_OBJ)
    return path


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260811)
