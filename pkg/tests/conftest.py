from pathlib import Path

import pytest

from gridcarve import _accel, domains, embed
from gridcarve.assemble import ProblemSpec

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

BACKENDS = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = _accel.backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(before)


@pytest.fixture
def parabola():
    return domains.load_fixture("parabola")


@pytest.fixture
def parabola_problem():
    return ProblemSpec("poisson", "(x+y)^2", f="4", exact="(x+y)^2")


def parabola_mesh(variant, dx=0.1):
    d = domains.load_fixture("parabola")
    g = embed.build_rectangle(d, "fixed", dx, fixed=(-0.2, -0.2, 1.2, 1.2))
    return embed.build_mesh(d, g, variant)
