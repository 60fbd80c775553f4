import pytest

from su2splice.catalog import standard_entries
from su2splice.tracing import closed_loops, trace_pillowcase_image


@pytest.fixture(scope="session")
def entries():
    return standard_entries()


@pytest.fixture(scope="session")
def trefoil(entries):
    return entries["trefoil"].group


@pytest.fixture(scope="session")
def trefoil_curves(trefoil):
    return trace_pillowcase_image(trefoil, step=0.01, grid=10, seed=0)


@pytest.fixture(scope="session")
def trefoil_loops(trefoil, trefoil_curves):
    return closed_loops(trefoil, trefoil_curves)
