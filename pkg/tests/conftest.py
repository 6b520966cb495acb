import pytest

from frontierkit import (
    MoralHazardPrimitives,
    PowerCost,
    PowerUtility,
    make_moral_hazard_technology,
)


@pytest.fixture(scope="session")
def default_prims():
    """lam=1, w=1, phi = sqrt, kappa = L**2."""
    return MoralHazardPrimitives(
        lam=1.0, w=1.0, phi=PowerUtility(0.5), kappa=PowerCost(2.0)
    )


@pytest.fixture(scope="session")
def default_tech(default_prims):
    return make_moral_hazard_technology(default_prims)


@pytest.fixture(scope="session")
def corner_prims():
    """lam=1, w=4 drives the post-breakthrough peak to the corner u1 = 0."""
    return MoralHazardPrimitives(
        lam=1.0, w=4.0, phi=PowerUtility(0.5), kappa=PowerCost(2.0)
    )


@pytest.fixture(scope="session")
def corner_tech(corner_prims):
    return make_moral_hazard_technology(corner_prims)
