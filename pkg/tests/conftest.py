import numpy as np
import pytest

from splitsamp import DesignKind, compute_pips, enumerate_design

UNEQUAL_DESIGNS = (
    DesignKind.CHAO,
    DesignKind.TILLE_ELIMINATION,
    DesignKind.GENERALIZED_MIDZUNO,
    DesignKind.BREWER,
)


@pytest.fixture(scope="session")
def x123456():
    return np.arange(1.0, 7.0)


@pytest.fixture(scope="session")
def pi123456(x123456):
    return compute_pips(x123456, 3)


@pytest.fixture(scope="session")
def enumerated_123456(x123456, pi123456):
    """Exact distributions of the four unequal-probability designs on
    x = 1..6, n = 3.  Enumeration is the slow part; share it."""
    return {
        kind: enumerate_design(kind, x=x123456, pi=pi123456, n=3)
        for kind in UNEQUAL_DESIGNS
    }
