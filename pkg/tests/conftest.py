import numpy as np
import pytest

import frontlab as fl
from frontlab import verify


@pytest.fixture(scope="session")
def harmonic_basis():
    """Reference spectrum for g = y^2, alpha = 0.25 (lambda_n = 0.5(2n+1))."""
    grid = fl.TraitGrid(10.0, 2001)
    op = fl.assemble_operator(grid, fl.PotentialSpec("quadratic"), 0.25)
    return fl.eigenpairs(op, 5)


@pytest.fixture(scope="session")
def small_basis():
    """Coarse spectrum for fast stepper tests."""
    grid = fl.TraitGrid(10.0, 201)
    op = fl.assemble_operator(grid, fl.PotentialSpec("quadratic"), 0.25)
    return op, fl.eigenpairs(op, 8)


@pytest.fixture(scope="session")
def unit_kernel():
    return fl.KernelSpec("constant", k=1.0)


@pytest.fixture(scope="session")
def vctx():
    """Shared verification context; the invasion run is computed once."""
    return verify.VerificationContext()
