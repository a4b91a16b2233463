import numpy as np
import pytest

import frontlab as fl
from frontlab.errors import ValidationError
from frontlab.potentials import kernel_core_bound


@pytest.fixture
def grid():
    return fl.TraitGrid(10.0, 201)


@pytest.mark.parametrize("kind,expect", [
    ("quadratic", lambda y: y**2),
    ("quartic", lambda y: y**4),
    ("abs", lambda y: np.abs(y)),
])
def test_potential_presets(grid, kind, expect):
    g = fl.PotentialSpec(kind).validate_on(grid)
    assert np.allclose(g, expect(grid.nodes))


def test_potential_scaling(grid):
    g = fl.PotentialSpec("quadratic", a=3.0).sample(grid)
    assert g[-1] == pytest.approx(300.0)


def test_nonconfining_tabulated_rejected(grid):
    ys = np.linspace(-10, 10, 21)
    flat = np.ones_like(ys)  # g(0) != 0
    with pytest.raises(ValidationError):
        fl.PotentialSpec("tabulated", table=(ys, flat)).validate_on(grid)
    hump = 1.0 - (ys / 10.0) ** 2  # decreasing toward the boundary
    with pytest.raises(ValidationError):
        fl.PotentialSpec("tabulated", table=(ys, hump)).validate_on(grid)


def test_growth_bound_enforced(grid):
    # kappa = 0.1 cannot dominate y^2 at y = 10
    with pytest.raises(ValidationError):
        fl.PotentialSpec("quadratic", kappa=0.1).validate_on(grid)


def test_tabulated_roundtrip_csv(tmp_path, grid):
    ys = np.linspace(-12, 12, 241)  # step 0.1: grid nodes are table nodes
    path = tmp_path / "pot.csv"
    np.savetxt(path, np.column_stack([ys, ys**2]), delimiter=",")
    spec = fl.PotentialSpec.from_csv(path)
    assert np.allclose(spec.validate_on(grid), grid.nodes**2, atol=1e-10)


def test_tabulated_coverage_checked(grid):
    ys = np.linspace(-5, 5, 11)  # narrower than the grid
    with pytest.raises(ValidationError):
        fl.PotentialSpec("tabulated", table=(ys, ys**2)).sample(grid)


def test_kernel_presets_nonnegative(grid):
    for spec in (fl.KernelSpec("constant", k=2.0),
                 fl.KernelSpec("gaussian", amplitude=1.0, width=2.0),
                 fl.KernelSpec("indicator", radius=3.0, height=0.5)):
        K = spec.validate_on(grid)
        assert np.all(K >= 0) and np.any(K > 0)


def test_zero_kernel_rejected(grid):
    with pytest.raises(ValidationError):
        fl.KernelSpec("indicator", radius=3.0, height=0.0).validate_on(grid)


def test_negative_kernel_rejected(grid):
    ys = np.linspace(-10, 10, 21)
    with pytest.raises(ValidationError):
        fl.KernelSpec("tabulated", table=(ys, -np.ones_like(ys))).validate_on(grid)


def test_kernel_core_bound_constant(grid):
    g = fl.PotentialSpec("quadratic").sample(grid)
    k1, r0 = kernel_core_bound(fl.KernelSpec("constant", k=1.0), grid, 0.25, g)
    # alpha g >= 1 requires |y| >= 2
    assert r0 == pytest.approx(2.0, abs=grid.spacing)
    assert k1 == pytest.approx(1.0)


def test_kernel_core_bound_flags_narrow_indicator(grid):
    g = fl.PotentialSpec("quadratic").sample(grid)
    k1, r0 = kernel_core_bound(fl.KernelSpec("indicator", radius=1.0, height=1.0),
                               grid, 0.25, g)
    assert k1 == 0.0  # vanishes inside the core |y| <= r0 + 2
