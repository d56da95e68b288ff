import sys

import numpy as np
import pytest

from frscat import kernels
from frscat.filterbank import FilterBankSpec, cached_bank

KERNEL_NAMES = (
    "gather_multiply",
    "broadcast_multiply",
    "modulus_energy",
    "block_means",
    "directed_hausdorff",
    "contingency",
)


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = kernels.get_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture(scope="session")
def bank64():
    return cached_bank(FilterBankSpec())


@pytest.fixture(scope="session")
def bank32():
    return cached_bank(FilterBankSpec(num_scales=3, num_angles=4, grid_width=32, grid_height=32))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
