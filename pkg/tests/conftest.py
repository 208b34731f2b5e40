import pytest

from khop import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger any JIT compilation before timed tests run
    kernels.warmup()
