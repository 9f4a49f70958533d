import pytest

from hillmap import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the JIT kernels once so tests measure steady-state runtime."""
    _kernels.warmup()
