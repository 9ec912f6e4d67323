import pytest

from fpplab import backend


@pytest.fixture
def force_backend():
    """Temporarily force a kernel backend; restores resolution afterwards."""

    def _set(name):
        backend.set_backend(name)
        return backend.kernels()

    yield _set
    backend.set_backend(None)
