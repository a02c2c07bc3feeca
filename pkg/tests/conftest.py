import numpy as np
import pytest

from cyclic_reduction import kernels
from cyclic_reduction.blockmat import hermitize, new_system
from cyclic_reduction.io import GeneratorSpec, generate


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    prev = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(prev)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hpd(rng, m, shift=1.0):
    R = crandn(rng, m, m)
    return hermitize(R @ R.conj().T + shift * np.eye(m))


def scalar_system(diag, sub, rhs):
    """1x1-block system from plain numbers."""
    return new_system([[[a]] for a in diag], [[[b]] for b in sub], [[[y]] for y in rhs])


def make(n, m, k, seed=0, kind="hpd_random", **kw):
    return generate(GeneratorSpec(n, m, k, seed, kind, **kw))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
