import numpy as np
import pytest

from reslab.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def ctx():
    """Shared lazily-cached artifacts (pole data, runs, tables)."""
    return AcceptanceContext()


@pytest.fixture(scope="session")
def pole(ctx):
    return ctx.pole()


@pytest.fixture(scope="session")
def sigma_star(ctx):
    return ctx.sigma_star()


@pytest.fixture(scope="session")
def modulation_table(ctx):
    return ctx.modulation_table()


def assert_close(a, b, tol, label=""):
    err = np.max(np.abs(np.asarray(a) - np.asarray(b)))
    assert err <= tol, f"{label}: |{a} - {b}| = {err} > {tol}"
