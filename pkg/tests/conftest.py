import pytest

from fuchsdim.group_model import builtin


@pytest.fixture(scope="session")
def gamma2():
    return builtin("gamma2")


@pytest.fixture(scope="session")
def torus():
    return builtin("punctured_torus")


@pytest.fixture(scope="session", params=["gamma2", "punctured_torus"])
def group(request):
    return builtin(request.param)
