import pytest

from anyonforge import AnyonModel


@pytest.fixture(scope="session")
def model2() -> AnyonModel:
    return AnyonModel(2)


@pytest.fixture(scope="session")
def model3() -> AnyonModel:
    return AnyonModel(3)


@pytest.fixture(scope="session")
def model8() -> AnyonModel:
    return AnyonModel(8)
