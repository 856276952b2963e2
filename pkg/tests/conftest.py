import pytest
from helpers import build_dataset


@pytest.fixture
def tiny_dataset():
    return build_dataset()
