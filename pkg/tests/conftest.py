import pytest

from fixture_corpus import Workspace, make_workspace


@pytest.fixture
def workspace(tmp_path) -> Workspace:
    return make_workspace(tmp_path)
