import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True, scope="session")
def _run_from_repo_root():
    """Tests reference configs/ by relative path; anchor the cwd."""
    old = os.getcwd()
    os.chdir(ROOT)
    yield
    os.chdir(old)
