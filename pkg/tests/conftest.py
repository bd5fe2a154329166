import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(autouse=True)
def _quiet_indefinite_warning():
    """Free-particle models with coupling always warn; keep test output readable."""
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="position block")
        yield
