import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modelprobe import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    _kernels.warmup()
