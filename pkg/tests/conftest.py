from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from socialarm.scene import load_robot_config


@pytest.fixture(scope="session")
def robot():
    return load_robot_config()
