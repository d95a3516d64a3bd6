import os
import sys

import pytest

# Repository root, so that ``src.`` imports resolve
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.utils.config import load_config


@pytest.fixture
def small_config():
    """Defaults with sample counts small enough for unit tests"""
    config = load_config()
    config['CURVE_SAMPLES'] = 129
    config['LOG_FILE'] = ''
    return config
