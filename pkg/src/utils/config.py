import logging
from typing import Any, Dict, Optional

from dotenv import dotenv_values

DEFAULTS: Dict[str, Any] = {
    # Quadrature and root finding
    'ABS_TOL': 1e-10,
    'REL_TOL': 1e-10,
    'NODE_BUDGET': 1_000_000,
    'ROOT_TOL': 1e-13,

    # Boundary curves and weight expansions
    'CURVE_SAMPLES': 4096,
    'MIN_WEIGHT_RATIO': 1e-4,

    # Cremona decisions and capacities
    'TIE_EPSILON': 1e-9,
    'MAX_MOVES': 10_000,
    'K_MAX': 50,

    # Hamiltonian flows
    'AXIS_GUARD': 1e-3,
    'FLOW_DT': 1e-3,
    'FLOW_HORIZON': 10.0,

    # Output
    'SIGNIFICANT_DIGITS': 12,
    'LOG_LEVEL': 'WARNING',
    'LOG_FILE': 'toric-radii.log',
}

INTEGER_KEYS = ('NODE_BUDGET', 'CURVE_SAMPLES', 'MAX_MOVES', 'K_MAX', 'SIGNIFICANT_DIGITS')
FLOAT_KEYS = ('ABS_TOL', 'REL_TOL', 'ROOT_TOL', 'MIN_WEIGHT_RATIO', 'TIE_EPSILON',
              'AXIS_GUARD', 'FLOW_DT', 'FLOW_HORIZON')


def _cast(key: str, raw: Any) -> Any:
    if key in INTEGER_KEYS:
        return int(float(raw))
    if key in FLOAT_KEYS:
        return float(raw)
    return raw


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Defaults, overridden by a dotenv-style file when one is given.

    The process environment is never consulted.
    """
    config = dict(DEFAULTS)
    if path:
        for key, raw in dotenv_values(path).items():
            if key in DEFAULTS and raw is not None:
                try:
                    config[key] = _cast(key, raw)
                except ValueError:
                    # left as text so validate_config reports it
                    config[key] = raw
    return config


def setup_logging(log_level: str = 'WARNING', log_file: Optional[str] = 'toric-radii.log'):
    """Setup logging configuration"""
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
    )


def validate_config(config: Dict[str, Any]) -> bool:
    """Every numeric knob must be a positive number, counts integral"""
    invalid_keys = []
    for key in INTEGER_KEYS + FLOAT_KEYS:
        value = config.get(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            invalid_keys.append(key)
        elif key in INTEGER_KEYS and int(value) != value:
            invalid_keys.append(key)

    level = str(config.get('LOG_LEVEL', '')).upper()
    if not isinstance(getattr(logging, level, None), int):
        invalid_keys.append('LOG_LEVEL')

    if invalid_keys:
        print(f"Invalid configuration: {', '.join(invalid_keys)}")
        print("Numeric settings must be positive; check your --config file.")
        return False

    return True
