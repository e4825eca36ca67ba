import configparser
import logging
import math
import os
from pathlib import Path
from types import SimpleNamespace


PROJECT_DIR = Path(__file__).parent
REPO_DIR = PROJECT_DIR.parent

LOGGER_NAME = "dpsurv"
CONFIG_ENV = "DPSURV_CONFIG"
OUTPUT_DIR_ENV = "DPSURV_OUTPUT_DIR"

default_ini_config = {
    "logging": {
        "level": "INFO",
    },
    "simulation": {
        "base_seed": 42,
        "iterations": 1000,
        "train_fraction": 0.7,
        "workers": 1,
        "alpha": 0.05,
    },
    "fit": {
        "max_iterations": 50,
        "tolerance": 1e-9,
        "max_halvings": 20,
    },
    "paths": {
        "data_dir": str(REPO_DIR / "data"),
        "output_dir": "results",
    },
}


def merge_ini_config_with_defaults(
    config_parser: configparser.ConfigParser, defaults: dict
) -> dict:
    """Return a copy of defaults updated with values from the parser.

    Values are cast to the type of the corresponding default. Options
    that have no default are ignored.
    """

    result = {}

    for section, options in defaults.items():
        result[section] = dict(options)

        if not config_parser.has_section(section):
            continue

        for key, default in options.items():
            if config_parser.has_option(section, key):
                raw = config_parser.get(section, key)
                result[section][key] = type(default)(raw)

    return result


# main config
config_path = Path(os.environ.get(CONFIG_ENV, PROJECT_DIR / "dpsurv.conf"))
config_parser = configparser.ConfigParser(allow_no_value=True)
config_parser.read(config_path)
ini_config = merge_ini_config_with_defaults(config_parser, default_ini_config)

logging.getLogger(LOGGER_NAME).setLevel(ini_config["logging"]["level"])

KEYS = SimpleNamespace()
KEYS.time = "time"
KEYS.status = "status"
KEYS.dataset = "dataset"
KEYS.method = "method"
KEYS.epsilon = "epsilon"
KEYS.iteration = "iter"
KEYS.variable = "variable"
KEYS.p_value = "p_value"
KEYS.hr = "hr"
KEYS.converged = "converged"
KEYS.separated = "separated"
KEYS.train_c = "train_c"
KEYS.test_c = "test_c"

# simulation design
EPSILON_GRID = (
    0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 30.0, 60.0, 100.0, 250.0, 1000.0,
    math.inf,
)  # fmt: skip
BASE_SEED = ini_config["simulation"]["base_seed"]
ITERATIONS = ini_config["simulation"]["iterations"]
TRAIN_FRACTION = ini_config["simulation"]["train_fraction"]
WORKERS = ini_config["simulation"]["workers"]
ALPHA = ini_config["simulation"]["alpha"]

# model fitting
MAX_ITERATIONS = ini_config["fit"]["max_iterations"]
TOLERANCE = ini_config["fit"]["tolerance"]
MAX_HALVINGS = ini_config["fit"]["max_halvings"]

DATA_DIR = Path(ini_config["paths"]["data_dir"])


def output_dir() -> Path:
    """Default directory for simulation output.

    The environment variable wins over the config file.
    """

    return Path(os.environ.get(OUTPUT_DIR_ENV, ini_config["paths"]["output_dir"]))
