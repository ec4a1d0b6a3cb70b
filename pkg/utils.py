import os
import sys
import json
from concurrent.futures import ThreadPoolExecutor

from loguru import logger

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "configs", "config.json"
)
if not os.path.exists(DEFAULT_CONFIG_PATH):
    # installed layout: setup.py ships configs/ under the prefix
    DEFAULT_CONFIG_PATH = os.path.join(sys.prefix, "configs", "config.json")
THREADS_ENV = "POSBASIS_THREADS"


def get_hparams_from_file(config_path):
    with open(config_path, "r", encoding="utf-8") as f:
        data = f.read()
    config = json.loads(data)

    hparams = HParams(**config)
    hparams.config_path = config_path
    return hparams


_hparams = None


def get_hparams():
    global _hparams
    if _hparams is None:
        _hparams = get_hparams_from_file(DEFAULT_CONFIG_PATH)
    return _hparams


def set_hparams(hps):
    global _hparams
    _hparams = hps
    return hps


def get_logger(level="WARNING", log_file=None):
    logger.remove()
    logger.add(sys.stderr, level=level, format="{time:HH:mm:ss} | {level: <7} | {name}:{line} - {message}")
    if log_file is not None:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        logger.add(log_file, level="DEBUG")
    return logger


def resolve_threads(threads=None, hps=None):
    """Worker count: explicit argument, then $POSBASIS_THREADS, then config; 0 means auto."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is not None and raw.strip():
            try:
                threads = int(raw)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
        else:
            hps = hps or get_hparams()
            threads = hps.runtime.threads
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def parallel_map(fn, items, threads=None):
    """Ordered map over a thread pool; runs inline for a single worker."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


class HParams:
    def __init__(self, **kwargs):
        for k, v in kwargs.items():
            if type(v) == dict:
                v = HParams(**v)
            self[k] = v

    def keys(self):
        return self.__dict__.keys()

    def items(self):
        return self.__dict__.items()

    def values(self):
        return self.__dict__.values()

    def get(self, key, default=None):
        return self.__dict__.get(key, default)

    def __len__(self):
        return len(self.__dict__)

    def __getitem__(self, key):
        return getattr(self, key)

    def __setitem__(self, key, value):
        return setattr(self, key, value)

    def __contains__(self, key):
        return key in self.__dict__

    def __repr__(self):
        return self.__dict__.__repr__()
