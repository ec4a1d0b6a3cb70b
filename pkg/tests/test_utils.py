import json
import os

import pytest
from loguru import logger

import utils


def test_default_config():
    hps = utils.get_hparams()
    assert hps.sampling.chunk_size == 65536
    assert hps.table.max_n == 8
    assert hps.lp.max_iter_factor == 50
    assert "runtime" in hps
    assert hps.get("missing", 3) == 3
    assert utils.get_hparams() is hps


def test_get_hparams_from_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"runtime": {"threads": 2}, "table": {"max_n": 4}}))
    hps = utils.get_hparams_from_file(str(path))
    assert hps.runtime.threads == 2
    assert hps["table"]["max_n"] == 4
    assert hps.config_path == str(path)
    assert utils.set_hparams(hps) is utils.get_hparams()


def test_resolve_threads(monkeypatch):
    assert utils.resolve_threads(3) == 3
    assert utils.resolve_threads(0) == (os.cpu_count() or 1)
    monkeypatch.setenv(utils.THREADS_ENV, "2")
    assert utils.resolve_threads() == 2
    monkeypatch.delenv(utils.THREADS_ENV)
    hps = utils.HParams(runtime={"threads": 5})
    assert utils.resolve_threads(hps=hps) == 5


def test_resolve_threads_rejects_bad_values(monkeypatch):
    monkeypatch.setenv(utils.THREADS_ENV, "many")
    with pytest.raises(ValueError, match=utils.THREADS_ENV):
        utils.resolve_threads()
    with pytest.raises(ValueError):
        utils.resolve_threads(-1)


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert utils.parallel_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert utils.parallel_map(lambda x: x + 1, [], threads=4) == []


def test_get_logger_file_sink(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    utils.get_logger("ERROR", str(log_file))
    logger.debug("written to the file only")
    logger.remove()
    assert "written to the file only" in log_file.read_text()
