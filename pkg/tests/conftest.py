import time
import warnings

import pytest

from sublattice.experiment import preset, run_experiment


def _kink_run(path, threads=1):
    cfg = preset("kink-d2", base_seed=0, out=str(path), threads=threads)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = run_experiment(cfg)
    return rows, path.read_text(), time.perf_counter() - start


@pytest.fixture(scope="session")
def kink_d2_run(tmp_path_factory):
    """The kink d=2 ladder ``e = 8..17`` with base seed 0: rows, CSV text and seconds."""
    return _kink_run(tmp_path_factory.mktemp("kink") / "run.csv")


@pytest.fixture(scope="session")
def kink_d2_rerun(tmp_path_factory):
    """A second, independent run of the same configuration on two threads."""
    return _kink_run(tmp_path_factory.mktemp("kink-again") / "run.csv", threads=2)
