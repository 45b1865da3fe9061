import numpy as np
import pytest

from sublattice import io as rio
from sublattice.cli import build_parser, main
from sublattice.experiment import COLUMNS, preset, prime_ladder
from sublattice.korobov import KorobovSpace, WeightScheme
from sublattice.lattice import cbc_construct, s_n_kernel

SPACE = KorobovSpace(2, 1, WeightScheme.product([0.5, 0.5]))


def test_cbc_command(capsys, tmp_path):
    assert main(["cbc", "--n", "257"]) == 0
    lat = rio.load_lattice(capsys.readouterr().out)
    assert lat == cbc_construct(SPACE, 257)
    out = tmp_path / "lat.txt"
    assert main(["cbc", "--n", "101", "--d", "3", "--weights", "product:pow:2",
                 "--out", str(out), "--cache-dir", str(tmp_path)]) == 0
    assert rio.load_lattice(out).d == 3


def test_sn_command(capsys, tmp_path):
    lat_file = tmp_path / "lat.txt"
    main(["cbc", "--n", "257", "--out", str(lat_file)])
    assert main(["sn", "--lattice", str(lat_file)]) == 0
    fields = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
    value = float(fields["s_n"])
    assert value == s_n_kernel(SPACE, rio.load_lattice(lat_file))
    assert float(fields["lower"]) <= value <= float(fields["upper"])
    main(["sn", "--n", "257", "--sn-mode", "upper"])
    assert float(dict(l.split(" ", 1) for l in capsys.readouterr().out.splitlines())["s_n"]) >= value


def test_freqset_command(capsys):
    assert main(["freqset", "--M", "4", "--weights", "unweighted"]) == 0
    B = rio.load_frequency_set(capsys.readouterr().out)
    assert len(B) == 21
    assert main(["freqset", "--n", "1031"]) == 0
    captured = capsys.readouterr()
    B = rio.load_frequency_set(captured.out)
    assert B.residues is not None and len(np.unique(B.residues)) == len(B)
    assert "reconstructing True" in captured.err


def test_diag_command(capsys):
    assert main(["diag", "--n", "257", "--mode", "full", "--radius", "8"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("") and "kappa" in out


def test_missing_lattice_is_an_error(capsys):
    assert main(["sn"]) == 2
    assert "--n" in capsys.readouterr().err


def test_run_and_rate_commands(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("preset = kink-d2\nn_list = ladder 8 10\nshifts = 5\n"
                   "methods = classical, lsq_sub\n")
    out = tmp_path / "run.csv"
    with pytest.warns(UserWarning):
        assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    captured = capsys.readouterr()
    assert "rate lsq_sub" in captured.out and "lsq_sub" in captured.err
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS) and len(lines) == 1 + 2 * 3
    assert main(["rate", str(out), "--last", "3"]) == 0
    keys = {line.split()[0] for line in capsys.readouterr().out.splitlines()}
    assert {"classical", "lsq_sub", "sn_quarter"} <= keys


def test_parser_lists_presets():
    text = build_parser().format_help()
    assert "run" in text and "cbc" in text
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--preset", "unknown"])
    assert preset("kink-d2").n_list == prime_ladder(8, 17)
