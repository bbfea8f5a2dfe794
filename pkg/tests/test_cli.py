import subprocess
import sys

import pytest

from photonwf.cli import main

HOM = "[scenario]\nname = hom\n[scan]\nmin = -1\nmax = 1\nsteps = 5\n"


def write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_run_writes_csv(tmp_path, capsys):
    assert main(["run", write(tmp_path, HOM)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "param,rate,direct,exchange"
    assert len(lines) == 6


def test_run_to_file_with_threads_and_check(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["run", write(tmp_path, HOM), "--out", str(out), "--threads", "2", "--check"]) == 0
    assert len(out.read_text().splitlines()) == 6


def test_list(capsys):
    assert main(["list"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == ["hom", "hom_entangled", "eraser", "postponed_compensation", "no_meeting"]


def test_unknown_scenario_exit_3(tmp_path, capsys):
    assert main(["run", write(tmp_path, "[scenario]\nname = sideways\n")]) == 3
    assert "name" in capsys.readouterr().err


def test_bad_value_exit_3(tmp_path, capsys):
    assert main(["run", write(tmp_path, "[scenario]\nname = hom\n[scan]\nsteps = 1\n")]) == 3
    assert "steps" in capsys.readouterr().err


def test_undersampled_exit_4(tmp_path, capsys):
    text = HOM + "[window]\nn_samples = 64\n"
    assert main(["run", write(tmp_path, text)]) == 4
    assert "Nyquist guard" in capsys.readouterr().err


def test_truncated_spectrum_exit_4(tmp_path, capsys):
    text = HOM + "[grid]\nk_min = 9\nk_max = 11\n"
    assert main(["run", write(tmp_path, text)]) == 4
    assert "truncates" in capsys.readouterr().err


def test_malformed_and_missing_exit_2(tmp_path):
    assert main(["run", write(tmp_path, "name = hom\n")]) == 2
    assert main(["run", str(tmp_path / "absent.ini")]) == 2
    assert main(["run", write(tmp_path, HOM), "--threads", "0"]) == 2


def test_unwritable_output_exit_1(tmp_path):
    assert main(["run", write(tmp_path, HOM), "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 1


def test_missing_arguments_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "photonwf.cli", "run", write(tmp_path, HOM)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.count("\n") == 6
