import numpy as np
import pytest

from cyclic_reduction import kernels
from cyclic_reduction.blockmat import new_system
from cyclic_reduction.cli import main
from cyclic_reduction.io import load_solution, save_system, system_file_size


@pytest.fixture(autouse=True)
def keep_backend():
    prev = kernels.get_backend()
    yield
    kernels.set_backend(prev)


def gen(tmp_path, name="s.bthp", capsys=None, **kw):
    args = {"n": 16, "m": 3, "k": 2, "seed": 7, "kind": "hpd_random"} | kw
    path = tmp_path / name
    argv = ["generate", "--out", str(path)]
    for key, value in args.items():
        argv += [f"--{key}", str(value)]
    assert main(argv) == 0
    if capsys is not None:
        capsys.readouterr()
    return path


def test_generate(tmp_path):
    a = gen(tmp_path, "a.bthp")
    b = gen(tmp_path, "b.bthp")
    assert a.stat().st_size == 28 + 16 * (16 * 9 + 15 * 9 + 16 * 6) == system_file_size(16, 3, 2)
    assert a.read_bytes() == b.read_bytes()


def test_generate_rejects_zero(tmp_path, capsys):
    assert main(["generate", "--n", "0", "--m", "1", "--out", str(tmp_path / "x")]) == 1
    assert "usage" in capsys.readouterr().err


def test_solve_verify(tmp_path, capsys):
    src = gen(tmp_path, capsys=capsys, n=32, m=2, k=1, kind="hpd_laplacian")
    out = tmp_path / "x.bthx"
    assert main(["solve", "--in", str(src), "--out", str(out), "--verify", "--stats"]) == 0
    text = capsys.readouterr().out
    residual = float(text.split("residual=")[1].split()[0])
    assert residual <= 1e-10
    assert "oracle_max_rel_diff=" in text and "levels=4" in text
    assert load_solution(out).shape == (32, 2, 1)


def test_solve_serial_matches_parallel(tmp_path):
    src = gen(tmp_path, n=100, m=3, k=2)
    a, b = tmp_path / "a.bthx", tmp_path / "b.bthx"
    assert main(["solve", "--in", str(src), "--out", str(a), "--serial"]) == 0
    assert main(["solve", "--in", str(src), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_indefinite(tmp_path, capsys):
    src = gen(tmp_path, capsys=capsys, kind="indefinite")
    assert main(["solve", "--in", str(src), "--out", str(tmp_path / "x")]) == 2
    line = capsys.readouterr().out.strip()
    assert line.startswith("NOT_PD level=")
    level, block = (int(part.split("=")[1]) for part in line.split()[1:])
    assert level >= 0 and block >= 1


def test_solve_missing_rhs(tmp_path):
    src = gen(tmp_path, k=0)
    assert main(["solve", "--in", str(src), "--out", str(tmp_path / "x")]) == 1


def test_solve_bad_file(tmp_path):
    bad = tmp_path / "bad.bthp"
    bad.write_bytes(b"XTHP" + bytes(40))
    assert main(["solve", "--in", str(bad), "--out", str(tmp_path / "x")]) == 1
    assert main(["solve", "--in", str(tmp_path / "missing"), "--out", str(tmp_path / "x")]) == 1


def test_check_pd(tmp_path, capsys):
    assert main(["check-pd", "--in", str(gen(tmp_path, capsys=capsys))]) == 0
    assert capsys.readouterr().out.strip() == "PD"
    assert main(["check-pd", "--in", str(gen(tmp_path, "i.bthp", capsys, kind="indefinite"))]) == 2
    assert capsys.readouterr().out.startswith("NOT_PD ")


def test_check_pd_scalar(tmp_path, capsys):
    path = tmp_path / "neg.bthp"
    save_system(path, new_system([[[-1.0]]], [], [[[1.0]]]))
    assert main(["check-pd", "--in", str(path)]) == 2
    assert capsys.readouterr().out.strip() == "NOT_PD level=0 block=1"


def test_comm_trace(tmp_path, capsys):
    assert main(["comm-trace", "--n", "4", "--threshold", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 12 and lines[-1] == "# total_edges=10 total_line_distance=8"
    out = tmp_path / "t.csv"
    assert main(["comm-trace", "--n", "2", "--threshold", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 4 + 1
    assert main(["comm-trace", "--n", "1"]) == 1


def test_bench(capsys):
    assert main(["bench", "--n-list", "64,128,256", "--m", "4", "--k", "1", "--repeat", "1"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0].split("\t")[0] == "N" and len(rows) == 4
    for row in rows[1:]:
        n, _, _, levels, work, span = row.split("\t")
        assert int(levels) == int(np.ceil(np.log2(int(n) / 4))) + 1
        assert int(span) <= 2 * int(n)


def test_bench_repeat_zero():
    assert main(["bench", "--n-list", "8", "--repeat", "0"]) == 1


@pytest.mark.parametrize("name", kernels.available_backends())
def test_backend_flag(tmp_path, name):
    src = gen(tmp_path, n=5, m=2, k=1)
    assert main(["--backend", name, "solve", "--in", str(src), "--out", str(tmp_path / "x")]) == 0
    assert kernels.get_backend() == name


def test_no_command():
    assert main([]) == 1
