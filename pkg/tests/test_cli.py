import pytest

from ballspace.cli import main

SPACE = "space L\npoints a b c\ndist a b 1\ndist a c 2\ndist b c 1\n"
WEAK = "space W\npoints a b c\ndist a b 1\ndist a c 3\ndist b c 1\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_passes(capsys, files):
    code, out = run(capsys, "check", "--space", files("s.txt", SPACE), "--law", "b_metric")
    assert code == 0
    assert "PASS" in out and "FAIL" not in out


def test_check_failing_law_listed_first(capsys, files):
    path = files("w.txt", WEAK)
    code, out = run(capsys, "check", "--space", path, "--law", "b_metric", "--format", "structured")
    assert code == 1
    lines = out.splitlines()
    assert "exit_code=1" in lines
    verdicts = [line.split("=", 1)[1] for line in lines if line.startswith("claim.verdict=")]
    assert verdicts == ["fail", "pass", "pass"]
    first = next(line for line in lines if line.startswith("claim.id="))
    assert "triangle-law" in first
    assert "failed=1" in lines


def test_check_reports_s1_violation(capsys, files):
    code, out = run(capsys, "check", "--space", files("z.txt", "space Z\npoints a b\ndist a b 0\n"))
    assert code == 1 and "FAIL" in out and "S1" in out


def test_parse_error_exit_two_without_claims(capsys, files):
    path = files("bad.txt", "space S\npoints a b c\ndist a b 1\ndist b c 1\n")
    code, out = run(capsys, "kstar", "--space", path, "--format", "structured")
    assert code == 2
    assert "missing dist for pair (a, c)" in out
    assert not any(line.startswith("claim.") for line in out.splitlines())


def test_missing_file_is_an_error(capsys, tmp_path):
    code, out = run(capsys, "kstar", "--space", str(tmp_path / "nope.txt"))
    assert code == 2 and "nope.txt" in out


def test_structured_output_is_stable(capsys, files):
    path = files("s.txt", SPACE)
    outs = {run(capsys, "nests", "--space", path, "--radii", "1", "2", "--format", "structured")[1] for _ in range(3)}
    assert len(outs) == 1


def test_kstar_and_balls(capsys, files):
    path = files("w.txt", WEAK)
    code, out = run(capsys, "kstar", "--space", path, "--format", "structured")
    assert code == 0 and "fact.K*=3/2" in out
    code, out = run(capsys, "balls", "--space", path, "--radii", "1", "--mode", "open_complement")
    assert code == 0 and "ball.a.1" in out


def test_fixedpoint_caristi(capsys, files):
    space = files("s.txt", SPACE)
    bif = files("p.txt", "bifn P over L K 1\nval a b -1\nval a c -2\nval b a 1\nval b c -1\nval c a 2\nval c b 1\n")
    fmap = files("f.txt", "map f over L\nsend a b\nsend b c\nsend c c\n")
    code, out = run(capsys, "fixedpoint", "caristi", "--space", space, "--map", fmap, "--bifn", bif,
                    "--format", "structured")
    assert code == 0 and "fact.fixed_point=c" in out


def test_fixture_list_and_run(capsys):
    code, out = run(capsys, "fixture", "list")
    assert code == 0 and "example_saturn" in out
    code, out = run(capsys, "fixture", "run", "example_one_over_nm", "--param", "N=10")
    assert code == 0 and "4/4 claims pass" in out
    code, out = run(capsys, "fixture", "run", "example_one_over_nm", "--param", "M=10")
    assert code == 2


def test_toptest_small(capsys):
    code, out = run(capsys, "toptest", "--max-points", "2")
    assert code == 0 and "t0_topologies.2" in out


def test_hunt_genuine_and_mutant(capsys):
    code, out = run(capsys, "hunt", "--suite", "ot-ball-nesting", "--trials", "30", "--seed", "7")
    assert code == 0
    code, out = run(capsys, "hunt", "--suite", "mutant-petal-swap", "--trials", "2000", "--seed", "7",
                    "--format", "structured")
    assert code == 1
    assert "fact.confirmed_by_genuine_checker=yes" in out
    code, out = run(capsys, "hunt", "--suite", "nope")
    assert code == 2


def test_hunt_uses_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("BALLSPACE_SEED", "99")
    _, out = run(capsys, "hunt", "--suite", "ck-conversion", "--trials", "5", "--format", "structured")
    assert "fact.seed=99" in out
