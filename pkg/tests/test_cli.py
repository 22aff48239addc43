import numpy as np
import pytest

from fixpoint.cli import main, parse_config
from fixpoint.errors import ConfigError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------------------
# config parsing

def test_parse_config_basics(tmp_path):
    p = _write(tmp_path, "a.cfg", """
        # a comment
        experiment = solve
        map = affine-halfline
        x0 = 3.0      # trailing comment
        tol = 1e-9
    """)
    values = parse_config(p)
    assert values["experiment"] == "solve"
    assert values["x0"] == "3.0"
    assert values["tol"] == "1e-9"


def test_parse_config_missing_experiment(tmp_path):
    p = _write(tmp_path, "a.cfg", "map = constant\n")
    with pytest.raises(ConfigError, match="experiment"):
        parse_config(p)


def test_parse_config_unknown_experiment(tmp_path):
    p = _write(tmp_path, "a.cfg",
               "experiment = dance\nmap = constant\n")
    with pytest.raises(ConfigError, match="dance"):
        parse_config(p)


def test_parse_config_bad_line_reports_line_number(tmp_path):
    p = _write(tmp_path, "a.cfg",
               "experiment = solve\nmap = constant\nnonsense\n")
    with pytest.raises(ConfigError, match=r"a\.cfg:3"):
        parse_config(p)


def test_parse_config_duplicate_key(tmp_path):
    p = _write(tmp_path, "a.cfg",
               "experiment = solve\nmap = constant\nmap = constant\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(p)


def test_parse_config_foreign_key_for_experiment(tmp_path):
    p = _write(tmp_path, "a.cfg",
               "experiment = solve\nmap = constant\nq = 0.9\nx0 = 0.0\n")
    with pytest.raises(ConfigError, match="'q'"):
        parse_config(p)


def test_parse_config_accepts_map_params(tmp_path):
    p = _write(tmp_path, "a.cfg",
               "experiment = solve\nmap = rakotch-decay\n"
               "map.a = 2.0\nx0 = 1.0\n")
    assert parse_config(p)["map.a"] == "2.0"


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "absent.cfg")


# ---------------------------------------------------------------------------
# experiments through the real entry point

def test_solve_experiment_writes_orbit_and_solution(tmp_path):
    cfg = _write(tmp_path, "solve.cfg", """
        experiment = solve
        map = affine-halfline
        x0 = 3.0
        tol = 1e-12
    """)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    sol = (out / "solution.txt").read_text()
    assert "iterations=41" in sol
    orbit = (out / "orbit.csv").read_text().strip().split("\n")
    assert orbit[0] == "i,x0,residual"
    assert orbit[1].startswith("0,3.0")
    assert len(orbit) == 43          # header + 42 points
    assert "engine=fixpoint" in (out / "manifest.txt").read_text()


def test_solve_nonself_exit_gives_status_one_and_error_file(tmp_path):
    cfg = _write(tmp_path, "exit.cfg", """
        experiment = solve
        map = constant
        map.c = 2.0
        x0 = 0.0
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 1
    err = (out / "error.txt").read_text()
    assert "error=NonselfExitError" in err
    assert (out / "orbit.csv").exists()


def test_stability_experiment_passes_and_reproduces(tmp_path):
    cfg = _write(tmp_path, "stab.cfg", """
        experiment = stability
        map = rakotch-decay
        M = 1.0
        epsilon = 0.5
        trials = 5
        n = 200
        seed = 11
    """)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", str(cfg), "--out", str(out2)]) == 0
    r1 = (out1 / "stability.txt").read_text()
    assert r1 == (out2 / "stability.txt").read_text()
    assert "pass_count=5" in r1


def test_stability_seed_override_changes_draws(tmp_path):
    cfg = _write(tmp_path, "stab.cfg", """
        experiment = stability
        map = rakotch-decay
        M = 1.0
        epsilon = 0.5
        trials = 3
        n = 200
        seed = 11
    """)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["run", str(cfg), "--out", str(out1)])
    main(["run", str(cfg), "--out", str(out2), "--seed", "12"])
    assert ((out1 / "stability.txt").read_text()
            != (out2 / "stability.txt").read_text())


def test_stability_uses_known_fixed_point_when_xbar_missing(tmp_path):
    cfg = _write(tmp_path, "stab.cfg", """
        experiment = stability
        map = damped-rational
        M = 1.0
        epsilon = 0.5
        trials = 2
        n = 100
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 0


def test_trace_experiment_writes_path(tmp_path):
    cfg = _write(tmp_path, "trace.cfg", """
        experiment = trace
        map = affine-halfline
        target-t = 0.8
        q = 0.9
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    lines = (out / "path.csv").read_text().strip().split("\n")
    assert lines[0].startswith("t,x0,")
    assert lines[-1].startswith("0.8,")


def test_trace_violation_reports_structured_error(tmp_path):
    cfg = _write(tmp_path, "trace.cfg", """
        experiment = trace
        map = constant
        map.c = 2.0
        target-t = 0.9
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 1
    err = (out / "error.txt").read_text()
    assert "error=LsViolationError" in err
    assert "lam=2.0" in err
    assert "t=0.50000" in err
    assert "point=1.0" in err


def test_limit_experiment_reports_boundary_fixed_point(tmp_path):
    cfg = _write(tmp_path, "limit.cfg", """
        experiment = limit
        map = affine-halfline
        final-tol = 1e-6
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    lim = (out / "limit.txt").read_text()
    assert "on_boundary=True" in lim
    assert "point=-0.99999" in lim
    # terminal row present in the path dump
    assert (out / "path.csv").read_text().strip().split("\n")[-1] \
        .startswith("1.0,")


def test_certify_contractive_map_exits_zero(tmp_path):
    cfg = _write(tmp_path, "cert.cfg", """
        experiment = certify
        map = rakotch-decay
        pairs = 32
        seed = 5
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    text = (out / "certify.txt").read_text()
    assert "certified=True" in text
    assert "pairs_passed=32" in text


def test_certify_sentinel_fails_admissibility(tmp_path):
    cfg = _write(tmp_path, "cert.cfg", """
        experiment = certify
        map = planar-rotation
        pairs = 8
    """)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--out", str(out)]) == 1
    text = (out / "certify.txt").read_text()
    assert "admissible_on_grid=False" in text
    assert "contractive_on_pairs=True" in text
    assert "certified=False" in text


def test_certify_zero_pairs_is_a_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, "cert.cfg", """
        experiment = certify
        map = rakotch-decay
        pairs = 0
    """)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "pairs" in capsys.readouterr().err


def test_config_error_exits_two_with_message(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.cfg", """
        experiment = solve
        map = no-such-map
        x0 = 0.0
    """)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "no-such-map" in capsys.readouterr().err


def test_bad_map_param_exits_two(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.cfg", """
        experiment = solve
        map = rakotch-decay
        map.a = 500.0
        x0 = 1.0
    """)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "a = 500" in capsys.readouterr().err


def test_list_maps_names_everything(capsys):
    assert main(["list-maps"]) == 0
    out = capsys.readouterr().out
    for name in ("affine-halfline", "rakotch-decay", "constant",
                 "planar-rotation", "damped-rational"):
        assert name in out
