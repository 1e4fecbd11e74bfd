import csv
import json

import pytest

from sphersym.cli import main


def run(args):
    return main([str(a) for a in args])


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


RADIAL_CONFIG = {
    "base": {"dim": 2, "metric": "euclidean", "domain": [[-2, 2], [-2, 2]]},
    "bundle": {"rank": 2, "fiber_metric": "identity"},
    "weights": {"phi1": [0, 0.125], "phi2": [0, 0.25]},
    "function": {"kind": "radial", "alpha": [0, -0.5, 0, 1]},
    "grid": {"count": 4, "seed": 0, "r_range": [0.5, 1.5]},
    "diff": {"base_step": 0.01, "nested_step_ratio": 6},
    "verify": {"tolerance": 1e-6, "bilaplacian_tolerance": 1e-3},
}


def test_roots_output(capsys):
    assert run(["roots", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "-1, -3/2"
    assert run(["roots", "2"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "-2 (double)"
    assert run(["roots", "7"]) == 0
    out = capsys.readouterr().out.splitlines()[0]
    assert "-7" in out and "-9/2" in out


def test_roots_bad_rank_exits_with_config_error():
    assert run(["roots", "0"]) == 2


def test_verify_radial_passes_and_writes_csv(tmp_path, capsys):
    cfg = dict(RADIAL_CONFIG, output={"path": str(tmp_path / "report.csv"), "format": "csv"})
    path = write_config(tmp_path, "cfg.json", cfg)
    assert run(["verify", "--config", path]) == 0
    with open(tmp_path / "report.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert {"operator", "r", "closed_form", "oracle", "abs_err", "rel_err", "passed"} == set(rows[0])
    assert len(rows) == 8  # 4 points x 2 operators
    assert all(row["passed"] == "True" for row in rows)


def test_verify_reports_are_deterministic(tmp_path):
    cfg_a = dict(RADIAL_CONFIG, output={"path": str(tmp_path / "a.csv"), "format": "csv"})
    cfg_b = dict(RADIAL_CONFIG, output={"path": str(tmp_path / "b.csv"), "format": "csv"})
    run(["verify", "--config", write_config(tmp_path, "a.json", cfg_a)])
    run(["verify", "--config", write_config(tmp_path, "b.json", cfg_b)])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_verify_vertical_lift_with_nonsolution_weights(tmp_path):
    # linear horizontal weights break lift biharmonicity, but verification
    # compares values, not biharmonicity: the run still passes
    cfg = {
        "base": {"dim": 2, "metric": "euclidean", "domain": [[-2, 2], [-2, 2]]},
        "bundle": {"rank": 2, "fiber_metric": "identity"},
        "weights": {"preset": "linear_horizontal"},
        "function": {"kind": "vertical_lift", "f": "norm_sq"},
        "grid": {"count": 4, "seed": 1, "r_range": [0.4, 1.2]},
        "diff": {"base_step": 0.01, "nested_step_ratio": 6},
        "output": {"path": str(tmp_path / "lift.csv"), "format": "records"},
    }
    path = write_config(tmp_path, "lift.json", cfg)
    assert run(["verify", "--config", path]) == 0
    lines = [json.loads(line) for line in (tmp_path / "lift.csv").read_text().splitlines()]
    bilap_rows = [row for row in lines[:-1] if row["operator"] == "bilaplacian"]
    assert bilap_rows and all(abs(row["closed_form"]) > 1e-3 for row in bilap_rows)


def test_verify_lifted_inverse_norm_with_constant_phi1(tmp_path):
    cfg = {
        "base": {"dim": 5, "metric": "euclidean", "domain": [[-2, 2]] * 5},
        "bundle": {"rank": 1, "fiber_metric": "identity"},
        "weights": {"phi1": [0.3], "phi2": [0, 0.25]},
        "function": {"kind": "vertical_lift", "f": "inverse_norm"},
        "grid": {"count": 3, "seed": 4, "r_range": [0.3, 0.9], "min_base_norm": 1.0},
        "diff": {"base_step": 0.01, "nested_step_ratio": 5},
        "output": {"path": str(tmp_path / "inv.csv"), "format": "csv"},
    }
    path = write_config(tmp_path, "inv.json", cfg)
    assert run(["verify", "--config", path]) == 0
    with open(tmp_path / "inv.csv") as handle:
        rows = list(csv.DictReader(handle))
    # constant phi1 keeps the lift biharmonic: closed bilaplacian exactly zero
    bilap = [row for row in rows if row["operator"] == "bilaplacian"]
    assert bilap and all(float(row["closed_form"]) == 0.0 for row in bilap)


def test_sweep_sasaki_ode_families(tmp_path):
    cfg = {
        "sweep": {"mode": "sasaki_ode", "k_values": [1, 2, 3, 4], "case": "auto",
                  "beta": 0.8, "r_values": [0.5, 1.0, 2.0]},
        "output": {"path": str(tmp_path / "ode.csv"), "format": "csv"},
    }
    path = write_config(tmp_path, "ode.json", cfg)
    assert run(["sweep", "--config", path]) == 0
    with open(tmp_path / "ode.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 12
    assert all(abs(float(row["residual"])) <= 1e-12 for row in rows)


def test_verify_with_diagonal_base_metric(tmp_path):
    cfg = dict(RADIAL_CONFIG)
    cfg["base"] = {"dim": 2, "metric": {"diagonal": ["1 + 0.3*x1**2", "1 + 0.2*x2**2"]},
                   "domain": [[-2, 2], [-2, 2]]}
    cfg["grid"] = {"count": 3, "seed": 2, "r_range": [0.5, 1.2]}
    path = write_config(tmp_path, "diag.json", cfg)
    assert run(["verify", "--config", path]) == 0


def test_verify_unreachable_tolerance_exits_one(tmp_path):
    cfg = dict(RADIAL_CONFIG, grid={"count": 2, "seed": 0, "r_range": [0.5, 1.5]})
    path = write_config(tmp_path, "strict.json", cfg)
    assert run(["verify", "--config", path, "--tolerance", "1e-18"]) == 1


def test_verify_missing_config_is_a_config_error(tmp_path):
    assert run(["verify", "--config", tmp_path / "nope.json"]) == 2


def test_verify_malformed_config_is_a_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(["verify", "--config", path]) == 2


def test_verify_domain_error_exit_code(tmp_path):
    cfg = dict(RADIAL_CONFIG)
    cfg["function"] = {"kind": "radial", "family": {"k": 2, "case": "k2", "beta": 1.0}}
    cfg["grid"] = {"count": 2, "seed": 0, "r_range": [2e-4, 6e-4]}  # below domain_min
    path = write_config(tmp_path, "dom.json", cfg)
    assert run(["verify", "--config", path]) == 3


def test_families_command_residuals(tmp_path, capsys):
    out = tmp_path / "fam.csv"
    assert run(["families", "--k", 2, "--case", "k2", "--beta", 1, "--out", out]) == 0
    with open(out) as handle:
        rows = list(csv.DictReader(handle))
    assert {"r", "alpha", "alpha_prime", "laplacian", "bilaplacian", "residual"} == set(rows[0])
    assert all(abs(float(row["residual"])) <= 1e-12 for row in rows)
    capsys.readouterr()
    assert run(["families", "--k", 3, "--case", "k_odd", "--beta", 0.7]) == 0


def test_families_parity_mismatch_exit_code():
    assert run(["families", "--k", 5, "--case", "k_even_b", "--beta", 1]) == 2


def test_sweep_equation_e_constant_residual(tmp_path):
    cfg = {
        "weights": {"preset": "linear_horizontal"},
        "sweep": {"mode": "equation_e", "m_values": [2], "k_values": [2],
                  "r_values": [0.1, 1.0, 5.0]},
        "output": {"path": str(tmp_path / "sweep.csv"), "format": "csv"},
    }
    path = write_config(tmp_path, "sweep.json", cfg)
    assert run(["sweep", "--config", path]) == 0
    with open(tmp_path / "sweep.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert [float(row["residual_E"]) for row in rows] == [2.0, 2.0, 2.0]
    assert [float(row["residual_E_prime"]) for row in rows] == [2.0, 2.0, 2.0]


def test_sweep_constant_phi1_all_zero(tmp_path):
    cfg = {
        "weights": {"phi1": [0.4], "phi2": [0.0, 0.3]},
        "sweep": {"mode": "equation_e", "m_values": [1, 2, 3], "k_values": [1, 2],
                  "r_values": [0.5, 2.0]},
        "output": {"path": str(tmp_path / "zero.csv"), "format": "csv"},
    }
    path = write_config(tmp_path, "zero.json", cfg)
    assert run(["sweep", "--config", path]) == 0
    with open(tmp_path / "zero.csv") as handle:
        assert all(float(row["residual_E"]) == 0.0 for row in csv.DictReader(handle))


def test_sweep_exponent_check(tmp_path):
    cfg = {
        "sweep": {"mode": "exponent_check", "k_values": list(range(1, 9)), "r_values": [1.0, 2.0]},
        "output": {"path": str(tmp_path / "exp.csv"), "format": "csv"},
    }
    path = write_config(tmp_path, "exp.json", cfg)
    assert run(["sweep", "--config", path]) == 0
    with open(tmp_path / "exp.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert all(float(row["residual"]) == 0.0 for row in rows)
    assert all(row["quadratic"] == "0" for row in rows)


def test_regularity_command_exit_codes(capsys):
    assert run(["regularity", "--preset", "sasaki"]) == 0
    capsys.readouterr()
    assert run(["regularity", "--log-phi1", "1.0"]) == 1
    out = capsys.readouterr().out
    assert "divergent" in out
