import argparse
import io
import json
import subprocess
import sys

import pytest

from dissipator.cli import DEFAULTS, build_parser, parse_and_dispatch, resolve


def run(argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = parse_and_dispatch(argv, env={} if env is None else env, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def profile_of(argv, env=None):
    code, out, _ = run(["profile", *argv], env)
    assert code == 0
    return json.loads(out)


def test_omega_smoke():
    code, out, err = run(["omega", "--alpha", "0.5", "--terms", "6", "--delta", "0.1", "--order", "1"])
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert lines[0] == "delta,order,x_star,c1,c2,value"
    assert len(lines) == 2
    value = lines[1].split(",")[-1]
    assert len(value.replace("-", "").replace(".", "").split("e")[0]) >= 16


def test_psi_under_resolved_is_usage_error():
    code, out, err = run(["psi", "--alpha", "0.5", "--terms", "6", "--scale", "1000", "--modes", "8"])
    assert code == 2 and out == ""
    assert len(err.strip().splitlines()) == 1
    assert "1458" in err


def test_psi_refuses_huge_modes():
    code, _, err = run(["psi", "--terms", "2", "--modes", "5000"])
    assert code == 3
    assert "refused" in err


def test_psi_lower_mode():
    code, out, _ = run(["psi", "--terms", "4", "--scale", "100", "--lower"])
    assert code == 0
    info = json.loads(out)
    assert 0 < info["psi1_lower"] <= info["psi0_lower"] * (1 + 1e-12)


def test_certify_gp_example():
    code, out, _ = run(["certify-gp", "--alpha", "0.5", "--terms", "4", "--nu", "1e-3",
                        "--k", "1", "--modes", "512", "--tmax", "50"])
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_decay_output_layout():
    code, out, _ = run(["decay", "--terms", "2", "--nu", "1e-2", "--modes", "36", "--samples", "5"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,norm,gp_bound"
    assert len(lines) == 1 + 5 + 1
    summary = json.loads(lines[-1])
    assert set(summary) == {"tau", "psi", "pass", "margin"}
    code, _, _ = run(["decay", "--terms", "2", "--nu", "1e-2", "--modes", "36", "--threshold", "2"])
    assert code == 2


def test_certify_lacunary_and_errors():
    code, out, _ = run(["certify-lemma52", "--alpha", "0.5", "--terms", "8"])
    assert code == 0
    assert out.count("true") == 5
    assert run(["certify-lemma52", "--terms", "3", "--m-max", "5"])[0] == 2


def test_sweep_outputs(tmp_path):
    code, out, _ = run(["sweep", "--nu-grid", "1e-3:1e-2:3", "--threads", "1"])
    assert code == 0
    assert out.splitlines()[0].startswith("nu,k,alpha,mode,delta_star")
    assert len(out.strip().splitlines()) == 4
    path = tmp_path / "r.json"
    code, _, _ = run(["sweep", "--nu-grid", "1e-3:1e-2:3", "--threads", "1",
                      "--format", "json", "--output", str(path)])
    assert code == 0
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["fits"]["rate_lower"]["n_points"] == 3
    assert run(["sweep", "--nu-grid", "0.9", "--threads", "1"])[0] == 2
    assert run(["sweep", "--threads", "1"])[0] == 2


def test_bad_flags_are_usage_errors():
    assert run(["omega", "--delta", "-1"])[0] == 2
    assert run(["omega", "--bogus", "1"])[0] == 2
    assert run(["profile", "--alpha", "1.5"])[0] == 2
    assert run([])[0] == 2


# precedence: defaults < config file < flags

@pytest.mark.parametrize("use_config", [False, True])
@pytest.mark.parametrize("use_flag", [False, True])
def test_precedence_matrix(tmp_path, use_config, use_flag):
    argv = []
    if use_config:
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"alpha": 0.7, "terms": 3}), encoding="utf-8")
        argv += ["--config", str(cfg)]
    if use_flag:
        argv += ["--alpha", "0.3"]
    info = profile_of(argv)
    expected = 0.3 if use_flag else (0.7 if use_config else DEFAULTS["alpha"])
    assert info["alpha"] == expected
    assert info["terms"] == (3 if use_config else DEFAULTS["terms"])


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.5, "colour": "red"}), encoding="utf-8")
    code, _, err = run(["profile", "--config", str(cfg)])
    assert code == 2 and "colour" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    assert run(["profile", "--config", str(bad)])[0] == 2
    assert run(["profile", "--config", str(tmp_path / "missing.json")])[0] == 2


def _threads(argv, env):
    args = build_parser().parse_args(["profile", *argv])
    return resolve(args, env)["threads"]


def test_thread_sources(tmp_path):
    assert _threads(["--threads", "3"], {"DISSIPATOR_THREADS": "5"}) == 3
    assert _threads([], {"DISSIPATOR_THREADS": "5"}) == 5
    assert _threads([], {}) >= 1
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"threads": 2}), encoding="utf-8")
    assert _threads(["--config", str(cfg)], {"DISSIPATOR_THREADS": "5"}) == 2
    assert run(["profile"], {"DISSIPATOR_THREADS": "x"})[0] == 2


def test_help_documents_every_flag():
    parser = build_parser()
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sub in subs.choices.items():
        for action in sub._actions:
            if action.option_strings and action.dest != "help":
                assert action.help, f"{name} {action.option_strings} lacks help"
        text = sub.format_help()
        assert "--config" in text and "--threads" in text
    omega_help = subs.choices["omega"].format_help()
    assert "radians" in omega_help


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "dissipator.cli", "profile", "--terms", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["terms"] == 2
