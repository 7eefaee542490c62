import json
import math

import numpy as np
import pytest

from dissipator.bench import (
    COLUMNS,
    FitError,
    SweepConfig,
    SweepRecord,
    delta_scaling,
    dominance_floor,
    emit_report,
    fit_log,
    fit_power,
    lambda_tilde,
    read_report,
    records_to_csv,
    report_dict,
    schema_path,
    sweep,
)

jsonschema = pytest.importorskip("jsonschema")


def fake(mode, alpha, nu, rate, k=1.0, direct=None):
    lt = lambda_tilde(mode, alpha, nu, k)
    return SweepRecord(
        nu=nu, k=k, alpha=alpha, mode=mode, delta_star=0.1, omega1=1.0,
        psi1_lower=rate / nu, psi1_direct=None if direct is None else direct / nu,
        rate_lower=rate, rate_direct=direct, lambda_tilde=lt, ratio=rate / lt,
        converged=None if direct is None else True,
    )


@pytest.fixture(scope="module")
def small_sweep():
    return sweep("power", 0.5, 1, [1e-2, 3e-3, 1e-3, 3e-4])


def test_delta_scaling_example():
    assert delta_scaling("power", 0.5, 1e-4, 1) == pytest.approx(0.0251, abs=5e-5)
    assert delta_scaling("log", 1.5, 1e-4, 1) == pytest.approx(1e-2 * math.log(1e4) ** 0.75, rel=1e-12)
    assert delta_scaling("power", 0.5, 1e-5, 1) == pytest.approx(1e-2, rel=1e-12)
    with pytest.raises(ValueError):
        delta_scaling("other", 0.5, 1e-3, 1)


def test_synthetic_power_fit():
    nus = np.geomspace(1e-6, 1e-2, 9)
    recs = [fake("power", 0.5, nu, 3.0 * nu**0.2) for nu in nus]
    f = fit_power(recs)
    assert f.exponent == pytest.approx(0.2, abs=1e-12)
    assert f.r_squared == pytest.approx(1.0, abs=1e-12)
    assert f.n_points == 9


def test_synthetic_log_fit():
    nus = np.geomspace(1e-8, 1e-3, 9)
    recs = [fake("log", 1.5, nu, 2.0 * math.log(1 / nu) ** -1.5) for nu in nus]
    f = fit_log(recs)
    assert f.exponent == pytest.approx(-1.5, abs=1e-12)
    assert f.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_errors():
    recs = [fake("power", 0.5, nu, nu) for nu in (1e-3, 1e-4)]
    with pytest.raises(FitError):
        fit_power(recs)
    same = [fake("power", 0.5, 1e-3, 1.0)] * 3
    with pytest.raises(FitError):
        fit_power(same)
    with pytest.raises(FitError):
        fit_power([fake("power", 0.5, nu, nu) for nu in (1e-2, 1e-3, 1e-4)], key="rate_direct")
    with pytest.raises(FitError):
        fit_log([fake("power", 0.5, nu, nu) for nu in (1e-2, 1e-3, 1e-4)])
    mixed = [fake("power", a, nu, nu) for a, nu in ((0.5, 1e-2), (0.6, 1e-3), (0.5, 1e-4))]
    with pytest.raises(FitError):
        fit_power(mixed)


def test_csv_header_only():
    text = records_to_csv([])
    assert text == ",".join(COLUMNS) + "\n"


def test_sweep_argument_errors():
    with pytest.raises(ValueError):
        sweep("power", 0.5, 1, [])
    with pytest.raises(ValueError):
        sweep("power", 0.5, 1, [0.9])
    with pytest.raises(ValueError):
        sweep("power", 0.5, 0, [1e-3])
    with pytest.raises(ValueError):
        sweep("power", 1.5, 1, [1e-3])
    with pytest.raises(ValueError):
        sweep("wave", 0.5, 1, [1e-3])


def test_round_trip(tmp_path, small_sweep):
    for fmt in ("csv", "json"):
        path = tmp_path / f"out.{fmt}"
        emit_report(small_sweep, {"power": fit_power(small_sweep)}, path, fmt, SweepConfig())
        back = read_report(path)
        assert len(back) == len(small_sweep)
        for a, b in zip(small_sweep, back):
            for c in COLUMNS:
                x, y = getattr(a, c), getattr(b, c)
                if isinstance(x, float):
                    assert y == pytest.approx(x, rel=1e-15)
                else:
                    assert x == y


def test_json_schema(tmp_path, small_sweep):
    with open(schema_path(), encoding="utf-8") as fh:
        schema = json.load(fh)
    doc = report_dict(small_sweep, {"power": fit_power(small_sweep)}, SweepConfig())
    jsonschema.validate(doc, schema)
    bad = dict(doc, records=[dict(doc["records"][0], extra=1)])
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)


def test_emit_report_errors(tmp_path, small_sweep):
    with pytest.raises(ValueError):
        emit_report(small_sweep, {}, tmp_path / "x", "xml")
    missing = tmp_path / "no" / "such" / "dir" / "r.csv"
    with pytest.raises(OSError, match="r.csv"):
        emit_report(small_sweep, {}, missing, "csv")


def test_sweep_is_deterministic(small_sweep):
    again = sweep("power", 0.5, 1, [1e-2, 3e-3, 1e-3, 3e-4])
    assert records_to_csv(again) == records_to_csv(small_sweep)
    one = report_dict(small_sweep, timestamp=False)
    two = report_dict(again, timestamp=False)
    assert one == two


def test_dominance_chain(small_sweep):
    for r in small_sweep:
        assert r.rate_lower >= dominance_floor(r) * (1 - 1e-12)
        assert r.rate_lower > 0
        assert r.ratio == pytest.approx(r.rate_lower / r.lambda_tilde, rel=1e-15)


def test_direct_values_dominate_bound():
    recs = sweep("power", 0.5, 1, [1e-2, 3e-3], use_direct=True,
                 config=SweepConfig(max_modes=1000))
    for r in recs:
        assert not r.note
        assert r.converged
        assert r.rate_direct >= r.rate_lower * (1 - 1e-6)
    refused = sweep("power", 0.5, 1, [1e-3], use_direct=True, config=SweepConfig(max_modes=10))
    assert refused[0].rate_direct is None
    assert "resolution" in refused[0].note


def test_workers_match_serial(small_sweep):
    par = sweep("power", 0.5, 1, [1e-2, 3e-3, 1e-3, 3e-4], config=SweepConfig(workers=2))
    assert records_to_csv(par) == records_to_csv(small_sweep)
