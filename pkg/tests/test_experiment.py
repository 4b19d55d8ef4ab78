import io
import json
import math

import numpy as np
import pytest

from pareto_phase import experiment as ex
from pareto_phase import oracle
from pareto_phase.errors import ConfigError, SpecParseError


# ------------------------------------------------------------------ parsing

def test_parse_box_spec():
    box = ex.parse_box_spec(" 0 : 0.5 , 0:1 ")
    assert box.bounds == ((0.0, 0.5), (0.0, 1.0))
    for bad, token in [("0.5:0.5", "0.5:0.5"), ("0:x", "0:x"), ("0:0.5,0.2", "0.2"), ("0:1.5", "0:1.5")]:
        with pytest.raises(SpecParseError) as err:
            ex.parse_box_spec(bad)
        assert err.value.token == token and token in str(err.value)


def test_parse_proj_spec():
    assert ex.parse_proj_spec("1, 3,7").indices == (1, 3, 7)
    for bad, token in [("3,1", "1"), ("0", "0"), ("1,a", "a"), ("", "")]:
        with pytest.raises(SpecParseError) as err:
            ex.parse_proj_spec(bad)
        assert err.value.token == token


# ------------------------------------------------------------------ config

def test_config_resolution():
    cfg = ex.ExperimentConfig(n=2000, regime="star", c=0.0).resolve()
    assert cfg.d == oracle.round_dim(oracle.critical_dim_star(2000))
    cfg = ex.ExperimentConfig(n=10**6, regime="starstar").resolve()
    assert cfg.d == 36


@pytest.mark.parametrize("kwargs", [
    dict(n=2, regime="starstar"),
    dict(n=10, d=3, reps=0),
    dict(n=10, d=3, workers=0),
    dict(n=10, d=3, proj=(1, 2), box=((0, 1),)),
    dict(n=10, d=3, proj=(4,)),
    dict(n=10.5, d=3),
    dict(n=10),
    dict(n=10, d=3, fmt="xml"),
    dict(n=10, mode="sweep", d_min=1, d_max=4),
    dict(n=10, mode="sweep", d_min=5, d_max=4),
])
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ex.ExperimentConfig(**kwargs).resolve()


def test_config_dict_round_trip():
    cfg = ex.ExperimentConfig(n=30, d=4, proj=(1, 3), box=((0, 0.5), (0.2, 1)), reps=3).resolve()
    again = ex.ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert "workers" not in cfg.to_dict(run_settings=False)


# -------------------------------------------------------------- simulation

def test_singleton_run():
    s = ex.run_simulation(ex.ExperimentConfig(n=1, d=3, reps=1))
    rec = s.records[0]
    assert rec.nonpareto == 0 and rec.layers == [0, 0, 0] and rec.S == 0 and rec.void


def test_record_fields_match_direct_computation():
    cfg = ex.ExperimentConfig(n=300, d=6, reps=4, proj=(2,), box=((0.0, 0.5),), points_cap=5).resolve()
    s = ex.run_simulation(cfg)
    assert len(s.records) == 4
    for rec in s.records:
        assert rec.index == s.records.index(rec)
        assert rec.sample_size == 300
        assert sum(rec.layers) <= rec.nonpareto
        assert rec.T <= rec.S and rec.void == (rec.T == 0)
        assert len(rec.atoms) == min(5, rec.nonpareto)
        assert all(len(a) == 1 for a in rec.atoms)


def test_poissonized_run():
    s = ex.run_simulation(ex.ExperimentConfig(n=50.0, d=6, reps=30, poissonized=True))
    sizes = [r.sample_size for r in s.records]
    assert len(set(sizes)) > 1
    assert s.aggregates["oracle"]["poissonized"] is True
    assert s.aggregates["oracle"]["exact_E_nonpareto"] == pytest.approx(
        oracle.expected_nonpareto_poissonized(50.0, 6))


def test_workers_do_not_change_payload():
    base = dict(n=200, d=10, reps=40, master_seed=5, box=((0.0, 0.5),))
    one = ex.run_simulation(ex.ExperimentConfig(**base, workers=1))
    three = ex.run_simulation(ex.ExperimentConfig(**base, workers=3))
    assert ex.dumps(one.payload()) == ex.dumps(three.payload())


def test_aggregates_recomputable_from_json(tmp_path):
    cfg = ex.ExperimentConfig(n=200, d=10, reps=120, master_seed=9, box=((0.0, 0.5),))
    s = ex.run_simulation(cfg)
    path = tmp_path / "run.json"
    ex.write_json(s.payload(), path)
    loaded = ex.load_summary(path)
    assert loaded.config == s.config
    again = ex.aggregate(loaded.config, loaded.records)
    assert ex.dumps(again) == ex.dumps(json.loads(path.read_text())["aggregates"])
    assert "void_probability" in again["verdicts"]


def test_records_csv_round_trip():
    s = ex.run_simulation(ex.ExperimentConfig(n=100, d=7, reps=6, proj=(1, 2), box=((0, 1), (0, 0.5))))
    buf = io.StringIO(newline="")
    ex.write_records_csv(s, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "index,sample_size,nonpareto,K1,K2,K3,S,T,void,atoms"
    records = ex.read_records_csv(io.StringIO(text, newline=""))
    assert records == s.records
    assert ex.dumps(ex.aggregate(s.config, records)) == ex.dumps(s.aggregates)


def test_dumps_is_canonical():
    text = ex.dumps({"b": float("nan"), "a": np.float64(0.1), "c": np.int64(3), "d": (np.bool_(True),)})
    assert json.loads(text) == {"a": 0.1, "b": None, "c": 3, "d": [True]}
    assert text.index('"a"') < text.index('"b"')


def test_key_value_csv():
    payload = ex.run_stein_chen(ex.ExperimentConfig(n=2000, d=22))
    buf = io.StringIO(newline="")
    ex.write_key_value_csv(payload, buf)
    rows = dict(line.split(",", 1) for line in buf.getvalue().splitlines()[1:])
    assert float(rows["stein_chen.b2"]) == pytest.approx(0.5090972710301742)


# ------------------------------------------------------------------- sweep

def test_sweep_rows_and_coupling():
    cfg = ex.ExperimentConfig(n=150, d_min=4, d_max=12, reps=30, master_seed=2)
    result = ex.run_sweep(cfg)
    assert result.violations == 0
    assert [r["d"] for r in result.rows] == list(range(4, 13))
    oracle_means = [r["oracle_mean"] for r in result.rows]
    assert all(a > b for a, b in zip(oracle_means, oracle_means[1:]))
    for rec in result.records:
        assert all(a >= b for a, b in zip(rec.nonpareto, rec.nonpareto[1:]))


def test_single_d_sweep_matches_simulation():
    cfg = dict(n=120, reps=10, master_seed=4)
    sweep = ex.run_sweep(ex.ExperimentConfig(d_min=7, d_max=7, **cfg))
    sim = ex.run_simulation(ex.ExperimentConfig(d=7, **cfg))
    assert [r.nonpareto[0] for r in sweep.records] == [r.nonpareto for r in sim.records]
    assert sweep.rows[0]["empirical_mean"] == pytest.approx(sim.aggregates["nonpareto"]["mean"])


def test_uncoupled_sweep_counts_no_violations():
    result = ex.run_sweep(ex.ExperimentConfig(n=80, d_min=3, d_max=6, reps=5, coupled=False))
    assert result.violations == 0 and len(result.rows) == 4


def test_nesting_violation_counter():
    prev = np.array([2, 0, 1])
    assert ex._nesting_violations(prev, np.array([1, 0, 0])) == 0
    assert ex._nesting_violations(prev, np.array([3, 1, 0])) == 3


def test_sweep_rejects_poissonized():
    with pytest.raises(ConfigError):
        ex.run_sweep(ex.ExperimentConfig(n=50.0, d_min=2, d_max=3, poissonized=True))


# ------------------------------------------------------------- oracle modes

def test_run_oracle():
    out = ex.run_oracle(ex.ExperimentConfig(n=2, d=2))
    assert out["oracle"]["exact_E_nonpareto"] == pytest.approx(0.5)
    out = ex.run_oracle(ex.ExperimentConfig(n=10**6, d=36, r_max=2))
    assert set(out["oracle"]["limit_EKr"]) == {"2"}
    assert ex.run_oracle(ex.ExperimentConfig(n=13, d=1))["oracle"]["exact_E_nonpareto"] == 12


def test_run_stein_chen():
    out = ex.run_stein_chen(ex.ExperimentConfig(n=2000, d=22, box=((0.0, 0.5),)))["stein_chen"]
    assert out["poisson_mean"] == pytest.approx(oracle.expected_S(2000, 22) / 4)
    assert out["limit_void_probability"] == pytest.approx(
        math.exp(-oracle.intensity_mass(ex.parse_box_spec("0:0.5"), out["c_star"])))
    with pytest.raises(ConfigError):
        ex.run_stein_chen(ex.ExperimentConfig(n=1, d=3))


def test_band_se_fallback_for_unobserved_events():
    assert ex._band_se(0.1, 0.5, 100, 10) == 0.1
    assert ex._band_se(0.0, 0.0, 100, 10) == 0.0
    assert ex._band_se(0.0, 0.01, 2000, 100) == pytest.approx(math.sqrt(2000 * 0.01 / 100))
    result = ex.run_sweep(ex.ExperimentConfig(n=200, d_min=30, d_max=31, reps=20))
    assert all(r["empirical_mean"] == 0 and r["mean_within_3se"] for r in result.rows)
