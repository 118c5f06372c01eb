import io
import math

import numpy as np
import pytest

from pacwb.codec import encode_array
from pacwb.construction import build_profile
from pacwb.sim import (
    FER_COLUMNS,
    FerPoint,
    SimConfig,
    noise_variance,
    run_fer,
    run_point,
    wilson_interval,
    write_fer_csv,
)

from reference import polar_scl

M6 = (1, 0, 1, 1, 0, 1, 1)


def cfg(**kw):
    base = dict(code=build_profile(5, 16), pre=M6, list_size=4, ebn0_grid_db=(1.0, 3.0),
                max_trials=1500, max_errors=40, rng_seed=7, batch_size=500)
    base.update(kw)
    return SimConfig(**base)


def test_noise_variance():
    assert math.isclose(noise_variance(0.5, 0.0), 1.0)
    assert math.isclose(noise_variance(0.5, 10.0), 0.1)


def test_wilson_interval():
    lo, hi = wilson_interval(10, 100)
    assert lo < 0.1 < hi
    assert math.isclose(lo, 0.0552291, rel_tol=1e-4) and math.isclose(hi, 0.1743657, rel_tol=1e-4)
    assert wilson_interval(0, 100)[0] == 0.0
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(ebn0_grid_db=())
    with pytest.raises(ValueError):
        cfg(ebn0_grid_db=(2.0, 1.0))
    with pytest.raises(ValueError):
        cfg(max_errors=0)


def test_deterministic():
    a = run_fer(cfg())
    b = run_fer(cfg())
    assert a == b
    c = run_fer(cfg(rng_seed=8))
    assert a != c


def test_points_are_consistent():
    for p in run_fer(cfg()):
        assert p.fer == p.errors / p.trials
        assert p.wilson_ci[0] <= p.fer <= p.wilson_ci[1]
        assert p.errors <= 40 and p.trials <= 1500


def test_stops_exactly_at_max_errors():
    p = run_point(cfg(ebn0_grid_db=(0.0,), max_errors=25, max_trials=10_000), 0)
    assert p.errors == 25 and p.trials < 10_000


def test_workers_do_not_change_results():
    c = cfg(batch_size=200)
    assert run_fer(c, workers=1) == run_fer(c, workers=3)


def test_high_snr_has_no_errors():
    p = run_point(cfg(ebn0_grid_db=(12.0,), max_trials=500), 0)
    assert p.errors == 0 and p.fer == 0.0 and p.trials == 500


def test_fer_non_increasing_over_grid():
    pts = run_fer(cfg(ebn0_grid_db=(0.0, 2.0, 4.0), max_trials=3000, max_errors=60))
    for a, b in zip(pts, pts[1:]):
        assert b.fer <= a.fer or b.wilson_ci[0] <= a.wilson_ci[1]


def test_all_zero_matches_random_statistically():
    a = run_point(cfg(ebn0_grid_db=(2.0,), max_trials=4000, max_errors=4000, all_zero=True), 0)
    b = run_point(cfg(ebn0_grid_db=(2.0,), max_trials=4000, max_errors=4000), 0)
    assert a.wilson_ci[0] <= b.wilson_ci[1] and b.wilson_ci[0] <= a.wilson_ci[1]


def test_polar_fer_matches_reference_pipeline():
    code = build_profile(5, 16)
    c = cfg(pre=(1,), ebn0_grid_db=(1.5,), max_trials=300, max_errors=300, batch_size=300)
    p = run_point(c, 0)
    # replay the batch RNG stream through the reference decoder
    rng = np.random.default_rng([c.rng_seed, 0, 0])
    s2 = noise_variance(code.rate, 1.5)
    d = rng.integers(0, 2, size=(300, code.K), dtype=np.uint8)
    x = encode_array(code, (1,), d)
    llr = 2.0 * ((1.0 - 2.0 * x) + rng.normal(0.0, math.sqrt(s2), size=x.shape)) / s2
    errors = sum(polar_scl(llr[f], code.info_mask, 4)[0][0] != tuple(d[f]) for f in range(300))
    assert p.errors == errors


def test_csv_format():
    buf = io.StringIO()
    write_fer_csv([FerPoint(2.5, 0.01, 1000, 10, (0.005, 0.02))], buf, header="h")
    lines = buf.getvalue().splitlines()
    assert lines == ["# h", ",".join(FER_COLUMNS), "2.5,1.000000e-02,1000,10,5.000000e-03,2.000000e-02"]
