import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pacwb.analysis import (
    SPECTRUM_COLUMNS,
    Case,
    CosetQuery,
    Method,
    WeightSpectrumEstimate,
    classify_case,
    corollary1_check,
    coset_weight,
    enumerate_bruteforce,
    enumerate_list,
    generator_rows,
    lemma1_check,
    q_function,
    spectrum_row,
    union_bound_fer,
    write_spectrum_csv,
)
from pacwb.codec import encode_array
from pacwb.construction import build_profile, explicit_profile
from pacwb.gf2 import kron_row

from reference import all_messages

M6 = (1, 0, 1, 1, 0, 1, 1)


def test_coset_weights_from_examples():
    assert coset_weight(6, CosetQuery(20, {32})) == 4
    assert coset_weight(6, CosetQuery(24, {33})) == 6
    assert coset_weight(5, CosetQuery(13, extra={22})) == 12
    # XOR of rows 13, 18, 22 of the 32x32 kernel power
    assert coset_weight(5, CosetQuery(13, {18}, {22})) == 10


def test_coset_query_validation():
    with pytest.raises(ValueError):
        CosetQuery(20, {19})
    with pytest.raises(ValueError):
        CosetQuery(20, {30}, {30})
    with pytest.raises(ValueError):
        coset_weight(4, CosetQuery(3, {16}))
    code = build_profile(6, 48)
    with pytest.raises(ValueError):
        coset_weight(6, CosetQuery(20, {34}), code)
    assert coset_weight(6, CosetQuery(20, {32}), code) == 4


def test_classify_examples():
    assert classify_case(6, 34, set()) is Case.UNCHANGED
    assert classify_case(6, 20, {32}) is Case.REPLACED_SAME_WEIGHT
    assert classify_case(6, 24, {33}) is Case.WEIGHT_INCREASED


@settings(max_examples=200)
@given(st.integers(1, 7), st.data())
def test_classify_never_below_row_weight(n, data):
    N = 1 << n
    i = data.draw(st.integers(0, N - 2))
    J = data.draw(st.sets(st.integers(i + 1, N - 1), max_size=6))
    case = classify_case(n, i, J)
    w = coset_weight(n, CosetQuery(i, J))
    assert w >= kron_row(n, i).weight()
    assert (case is Case.WEIGHT_INCREASED) == (w > kron_row(n, i).weight())


def test_lemma1_exhaustive_small():
    for n in range(1, 5):
        assert lemma1_check(n)


def test_lemma1_random():
    assert lemma1_check(6, i=20, trials=10_000, rng=0)
    assert lemma1_check(7, trials=20_000, rng=1)
    assert lemma1_check(5, i=31, trials=10, rng=2)


def test_corollary1():
    for code in (build_profile(6, 48), build_profile(6, 32), build_profile(5, 16, "rm")):
        assert corollary1_check(code, trials=5000, rng=3)


def test_bruteforce_against_direct_encoding():
    code = build_profile(5, 10)
    cws = encode_array(code, M6, all_messages(10))
    w = cws.sum(axis=1)[1:]
    est = enumerate_bruteforce(code, M6, weight_cap=None)
    assert est.d_min == w.min() and est.A_dmin == int((w == w.min()).sum())
    assert est.histogram == {int(k): int((w == k).sum()) for k in np.unique(w)}
    assert est.method is Method.EXACT and est.converged and est.L is None


def test_bruteforce_32_16_rm_polar_code():
    est = enumerate_bruteforce(build_profile(5, 16, "rm"), [1])
    # this code is RM(2,5), which has 620 weight-8 codewords
    assert (est.d_min, est.A_dmin) == (8, 620)


def test_bruteforce_threads_agree():
    code = build_profile(6, 16)
    a = enumerate_bruteforce(code, M6, threads=1, weight_cap=None)
    b = enumerate_bruteforce(code, M6, threads=4, weight_cap=None)
    assert a == b and a.histogram == b.histogram


def test_bruteforce_k1():
    code = explicit_profile(4, [5])
    est = enumerate_bruteforce(code, M6)
    assert est.A_dmin == 1
    assert est.d_min == int(generator_rows(code, M6)[0].sum())


def test_bruteforce_refuses_large_k():
    with pytest.raises(ValueError):
        enumerate_bruteforce(build_profile(6, 32), M6)


@pytest.mark.parametrize("n,K,method,pre", [
    (4, 8, "rm-polar", M6),
    (5, 12, "rm", (1, 1, 0, 1)),
    (5, 9, "reliability", (1,)),
    (6, 10, "rm-polar", M6),
])
def test_list_equals_bruteforce_at_full_list(n, K, method, pre):
    code = build_profile(n, K, method)
    exact = enumerate_bruteforce(code, pre, weight_cap=None)
    lst = enumerate_list(code, pre, 1 << K, weight_cap=None)
    assert (lst.d_min, lst.A_dmin) == (exact.d_min, exact.A_dmin)
    assert lst.histogram == exact.histogram
    assert lst.converged


def test_list_monotone_in_l():
    code = build_profile(6, 32)
    counts = [enumerate_list(code, M6, L, probe=False).A_dmin for L in (16, 64, 256, 1024, 4096)]
    assert counts == sorted(counts)


def test_list_is_lower_bound():
    code = build_profile(5, 16, "rm")
    exact = enumerate_bruteforce(code, M6)
    for L in (8, 64, 512):
        est = enumerate_list(code, M6, L)
        assert est.d_min >= exact.d_min
        if est.d_min == exact.d_min:
            assert est.A_dmin <= exact.A_dmin


def test_list_weights_are_even():
    est = enumerate_list(build_profile(6, 32), M6, 1024, weight_cap=None)
    assert all(w % 2 == 0 for w in est.histogram)


def test_list_rejects_tiny_l():
    with pytest.raises(ValueError):
        enumerate_list(build_profile(4, 8), M6, 1)


def test_weight_cap_is_offset():
    est = enumerate_bruteforce(build_profile(5, 10), M6, weight_cap=2)
    assert max(est.histogram) <= est.d_min + 2


def test_union_bound_properties():
    assert union_bound_fer((16, 0), 0.5, 3.0) == 0.0
    one = union_bound_fer((16, 100), 0.5, 3.0)
    assert math.isclose(union_bound_fer((16, 200), 0.5, 3.0), 2 * one)
    assert union_bound_fer((16, 100), 0.5, 4.0) < one
    ratio = union_bound_fer((16, 3120), 0.5, 4.0) / union_bound_fer((16, 2556), 0.5, 4.0)
    assert math.isclose(ratio, 3120 / 2556)
    est = WeightSpectrumEstimate(16, 3120, Method.LIST, 1024, True)
    assert union_bound_fer(est, 0.5, 4.0) == union_bound_fer((16, 3120), 0.5, 4.0)
    with pytest.raises(ValueError):
        union_bound_fer((16, 1), 1.0, 3.0)


def test_union_bound_shift_near_1e5():
    # the 3120 -> 2556 multiplicity reduction is worth roughly 0.1 dB
    def snr_for(a, target=1e-5):
        lo, hi = 0.0, 10.0
        for _ in range(60):
            mid = (lo + hi) / 2
            lo, hi = (mid, hi) if union_bound_fer((16, a), 0.5, mid) > target else (lo, mid)
        return lo

    shift = snr_for(3120) - snr_for(2556)
    assert 0.03 < shift < 0.15


def test_q_function():
    assert math.isclose(q_function(0.0), 0.5)
    assert math.isclose(q_function(1.959963984540054), 0.025, rel_tol=1e-9)


def test_spectrum_csv():
    code = build_profile(5, 16, "rm")
    est = enumerate_bruteforce(code, [1])
    buf = io.StringIO()
    write_spectrum_csv([spectrum_row(code, [1], est)], buf, header="run")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# run"
    assert lines[1] == ",".join(SPECTRUM_COLUMNS)
    assert lines[2] == '"(32,16,8)",32,16,8,rm,1,exact,,620,true'
