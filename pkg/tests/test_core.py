import decimal
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import exhaustive_best_s_term, exhaustive_cone_member
from sparserec.core import (
    NORM_RTOL,
    ConeParams,
    InvalidParameterError,
    best_s_term_error,
    cone_membership,
    dsq_norm,
    lp_norm,
    read_matrix,
    read_vector,
    rearrangement,
    top_s_indices,
    write_matrix,
    write_vector,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 12), elements=finite)


def test_rearrangement_examples():
    np.testing.assert_array_equal(rearrangement([-3, 1, 2]), [3, 2, 1])
    np.testing.assert_array_equal(rearrangement([0, 0]), [0, 0])


@given(vectors)
def test_rearrangement_matches_sorted(x):
    r = rearrangement(x)
    np.testing.assert_array_equal(r, np.array(sorted(np.abs(x), reverse=True)))
    assert np.all(np.diff(r) <= 0)


def test_top_s_ties_lowest_index():
    np.testing.assert_array_equal(top_s_indices([1, -1, 1, 0.5], 2), [0, 1])


def test_lp_norm_examples():
    assert lp_norm([3, 4], 2) == 5
    assert lp_norm([1, 1, 1], math.inf) == 1
    assert lp_norm([1, -2, 2], 1) == 5
    with pytest.raises(InvalidParameterError):
        lp_norm([1.0], 0.5)


def test_lp_norm_large_p_no_overflow():
    x = np.array([1e200, 1e200])
    assert lp_norm(x, 64) == pytest.approx(1e200 * 2 ** (1 / 64), rel=1e-14)


@given(vectors, st.sampled_from([1.0, 1.5, 2.0, 3.0, 7.0]))
def test_lp_norm_matches_formula(x, p):
    # 50-digit decimal arithmetic: no underflow of |x_j|**p for tiny entries
    with decimal.localcontext(decimal.Context(prec=50, Emin=-10**6, Emax=10**6)):
        dp = decimal.Decimal(p)
        total = sum(abs(decimal.Decimal(float(v))) ** dp for v in x)
        expected = float(total ** (1 / dp)) if total else 0.0
    assert lp_norm(x, p) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_best_s_term_examples():
    assert best_s_term_error([3, 2, 1], 1) == 3
    assert best_s_term_error([5, -1, 2], 3) == 0
    with pytest.raises(InvalidParameterError):
        best_s_term_error([1, 2], 3)


def test_best_s_term_exhaustive():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.integers(1, 8)
        x = rng.standard_normal(n)
        s = rng.integers(0, n + 1)
        assert best_s_term_error(x, s) == pytest.approx(exhaustive_best_s_term(x, s), abs=1e-12)


@given(vectors)
def test_best_s_term_nonincreasing(x):
    vals = [best_s_term_error(x, s) for s in range(x.size + 1)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_dsq_examples():
    x = np.zeros(6)
    x[[1, 4]] = [0.6, -0.8]
    assert dsq_norm(x, 2, 2) == pytest.approx(1.0, rel=1e-15)
    assert dsq_norm([1, 1, 1, 1], 2, 2) == pytest.approx(2 * math.sqrt(2), rel=1e-15)
    # last block shorter: (3,2),(1)
    assert dsq_norm([1, 3, 2], 2, 1) == 6


def test_dsq_norm_equivalence():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = rng.integers(1, 20)
        s = rng.integers(1, n + 1)
        q = rng.choice([1.0, 1.5, 2.0, 4.0])
        x = rng.standard_normal(n)
        v, base = dsq_norm(x, s, q), lp_norm(x, q)
        assert base * (1 - NORM_RTOL) <= v <= math.ceil(n / s) ** (1 - 1 / q) * base * (1 + NORM_RTOL)


def test_dsq_is_a_norm():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = rng.integers(2, 15)
        s = rng.integers(1, n + 1)
        q = rng.choice([1.0, 2.0, 3.0])
        x, y = rng.standard_normal((2, n))
        c = rng.uniform(-5, 5)
        assert dsq_norm(c * x, s, q) == pytest.approx(abs(c) * dsq_norm(x, s, q), rel=NORM_RTOL)
        assert dsq_norm(x + y, s, q) <= (dsq_norm(x, s, q) + dsq_norm(y, s, q)) * (1 + NORM_RTOL)


def test_dsq_sparse_equals_lq():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n, s = 12, rng.integers(1, 6)
        x = np.zeros(n)
        x[rng.choice(n, s, replace=False)] = rng.standard_normal(s)
        assert dsq_norm(x, s, 2.5) == pytest.approx(lp_norm(x, 2.5), rel=NORM_RTOL)


def test_dsq_rejects_infinite_q():
    with pytest.raises(InvalidParameterError):
        dsq_norm([1.0, 2.0], 1, math.inf)


def test_cone_examples():
    e1 = np.zeros(5)
    e1[0] = 1
    member, margin = cone_membership(e1, ConeParams(0.3, 2, 2.0))
    assert member and margin == 1
    n = 4
    flat = np.ones(n) / n
    # rho = 1 sits on the boundary of the admissible range, so use a value just below it
    member, margin = cone_membership(flat, ConeParams(1 - 1e-12, 1, 1.0))
    assert not member and margin == pytest.approx(1 / n - (n - 1) / n)
    with pytest.raises(InvalidParameterError):
        cone_membership(np.zeros(3), ConeParams(0.5, 1))


def test_cone_params_validation():
    for bad in [dict(rho=0, s=1), dict(rho=1, s=1), dict(rho=0.5, s=0), dict(rho=0.5, s=1, q=0.5)]:
        with pytest.raises(InvalidParameterError):
            ConeParams(**bad)
    with pytest.raises(InvalidParameterError):
        cone_membership(np.ones(2), ConeParams(0.5, 3))


def test_cone_membership_exhaustive():
    rng = np.random.default_rng(4)
    for _ in range(300):
        n = rng.integers(2, 8)
        s = rng.integers(1, n + 1)
        q = rng.choice([1.0, 2.0, 3.0])
        rho = rng.uniform(0.05, 0.95)
        x = rng.standard_normal(n) * rng.exponential(1, n) ** 3
        assert cone_membership(x, ConeParams(rho, s, q))[0] == exhaustive_cone_member(x, rho, s, q)


def test_lq_l2_comparisons_on_sparse():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n, s = 30, rng.integers(1, 8)
        q = rng.uniform(2, 10)
        x = np.zeros(n)
        x[rng.choice(n, s, replace=False)] = rng.standard_normal(s)
        assert lp_norm(x, q) <= lp_norm(x, 2) * (1 + NORM_RTOL)
        assert lp_norm(x, 2) <= s ** (0.5 - 1 / q) * lp_norm(x, q) * (1 + NORM_RTOL)


def test_text_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    A = rng.standard_normal((3, 4)) * 10.0 ** rng.integers(-300, 300, (3, 4))
    x = rng.standard_normal(5) / 3
    write_matrix(tmp_path / "A.txt", A)
    write_vector(tmp_path / "x.txt", x)
    np.testing.assert_array_equal(read_matrix(tmp_path / "A.txt"), A)
    np.testing.assert_array_equal(read_vector(tmp_path / "x.txt"), x)
    assert (tmp_path / "A.txt").read_text().splitlines()[0] == "3 4"


def test_text_bad_counts(tmp_path):
    (tmp_path / "A.txt").write_text("2 2\n1 2 3\n")
    with pytest.raises(InvalidParameterError):
        read_matrix(tmp_path / "A.txt")
    (tmp_path / "x.txt").write_text("2\n1 nan_x\n")
    with pytest.raises(InvalidParameterError):
        read_vector(tmp_path / "x.txt")


def test_inputs_not_modified():
    x = np.array([3.0, -1.0, 2.0])
    before = x.copy()
    rearrangement(x), dsq_norm(x, 2, 2), cone_membership(x, ConeParams(0.5, 1)), best_s_term_error(x, 1)
    np.testing.assert_array_equal(x, before)


def test_non_finite_rejected():
    with pytest.raises(InvalidParameterError):
        rearrangement([1.0, np.nan])
