import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermitranche.exceptions import (
    EmptyPortfolio,
    FieldOutOfRange,
    FractionSumMismatch,
    LoadingNormTooLarge,
    UnknownPreset,
)
from hermitranche.model import (
    PRESET_SIZES,
    Loan,
    Portfolio,
    Tranche,
    effective_exposure,
    format_portfolio_csv,
    parse_portfolio_csv,
    preset_portfolio,
    truncate_portfolio,
    validate_portfolio,
)


def test_single_loan_portfolio():
    pf = validate_portfolio([{"f": 1, "p": 0.5, "r": 0, "w": [0]}], m=1)
    assert pf.m == 1 and pf.n == 1
    assert pf.loans[0].id == "loan_1"


def test_loading_norm_too_large_names_loan():
    with pytest.raises(LoadingNormTooLarge, match="bad"):
        validate_portfolio([{"id": "bad", "f": 1, "p": 0.1, "r": 0, "w": [0.8, 0.7]}], m=2)


def test_empty_portfolio():
    with pytest.raises(EmptyPortfolio):
        validate_portfolio([], m=1)


def test_fraction_sum_mismatch():
    raw = [{"f": 0.5, "p": 0.1, "r": 0.4, "w": [0.3]}, {"f": 0.4, "p": 0.1, "r": 0.4, "w": [0.3]}]
    with pytest.raises(FractionSumMismatch):
        validate_portfolio(raw, m=1)
    assert validate_portfolio(raw, m=1, allow_partial_notional=True).n == 2


def test_fraction_sum_tolerance():
    raw = [{"f": 0.5 + 5e-10, "p": 0.1, "r": 0.0, "w": [0.0]}, {"f": 0.5, "p": 0.1, "r": 0.0, "w": [0.0]}]
    validate_portfolio(raw, m=1)
    raw[0]["f"] = 0.5 + 2e-9
    with pytest.raises(FractionSumMismatch):
        validate_portfolio(raw, m=1)


@pytest.mark.parametrize("field,value", [
    ("f", 0.0), ("f", 1.5), ("p", 0.0), ("p", 1.0), ("r", 1.0), ("r", -0.1),
])
def test_field_out_of_range(field, value):
    rec = {"f": 1.0, "p": 0.1, "r": 0.4, "w": [0.3]}
    rec[field] = value
    with pytest.raises(FieldOutOfRange):
        validate_portfolio([rec], m=1)


def test_loading_dimension_mismatch():
    with pytest.raises(FieldOutOfRange):
        validate_portfolio([{"f": 1, "p": 0.1, "r": 0, "w": [0.1, 0.2]}], m=1)


def test_negative_loadings_allowed():
    pf = validate_portfolio([{"f": 1, "p": 0.1, "r": 0, "w": [-0.6, 0.3]}], m=2)
    assert pf.loadings[0, 0] == -0.6


@pytest.mark.parametrize("f,r,expected", [(0.008, 0.5, 0.004), (0.5, 0.0, 0.5), (0.5, 1 - 1e-9, 5e-10)])
def test_effective_exposure(f, r, expected):
    loan = Loan("x", f, 0.1, r, (0.0,))
    assert effective_exposure(loan) == pytest.approx(expected, rel=1e-6, abs=1e-15)


@given(st.floats(0.01, 1.0), st.floats(0.0, 0.98), st.floats(0.0, 0.98))
def test_effective_exposure_monotone(f, r1, r2):
    lo, hi = sorted((r1, r2))
    e_lo = effective_exposure(Loan("x", f, 0.1, lo, (0.0,)))
    e_hi = effective_exposure(Loan("x", f, 0.1, hi, (0.0,)))
    assert e_hi <= e_lo
    assert 0 < e_hi <= 1


def test_preset_paper125_endpoints():
    pf = preset_portfolio("paper125")
    first, last = pf.loans[0], pf.loans[-1]
    assert (first.f, first.p, first.r, first.w) == (0.008, 0.015, 0.5, (0.5,))
    assert last.f == pytest.approx(0.008, abs=1e-18)
    assert last.p == pytest.approx(0.065, abs=1e-15)
    assert last.r == pytest.approx(0.4, abs=1e-15)
    assert last.w == pytest.approx((0.4,), abs=1e-15)
    assert math.fsum(l.f for l in pf.loans) == pytest.approx(1.0, abs=1e-12)


def test_preset_paper25_last_loan():
    last = preset_portfolio("paper25").loans[-1]
    assert last.f == 0.04
    assert last.p == pytest.approx(0.065, abs=1e-15)
    assert last.r == pytest.approx(0.4, abs=1e-15)
    assert last.w[0] == pytest.approx(0.4, abs=1e-15)


@pytest.mark.parametrize("name", sorted(PRESET_SIZES))
def test_presets_revalidate(name):
    pf = preset_portfolio(name)
    assert pf.n == PRESET_SIZES[name]
    again = validate_portfolio(pf.loans, pf.m)
    assert again == pf
    assert pf.exposures.sum() <= 1.0


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset_portfolio("paper7")


@pytest.mark.parametrize("a,b", [(0.1, 0.1), (0.2, 0.1), (-0.01, 0.5), (0.0, 1.01)])
def test_tranche_invalid(a, b):
    with pytest.raises(FieldOutOfRange):
        Tranche(a, b)


def test_truncate_rescales():
    pf = truncate_portfolio(preset_portfolio("paper25"), 10)
    assert pf.n == 10
    assert math.fsum(l.f for l in pf.loans) == pytest.approx(1.0, abs=1e-12)
    assert pf.loans[9].p == preset_portfolio("paper25").loans[9].p


def test_csv_round_trip_multifactor():
    pf = validate_portfolio([
        {"id": "a", "f": 0.3, "p": 0.02, "r": 0.4, "w": [0.3, -0.2]},
        {"id": "b", "f": 0.7, "p": 0.11, "r": 0.25, "w": [0.1, 0.6]},
    ], m=2)
    text = format_portfolio_csv(pf)
    assert text.splitlines()[0] == "id,f,p,r,w1,w2"
    assert parse_portfolio_csv(text) == pf


def test_csv_header_only_is_empty():
    with pytest.raises(EmptyPortfolio):
        parse_portfolio_csv("id,f,p,r,w1\n")


def test_portfolio_is_hashable_and_immutable():
    pf = preset_portfolio("paper25")
    with pytest.raises(AttributeError):
        pf.m = 2
    assert isinstance(pf, Portfolio)
