import pytest
from hypothesis import given, strategies as st

from saledi.exceptions import ConfigError, DataError
from saledi.ingest import (OutageRecord, SystemProfile, filter_sustained, iso_to_minutes,
                           minutes_to_iso, outage_cmip, parse_outage_csv, write_outage_csv)
from saledi.synth import SyntheticSpec, generate_data


def _write(tmp_path, text, name="outages.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_three_rows_sorted_by_start(tmp_path):
    p = _write(tmp_path, "outage_id,start,restore,customers\n"
                         "c,2020-01-01T03:00,2020-01-01T04:00,5\n"
                         "a,2020-01-01T01:00,2020-01-01T02:00,7\n"
                         "b,2020-01-01T02:00,2020-01-01T02:30,1\n")
    recs = parse_outage_csv(p)
    assert [r.outage_id for r in recs] == ["a", "b", "c"]
    assert recs[0].duration_minutes == 60
    assert recs[0].customers_interrupted == 7


def test_equal_starts_break_ties_by_id(tmp_path):
    p = _write(tmp_path, "outage_id,start,restore,customers\nz,100,200,1\ny,100,150,1\n")
    assert [r.outage_id for r in parse_outage_csv(p)] == ["y", "z"]


def test_epoch_minutes_accepted(tmp_path):
    p = _write(tmp_path, "outage_id,start,restore,customers\nx,1000,1060,3\n")
    (r,) = parse_outage_csv(p)
    assert (r.start, r.restore) == (1000, 1060)


@pytest.mark.parametrize("row, fragment", [
    ("x,2020-01-01T02:00,2020-01-01T01:00,5", "row 1: field restore"),
    ("x,2020-01-01T01:00,2020-01-01T02:00,-1", "row 1: field customers"),
    ("x,2020-01-01T01:00:30,2020-01-01T02:00,1", "row 1: field start"),
    ("x,yesterday,2020-01-01T02:00,1", "row 1: field start"),
    ("x,2020-01-01T01:00,2020-01-01T02:00", "row 1: expected 4 columns"),
    ("x,2020-01-01T01:00,2020-01-01T02:00,1.5", "row 1: field customers"),
])
def test_malformed_rows_name_row_and_field(tmp_path, row, fragment):
    p = _write(tmp_path, "outage_id,start,restore,customers\n" + row + "\n")
    with pytest.raises(DataError, match=fragment):
        parse_outage_csv(p)


def test_row_number_points_at_bad_row(tmp_path):
    p = _write(tmp_path, "outage_id,start,restore,customers\na,10,20,1\nb,10,5,1\n")
    with pytest.raises(DataError, match="row 2"):
        parse_outage_csv(p)


def test_mixed_timestamp_styles_rejected(tmp_path):
    p = _write(tmp_path, "outage_id,start,restore,customers\na,10,20,1\nb,2020-01-01T00:00,2020-01-01T01:00,1\n")
    with pytest.raises(DataError, match="mixes"):
        parse_outage_csv(p)


@pytest.mark.parametrize("text", ["", "outage_id,start,restore,customers\n"])
def test_empty_file_is_an_error(tmp_path, text):
    with pytest.raises(DataError):
        parse_outage_csv(_write(tmp_path, text))


def test_wrong_header(tmp_path):
    with pytest.raises(DataError, match="header"):
        parse_outage_csv(_write(tmp_path, "id,start,end,n\na,1,2,3\n"))


def test_record_invariants():
    with pytest.raises(DataError):
        OutageRecord(10, "x", 5, 1)
    with pytest.raises(DataError):
        OutageRecord(10, "x", 15, -1)


def test_profile_invariants():
    with pytest.raises(ConfigError):
        SystemProfile(0, 0, 10)
    with pytest.raises(ConfigError):
        SystemProfile(10, 5, 5)
    assert SystemProfile(10, 0, 525_960).n_year_all == 1.0


def test_iso_round_trip():
    assert minutes_to_iso(iso_to_minutes("2021-07-04T13:37")) == "2021-07-04T13:37"
    assert iso_to_minutes("1970-01-01T01:00") == 60


# sustained filter ------------------------------------------------------------

def _rec(dur, i=0, cust=1):
    return OutageRecord(1000 + i, f"r{i:05d}", 1000 + i + dur, cust)


def test_five_minutes_is_momentary_six_is_sustained():
    assert filter_sustained([_rec(5)]) == []
    assert filter_sustained([_rec(6)]) == [_rec(6)]


def test_all_sixty_minute_outages_retained():
    recs = [_rec(60, i) for i in range(10)]
    assert filter_sustained(recs) == recs


def test_filter_count_matches_direct_scan(rng):
    durs = rng.integers(0, 20, size=500)
    recs = [_rec(int(d), i) for i, d in enumerate(durs)]
    k = sum(1 for d in durs if d <= 5)
    out = filter_sustained(recs)
    assert len(out) == len(recs) - k
    assert all(r.duration_minutes > 5 for r in out)


@given(st.lists(st.integers(0, 30), max_size=50))
def test_filter_idempotent(durs):
    recs = [_rec(d, i) for i, d in enumerate(durs)]
    once = filter_sustained(recs)
    assert filter_sustained(once) == once


# per-outage CMIp ---------------------------------------------------------------

def test_cmip_examples():
    prof = SystemProfile(100, 0, 10)
    assert outage_cmip(OutageRecord(0, "a", 60, 100), prof) == 60
    assert outage_cmip(OutageRecord(0, "a", 60, 0), prof) == 0
    utility2 = SystemProfile(11612, 0, 10)
    assert outage_cmip(OutageRecord(0, "a", 30, 11612), utility2) == 30


def test_cmip_rejects_zero_customers_served():
    with pytest.raises(ConfigError):
        outage_cmip(OutageRecord(0, "a", 60, 1), 0)


@given(st.integers(6, 10_000), st.integers(0, 10_000), st.integers(1, 20))
def test_cmip_linear_in_duration_and_customers(dur, cust, c):
    prof = SystemProfile(12345, 0, 10)
    base = outage_cmip(OutageRecord(0, "a", dur, cust), prof)
    assert outage_cmip(OutageRecord(0, "a", dur * c, cust), prof) == pytest.approx(c * base, rel=1e-12)
    assert outage_cmip(OutageRecord(0, "a", dur, cust * c), prof) == pytest.approx(c * base, rel=1e-12)


# round trip --------------------------------------------------------------------

@pytest.mark.parametrize("style", ["iso", "epoch"])
def test_generated_fixture_round_trips(tmp_path, style):
    data = generate_data(SyntheticSpec(seed=7, years=6, event_rate=600, mean_outages_per_event=2.8))
    assert len(data.records) >= 10_000
    p = tmp_path / "gen.csv"
    write_outage_csv(data.records, p, style=style)
    parsed = parse_outage_csv(p)
    assert parsed == data.records
    assert parse_outage_csv(p) == parsed
