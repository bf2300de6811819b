import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyclone_eye.errors import AlignmentError, OrderingError, RangeError, UndefinedErrorPercentage
from cyclone_eye.geo import GeoPoint
from cyclone_eye.track import (
    LocatedEye,
    Track,
    TrackPoint,
    assemble_track,
    compare_tracks,
    comparison_to_csv,
    error_percentage,
    fixture_table_csv,
    knots_to_mps,
    load_fixture,
    mps_to_knots,
    read_track_csv,
    track_to_csv,
    track_to_geojson,
)

lat = st.floats(0.5, 60)
lon = st.floats(0.5, 179)


def track_of(*coords, start=0):
    return Track(tuple(TrackPoint(f"t{k + start:02d}", GeoPoint(a, b)) for k, (a, b) in enumerate(coords)))


class TestErrorPercentage:
    def test_lat_row_one(self):
        r = error_percentage(GeoPoint(11.6, 72.6), GeoPoint(12.16, 72.6))
        assert r.lat_err_pct == pytest.approx(4.83, abs=0.01)

    def test_lon_row_one(self):
        r = error_percentage(GeoPoint(11.6, 72.6), GeoPoint(11.6, 72.48))
        assert r.lon_err_pct == pytest.approx(-0.165, abs=0.001)

    def test_identical(self):
        r = error_percentage(GeoPoint(20, 88), GeoPoint(20, 88))
        assert (r.lat_err_pct, r.lon_err_pct) == (0.0, 0.0)

    def test_zero_reference(self):
        with pytest.raises(UndefinedErrorPercentage):
            error_percentage(GeoPoint(0, 88), GeoPoint(1, 88))
        with pytest.raises(UndefinedErrorPercentage):
            error_percentage(GeoPoint(10, 0), GeoPoint(10, 1))

    @given(lat, lon, lat, lon)
    def test_sign_follows_offset(self, a, b, c, d):
        r = error_percentage(GeoPoint(a, b), GeoPoint(c, d))
        assert (r.lat_err_pct > 0) == (c > a) and (r.lat_err_pct < 0) == (c < a)

    @given(lat, lon)
    def test_reflexive(self, a, b):
        r = error_percentage(GeoPoint(a, b), GeoPoint(a, b))
        assert r.lat_err_pct == 0 and r.lon_err_pct == 0


class TestFixtures:
    @pytest.mark.parametrize("name,rows", [("tauktae", 18), ("yaas", 12)])
    def test_row_counts(self, name, rows):
        assert len(load_fixture(name).rows) == rows

    @pytest.mark.parametrize("name", ["tauktae", "yaas"])
    def test_all_printed_columns(self, name):
        t = load_fixture(name)
        imd = t.track("IMD")
        a = compare_tracks(imd, t.track("CIMSS"), match="order")
        b = compare_tracks(imd, t.track("METHOD"), match="order")
        for k, (ra, rb) in enumerate(zip(a, b)):
            assert ra.lat_err_pct == pytest.approx(t.rows[k]["a_lat"], abs=0.02), k
            assert ra.lon_err_pct == pytest.approx(t.rows[k]["a_lon"], abs=0.02), k
            assert rb.lat_err_pct == pytest.approx(t.rows[k]["b_lat"], abs=0.02), k
            assert rb.lon_err_pct == pytest.approx(t.rows[k]["b_lon"], abs=0.02), k

    def test_tauktae_row_one_repair(self):
        t = load_fixture("tauktae")
        assert t.rows[0]["imd_lon"] == 72.6
        assert any("72.6" in n for n in t.notes)

    def test_yaas_anchors(self):
        t = load_fixture("yaas")
        a = compare_tracks(t.track("IMD"), t.track("CIMSS"), match="order")
        assert round(a[0].lat_err_pct, 2) == pytest.approx(0.06, abs=0.01)
        assert a[3].lat_err_pct == pytest.approx(-0.55, abs=0.02)

    def test_method_track_runs_north(self):
        tr = load_fixture("tauktae").track("METHOD")
        lats = [p.position.lat for p in tr]
        assert len(tr) == 18 and lats[0] == 11.8 and lats[-1] == 24.15
        assert all(x < y for x, y in zip(lats, lats[1:]))

    def test_unknown_fixture(self):
        with pytest.raises(ValueError):
            load_fixture("amphan")

    def test_table_csv_layout(self):
        lines = fixture_table_csv(load_fixture("yaas")).splitlines()
        assert lines[0].startswith("imd_lat,imd_lon,cimss_lat")
        assert len(lines) == 13


class TestCompare:
    def test_self_comparison_is_zero(self):
        t = load_fixture("tauktae").track("IMD")
        cmp = compare_tracks(t, t)
        assert all(r.lat_err_pct == 0 and r.lon_err_pct == 0 for r in cmp)
        s = cmp.summary
        assert s["count"] == 18 and s["max_abs_lat_pct"] == 0 and s["mean_abs_lon_pct"] == 0

    def test_summary(self):
        cmp = compare_tracks(track_of((10, 50), (20, 50)), track_of((11, 50), (19, 50)))
        assert cmp.summary["max_abs_lat_pct"] == pytest.approx(10.0)
        assert cmp.summary["mean_abs_lat_pct"] == pytest.approx(7.5)

    def test_timestamp_orphans_listed(self):
        a = track_of((10, 50), (11, 51))
        b = track_of((10, 50), (11, 51), start=1)
        with pytest.raises(AlignmentError) as info:
            compare_tracks(a, b)
        assert set(info.value.orphans) == {"t00", "t02"}

    def test_order_length_mismatch(self):
        with pytest.raises(AlignmentError) as info:
            compare_tracks(track_of((10, 50), (11, 51)), track_of((10, 50)), match="order")
        assert info.value.orphans == ("t01",)

    def test_bad_match_mode(self):
        with pytest.raises(ValueError):
            compare_tracks(track_of((10, 50)), track_of((10, 50)), match="nearest")

    def test_comparison_csv(self):
        text = comparison_to_csv(compare_tracks(track_of((10, 50)), track_of((11, 50))))
        assert text.splitlines()[1] == "t00,10.0,50.0,11.0,50.0,10.0000,0.0000"


class TestAssemble:
    def test_three_points_two_links(self):
        p = [GeoPoint(15, 72.6), GeoPoint(15.5, 72.4), GeoPoint(16.1, 72.3)]
        located = [LocatedEye("2021-05-14T00:00:00+00:00", p[0], prior_center=GeoPoint(15, 72.6)),
                   LocatedEye("2021-05-14T06:00:00+00:00", p[1], prior_center=p[0]),
                   LocatedEye("2021-05-14T12:00:00+00:00", p[2], prior_center=p[1])]
        tr = assemble_track(located)
        assert len(tr) == 3 and all(x.source == "METHOD" for x in tr)
        assert len(tr.links) == 2

    def test_single_point(self):
        tr = assemble_track([LocatedEye("t0", GeoPoint(1, 1))])
        assert len(tr) == 1 and tr.links == []

    def test_ordering_error(self):
        with pytest.raises(OrderingError):
            assemble_track([LocatedEye("2021-05-14T06:00:00", GeoPoint(1, 1)),
                            LocatedEye("2021-05-14T00:00:00", GeoPoint(1, 1))])

    def test_duplicate_timestamp_is_not_increasing(self):
        with pytest.raises(OrderingError):
            Track((TrackPoint("t0", GeoPoint(1, 1)), TrackPoint("t0", GeoPoint(2, 2))))

    def test_empty(self):
        with pytest.raises(ValueError):
            assemble_track([])

    def test_quality_checked(self):
        with pytest.raises(RangeError):
            TrackPoint("t", GeoPoint(1, 1), quality="bad")


class TestKnots:
    def test_zero(self):
        assert knots_to_mps(0) == 0

    def test_hundred(self):
        assert knots_to_mps(100) == pytest.approx(51.4444, abs=1e-4)

    def test_genesis_wind(self):
        assert mps_to_knots(17) == pytest.approx(33.05, abs=0.005)

    def test_negative(self):
        with pytest.raises(RangeError):
            knots_to_mps(-1)
        with pytest.raises(RangeError):
            mps_to_knots(-1)

    @given(st.floats(0, 1e4))
    def test_round_trip(self, v):
        assert knots_to_mps(mps_to_knots(v)) == pytest.approx(v, rel=1e-12, abs=1e-12)


class TestIO:
    def test_csv_round_trip(self, tmp_path):
        tr = assemble_track([LocatedEye("2021-05-14T00:00:00", GeoPoint(15.123456789, 72.6)),
                             LocatedEye("2021-05-14T06:00:00", GeoPoint(15.5, 72.4), "degraded")])
        (tmp_path / "t.csv").write_text(track_to_csv(tr))
        back = read_track_csv(tmp_path / "t.csv")
        assert [(p.timestamp, p.position, p.quality) for p in back] == [
            (p.timestamp, p.position, p.quality) for p in tr]

    def test_source_filter_and_comments(self, tmp_path):
        p = tmp_path / "best.csv"
        p.write_text("# agency best tracks\ntimestamp,lat,lon,source\n"
                     "03,11.6,72.6,IMD\n03,11.8,72.3,CIMSS\n09,12.0,72.5,IMD\n")
        tr = read_track_csv(p, source="IMD")
        assert [x.timestamp for x in tr] == ["03", "09"]

    def test_missing_columns(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("timestamp,lat\n0,1\n")
        with pytest.raises(ValueError, match="lon"):
            read_track_csv(p)

    def test_geojson(self):
        tr = track_of((10, 50), (11, 51), (12, 52))
        doc = json.loads(json.dumps(track_to_geojson(tr)))
        line, *points = doc["features"]
        assert line["geometry"] == {"type": "LineString", "coordinates": [[50, 10], [51, 11], [52, 12]]}
        assert [f["properties"]["timestamp"] for f in points] == ["t00", "t01", "t02"]
        assert all(f["properties"]["quality"] == "normal" for f in points)

    def test_geojson_single_point_has_no_line(self):
        doc = track_to_geojson(track_of((10, 50)))
        assert [f["geometry"]["type"] for f in doc["features"]] == ["Point"]
