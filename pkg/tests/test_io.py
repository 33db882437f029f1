import datetime as dt
import json

import numpy as np
import pytest

from fracuc.errors import (ConfigError, DateGapError, EmptyInputError, InputError,
                           MalformedHeaderError, NonMonotoneError)
from fracuc.io import (atomic_output, config_hash, parse_date, parse_jhu_files, parse_jhu_wide,
                       parse_long, read_series, read_table, write_long, write_table)
from fracuc.sir import CaseSeries

JHU = """Province/State,Country/Region,Lat,Long,Type,1/22/20,1/23/20,1/24/20
A,Testland,0,0,confirmed,1,3,6
B,Testland,0,0,confirmed,2,2,4
,Testland,0,0,recovered,0,1,1
,Testland,0,0,deaths,0,0,1
,Other,0,0,confirmed,9,9,9
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_date_formats():
    assert parse_date("2020-03-01") == dt.date(2020, 3, 1)
    assert parse_date("3/1/20") == dt.date(2020, 3, 1)


def test_jhu_wide_sums_provinces(tmp_path):
    cases = parse_jhu_wide(_write(tmp_path, "w.csv", JHU), population=1000, region="Testland")
    np.testing.assert_array_equal(cases.confirmed, [3, 5, 10])
    np.testing.assert_array_equal(cases.recovered, [0, 1, 1])
    assert cases.dates[0] == dt.date(2020, 1, 22)
    with pytest.raises(ConfigError):
        parse_jhu_wide(_write(tmp_path, "w.csv", JHU), region="Testland")


def test_jhu_errors_carry_location(tmp_path):
    gap = JHU.replace("1/24/20", "1/25/20")
    with pytest.raises(DateGapError) as info:
        parse_jhu_wide(_write(tmp_path, "g.csv", gap), 1000, "Testland")
    assert info.value.line == 1 and info.value.column == 8
    dec = JHU.replace("A,Testland,0,0,confirmed,1,3,6", "A,Testland,0,0,confirmed,1,3,0")
    with pytest.raises(NonMonotoneError) as info:
        parse_jhu_wide(_write(tmp_path, "d.csv", dec), 1000, "Testland")
    assert info.value.code == "non-monotone"
    with pytest.raises(MalformedHeaderError):
        parse_jhu_wide(_write(tmp_path, "h.csv", JHU.replace("Country/Region", "Nation")), 1000)


def test_jhu_separate_files(tmp_path):
    head = "Province/State,Country/Region,Lat,Long,1/22/20,1/23/20\n"
    c = _write(tmp_path, "c.csv", head + ",X,0,0,5,7\n")
    r = _write(tmp_path, "r.csv", head + ",X,0,0,0,1\n")
    d = _write(tmp_path, "d.csv", head + ",X,0,0,0,0\n")
    cases = parse_jhu_files(c, r, d, population=100)
    np.testing.assert_array_equal(cases.confirmed, [5, 7])


def test_long_round_trip(tmp_path):
    dates = [dt.date(2020, 4, 1) + dt.timedelta(days=k) for k in range(3)]
    cases = CaseSeries(dates, [10.0, 12.5, 20.0], [0, 1, 2], [0, 0, 1], 5e6)
    path = tmp_path / "long.csv"
    write_long(cases, path)
    back = parse_long(path)
    assert back.dates == cases.dates
    np.testing.assert_array_equal(back.confirmed, cases.confirmed)
    assert back.population == 5e6


def test_long_errors(tmp_path):
    header = "date,confirmed,recovered,deceased,population\n"
    with pytest.raises(EmptyInputError):
        parse_long(_write(tmp_path, "e.csv", header))
    with pytest.raises(ConfigError):
        parse_long(_write(tmp_path, "p.csv", "date,confirmed,recovered,deceased\n2020-01-01,1,0,0\n"))
    with pytest.raises(InputError) as info:
        parse_long(_write(tmp_path, "b.csv", header + "2020-01-01,x,0,0,10\n"))
    assert info.value.line == 2 and info.value.column == 2
    with pytest.raises(InputError):
        parse_long(tmp_path / "missing.csv")


def test_read_series(tmp_path):
    vals, dates = read_series(_write(tmp_path, "s.csv", "date,v\n2020-01-01,1.5\n2020-01-02,2\n"))
    np.testing.assert_array_equal(vals, [1.5, 2.0])
    assert dates[1] == dt.date(2020, 1, 2)
    vals, dates = read_series(_write(tmp_path, "n.csv", "v\n3\n"))
    assert dates is None
    with pytest.raises(MalformedHeaderError):
        read_series(_write(tmp_path, "m.csv", "a,b\n1,2\n"))


def test_write_and_read_table(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ["a", "b"], [[1, 0.1], [2, float("nan")]], {"seed": 3})
    meta, header, rows = read_table(path)
    assert meta == {"seed": "3"} and header == ["a", "b"]
    assert rows[0] == ["1", "0.1"]
    jpath = tmp_path / "t.json"
    write_table(jpath, ["a", "b"], [[1, 0.1], [2, float("nan")]], {"seed": 3}, fmt="json")
    doc = json.loads(jpath.read_text())
    assert doc["rows"][1] == [2, None] and doc["meta"]["seed"] == "3"
    with pytest.raises(ConfigError):
        write_table(tmp_path / "x.txt", ["a"], [], {}, fmt="xml")
    assert not (tmp_path / "x.txt").exists()


def test_atomic_output_keeps_old_file_on_failure(tmp_path):
    path = tmp_path / "keep.txt"
    path.write_text("old")
    with pytest.raises(RuntimeError):
        with atomic_output(path) as tmp:
            open(tmp, "w").write("new")
            raise RuntimeError("boom")
    assert path.read_text() == "old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["keep.txt"]


def test_config_hash_is_order_free():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
