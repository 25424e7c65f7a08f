import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spartan_ts.errors import SeriesFormatError
from spartan_ts.io import parse_series, read_series, series_lines, write_series


def test_parse_with_header_and_missing_tokens():
    sf = parse_series(["time,value", "0,1.5", "1,", "2,NaN", "3,nan", "4,2e1"])
    assert sf.header == ["time", "value"]
    assert sf.alpha == 1.0
    np.testing.assert_array_equal(np.isnan(sf.values), [False, True, True, True, False])
    assert sf.values[4] == 20.0
    assert sf.value_tokens[4] == "2e1"


def test_parse_without_header_and_extra_columns():
    sf = parse_series(["10,1,x", "", "10.5,2,y", "11,3,z"])
    assert sf.header is None and sf.alpha == 0.5
    assert sf.to_series().n_present == 3


@pytest.mark.parametrize(
    "lines,line",
    [
        (["t,v", "0,1", "1,2", "2.5,3", "3,4"], 4),
        (["t,v", "0,1", "1,2", "1,3", "2,4"], 4),
        (["0,1", "1,abc", "2,3"], 2),
        (["0,1", "1,inf", "2,3"], 2),
        (["0,1", "1", "2,3"], 2),
    ],
)
def test_format_errors_carry_line_numbers(lines, line):
    with pytest.raises(SeriesFormatError) as info:
        parse_series(lines)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


@pytest.mark.parametrize("lines", [[], ["t,v"], ["0,1", "1,2"], ["2,1", "1,2", "0,3"]])
def test_degenerate_files(lines):
    with pytest.raises(SeriesFormatError):
        parse_series(lines)


def test_step_tolerance():
    parse_series(["0,1", f"{1 + 1e-12!r},2", "2,3"])


@given(
    st.lists(st.one_of(st.floats(allow_nan=False, allow_infinity=False), st.just(math.nan)),
             min_size=3, max_size=40),
    st.floats(0.001, 1000),
    st.floats(-1e6, 1e6),
)
def test_write_read_round_trip_is_lossless(values, alpha, t0):
    # time stamps must resolve the step to the 1e-9 regularity tolerance
    t0 = t0 * alpha * 1e-2
    times = t0 + alpha * np.arange(len(values))
    text = series_lines(times, values)
    sf = parse_series(text.splitlines())
    np.testing.assert_array_equal(sf.values, np.array(values))
    np.testing.assert_array_equal(sf.times, times)


def test_original_tokens_kept(tmp_path):
    lines = ["time,value", "0,1.50", "1,", "2,3.0e0"]
    sf = parse_series(lines)
    tokens = [t if ok else None for t, ok in zip(sf.value_tokens, ~np.isnan(sf.values))]
    out = series_lines(sf.times, [1.5, 2.25, 3.0], ["observed", "predicted", "observed"],
                       time_tokens=sf.time_tokens, value_tokens=tokens)
    assert out.splitlines() == [
        "time,value,source", "0,1.50,observed", "1,2.25,predicted", "2,3.0e0,observed"
    ]
    path = tmp_path / "sub" / "f.csv"
    write_series(path, [0.0, 1.0, 2.0, 3.0], [1.0, math.nan, 3.0, 4.0])
    assert read_series(path).missing_indices.tolist() == [1]
