"""Readers and writers for case data and result tables."""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (ConfigError, DateGapError, EmptyInputError, InputError,
                     MalformedHeaderError, NonMonotoneError)
from .sir import CaseSeries

JHU_KEYS = ("Province/State", "Country/Region")
JHU_TYPES = {"confirmed": "confirmed", "recovered": "recovered",
             "deaths": "deceased", "deceased": "deceased"}
LONG_COLUMNS = ("date", "confirmed", "recovered", "deceased", "population")


def parse_date(text: str) -> dt.date:
    text = text.strip()
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        pass
    return dt.datetime.strptime(text, "%m/%d/%y").date()


def _is_jhu_date(text: str) -> bool:
    try:
        dt.datetime.strptime(text.strip(), "%m/%d/%y")
        return True
    except ValueError:
        return False


def _read_rows(path) -> List[List[str]]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file {path} does not exist")
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise EmptyInputError(f"{path} is empty")
    return rows


def _check_dates(dates: Sequence[dt.date], columns: Sequence[int], line: int):
    for k in range(1, len(dates)):
        if (dates[k] - dates[k - 1]).days != 1:
            raise DateGapError(f"dates jump from {dates[k - 1].isoformat()} to "
                               f"{dates[k].isoformat()}", line=line, column=columns[k] + 1)


def _check_monotone(name: str, values: np.ndarray, dates, lines, columns):
    bad = np.flatnonzero(np.diff(values) < 0)
    if bad.size:
        k = bad[0] + 1
        raise NonMonotoneError(f"cumulative {name} decreases on {dates[k].isoformat()}",
                               line=lines[k] if lines else None,
                               column=columns[k] + 1 if columns else None)


def _jhu_table(rows: List[List[str]], region: Optional[str], type_name: Optional[str]
               ) -> Tuple[List[dt.date], Dict[str, np.ndarray], List[int], Dict[str, int]]:
    header = [h.strip() for h in rows[0]]
    for key in JHU_KEYS:
        if key not in header:
            raise MalformedHeaderError(f"missing column {key!r}", line=1)
    date_cols = [i for i, h in enumerate(header) if _is_jhu_date(h)]
    if not date_cols:
        raise MalformedHeaderError("no M/D/YY date columns", line=1)
    first = date_cols[0]
    if date_cols != list(range(first, len(header))):
        bad = next(i for i in range(first, len(header)) if i not in date_cols)
        raise MalformedHeaderError(f"unexpected column {header[bad]!r} among dates",
                                   line=1, column=bad + 1)
    dates = [parse_date(header[i]) for i in date_cols]
    _check_dates(dates, date_cols, 1)

    type_col = header.index("Type") if "Type" in header else None
    if type_col is None and type_name is None:
        raise MalformedHeaderError("no 'Type' column and no series type given", line=1)
    country_col = header.index("Country/Region")
    totals: Dict[str, np.ndarray] = {}
    first_line: Dict[str, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"expected {len(header)} fields, found {len(row)}", line=lineno)
        if region is not None and row[country_col].strip() != region:
            continue
        kind = type_name if type_col is None else row[type_col].strip().lower()
        if kind not in JHU_TYPES:
            raise InputError(f"unknown series type {kind!r}", line=lineno,
                             column=(type_col or 0) + 1)
        try:
            vals = np.array([float(row[i]) for i in date_cols])
        except ValueError as exc:
            raise InputError(f"non-numeric count: {exc}", line=lineno) from exc
        key = JHU_TYPES[kind]
        # sub-regions (provinces) aggregate by sum
        totals[key] = totals.get(key, 0.0) + vals
        first_line.setdefault(key, lineno)
    return dates, totals, date_cols, first_line


def _assemble(dates, totals, population, date_cols, first_line) -> CaseSeries:
    missing = [k for k in ("confirmed", "recovered", "deceased") if k not in totals]
    if missing:
        raise InputError(f"no rows for {', '.join(missing)}")
    for name in ("confirmed", "recovered", "deceased"):
        _check_monotone(name, totals[name], dates, [first_line[name]] * len(dates), date_cols)
    if population is None:
        raise ConfigError("population is required for JHU wide input")
    return CaseSeries(dates, totals["confirmed"], totals["recovered"], totals["deceased"],
                      float(population)).validate()


def parse_jhu_wide(path, population: Optional[float] = None, region: Optional[str] = None
                   ) -> CaseSeries:
    """Read a JHU-style wide table holding confirmed, recovered and deaths rows.

    Rows are keyed by ``Province/State`` and ``Country/Region``; a ``Type``
    column names the series. Dates are M/D/YY column headers. Province rows
    of the same type are summed. ``region`` filters on ``Country/Region``.
    """
    dates, totals, cols, lines = _jhu_table(_read_rows(path), region, None)
    return _assemble(dates, totals, population, cols, lines)


def parse_jhu_files(confirmed, recovered, deaths, population: float,
                    region: Optional[str] = None) -> CaseSeries:
    """Combine the three separate JHU time-series files (no ``Type`` column)."""
    totals, lines = {}, {}
    dates = cols = None
    for path, kind in ((confirmed, "confirmed"), (recovered, "recovered"), (deaths, "deaths")):
        d, t, c, ln = _jhu_table(_read_rows(path), region, kind)
        if dates is not None and d != dates:
            raise InputError(f"{path} covers different dates than the other files")
        dates, cols = d, c
        totals.update(t)
        lines.update(ln)
    return _assemble(dates, totals, population, cols, lines)


def parse_long(path) -> CaseSeries:
    """Read ``date,confirmed,recovered,deceased,population`` rows (one per day)."""
    rows = _read_rows(path)
    header = [h.strip().lower() for h in rows[0]]
    if "population" not in header:
        raise ConfigError("population column missing")
    for col in LONG_COLUMNS:
        if col not in header:
            raise MalformedHeaderError(f"missing column {col!r}", line=1)
    if len(rows) == 1:
        raise EmptyInputError("no data rows", line=1)
    idx = {c: header.index(c) for c in LONG_COLUMNS}
    dates, vals, pops = [], {c: [] for c in LONG_COLUMNS[1:4]}, []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            dates.append(parse_date(row[idx["date"]]))
        except (ValueError, IndexError) as exc:
            raise InputError(f"bad date: {exc}", line=lineno, column=idx["date"] + 1) from exc
        for c in vals:
            try:
                vals[c].append(float(row[idx[c]]))
            except (ValueError, IndexError) as exc:
                raise InputError(f"bad {c} value", line=lineno, column=idx[c] + 1) from exc
        pop = row[idx["population"]].strip() if idx["population"] < len(row) else ""
        if pop:
            pops.append(float(pop))
    if not pops:
        raise ConfigError("population missing")
    lines = list(range(2, len(rows) + 1))
    _check_dates(dates, [0] * len(dates), None)
    for c in vals:
        _check_monotone(c, np.array(vals[c]), dates, lines, [idx[c]] * len(dates))
    return CaseSeries(dates, vals["confirmed"], vals["recovered"], vals["deceased"],
                      pops[0]).validate()


def write_long(cases: CaseSeries, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LONG_COLUMNS)
        for k, d in enumerate(cases.dates):
            w.writerow([d.isoformat(), repr(float(cases.confirmed[k])),
                        repr(float(cases.recovered[k])), repr(float(cases.deceased[k])),
                        repr(float(cases.population))])


def read_series(path) -> Tuple[np.ndarray, Optional[List[dt.date]]]:
    """Read a one-column series, optionally with a ``date`` column."""
    rows = _read_rows(path)
    header = [h.strip().lower() for h in rows[0]]
    value_cols = [i for i, h in enumerate(header) if h != "date"]
    if len(value_cols) != 1:
        raise MalformedHeaderError("expected one value column (plus optional 'date')", line=1)
    if len(rows) == 1:
        raise EmptyInputError("no data rows", line=1)
    vc = value_cols[0]
    dc = header.index("date") if "date" in header else None
    values, dates = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            values.append(float(row[vc]))
        except (ValueError, IndexError) as exc:
            raise InputError("bad value", line=lineno, column=vc + 1) from exc
        if dc is not None:
            dates.append(parse_date(row[dc]))
    if dc is not None:
        _check_dates(dates, [dc] * len(dates), None)
    return np.array(values), (dates if dc is not None else None)


# --------------------------------------------------------------------------
# output


def config_hash(config: Dict) -> str:
    blob = json.dumps({k: config[k] for k in sorted(config)}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, dt.date):
        return x.isoformat()
    return str(x)


@contextmanager
def atomic_output(path):
    """Yield a temporary path that replaces ``path`` only on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".",
                               prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], meta: Dict,
                fmt: str = "csv", extra: Optional[Dict] = None):
    """Write rows as CSV (with ``# key=value`` metadata lines) or JSON."""
    rows = [list(r) for r in rows]
    with atomic_output(path) as tmp:
        with open(tmp, "w", newline="") as fh:
            if fmt == "csv":
                for k, v in meta.items():
                    fh.write(f"# {k}={_fmt(v)}\n")
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for r in rows:
                    w.writerow([_fmt(x) for x in r])
            elif fmt == "json":
                doc = dict(meta={k: _fmt(v) for k, v in meta.items()},
                           columns=list(header),
                           rows=[[_json_value(x) for x in r] for r in rows])
                if extra:
                    doc.update(extra)
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
            else:
                raise ConfigError(f"unknown output format {fmt!r}")


def _json_value(x):
    if isinstance(x, dt.date):
        return x.isoformat()
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def read_table(path) -> Tuple[Dict[str, str], List[str], List[List[str]]]:
    """Inverse of the CSV branch of :func:`write_table` (values stay strings)."""
    meta, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# "):
                k, _, v = line[2:].rstrip("\n").partition("=")
                meta[k] = v
            else:
                body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]
