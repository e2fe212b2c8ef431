"""Survey ingestion: per-country ordinal response matrices for the cultural traits.

Responses are read from a flat CSV with one row per respondent, a country
column holding ISO 3166-1 alpha-2 codes, and one column per variable code.
Negative integer codes are WVS non-responses and become missing cells.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AllMissing, EmptyCountry, InvalidValue, MissingColumn

MISSING = -1

POSTMATERIALISM_INPUTS = ("V62", "V63")
AUTONOMY_INPUTS = ("V12", "V18", "V19", "V21")
RAW_COLUMNS = POSTMATERIALISM_INPUTS + AUTONOMY_INPUTS
RAW_SUPPORT = {
    "V62": (1, 2, 3, 4),
    "V63": (1, 2, 3, 4),
    "V12": (0, 1),
    "V18": (0, 1),
    "V19": (0, 1),
    "V21": (0, 1),
}


@dataclass(frozen=True)
class VariableSpec:
    code: str
    kind: str
    support: tuple
    label: str = ""

    def __post_init__(self):
        support = tuple(int(c) for c in self.support)
        object.__setattr__(self, "support", support)
        if self.kind not in ("binary", "ordinal", "categorical"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not support:
            raise ValueError(f"{self.code}: empty support")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError(f"{self.code}: support must be strictly increasing")
        if self.kind == "binary" and len(support) != 2:
            raise ValueError(f"{self.code}: binary variable needs exactly 2 categories")

    def to_dict(self):
        return {"code": self.code, "kind": self.kind, "support": list(self.support),
                "label": self.label}

    @classmethod
    def from_dict(cls, d):
        return cls(d["code"], d["kind"], tuple(d["support"]), d.get("label", ""))


WVS6_CATALOG = (
    VariableSpec("V10", "ordinal", range(1, 5), "Happiness"),
    VariableSpec("V24", "binary", (0, 1), "Trust"),
    VariableSpec("V69", "ordinal", range(1, 4), "Respect for authority"),
    VariableSpec("V85", "ordinal", range(1, 4), "Voice"),
    VariableSpec("V152", "ordinal", range(1, 11), "Importance of God"),
    VariableSpec("V203", "ordinal", range(1, 11), "Homosexuality"),
    VariableSpec("V204", "ordinal", range(1, 11), "Abortion"),
    VariableSpec("V211", "ordinal", range(1, 6), "Proud of nationality"),
    VariableSpec("Y002", "ordinal", range(1, 4), "Post-materialism"),
    VariableSpec("Y003", "ordinal", range(1, 6), "Obedience/Independence"),
)


def load_catalog(path):
    """Read a catalog JSON file: a list of ``{code, kind, support, label}`` objects."""
    with open(path, encoding="utf-8") as fh:
        return [VariableSpec.from_dict(d) for d in json.load(fh)]


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """Integer responses (n x p); missing cells hold ``MISSING`` and are flagged in ``missing``."""

    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        missing = np.asarray(self.missing, dtype=bool)
        if values.ndim != 2 or values.shape != missing.shape:
            raise ValueError("values and missing must be equally shaped 2-D arrays")
        values = np.where(missing, MISSING, values)
        values.flags.writeable = False
        missing.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing", missing)

    @classmethod
    def from_array(cls, values):
        """Build from an integer array where negative codes mean missing."""
        values = np.asarray(values, dtype=np.int64)
        return cls(values, values < 0)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def column(self, j):
        """Observed values of column ``j`` (missing cells dropped)."""
        return self.values[~self.missing[:, j], j]

    def __eq__(self, other):
        if not isinstance(other, ResponseMatrix):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.missing, other.missing))


@dataclass(frozen=True, eq=False)
class SurveyDataset:
    catalog: tuple
    countries: dict
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "catalog", tuple(self.catalog))
        p = len(self.catalog)
        for code, mat in self.countries.items():
            if mat.p != p:
                raise ValueError(f"{code}: expected {p} columns, got {mat.p}")
            if mat.n < 1:
                raise EmptyCountry(code)
            for j, spec in enumerate(self.catalog):
                obs = mat.column(j)
                bad = ~np.isin(obs, spec.support)
                if bad.any():
                    row = int(np.flatnonzero(~mat.missing[:, j])[np.argmax(bad)])
                    raise InvalidValue(row, spec.code, int(obs[bad][0]))

    @property
    def codes(self):
        return [v.code for v in self.catalog]

    @property
    def country_codes(self):
        return sorted(self.countries)

    @property
    def p(self):
        return len(self.catalog)

    def subset(self, countries):
        countries = list(countries)
        for c in countries:
            if c not in self.countries:
                raise EmptyCountry(c)
        return SurveyDataset(self.catalog, {c: self.countries[c] for c in countries},
                             {c: self.raw[c] for c in countries if c in self.raw})

    def __eq__(self, other):
        if not isinstance(other, SurveyDataset):
            return NotImplemented
        return (self.catalog == other.catalog
                and self.countries.keys() == other.countries.keys()
                and all(self.countries[c] == other.countries[c] for c in self.countries)
                and self.raw.keys() == other.raw.keys()
                and all(self.raw[c] == other.raw[c] for c in self.raw))


@dataclass(frozen=True)
class EmpiricalMarginal:
    variable: str
    pmf: dict
    cdf: dict
    n_obs: int

    def to_dict(self):
        return {"variable": self.variable, "n_obs": self.n_obs,
                "pmf": {str(c): f for c, f in self.pmf.items()}}

    @classmethod
    def from_dict(cls, d):
        pmf = {int(c): float(f) for c, f in d["pmf"].items()}
        return cls(d["variable"], pmf, _cumulative(pmf), int(d["n_obs"]))


def _cumulative(pmf):
    cdf, acc = {}, 0.0
    for c in sorted(pmf):
        acc += pmf[c]
        cdf[c] = acc
    if cdf:
        cdf[max(cdf)] = 1.0
    return cdf


def derive_postmaterialism(v62, v63):
    """Materialist (1), mixed (2) or postmaterialist (3) from the two priority choices."""
    if v62 is None or v63 is None or v62 < 0 or v63 < 0:
        return None
    first_post = v62 in (2, 4)
    second_post = v63 in (2, 4)
    if first_post and second_post:
        return 3
    if not first_post and not second_post:
        return 1
    return 2


def derive_autonomy(v12, v18, v19, v21):
    """Autonomy index on 1..5: independence and determination minus faith and obedience, plus 3."""
    inputs = (v12, v18, v19, v21)
    if any(v is None or v < 0 for v in inputs):
        return None
    return (v12 + v18) - (v19 + v21) + 3


def _derive_columns(raw_values, raw_missing, raw_codes):
    """Vectorised Y002/Y003 from raw question columns; returns {code: int array with MISSING}."""
    idx = {c: i for i, c in enumerate(raw_codes)}
    out = {}
    if all(c in idx for c in POSTMATERIALISM_INPUTS):
        a, b = (raw_values[:, idx[c]] for c in POSTMATERIALISM_INPUTS)
        miss = raw_missing[:, idx["V62"]] | raw_missing[:, idx["V63"]]
        pa, pb = np.isin(a, (2, 4)), np.isin(b, (2, 4))
        y = np.where(pa & pb, 3, np.where(~pa & ~pb, 1, 2))
        out["Y002"] = np.where(miss, MISSING, y)
    if all(c in idx for c in AUTONOMY_INPUTS):
        cols = [raw_values[:, idx[c]] for c in AUTONOMY_INPUTS]
        miss = np.zeros(len(raw_values), dtype=bool)
        for c in AUTONOMY_INPUTS:
            miss |= raw_missing[:, idx[c]]
        y = (cols[0] + cols[1]) - (cols[2] + cols[3]) + 3
        out["Y003"] = np.where(miss, MISSING, y)
    return out


def _to_int(text, row, code):
    text = text.strip()
    if text == "":
        return MISSING
    try:
        value = int(float(text))
    except ValueError:
        raise InvalidValue(row, code, text) from None
    if value != float(text):
        raise InvalidValue(row, code, text)
    return value


def parse_survey(path, catalog=WVS6_CATALOG, country_column="country", countries=None):
    """Read a respondent-level CSV into a :class:`SurveyDataset`.

    Catalog columns missing from the header are derived when they are one of
    the two composite indices and all their input questions are present.
    ``countries`` optionally restricts the result; asking for a country that
    has no rows raises :class:`EmptyCountry`.
    """
    catalog = tuple(catalog)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise MissingColumn(country_column)
        header = [h.strip() for h in header]
        if country_column not in header:
            raise MissingColumn(country_column)
        col = {h: i for i, h in enumerate(header)}
        raw_codes = [c for c in RAW_COLUMNS if c in col]
        for spec in catalog:
            if spec.code in col:
                continue
            inputs = {"Y002": POSTMATERIALISM_INPUTS, "Y003": AUTONOMY_INPUTS}.get(spec.code)
            if inputs is None:
                raise MissingColumn(spec.code)
            for c in inputs:
                if c not in col:
                    raise MissingColumn(c)

        wanted = set(countries) if countries is not None else None
        rows = {}
        for rownum, record in enumerate(reader, start=1):
            if not record or all(not f.strip() for f in record):
                continue
            country = record[col[country_column]].strip()
            if wanted is not None and country not in wanted:
                continue
            main = [_to_int(record[col[s.code]], rownum, s.code) if s.code in col else MISSING
                    for s in catalog]
            raw = [_to_int(record[col[c]], rownum, c) for c in raw_codes]
            for c, v in zip(raw_codes, raw):
                if v >= 0 and v not in RAW_SUPPORT[c]:
                    raise InvalidValue(rownum, c, v)
            for s, v in zip(catalog, main):
                if v >= 0 and v not in s.support:
                    raise InvalidValue(rownum, s.code, v)
            main_rows, raw_rows = rows.setdefault(country, ([], []))
            main_rows.append(main)
            raw_rows.append(raw)

    if wanted is not None:
        for c in sorted(wanted):
            if c not in rows:
                raise EmptyCountry(c)

    mats, raws = {}, {}
    for country in sorted(rows):
        main, raw = rows[country]
        values = np.array(main, dtype=np.int64).reshape(len(main), len(catalog))
        missing = values < 0
        if raw_codes:
            rv = np.array(raw, dtype=np.int64).reshape(len(raw), len(raw_codes))
            rm = rv < 0
            raws[country] = RawColumns(tuple(raw_codes), ResponseMatrix(rv, rm))
            derived = _derive_columns(rv, rm, raw_codes)
            for j, spec in enumerate(catalog):
                if spec.code not in col and spec.code in derived:
                    values[:, j] = derived[spec.code]
                    missing[:, j] = derived[spec.code] < 0
        mats[country] = ResponseMatrix(values, missing)
    return SurveyDataset(catalog, mats, raws)


@dataclass(frozen=True, eq=False)
class RawColumns:
    """Raw question columns kept for the derived indices."""

    codes: tuple
    matrix: ResponseMatrix

    def __eq__(self, other):
        if not isinstance(other, RawColumns):
            return NotImplemented
        return self.codes == other.codes and self.matrix == other.matrix


def write_survey(dataset, path, country_column="country"):
    """Write ``dataset`` back to the flat CSV layout read by :func:`parse_survey`."""
    raw_codes = ()
    for r in dataset.raw.values():
        raw_codes = r.codes
        break
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([country_column, *dataset.codes, *raw_codes])
        for country in dataset.country_codes:
            vals = dataset.countries[country].values
            raw = dataset.raw[country].matrix.values if country in dataset.raw else None
            for r in range(vals.shape[0]):
                extra = [] if raw is None else [int(v) for v in raw[r]]
                w.writerow([country, *(int(v) for v in vals[r]), *extra])


def country_means(dataset):
    """Country-by-variable matrix of means over observed responses.

    Rows follow ``dataset.country_codes``; columns follow the catalog.
    """
    out = np.empty((len(dataset.countries), dataset.p))
    for r, country in enumerate(dataset.country_codes):
        mat = dataset.countries[country]
        for j, spec in enumerate(dataset.catalog):
            obs = mat.column(j)
            if obs.size == 0:
                raise AllMissing(spec.code, country)
            out[r, j] = obs.mean()
    return out


def empirical_marginals(matrix, catalog=WVS6_CATALOG):
    """Empirical pmf/cdf for each column; unobserved categories are left out."""
    margs = []
    for j, spec in enumerate(catalog):
        obs = matrix.column(j)
        if obs.size == 0:
            raise AllMissing(spec.code)
        cats, counts = np.unique(obs, return_counts=True)
        pmf = {int(c): float(k) / obs.size for c, k in zip(cats, counts)}
        margs.append(EmpiricalMarginal(spec.code, pmf, _cumulative(pmf), int(obs.size)))
    return margs


def dataset_to_json(dataset):
    """Plain-JSON form of a dataset (responses with -1 for missing, marginals per country)."""
    out = {"catalog": [v.to_dict() for v in dataset.catalog], "countries": {}}
    for c in dataset.country_codes:
        mat = dataset.countries[c]
        entry = {"values": mat.values.tolist()}
        if c in dataset.raw:
            entry["raw_codes"] = list(dataset.raw[c].codes)
            entry["raw_values"] = dataset.raw[c].matrix.values.tolist()
        out["countries"][c] = entry
    return out


def dataset_from_json(obj):
    catalog = [VariableSpec.from_dict(d) for d in obj["catalog"]]
    mats, raws = {}, {}
    for c, entry in obj["countries"].items():
        values = np.array(entry["values"], dtype=np.int64).reshape(-1, len(catalog))
        mats[c] = ResponseMatrix.from_array(values)
        if "raw_codes" in entry:
            codes = tuple(entry["raw_codes"])
            rv = np.array(entry["raw_values"], dtype=np.int64).reshape(-1, len(codes))
            raws[c] = RawColumns(codes, ResponseMatrix.from_array(rv))
    return SurveyDataset(catalog, mats, raws)


def marginals_to_json(dataset):
    """``{country: {variable: {category: frequency}}}`` for every country."""
    return {
        c: {m.variable: {str(k): f for k, f in m.pmf.items()}
            for m in empirical_marginals(dataset.countries[c], dataset.catalog)}
        for c in dataset.country_codes
    }


def read_marginals(obj):
    """Inverse of one country's entry in :func:`marginals_to_json`."""
    out = []
    for variable, pmf in obj.items():
        pmf = {int(k): float(f) for k, f in pmf.items()}
        out.append(EmpiricalMarginal(variable, pmf, _cumulative(pmf), 0))
    return out
