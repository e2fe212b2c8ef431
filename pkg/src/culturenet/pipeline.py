"""Stage runners behind the command line: ingest, infer, netstats, distances, map.

Every artifact is a JSON or CSV file under ``<output_dir>/<stage>/``. JSON
artifacts carry a ``header`` with the stage's configuration hash; a stage skips
work whose artifact already exists with a matching hash. Hashes cover only what
determines the numbers (input bytes, catalog, MCMC settings, selected
countries, groups), never the output location or the worker count, so the
bytes written are the same across runs and parallelism settings.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import orthogonal_procrustes

from . import distances as dist
from . import netstats as ns
from .errors import CultureNetError, InputError, MissingArtifact
from .ingest import (WVS6_CATALOG, EmpiricalMarginal, ResponseMatrix, empirical_marginals,
                     load_catalog, parse_survey)
from .inference import McmcConfig, PosteriorSummary, country_seed, run_bdmcmc
from .projection import classical_mds, group_map_stats, kernel_density, pca

log = logging.getLogger("culturenet")

STAGES = ("ingest", "infer", "netstats", "distances", "map")
DISTANCE_ORDER = ("ParCorr", "ProbEdge", "MargDistr", "Mean", "CulturalMap")


class ConfigError(InputError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    input_path: Path
    output_dir: Path
    catalog_path: Path | None = None
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    cutoff: float = 0.5
    groups_path: Path | None = None
    focal_country: str | None = None
    parallelism: int = 1
    countries: tuple | None = None
    country_column: str = "country"

    def __post_init__(self):
        if not 0.0 < self.cutoff < 1.0:
            raise ConfigError("cutoff must lie in (0, 1)")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")

    def catalog(self):
        return tuple(load_catalog(self.catalog_path)) if self.catalog_path else WVS6_CATALOG

    def groups(self):
        if self.groups_path is None:
            return None
        return read_groups(self.groups_path)


def load_config(path, seed=None, countries=None):
    """Read a JSON config; relative paths are taken from the config's directory."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    base = path.resolve().parent

    def resolve(key, required=False):
        value = raw.get(key)
        if value is None:
            if required:
                raise ConfigError(f"config lacks {key!r}")
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        mcmc = McmcConfig(**raw.get("mcmc", {}))
        if seed is not None:
            mcmc = mcmc.with_seed(seed)
        chosen = countries if countries is not None else raw.get("countries")
        return PipelineConfig(
            input_path=resolve("input_path", True),
            output_dir=resolve("output_dir", True),
            catalog_path=resolve("catalog_path"),
            mcmc=mcmc,
            cutoff=float(raw.get("cutoff", 0.5)),
            groups_path=resolve("groups_path"),
            focal_country=raw.get("focal_country"),
            parallelism=int(raw.get("parallelism", 1)),
            countries=tuple(sorted(set(chosen))) if chosen else None,
            country_column=raw.get("country_column", "country"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def read_groups(path):
    """Country-to-group map from JSON (object) or two-column CSV (country, group)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            return {str(k): str(v) for k, v in json.load(fh).items()}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and rows[0][0].strip().lower() == "country":
        rows = rows[1:]
    return {r[0].strip(): r[1].strip() for r in rows}


# ---------------------------------------------------------------- artifacts

def _digest(obj):
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _finite(x):
    """JSON-safe number: non-finite values become the strings 'inf', '-inf', 'nan'."""
    x = float(x)
    if np.isfinite(x):
        return x
    return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    write_atomic(path, json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise MissingArtifact(f"{path} not found; run the upstream stage first") from None
    except json.JSONDecodeError as exc:
        raise MissingArtifact(f"{path} is unreadable: {exc}") from None


def _header(stage, digest, country=None):
    h = {"stage": stage, "config_hash": digest}
    if country is not None:
        h["country"] = country
    return h


def _fresh(path, digest):
    """True when ``path`` holds an artifact written under ``digest``."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh).get("header", {}).get("config_hash") == digest
    except (OSError, ValueError, AttributeError):
        return False


def _load_checked(path, digest):
    obj = read_json(path)
    if obj.get("header", {}).get("config_hash") != digest:
        raise MissingArtifact(f"{path} is stale; rerun the upstream stage")
    return obj


class Pipeline:
    """Stage runner bound to one configuration."""

    def __init__(self, config):
        self.config = config
        self.out = Path(config.output_dir)
        self._catalog = None
        self._input_digest = None

    # hashes
    @property
    def catalog(self):
        if self._catalog is None:
            self._catalog = self.config.catalog()
        return self._catalog

    def ingest_hash(self):
        if self._input_digest is None:
            try:
                self._input_digest = _file_digest(self.config.input_path)
            except FileNotFoundError:
                raise ConfigError(f"input file {self.config.input_path} not found") from None
        return _digest({"input": self._input_digest,
                        "catalog": [v.to_dict() for v in self.catalog],
                        "country_column": self.config.country_column})

    def infer_hash(self):
        return _digest({"ingest": self.ingest_hash(), "mcmc": self.config.mcmc.to_dict(),
                        "cutoff": self.config.cutoff})

    def distances_hash(self, countries):
        return _digest({"infer": self.infer_hash(), "countries": list(countries)})

    def map_hash(self, countries):
        return _digest({"distances": self.distances_hash(countries),
                        "groups": self.config.groups(), "focal": self.config.focal_country})

    def path(self, stage, name):
        return self.out / stage / name

    # country selection
    def countries(self):
        if self.config.countries:
            return list(self.config.countries)
        index = self.path("ingest", "index.json")
        obj = _load_checked(index, self.ingest_hash())
        return list(obj["countries"])

    # ------------------------------------------------------------ stages
    def ingest(self):
        digest = self.ingest_hash()
        wanted = self.config.countries
        index_path = self.path("ingest", "index.json")
        if wanted and all(_fresh(self.path("ingest", f"{c}.json"), digest) for c in wanted):
            log.info("ingest: all %d countries up to date", len(wanted))
            return list(wanted)
        if not wanted and _fresh(index_path, digest):
            names = read_json(index_path)["countries"]
            if all(_fresh(self.path("ingest", f"{c}.json"), digest) for c in names):
                log.info("ingest: up to date")
                return names
        ds = parse_survey(self.config.input_path, self.catalog, self.config.country_column,
                          countries=wanted)
        names = list(ds.country_codes)
        codes = list(ds.codes)
        means = {}
        for c in names:
            mat = ds.countries[c]
            margs = empirical_marginals(mat, self.catalog)
            means[c] = [float(np.mean(mat.column(j))) for j in range(ds.p)]
            write_json(self.path("ingest", f"{c}.json"), {
                "header": _header("ingest", digest, c),
                "variables": codes,
                "n": int(mat.n),
                "values": mat.values.tolist(),
                "marginals": {m.variable: {str(k): f for k, f in m.pmf.items()} for m in margs},
                "n_obs": {m.variable: m.n_obs for m in margs},
                "means": means[c],
            })
            log.info("ingest: %s n=%d", c, mat.n)
        if not wanted:
            write_json(index_path, {"header": _header("ingest", digest), "countries": names,
                                    "catalog": [v.to_dict() for v in self.catalog]})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["country", *codes])
        for c in names:
            w.writerow([c, *(repr(v) for v in means[c])])
        write_atomic(self.path("ingest", "country_means.csv"), buf.getvalue())
        return names

    def _ingested(self, country):
        return _load_checked(self.path("ingest", f"{country}.json"), self.ingest_hash())

    def infer(self):
        """Run one chain per country; returns ``{country: error}`` for failed countries."""
        digest = self.infer_hash()
        todo, failures = [], {}
        for c in self.countries():
            target = self.path("infer", f"{c}.json")
            if _fresh(target, digest):
                log.info("infer: %s up to date", c)
                continue
            try:
                obj = self._ingested(c)
            except MissingArtifact as exc:
                failures[c] = exc
                continue
            todo.append((c, obj["values"], len(obj["variables"]), obj["variables"]))
        jobs = [(c, values, p, variables, self.config.mcmc, self.config.cutoff)
                for c, values, p, variables in todo]
        if self.config.parallelism > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=min(self.config.parallelism, len(jobs))) as ex:
                results = list(ex.map(_infer_job, jobs))
        else:
            results = [_infer_job(j) for j in jobs]
        for (c, *_), (ok, payload) in zip(jobs, results):
            if not ok:
                failures[c] = payload
                log.error("infer: %s failed: %s", c, payload)
                continue
            payload["header"] = _header("infer", digest, c)
            write_json(self.path("infer", f"{c}.json"), payload)
            d = payload["diagnostics"]
            log.info("infer: %s births=%d deaths=%d latent_acc=%.3f precision_acc=%.3f",
                     c, d["births"], d["deaths"], d["latent_acceptance"] or 0.0,
                     d["precision_acceptance"])
        return failures

    def _posterior(self, country):
        obj = _load_checked(self.path("infer", f"{country}.json"), self.infer_hash())
        return PosteriorSummary.from_json(obj)

    def netstats(self):
        digest = self.infer_hash()
        stats = {}
        for c in self.countries():
            post = self._posterior(c)
            st = ns.network_stats(ns.signed_graph(post.binary, post.parcorr))
            stats[c] = st
            write_json(self.path("netstats", f"{c}.json"), {
                "header": _header("netstats", digest, c),
                "pos_neg_ratio": _finite(st.pos_neg_ratio),
                "density": st.density,
                "degree_centralization": st.degree_centralization,
                "betweenness_centralization": st.betweenness_centralization,
                "closeness_centralization": st.closeness_centralization,
                "node_betweenness": list(st.node_betweenness),
            })
        write_atomic(self.path("netstats", "netstats.csv"), ns.stats_csv(stats))
        write_atomic(self.path("netstats", "summary.csv"),
                     ns.summary_csv(ns.stats_summary(stats)))
        return stats

    def distances(self):
        countries = self.countries()
        digest = self.distances_hash(countries)
        posts = [self._posterior(c) for c in countries]
        ingested = [self._ingested(c) for c in countries]
        variables = ingested[0]["variables"]
        margs = [[EmpiricalMarginal(v, {int(k): f for k, f in obj["marginals"][v].items()}, {},
                                    obj["n_obs"][v]) for v in variables] for obj in ingested]
        means = np.array([obj["means"] for obj in ingested])
        cmap = pca(means, standardize_columns=True)
        coords = cmap.scores[:, :2]
        raw = {
            "ParCorr": dist.pairwise("ParCorr", countries, [p.parcorr for p in posts],
                                     dist.parcorr_distance),
            "ProbEdge": dist.pairwise("ProbEdge", countries, [p.edge_probs for p in posts],
                                      dist.probedge_distance),
            "MargDistr": dist.pairwise("MargDistr", countries, margs, dist.margdistr_distance),
            "Mean": dist.pairwise("Mean", countries, means, dist.mean_distance),
            "CulturalMap": dist.pairwise("CulturalMap", countries, coords,
                                         dist.culturalmap_distance),
        }
        std = {k: dist.standardize(v) for k, v in raw.items()}
        std["NetworkIndex"] = dist.network_index(std["MargDistr"], std["ParCorr"])
        for name, d in std.items():
            obj = d.to_dict()
            obj["raw_values"] = dist.raw_values(d).tolist()
            obj["header"] = _header("distances", digest)
            write_json(self.path("distances", f"{name}.json"), obj)
        ordered = [std[k] for k in DISTANCE_ORDER + ("NetworkIndex",)]
        write_atomic(self.path("distances", "distances.csv"), dist.long_form_csv(ordered))
        names, corr = dist.measure_correlations(ordered)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", *names])
        for name, row in zip(names, corr):
            w.writerow([name, *(repr(float(x)) for x in row)])
        write_atomic(self.path("distances", "correlations.csv"), buf.getvalue())
        write_json(self.path("distances", "excluded_categories.json"),
                   {"header": _header("distances", digest),
                    "pairs": dist.excluded_categories(countries, margs)})
        write_json(self.path("distances", "culturalmap_pca.json"), {
            "header": _header("distances", digest),
            "countries": countries,
            "variables": variables,
            "scores": cmap.scores.tolist(),
            "loadings": cmap.loadings.tolist(),
            "eigenvalues": cmap.eigenvalues.tolist(),
            "variance_fraction": cmap.variance_fraction.tolist(),
            "contributions": cmap.contributions.tolist(),
            "cos2": cmap.cos2.tolist(),
        })
        return std

    def _distance(self, name, countries):
        obj = _load_checked(self.path("distances", f"{name}.json"),
                            self.distances_hash(countries))
        return dist.DistanceMatrix.from_dict(obj)

    def map(self):
        countries = self.countries()
        digest = self.map_hash(countries)
        iw = classical_mds(self._distance("CulturalMap", countries), pad=True)
        net = classical_mds(self._distance("NetworkIndex", countries), pad=True)
        # rigid alignment of the network map onto the cultural map, for the shift segments
        rot, _ = orthogonal_procrustes(net.coords, iw.coords)
        net_aligned = net.coords @ rot
        groups = self.config.groups()
        gmap = groups if groups is not None else {c: "all" for c in countries}
        missing = [c for c in countries if c not in gmap]
        if missing:
            raise ConfigError(f"countries without a group: {missing}")
        pca_obj = _load_checked(self.path("distances", "culturalmap_pca.json"),
                                self.distances_hash(countries))
        scores = np.array(pca_obj["scores"])[:, :2]

        def coords_csv(xy):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["country", "dim1", "dim2", "group"])
            for c, (a, b) in zip(countries, xy):
                w.writerow([c, repr(float(a)), repr(float(b)), gmap[c]])
            return buf.getvalue()

        write_atomic(self.path("map", "cultural_map_pca.csv"), coords_csv(scores))
        write_atomic(self.path("map", "cultural_map.csv"), coords_csv(iw.coords))
        write_atomic(self.path("map", "network_map.csv"), coords_csv(net_aligned))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["country", "x0", "y0", "x1", "y1", "shift"])
        for c, a, b in zip(countries, iw.coords, net_aligned):
            w.writerow([c, *(repr(float(v)) for v in (*a, *b)),
                        repr(float(np.linalg.norm(b - a)))])
        write_atomic(self.path("map", "displacement.csv"), buf.getvalue())

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density", "series"])
        for series, name in (("CulturalMap", "CulturalMap"), ("NetworkIndex", "NetworkIndex")):
            curve = kernel_density(self._distance(name, countries).upper())
            for x, y in zip(curve.grid, curve.density):
                w.writerow([repr(float(x)), repr(float(y)), series])
        write_atomic(self.path("map", "densities.csv"), buf.getvalue())

        focal = self.config.focal_country
        if focal is not None and focal not in countries:
            raise ConfigError(f"focal country {focal!r} is not among the selected countries")
        report = {
            "header": _header("map", digest),
            "cultural_map": group_map_stats(iw, countries, gmap, focal),
            "network_map": group_map_stats(net_aligned, countries, gmap, focal),
            "mds_eigenvalues": {"cultural_map": iw.eigenvalues.tolist(),
                                "network_map": net.eigenvalues.tolist()},
            "mds_kept": {"cultural_map": iw.stress_note, "network_map": net.stress_note},
        }
        write_json(self.path("map", "groups.json"), report)
        return report


def _infer_job(job):
    country, values, p, variables, mcmc, cutoff = job
    try:
        y = ResponseMatrix.from_array(np.array(values, dtype=np.int64).reshape(-1, p))
        seed = country_seed(mcmc.seed, country)
        summary = run_bdmcmc(y, mcmc.with_seed(seed), cutoff=cutoff)
        obj = summary.to_json(country=country, config=mcmc, seed=seed, variables=variables)
        return True, obj
    except CultureNetError as exc:
        return False, exc


def copy_fixture(dest, output_dir="out", **overrides):
    """Copy the bundled synthetic 3-country survey into ``dest`` with a run config.

    Returns the path of the written config; ``overrides`` replace top-level
    config keys (for example ``parallelism``).
    """
    from importlib import resources

    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    data = resources.files("culturenet") / "data"
    for name in ("synthetic_3country.csv", "synthetic_groups.json"):
        (dest / name).write_bytes((data / name).read_bytes())
    cfg = json.loads((data / "synthetic_3country.json").read_text(encoding="utf-8"))
    cfg["output_dir"] = str(output_dir)
    cfg.update(overrides)
    path = dest / "config.json"
    path.write_text(json.dumps(cfg, indent=1) + "\n", encoding="utf-8")
    return path
