"""Command-line protocol: matrices, k-sweep, single runs, and stability.

Usage::

    mtscluster distances --config run.json
    mtscluster sweep --config run.json --k-range 2..6
    mtscluster cluster --config run.json --methods fkm_gak --k 2
    mtscluster stability --config run.json --n-stability-runs 50
    mtscluster synth --kind planted --out cohort.csv

Settings come from built-in defaults, then the JSON config file, then
command-line flags. Every file written carries the config hash, master
seed, bandwidth, and library version; equal hashes give byte-identical
files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .clustering import (
    ClusterConfig,
    FuzzyPartition,
    HardPartition,
    best_of_restarts,
    fuzzy_cmeans_dtw,
    fuzzy_kmedoids,
    harden,
    hierarchical,
    kernel_kmeans,
    kmeans_dtw,
)
from .data import MISSING_POLICIES, EmaDataset, export_csv, load_csv, repair_missing, znormalize
from .distance import DistanceMatrix, DtwConfig, distance_matrix
from .errors import DegenerateClusteringError, InputError, MtsClusterError
from .kernel import GakConfig, KernelMatrix, kernel_matrix, kernel_to_distance
from .validity import QualityReport, StabilityReport, evaluate, instability, stability_suite

METHODS = ("km_dtw", "km_gak", "hc_dtw", "hc_gak", "fcm_dtw", "fkm_dtw", "fkm_gak")
DETERMINISTIC = ("hc_dtw", "hc_gak")
FUZZY = ("fcm_dtw", "fkm_dtw", "fkm_gak")
GAK_METHODS = ("km_gak", "hc_gak", "fkm_gak")

SWEEP_COLUMNS = ("method", "k", "silhouette", "pc", "pe", "xb", "instability",
                 "k_effective", "empty_clusters", "status")

# fields that do not change any result and so stay out of the hash
_UNHASHED = ("output_dir", "n_jobs")


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a protocol run.

    ``k`` is only used by ``cluster`` and ``stability``; when it is unset,
    ``stability`` uses the k chosen by the sweep.
    """

    input: str = ""
    missing_policy: str = "linear-interpolate"
    normalize: bool = True
    methods: tuple[str, ...] = METHODS
    k_range: tuple[int, int] = (2, 6)
    n_stability_runs: int = 50
    master_seed: int = 0
    sigma_multiplier: float = 1.0
    dtw_band: int | None = None
    output_dir: str = "mtscluster-out"
    k: int | None = None
    n_restarts: int = 10
    fuzzifier: float = 2.0
    linkage: str = "average"
    max_iter: int = 100
    n_jobs: int = 1

    def __post_init__(self):
        methods = tuple(self.methods.split(",")) if isinstance(self.methods, str) else tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "k_range", parse_k_range(self.k_range))
        if not methods:
            raise InputError("methods must not be empty")
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise InputError(f"unknown methods {bad}; choose from {METHODS}")
        if len(set(methods)) != len(methods):
            raise InputError("methods listed twice")
        if self.missing_policy not in MISSING_POLICIES:
            raise InputError(f"missing_policy must be one of {MISSING_POLICIES}")
        lo, hi = self.k_range
        if lo < 2 or hi < lo:
            raise InputError(f"k_range {lo}..{hi} must satisfy 2 <= lo <= hi")
        if self.k is not None and self.k < 2:
            raise InputError("k must be at least 2")
        if self.n_stability_runs < 2:
            raise InputError("n_stability_runs must be at least 2")
        if self.n_restarts < 1:
            raise InputError("n_restarts must be at least 1")
        if not self.sigma_multiplier > 0:
            raise InputError("sigma_multiplier must be positive")
        if self.dtw_band is not None and self.dtw_band < 0:
            raise InputError("dtw_band must be non-negative")
        if not self.fuzzifier > 1:
            raise InputError("fuzzifier must exceed 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["methods"] = list(self.methods)
        d["k_range"] = list(self.k_range)
        return d

    def cluster_config(self, k: int, seed: int = 0) -> ClusterConfig:
        return ClusterConfig(k=k, max_iter=self.max_iter, seed=seed, m=self.fuzzifier,
                             linkage=self.linkage)


def parse_k_range(value) -> tuple[int, int]:
    """Accept ``"2..6"``, ``"2-6"``, ``"3"``, ``[2, 6]`` or ``(2, 6)``."""
    if isinstance(value, str):
        text = value.replace("..", "-").strip()
        parts = [p for p in text.split("-") if p.strip()]
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise InputError(f"bad k_range {value!r}") from None
    elif isinstance(value, int):
        nums = [value]
    else:
        nums = [int(v) for v in value]
    if len(nums) == 1:
        nums = nums * 2
    if len(nums) != 2:
        raise InputError(f"bad k_range {value!r}")
    return nums[0], nums[1]


def load_config(path: str | os.PathLike | None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then ``overrides``."""
    values: dict = {}
    if path is not None:
        try:
            values.update(json.loads(Path(path).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise InputError(f"no such config file: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"config file is not valid JSON: {exc}") from None
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise InputError(f"unknown config keys: {unknown}")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)


def _file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
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


def _num(x) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else "nan"
    return str(x)


class Pipeline:
    """Loads the cohort once and memoizes matrices and clusterings."""

    def __init__(self, cfg: RunConfig):
        if not cfg.input:
            raise InputError("no input file given (config key 'input' or --input)")
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.input_digest = _file_digest(cfg.input) if Path(cfg.input).is_file() else None
        if self.input_digest is None:
            raise InputError(f"no such file: {cfg.input}")
        hashed = {k: v for k, v in cfg.to_dict().items() if k not in _UNHASHED}
        hashed["input"] = self.input_digest
        hashed["version"] = __version__
        self.config_hash = _hash(hashed)
        self._dataset: EmaDataset | None = None
        self._dm: DistanceMatrix | None = None
        self._km: KernelMatrix | None = None
        self._gd: DistanceMatrix | None = None
        self._gak_error: MtsClusterError | None = None

    # -- inputs ------------------------------------------------------------

    @property
    def dataset(self) -> EmaDataset:
        if self._dataset is None:
            ds = repair_missing(load_csv(self.cfg.input), self.cfg.missing_policy)
            if self.cfg.normalize:
                ds = znormalize(ds)
            self._dataset = ds
        return self._dataset

    def check_k(self, sweep: bool = True) -> None:
        n = self.dataset.n
        if sweep and self.cfg.k_range[1] > n:
            raise InputError(f"k_range upper bound {self.cfg.k_range[1]} exceeds N = {n}")
        if self.cfg.k is not None and self.cfg.k > n:
            raise InputError(f"k = {self.cfg.k} exceeds N = {n}")

    def _matrix_key(self, kind: str) -> str:
        c = self.cfg
        key = {"kind": kind, "input": self.input_digest, "missing_policy": c.missing_policy,
               "normalize": c.normalize, "version": __version__}
        if kind == "dtw":
            key["dtw_band"] = c.dtw_band
        else:
            key["sigma_multiplier"] = c.sigma_multiplier
        return _hash(key)

    @property
    def sigma_used(self) -> float | None:
        return None if self._km is None else self._km.sigma_used

    def stamp(self, **extra) -> dict:
        out = {"config_hash": self.config_hash, "master_seed": self.cfg.master_seed,
               "sigma_used": self.sigma_used, "version": __version__}
        out.update(extra)
        return out

    def _comment(self) -> str:
        s = self.stamp()
        return "# " + " ".join(f"{k}={_cell(v) if v is not None else 'none'}"
                               for k, v in sorted(s.items())) + "\n"

    def _cached(self, name: str, key: str) -> dict | None:
        path = self.out / name
        if not path.is_file():
            return None
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return None
        if obj.get("meta", {}).get("matrix_key") != key:
            return None
        return obj

    @property
    def dtw_matrix(self) -> DistanceMatrix:
        if self._dm is None:
            key = self._matrix_key("dtw")
            obj = self._cached("dtw_matrix.json", key)
            if obj is not None:
                self._dm = DistanceMatrix(tuple(obj["ids"]), np.array(obj["d"]), "dtw",
                                          obj["meta"])
            else:
                dm = distance_matrix(self.dataset, DtwConfig(self.cfg.dtw_band),
                                     n_jobs=self.cfg.n_jobs)
                self._dm = DistanceMatrix(dm.ids, dm.d, "dtw", {**dm.meta, "matrix_key": key})
        return self._dm

    @property
    def kernel(self) -> KernelMatrix:
        if self._gak_error is not None:
            raise self._gak_error
        if self._km is None:
            key = self._matrix_key("gak")
            obj = self._cached("gak_kernel.json", key)
            try:
                if obj is not None:
                    self._km = KernelMatrix(tuple(obj["ids"]), np.array(obj["k"]),
                                            float(obj["sigma_used"]), True, obj["meta"])
                else:
                    km = kernel_matrix(self.dataset,
                                       GakConfig(sigma_multiplier=self.cfg.sigma_multiplier),
                                       n_jobs=self.cfg.n_jobs)
                    self._km = KernelMatrix(km.ids, km.k, km.sigma_used, km.normalized,
                                            {**km.meta, "matrix_key": key})
            except MtsClusterError as exc:
                self._gak_error = exc
                raise
        return self._km

    @property
    def gak_distance(self) -> DistanceMatrix:
        if self._gd is None:
            self._gd = kernel_to_distance(self.kernel)
        return self._gd

    def needs_gak(self) -> bool:
        return any(m in GAK_METHODS for m in self.cfg.methods)

    def needs_dtw(self) -> bool:
        return any(m not in GAK_METHODS for m in self.cfg.methods)

    def eval_matrix(self, method: str) -> DistanceMatrix:
        return self.gak_distance if method in GAK_METHODS else self.dtw_matrix

    # -- clustering ----------------------------------------------------------

    def engine(self, method: str, k: int) -> Callable[[int], HardPartition | FuzzyPartition]:
        """``seed -> partition`` for one method at one k."""
        cfg = self.cfg
        if method == "km_dtw":
            ds, dm, dc = self.dataset, self.dtw_matrix, DtwConfig(cfg.dtw_band)
            return lambda s: kmeans_dtw(ds, dc, cfg.cluster_config(k, s), dm)
        if method == "km_gak":
            km = self.kernel
            return lambda s: kernel_kmeans(km, cfg.cluster_config(k, s))
        if method == "hc_dtw":
            dm = self.dtw_matrix
            return lambda s: hierarchical(dm, cfg.cluster_config(k, s))
        if method == "hc_gak":
            gd = self.gak_distance
            return lambda s: hierarchical(gd, cfg.cluster_config(k, s))
        if method == "fcm_dtw":
            ds, dm, dc = self.dataset, self.dtw_matrix, DtwConfig(cfg.dtw_band)
            return lambda s: fuzzy_cmeans_dtw(ds, dc, cfg.cluster_config(k, s), dm)
        if method == "fkm_dtw":
            dm = self.dtw_matrix
            return lambda s: fuzzy_kmedoids(dm, cfg.cluster_config(k, s))
        if method == "fkm_gak":
            gd = self.gak_distance
            return lambda s: fuzzy_kmedoids(gd, cfg.cluster_config(k, s))
        raise InputError(f"unknown method {method!r}")

    def best(self, method: str, k: int):
        """Best-of-restarts partition (one run for deterministic methods)."""
        n = 1 if method in DETERMINISTIC else self.cfg.n_restarts
        return best_of_restarts(self.engine(method, k), n, self.cfg.master_seed)

    def prepare(self) -> None:
        """Build the matrices the configured methods need, serially."""
        _ = self.dataset
        if self.needs_dtw():
            _ = self.dtw_matrix
        if self.needs_gak():
            try:
                _ = self.gak_distance
            except MtsClusterError:
                pass


# -- commands ---------------------------------------------------------------

def cmd_distances(cfg: RunConfig, pipe: Pipeline | None = None) -> dict[str, Path]:
    """Write the DTW matrix and/or the normalized GAK matrix."""
    pipe = pipe or Pipeline(cfg)
    out = pipe.out
    written: dict[str, Path] = {}
    if pipe.needs_gak():
        km = pipe.kernel
        gd = pipe.gak_distance
        obj = km.to_dict()
        obj["meta"] = {**obj["meta"], **pipe.stamp(kind="gak-kernel")}
        written["gak_kernel.json"] = out / "gak_kernel.json"
        atomic_write(out / "gak_kernel.json", json.dumps(obj, indent=1, sort_keys=True))
        atomic_write(out / "gak_kernel.csv", pipe._comment() + km.to_csv())
        atomic_write(out / "gak_distance.csv", pipe._comment() + gd.to_csv())
        written["gak_kernel.csv"] = out / "gak_kernel.csv"
        written["gak_distance.csv"] = out / "gak_distance.csv"
    if pipe.needs_dtw():
        dm = pipe.dtw_matrix
        obj = dm.to_dict()
        obj["meta"] = {**obj["meta"], **pipe.stamp(kind="dtw-matrix")}
        atomic_write(out / "dtw_matrix.json", json.dumps(obj, indent=1, sort_keys=True))
        atomic_write(out / "dtw_matrix.csv", pipe._comment() + dm.to_csv())
        written["dtw_matrix.json"] = out / "dtw_matrix.json"
        written["dtw_matrix.csv"] = out / "dtw_matrix.csv"
    return written


@dataclass
class SweepCell:
    method: str
    k: int
    silhouette: float | None = None
    pc: float | None = None
    pe: float | None = None
    xb: float | None = None
    instability: float | None = None
    k_effective: int | None = None
    empty_clusters: list[int] = field(default_factory=list)
    status: str = "ok"

    def row(self) -> list[str]:
        return [self.method, str(self.k), _cell(self.silhouette), _cell(self.pc),
                _cell(self.pe), _cell(self.xb), _cell(self.instability),
                _cell(self.k_effective), " ".join(str(c) for c in self.empty_clusters),
                self.status]

    def to_dict(self) -> dict:
        return {"method": self.method, "k": self.k, "silhouette": _num(self.silhouette),
                "pc": _num(self.pc), "pe": _num(self.pe), "xb": _num(self.xb),
                "instability": _num(self.instability), "k_effective": self.k_effective,
                "empty_clusters": self.empty_clusters, "status": self.status}


@dataclass
class SweepReport:
    cells: list[SweepCell]
    chosen_k: dict[str, int | None]
    rationale: dict[str, list[str]]
    meta: dict = field(default_factory=dict)

    def cell(self, method: str, k: int) -> SweepCell:
        for c in self.cells:
            if c.method == method and c.k == k:
                return c
        raise KeyError((method, k))

    def to_dict(self) -> dict:
        return {"cells": [c.to_dict() for c in self.cells], "chosen_k": self.chosen_k,
                "rationale": self.rationale, "meta": self.meta}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def to_csv(self, comment: str = "") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for c in self.cells:
            w.writerow(c.row())
        return comment + buf.getvalue()


def _restart_instability(runs) -> float | None:
    if len(runs) < 2:
        return None
    return instability(runs).instability


def sweep_cell(pipe: Pipeline, method: str, k: int) -> SweepCell:
    cell = SweepCell(method, k)
    try:
        best, runs = pipe.best(method, k)
        hard = harden(best) if isinstance(best, FuzzyPartition) else best
        cell.k_effective = hard.k_effective
        cell.empty_clusters = hard.empty_clusters
        cell.instability = _restart_instability(runs)
        q = evaluate(pipe.eval_matrix(method), best)
        cell.silhouette, cell.pc, cell.pe, cell.xb = q.silhouette_mean, q.pc, q.pe, q.xb
    except DegenerateClusteringError as exc:
        cell.status = f"degenerate: {exc}"
    except MtsClusterError as exc:
        cell.status = f"failed: {exc}"
    return cell


def choose_k(cells: Sequence[SweepCell]) -> tuple[int | None, list[str]]:
    """Highest silhouette, ties to the smaller k; fuzzy indices as corroboration."""
    ok = [c for c in cells if c.status == "ok" and c.silhouette is not None]
    if not ok:
        return None, ["no-valid-cell"]
    top = max(c.silhouette for c in ok)
    winners = sorted(c.k for c in ok if c.silhouette == top)
    k = winners[0]
    tags = ["max-silhouette"]
    if len(winners) > 1:
        tags.append("tie-smaller-k")
    fuzzy = [c for c in ok if c.pc is not None]
    if fuzzy:
        best_pc = max(fuzzy, key=lambda c: (c.pc, -c.k)).k
        best_pe = min(fuzzy, key=lambda c: (c.pe, c.k)).k
        xbs = [c for c in fuzzy if c.xb is not None and math.isfinite(c.xb)]
        tags.append("pc-agrees" if best_pc == k else "pc-disagrees")
        tags.append("pe-agrees" if best_pe == k else "pe-disagrees")
        if xbs:
            best_xb = min(xbs, key=lambda c: (c.xb, c.k)).k
            tags.append("xb-agrees" if best_xb == k else "xb-disagrees")
    return k, tags


def cmd_sweep(cfg: RunConfig, pipe: Pipeline | None = None) -> SweepReport:
    """Cluster every method at every k and pick k per method."""
    pipe = pipe or Pipeline(cfg)
    pipe.check_k()
    pipe.prepare()
    lo, hi = cfg.k_range
    jobs = [(m, k) for m in cfg.methods for k in range(lo, hi + 1)]
    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            cells = list(pool.map(lambda mk: sweep_cell(pipe, *mk), jobs))
    else:
        cells = [sweep_cell(pipe, m, k) for m, k in jobs]
    chosen, why = {}, {}
    for m in cfg.methods:
        chosen[m], why[m] = choose_k([c for c in cells if c.method == m])
    shown = {k: v for k, v in cfg.to_dict().items() if k not in _UNHASHED}
    report = SweepReport(cells, chosen, why, pipe.stamp(n_restarts=cfg.n_restarts,
                                                        config=shown))
    atomic_write(pipe.out / "sweep.csv", report.to_csv(pipe._comment()))
    atomic_write(pipe.out / "sweep.json", report.to_json())
    return report


def _stability_k(pipe: Pipeline, method: str, sweep: SweepReport | None) -> int | None:
    if pipe.cfg.k is not None:
        return pipe.cfg.k
    if sweep is not None:
        return sweep.chosen_k.get(method)
    return None


def _saved_sweep(pipe: Pipeline) -> SweepReport | None:
    path = pipe.out / "sweep.json"
    if not path.is_file():
        return None
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None
    if obj.get("meta", {}).get("config_hash") != pipe.config_hash:
        return None
    return SweepReport([], obj["chosen_k"], obj["rationale"], obj["meta"])


def cmd_stability(cfg: RunConfig, pipe: Pipeline | None = None) -> dict[str, StabilityReport]:
    """Repeated single runs per seed-sensitive method; HC is skipped."""
    pipe = pipe or Pipeline(cfg)
    pipe.check_k(sweep=False)
    pipe.prepare()
    methods = [m for m in cfg.methods if m not in DETERMINISTIC]
    if not methods:
        raise InputError("stability needs at least one seed-sensitive method (HC is excluded)")
    sweep = None
    if cfg.k is None:
        sweep = _saved_sweep(pipe) or cmd_sweep(cfg, pipe)
    reports: dict[str, StabilityReport] = {}
    bars = io.StringIO()
    bw = csv.writer(bars, lineterminator="\n")
    bw.writerow(["method", "k", "instability", "n_runs", "silhouette_median",
                 "silhouette_iqr", "outlier_runs"])
    sils = io.StringIO()
    sw = csv.writer(sils, lineterminator="\n")
    sw.writerow(["method", "k", "run_index", "seed", "silhouette", "k_effective"])
    for m in methods:
        k = _stability_k(pipe, m, sweep)
        if k is None:
            bw.writerow([m, "", "", 0, "", "", ""])
            continue
        try:
            rep = stability_suite(pipe.engine(m, k), pipe.eval_matrix(m),
                                  cfg.n_stability_runs, cfg.master_seed, n_jobs=cfg.n_jobs)
        except MtsClusterError as exc:
            bw.writerow([m, k, "", 0, "", "", f"failed: {exc}"])
            continue
        rep.meta.update(pipe.stamp(method=m, k=k))
        reports[m] = rep
        finite = rep.silhouette_distribution[np.isfinite(rep.silhouette_distribution)]
        med = float(np.median(finite)) if finite.size else float("nan")
        bw.writerow([m, k, _cell(rep.instability), rep.n_runs, _cell(med),
                     _cell(rep.silhouette_iqr), " ".join(map(str, rep.outlier_runs))])
        for i, (seed, s, ke) in enumerate(zip(rep.seeds, rep.silhouette_distribution,
                                               rep.meta["k_effective"])):
            sw.writerow([m, k, i, seed, _cell(float(s)), ke])
        atomic_write(pipe.out / f"stability_{m}.json", rep.to_json())
    atomic_write(pipe.out / "stability_instability.csv", pipe._comment() + bars.getvalue())
    atomic_write(pipe.out / "stability_silhouettes.csv", pipe._comment() + sils.getvalue())
    return reports


def cmd_cluster(cfg: RunConfig, method: str | None = None, k: int | None = None,
                pipe: Pipeline | None = None) -> tuple[HardPartition | FuzzyPartition, QualityReport]:
    """One best-of-restarts clustering, written with its quality report."""
    pipe = pipe or Pipeline(cfg)
    method = method or (cfg.methods[0] if len(cfg.methods) == 1 else None)
    if method is None:
        raise InputError("cluster needs exactly one method (use --methods)")
    k = k if k is not None else cfg.k
    if k is None:
        raise InputError("cluster needs k (use --k)")
    _ = pipe.dataset
    if k > pipe.dataset.n:
        raise InputError(f"k = {k} exceeds N = {pipe.dataset.n}")
    best, _runs = pipe.best(method, k)
    quality = evaluate(pipe.eval_matrix(method), best)
    obj = best.to_dict()
    obj["ids"] = list(pipe.dataset.ids)
    obj["method"] = method
    obj["quality"] = quality.to_dict()
    obj["meta"] = pipe.stamp(method=method, n_restarts=1 if method in DETERMINISTIC
                             else cfg.n_restarts)
    obj.pop("barycenters", None)
    atomic_write(pipe.out / f"cluster_{method}_k{k}.json",
                 json.dumps(obj, indent=1, sort_keys=True))
    return best, quality


def cmd_synth(kind: str, out: str, seed: int = 0, n: int | None = None) -> Path:
    """Write a synthetic cohort in the long CSV format."""
    from . import synthetic

    if kind == "planted":
        ds, _ = synthetic.planted_cohort(n=n or 30, seed=seed)
    elif kind == "prototype":
        ds, _ = synthetic.prototype_cohort(n=n or 30, seed=seed)
    elif kind == "random":
        ds = synthetic.random_cohort(n=n or 33, seed=seed)
    else:
        raise InputError(f"unknown cohort kind {kind!r}")
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    export_csv(ds, path)
    return path


# -- argument parsing ---------------------------------------------------------

def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    d = RunConfig()
    p.add_argument("--config", help="JSON file with RunConfig keys")
    p.add_argument("--input", help="long-format EMA CSV (individual_id,timestamp,vars...)")
    p.add_argument("--missing-policy", dest="missing_policy", choices=MISSING_POLICIES,
                   help=f"missing-cell repair (default {d.missing_policy})")
    p.add_argument("--normalize", type=_bool, metavar="BOOL",
                   help=f"per-individual z-scoring (default {str(d.normalize).lower()})")
    p.add_argument("--methods", help=f"comma list from {','.join(METHODS)} (default all)")
    p.add_argument("--k-range", dest="k_range", help="inclusive range such as 2..6 (default 2..6)")
    p.add_argument("--n-stability-runs", dest="n_stability_runs", type=int,
                   help=f"runs per method for stability (default {d.n_stability_runs})")
    p.add_argument("--master-seed", dest="master_seed", type=int,
                   help=f"seed all run seeds derive from (default {d.master_seed})")
    p.add_argument("--sigma-multiplier", dest="sigma_multiplier", type=float,
                   help=f"factor on the estimated GAK bandwidth (default {d.sigma_multiplier})")
    p.add_argument("--dtw-band", dest="dtw_band", type=int,
                   help="Sakoe-Chiba radius in samples (default: unconstrained)")
    p.add_argument("--output-dir", dest="output_dir",
                   help=f"where files are written (default {d.output_dir})")
    p.add_argument("--k", type=int, help="cluster count for cluster/stability "
                                         "(stability default: k chosen by the sweep)")
    p.add_argument("--n-restarts", dest="n_restarts", type=int,
                   help=f"restarts kept best-of in sweeps (default {d.n_restarts})")
    p.add_argument("--fuzzifier", type=float, help=f"fuzzy exponent m (default {d.fuzzifier})")
    p.add_argument("--linkage", choices=("average", "complete", "single"),
                   help=f"HC linkage (default {d.linkage})")
    p.add_argument("--max-iter", dest="max_iter", type=int,
                   help=f"iteration cap per run (default {d.max_iter})")
    p.add_argument("--n-jobs", dest="n_jobs", type=int,
                   help=f"worker threads (default {d.n_jobs})")


RUN_FIELDS = ("input", "missing_policy", "normalize", "methods", "k_range", "n_stability_runs",
              "master_seed", "sigma_multiplier", "dtw_band", "output_dir", "k", "n_restarts",
              "fuzzifier", "linkage", "max_iter", "n_jobs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtscluster",
        description="Cluster multivariate EMA time series with DTW and GAK.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("distances", "build and cache the DTW and GAK matrices"),
                       ("sweep", "cluster every method over k_range and choose k"),
                       ("cluster", "one best-of-restarts clustering for one method and k"),
                       ("stability", "repeated seeded runs per method (HC excluded)")):
        _add_run_flags(sub.add_parser(name, help=text, description=text))
    sp = sub.add_parser("synth", help="write a synthetic cohort CSV")
    sp.add_argument("--kind", choices=("planted", "prototype", "random"), default="planted",
                    help="planted: two regimes, normalized analysis; prototype: strongly "
                         "two-clustered; random: unstructured (default planted)")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    sp.add_argument("--n", type=int, help="number of individuals")
    return parser


def _summary_sweep(rep: SweepReport) -> str:
    lines = []
    for m, k in rep.chosen_k.items():
        lines.append(f"{m}: chosen k = {k} ({', '.join(rep.rationale[m])})")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            path = cmd_synth(args.kind, args.out, args.seed, args.n)
            print(f"wrote {path}")
            return 0
        overrides = {f: getattr(args, f) for f in RUN_FIELDS}
        cfg = load_config(args.config, overrides)
        if args.command == "distances":
            for name in cmd_distances(cfg):
                print(f"wrote {Path(cfg.output_dir) / name}")
        elif args.command == "sweep":
            print(_summary_sweep(cmd_sweep(cfg)))
        elif args.command == "cluster":
            best, q = cmd_cluster(cfg)
            print(f"silhouette {q.silhouette_mean:.4f}, k_effective {q.k_effective}")
        elif args.command == "stability":
            for m, rep in cmd_stability(cfg).items():
                print(f"{m}: instability {rep.instability:.4f} over {rep.n_runs} runs, "
                      f"silhouette IQR {rep.silhouette_iqr:.4f}")
    except MtsClusterError as exc:
        print(f"mtscluster: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
