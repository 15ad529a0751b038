"""Global alignment kernel (GAK), bandwidth heuristic, and Gram matrices.

The local kernel is the half-Gaussian form
``kappa(a, b) = exp(-(t + log(2 - exp(-t))))`` with
``t = ||a - b||^2 / (2 sigma^2)``, which keeps the summed-over-paths kernel
positive definite. Everything is accumulated in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import cdist

from . import _backend
from .data import EmaDataset
from .distance import DistanceMatrix, as_matrix, check_pair, pairwise
from .errors import InputError, NumericalError

PSD_RTOL = 1e-8
NEG_RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class GakConfig:
    """GAK settings.

    ``sigma=None`` means estimate it from the data with
    :func:`estimate_sigma`, scaled by ``sigma_multiplier``.
    """

    sigma: float | None = None
    sigma_multiplier: float = 1.0
    normalize: bool = True
    band_radius: int | None = None

    def __post_init__(self):
        if self.sigma is not None and not self.sigma > 0:
            raise InputError("sigma must be positive")
        if not self.sigma_multiplier > 0:
            raise InputError("sigma_multiplier must be positive")
        if self.band_radius is not None and self.band_radius < 0:
            raise InputError("band_radius must be non-negative")


def log_gak(x, y, sigma: float, band_radius: int | None = None) -> float:
    """Natural log of :func:`gak`; finite for any input length."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    x, y, band = check_pair(x, y, band_radius)
    return float(_backend.kernels.gak_log(x, y, float(sigma), band))


def gak(x, y, sigma: float, band_radius: int | None = None) -> float:
    """Global alignment kernel value.

    Sum over all monotone alignments of the product of local kernel values.
    Long series can underflow or overflow here; prefer :func:`log_gak`.
    """
    return math.exp(log_gak(x, y, sigma, band_radius))


def local_log_kernel(x, y, sigma: float) -> np.ndarray:
    x, y = as_matrix(x), as_matrix(y)
    t = cdist(x, y, "sqeuclidean") / (2.0 * sigma * sigma)
    return -(t + np.log1p(-np.expm1(-t)))


def gak_linear(x, y, sigma: float) -> float:
    """Reference GAK recurrence carried out in linear space.

    Only meaningful while the values stay representable in float64; kept
    as an independent check of the log-space kernels.
    """
    kappa = np.exp(local_log_kernel(x, y, sigma))
    n, m = kappa.shape
    g = np.zeros((n + 1, m + 1))
    g[0, 0] = 1.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            g[i, j] = kappa[i - 1, j - 1] * (g[i - 1, j] + g[i, j - 1] + g[i - 1, j - 1])
    return float(g[n, m])


def pair_medians(ds: EmaDataset) -> np.ndarray:
    """Median cross-timestep Euclidean distance for every unordered pair."""
    arrays = [as_matrix(s) for s in ds.series]
    return np.array(
        [np.median(cdist(arrays[i], arrays[j])) for i, j in combinations(range(len(arrays)), 2)]
    )


def estimate_sigma(ds: EmaDataset, multiplier: float = 1.0) -> float:
    """Bandwidth heuristic: mean over pairs of the per-pair median distance.

    For each pair of individuals the median of all ``||x_s - y_t||`` over
    timesteps ``s, t`` is taken; these medians are averaged and scaled by
    ``multiplier``.
    """
    ds.require_complete()
    if not multiplier > 0:
        raise InputError("multiplier must be positive")
    sigma = multiplier * float(pair_medians(ds).mean())
    if not sigma > 0:
        raise NumericalError("estimated sigma is zero: every pairwise median distance is 0")
    return sigma


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Gram matrix of GAK values plus the bandwidth that produced it."""

    ids: tuple[str, ...]
    k: np.ndarray
    sigma_used: float
    normalized: bool
    meta: dict | None = None

    def __post_init__(self):
        k = np.array(self.k, dtype=float, copy=True)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        n = len(self.ids)
        if k.shape != (n, n):
            raise InputError(f"kernel matrix shape {k.shape} does not match {n} ids")
        if not np.all(np.isfinite(k)):
            raise NumericalError("kernel matrix has non-finite entries")
        if not np.array_equal(k, k.T):
            raise NumericalError("kernel matrix is not symmetric")

    @property
    def n(self) -> int:
        return len(self.ids)

    def min_eig_ratio(self) -> tuple[float, float]:
        w = np.linalg.eigvalsh(self.k)
        return float(w[0]), float(w[-1])

    def check_psd(self, rtol: float = PSD_RTOL) -> None:
        lo, hi = self.min_eig_ratio()
        if lo < -rtol * hi:
            raise NumericalError(
                f"kernel matrix not PSD: min eigenvalue {lo:.3e}, max {hi:.3e}"
            )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ids": list(self.ids),
            "k": self.k.tolist(),
            "sigma_used": self.sigma_used,
            "normalized": self.normalized,
            "meta": self.meta or {},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "KernelMatrix":
        obj = json.loads(text)
        return cls(tuple(obj["ids"]), np.array(obj["k"], dtype=float),
                   float(obj["sigma_used"]), bool(obj["normalized"]), obj.get("meta") or None)

    def to_csv(self) -> str:
        lines = [
            f"# sigma_used={self.sigma_used!r} normalized={str(self.normalized).lower()}",
            ",".join(self.ids),
        ]
        lines += [",".join(repr(float(v)) for v in row) for row in self.k]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "KernelMatrix":
        first, ids, *rows = text.strip().splitlines()
        fields = dict(kv.split("=") for kv in first.lstrip("# ").split())
        return cls(tuple(ids.split(",")),
                   np.array([r.split(",") for r in rows], dtype=float),
                   float(fields["sigma_used"]), fields["normalized"] == "true")


def log_gram(ds: EmaDataset, sigma: float, band_radius: int | None = None,
             n_jobs: int = 1) -> np.ndarray:
    """Matrix of ``log_gak`` values including the diagonal."""
    arrays = [as_matrix(s) for s in ds.series]
    return pairwise(arrays, lambda a, b: log_gak(a, b, sigma, band_radius),
                    n_jobs=n_jobs, diagonal=True)


def kernel_matrix(ds: EmaDataset, cfg: GakConfig = GakConfig(), n_jobs: int = 1,
                  check: bool = True) -> KernelMatrix:
    """GAK Gram matrix of a cohort, cosine-normalized by default.

    Normalization happens in log space,
    ``log k~_ij = log k_ij - (log k_ii + log k_jj) / 2``, so the result is
    well defined even when raw values are not representable.

    Raises
    ------
    NumericalError
        If the matrix fails the PSD check (min eigenvalue below
        ``-1e-8 * max eigenvalue``) or has unrepresentable entries.
    """
    ds.require_complete()
    sigma = cfg.sigma if cfg.sigma is not None else estimate_sigma(ds, cfg.sigma_multiplier)
    lg = log_gram(ds, sigma, cfg.band_radius, n_jobs=n_jobs)
    if cfg.normalize:
        diag = np.diag(lg).copy()
        lg = lg - 0.5 * (diag[:, None] + diag[None, :])
        np.fill_diagonal(lg, 0.0)
        lg = 0.5 * (lg + lg.T)
    with np.errstate(over="ignore", under="ignore"):
        k = np.exp(lg)
    if not np.all(np.isfinite(k)) or np.any(k <= 0):
        raise NumericalError(
            "GAK values not representable in float64; enable normalization "
            "or adjust sigma"
        )
    meta = {"sigma_multiplier": cfg.sigma_multiplier,
            "sigma_estimated": cfg.sigma is None,
            "band_radius": cfg.band_radius}
    km = KernelMatrix(tuple(ds.ids), k, float(sigma), cfg.normalize, meta)
    if check:
        km.check_psd()
    return km


def kernel_to_distance(km: KernelMatrix) -> DistanceMatrix:
    """Feature-space distance ``sqrt(2 - 2 k~_ij)`` from a normalized kernel."""
    if not km.normalized:
        raise InputError("kernel_to_distance needs a normalized kernel matrix")
    rad = 2.0 - 2.0 * km.k
    if rad.min() < -NEG_RADICAND_TOL:
        raise NumericalError(f"negative radicand {rad.min():.3e} in kernel distance")
    d = np.sqrt(np.clip(rad, 0.0, None))
    np.fill_diagonal(d, 0.0)
    d = 0.5 * (d + d.T)
    meta = {"sigma_used": km.sigma_used}
    return DistanceMatrix(km.ids, d, "kernel-induced", meta)
