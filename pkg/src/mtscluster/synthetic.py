"""Synthetic EMA cohorts with known group structure.

Used by the test-suite, the benchmark, and ``mtscluster synth``. Each
individual gets its own level offset, response scale, and phase shift, so
that only normalization plus alignment can reveal the planted groups.
"""

from __future__ import annotations

import numpy as np

from .data import EmaDataset, EmaSeries, VariableSchema, make_dataset


def _mask_missing(values: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    if rate <= 0:
        return values
    out = values.copy()
    miss = rng.random(out.shape) < rate
    # keep the first row complete and every column partially observed
    miss[0] = False
    out[miss] = np.nan
    full = np.all(np.isnan(out), axis=1)
    out[full, 0] = values[full, 0]
    return out


def planted_cohort(
    n: int = 30,
    v: int = 5,
    t_range: tuple[int, int] = (70, 100),
    n_occasions: int | None = None,
    missing_rate: float = 0.05,
    noise: float = 0.3,
    period: float = 12.0,
    max_shift: float = 0.25,
    seed: int = 0,
) -> tuple[EmaDataset, np.ndarray]:
    """Two-regime cohort of noisy multivariate oscillations.

    Regime 0 oscillates with ``period`` occasions, regime 1 with
    ``2.5 * period``. In regime 0 all items move together; in regime 1
    alternate items move in antiphase. Every individual answers a random subset of ``T_i`` of the
    ``n_occasions`` planned prompts (``T_i`` uniform in ``t_range``), so
    series differ in length the way EMA series do: through missed prompts
    within one study window. On top of that each individual gets a random
    time shift (up to ``max_shift`` periods), a level offset and response
    scale per variable, and about ``missing_rate`` of cells blanked.

    Individuals alternate between regimes (``0, 1, 0, 1, ...`` in id order).

    Returns
    -------
    dataset : EmaDataset
        Raw data, still containing missing cells.
    labels : ndarray of int
        Planted regime per individual, aligned with ``dataset.series``.
    """
    rng = np.random.default_rng(seed)
    n_occasions = n_occasions or t_range[1]
    width = len(str(n - 1))
    names = tuple(f"item{j + 1}" for j in range(v))
    # regime 0: all items move together; regime 1: alternate items in antiphase
    var_phase = np.vstack([np.zeros(v), np.pi * (np.arange(v) % 2)])
    periods = (period, 2.5 * period)
    series, labels = [], []
    for i in range(n):
        group = i % 2
        t_len = int(rng.integers(t_range[0], t_range[1] + 1))
        occ = np.sort(rng.choice(n_occasions, size=t_len, replace=False)).astype(float)
        shift = rng.uniform(0, max_shift * periods[group])
        pattern = np.sin(2 * np.pi * (occ[:, None] + shift) / periods[group]
                         + var_phase[group][None, :])
        pattern = pattern + noise * rng.standard_normal((t_len, v))
        level = rng.uniform(2.0, 6.0, size=v)
        scale = rng.uniform(0.3, 1.5, size=v)
        values = _mask_missing(level + scale * pattern, missing_rate, rng)
        # prompts every 2 hours, answered with some jitter
        timestamps = 2.0 * occ + rng.uniform(-0.4, 0.4, size=t_len)
        series.append(EmaSeries(f"p{i:0{width}d}", timestamps, values))
        labels.append(group)
    return make_dataset(VariableSchema(names), series), np.array(labels)


def prototype_cohort(
    n: int = 30,
    v: int = 5,
    t_range: tuple[int, int] = (70, 100),
    n_occasions: int | None = None,
    gap: float = 3.0,
    noise_range: tuple[float, float] = (0.1, 1.0),
    seed: int = 0,
) -> tuple[EmaDataset, np.ndarray]:
    """Strongly two-clustered cohort built from two prototype trajectories.

    Each group shares one random ``n_occasions x v`` prototype; the second
    prototype is offset by ``gap`` on every item. An individual answers a
    random subset of ``T_i`` prompts (``T_i`` uniform in ``t_range``) and
    adds white noise whose level is drawn per individual from
    ``noise_range``, so some respondents track their group closely and some
    do not. No missing cells; use it unnormalized.
    """
    rng = np.random.default_rng(seed)
    n_occasions = n_occasions or t_range[1]
    width = len(str(n - 1))
    names = tuple(f"item{j + 1}" for j in range(v))
    protos = [rng.standard_normal((n_occasions, v)),
              rng.standard_normal((n_occasions, v)) + gap]
    series, labels = [], []
    for i in range(n):
        group = i % 2
        t_len = int(rng.integers(t_range[0], t_range[1] + 1))
        occ = np.sort(rng.choice(n_occasions, size=t_len, replace=False))
        sd = rng.uniform(*noise_range)
        values = protos[group][occ] + sd * rng.standard_normal((t_len, v))
        series.append(EmaSeries(f"p{i:0{width}d}", occ.astype(float), values))
        labels.append(group)
    return make_dataset(VariableSchema(names), series), np.array(labels)


def random_cohort(
    n: int = 33, v: int = 15, t: int = 89, seed: int = 0,
    scale: tuple[float, float] | None = (1.0, 7.0),
) -> EmaDataset:
    """Unstructured cohort of Likert-range noise, complete and fixed-length."""
    rng = np.random.default_rng(seed)
    width = len(str(n - 1))
    names = tuple(f"item{j + 1}" for j in range(v))
    lo, hi = scale if scale is not None else (0.0, 1.0)
    series = [
        EmaSeries(f"p{i:0{width}d}", np.arange(t, dtype=float),
                  rng.uniform(lo, hi, size=(t, v)))
        for i in range(n)
    ]
    return make_dataset(VariableSchema(names, *(scale or (None, None))), series)
