"""
The three simulation studies: separation accuracy, FOBI-variant comparison
and classification with ICA pre-steps.

Each replication is a pure function of the immutable config and integer
seeds derived from the master seed, so results are bit-identical across
reruns and independent of the number of workers. Sources are shared across
regimes, methods and variants within a replication (paired design).
"""

import csv
import io
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ..asymptotics import MomentProfile, all_mode_asv, expected_limit_mdi, fobi_asv
from ..errors import IdentifiabilityWarning
from ..estimators import (
    component_kurtosis,
    fobi_fit,
    recover_sources,
    select_extreme_components,
    tfobi_fit,
    tfobi_fit_variants,
)
from ..metrics import kron_mdi, mdi
from ..tensor import sample_mode_product
from .lda import lda_fit, lda_predict
from .sampling import (
    TABLE3,
    VARIANT_SETTINGS,
    derive_seed,
    gen_mixing,
    sample_sources,
)

CSV_HEADER = ("replication", "seed", "n", "regime", "method", "variant", "metric")
REGIME_KEYS = {"identity": 0, "gaussian": 1, "uniform": 2, "haar": 3}

# stream tags under the master seed
_SOURCES, _MIXING, _SPLIT = 0, 1, 2


def variant_label(variants):
    return "-".join(str(int(v)) for v in np.atleast_1d(variants))


@dataclass(frozen=True)
class StudyRow:
    replication: int
    seed: int
    n: int
    regime: str
    method: str
    variant: str
    metric: float

    def as_tuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class SummaryRow:
    n: int
    regime: str
    method: str
    variant: str
    count: int
    mean: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class ExperimentResult:
    study: str
    config: dict
    rows: tuple
    limits: dict = field(default_factory=dict)  # row-key tuple -> limiting mean

    def select(self, **where):
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in where.items())]

    def values(self, **where):
        return np.array([r.metric for r in self.select(**where)])

    def summary(self):
        """Mean and normal-approximation 95% CI per (n, regime, method, variant)."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.n, r.regime, r.method, r.variant), []).append(r.metric)
        out = []
        for key, vals in groups.items():
            v = np.asarray(vals)
            mean = float(v.mean())
            half = 1.96 * float(v.std(ddof=1)) / np.sqrt(v.size) if v.size > 1 else np.inf
            out.append(SummaryRow(*key, v.size, mean, mean - half, mean + half))
        return out

    def to_csv(self, path=None):
        """Write the rows as CSV; returns the text when ``path`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            t = r.as_tuple()
            writer.writerow(t[:-1] + (repr(float(t[-1])),))
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return None


def _run(task_fn, tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(task_fn, tasks))
    else:
        chunks = [task_fn(t) for t in tasks]
    return tuple(row for chunk in chunks for row in chunk)


def _quiet(fn, *args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IdentifiabilityWarning)
        return fn(*args, **kwargs)


# -- separation --------------------------------------------------------------


@dataclass(frozen=True)
class SeparationConfig:
    ns: tuple = (1000, 4000, 16000)
    regimes: tuple = ("gaussian", "uniform", "haar")
    reps: int = 200
    seed: int = 0
    whitening: str = "joint"
    workers: int = 1


def _separation_task(args):
    cfg, n_idx, rep = args
    n = cfg.ns[n_idx]
    src_seed = derive_seed(cfg.seed, _SOURCES, n_idx, rep)
    Z = sample_sources(TABLE3, n, src_seed)
    rows = []
    for regime in cfg.regimes:
        mixing = gen_mixing(regime, TABLE3.dims, derive_seed(cfg.seed, _MIXING, REGIME_KEYS[regime], n_idx, rep))
        X = sample_mode_product(Z, mixing.matrices)
        model = _quiet(tfobi_fit, X, 0, whitening=cfg.whitening)
        rows.append(StudyRow(rep, src_seed, n, regime, "MFOBI", "0-0",
                             kron_mdi(model.gammas, mixing.matrices, n).transformed))
        # column-major vectorization, mixed by Ω_2 ⊗ Ω_1
        V = X.transpose(0, 2, 1).reshape(n, -1)
        vmodel = _quiet(fobi_fit, V)
        rows.append(StudyRow(rep, src_seed, n, regime, "FOBI", "0",
                             mdi(vmodel.gammas[0], mixing.kron, n).transformed))
    return rows


def separation_limits(grid=TABLE3):
    profile = grid.profile()
    flat = MomentProfile(profile.beta.reshape(-1), profile.gamma3.reshape(-1), profile.omega.reshape(-1))
    return {
        ("MFOBI", "0-0"): expected_limit_mdi(all_mode_asv(profile, 0), grid.dims),
        ("FOBI", "0"): fobi_asv(flat).e_sum,
    }


def run_separation_study(config=None):
    """Transformed MDI of MFOBI and of FOBI on the vectorized 3x4 Table grid.

    The limits hold under orthogonal (or no) mixing for MFOBI and under
    every mixing for FOBI.
    """
    cfg = config or SeparationConfig()
    tasks = [(cfg, i, rep) for i in range(len(cfg.ns)) for rep in range(cfg.reps)]
    rows = _run(_separation_task, tasks, cfg.workers)
    return ExperimentResult("separation", _config_dict(cfg), rows, separation_limits())


# -- variant comparison ------------------------------------------------------


@dataclass(frozen=True)
class VariantConfig:
    ns: tuple = (4000, 16000, 64000)
    settings: tuple = (1, 2)
    variants: tuple = ((0, 0), (0, 1), (1, 0), (1, 1))
    reps: int = 200
    seed: int = 0
    whitening: str = "joint"
    workers: int = 1


def _variant_task(args):
    cfg, n_idx, rep = args
    n = cfg.ns[n_idx]
    rows = []
    for setting in cfg.settings:
        grid = VARIANT_SETTINGS[setting]
        src_seed = derive_seed(cfg.seed, _SOURCES, setting, n_idx, rep)
        Z = sample_sources(grid, n, src_seed)
        eyes = [np.eye(p) for p in grid.dims]
        models = _quiet(tfobi_fit_variants, Z, [tuple(v) for v in cfg.variants], whitening=cfg.whitening)
        for v, model in zip(cfg.variants, models):
            rows.append(StudyRow(rep, src_seed, n, f"setting{setting}", "MFOBI", variant_label(v),
                                 kron_mdi(model.gammas, eyes, n).transformed))
    return rows


def variant_limits(settings=(1, 2), variants=((0, 0), (0, 1), (1, 0), (1, 1))):
    out = {}
    for s in settings:
        grid = VARIANT_SETTINGS[s]
        profile = grid.profile()
        for v in variants:
            out[(f"setting{s}", variant_label(v))] = expected_limit_mdi(all_mode_asv(profile, tuple(v)), grid.dims)
    return out


def run_variant_study(config=None):
    """MFOBI with the four (left, right) FOBI-functional pairs on the two 3x3 settings.

    No mixing is applied; the ``regime`` column names the setting.
    """
    cfg = config or VariantConfig()
    tasks = [(cfg, i, rep) for i in range(len(cfg.ns)) for rep in range(cfg.reps)]
    rows = _run(_variant_task, tasks, cfg.workers)
    return ExperimentResult("variant", _config_dict(cfg), rows, variant_limits(cfg.settings, cfg.variants))


# -- classification ----------------------------------------------------------


@dataclass(frozen=True)
class ClassificationConfig:
    pis: tuple = (0.1, 0.2, 0.3, 0.4, 0.5)
    regimes: tuple = ("gaussian", "uniform", "haar")
    reps: int = 100
    seed: int = 0
    n: int = 500
    n_train: int = 400
    dims: tuple = (5, 5, 5)
    corner: int = 2
    shift: float = 2.0
    whitening: str = "joint"
    workers: int = 1


def sample_groups(cfg, pi, seed):
    """Two-group tensor sample; group 2 is shifted by ``shift`` in the corner block."""
    rng = np.random.default_rng(seed)
    n2 = int(round(pi * cfg.n))
    labels = np.zeros(cfg.n, dtype=int)
    labels[:n2] = 1
    rng.shuffle(labels)
    Z = rng.standard_normal((cfg.n,) + tuple(cfg.dims))
    corner = (labels == 1,) + tuple(slice(0, cfg.corner) for _ in cfg.dims)
    Z[corner] += cfg.shift
    return Z, labels


def tfobi_features(model, X, picks):
    S = recover_sources(model, X)
    return np.column_stack([S[(slice(None),) + tuple(i - 1 for i in idx)] for idx in picks])


def tfobi_picks(model, X_train):
    """Corner cells ``(1,...,1)``, ``(p_1,...,p_r)`` and the min/max-kurtosis cells."""
    kurt = component_kurtosis(recover_sources(model, X_train))
    picks = [tuple(1 for _ in model.dims), tuple(model.dims)]
    for idx in select_extreme_components(kurt, 1, 1):
        if idx not in picks:
            picks.append(idx)
    return picks


def _accuracy(F_train, y_train, F_test, y_test):
    return float(np.mean(lda_predict(lda_fit(F_train, y_train), F_test) == y_test))


def _classification_task(args):
    cfg, pi_idx, rep = args
    pi = cfg.pis[pi_idx]
    rows = []
    data_seed = derive_seed(cfg.seed, _SOURCES, pi_idx, rep)
    Z, y = sample_groups(cfg, pi, data_seed)
    split = np.random.default_rng(derive_seed(cfg.seed, _SPLIT, pi_idx, rep)).permutation(cfg.n)
    tr, te = split[: cfg.n_train], split[cfg.n_train:]
    majority = int(np.mean(y[tr]) > 0.5)
    for regime in cfg.regimes:
        mixing = gen_mixing(regime, cfg.dims, derive_seed(cfg.seed, _MIXING, REGIME_KEYS[regime], pi_idx, rep))
        X = sample_mode_product(Z, mixing.matrices)
        Xtr, Xte = X[tr], X[te]

        model = _quiet(tfobi_fit, Xtr, 0, whitening=cfg.whitening)
        picks = tfobi_picks(model, Xtr)
        acc_t = _accuracy(tfobi_features(model, Xtr, picks), y[tr], tfobi_features(model, Xte, picks), y[te])

        Vtr, Vte = Xtr.reshape(len(tr), -1), Xte.reshape(len(te), -1)
        vmodel = _quiet(fobi_fit, Vtr)
        cols = [0, 1, Vtr.shape[1] - 2, Vtr.shape[1] - 1]
        Str, Ste = recover_sources(vmodel, Vtr)[:, cols], recover_sources(vmodel, Vte)[:, cols]
        acc_f = _accuracy(Str, y[tr], Ste, y[te])

        acc_n = _accuracy(Vtr, y[tr], Vte, y[te])
        acc_b = float(np.mean(y[te] == majority))
        for method, acc in (("TFOBI", acc_t), ("FOBI", acc_f), ("NONE", acc_n), ("BASELINE", acc_b)):
            rows.append(StudyRow(rep, data_seed, cfg.n, f"{regime}:pi={pi:g}", method, "0", acc))
    return rows


def run_classification_study(config=None):
    """Test accuracy of LDA after TFOBI, after FOBI and on all variables.

    The ``regime`` column carries both the mixing regime and the group-2
    proportion, e.g. ``haar:pi=0.5``.
    """
    cfg = config or ClassificationConfig()
    tasks = [(cfg, i, rep) for i in range(len(cfg.pis)) for rep in range(cfg.reps)]
    rows = _run(_classification_task, tasks, cfg.workers)
    limits = {(f"{r}:pi={pi:g}", "BASELINE"): 1 - pi for r in cfg.regimes for pi in cfg.pis}
    return ExperimentResult("classification", _config_dict(cfg), rows, limits)


# -- config plumbing ---------------------------------------------------------

CONFIGS = {
    "separation": SeparationConfig,
    "variant": VariantConfig,
    "classify": ClassificationConfig,
}
RUNNERS = {
    "separation": run_separation_study,
    "variant": run_variant_study,
    "classify": run_classification_study,
}


def _config_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def _parse_value(text, default):
    text = text.strip()
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if default and isinstance(default[0], tuple):
            # variant pairs written as "0-0,0-1,1-1"
            return tuple(tuple(int(c) for c in it.split("-")) for it in items)
        if default and isinstance(default[0], str):
            return tuple(items)
        if default and isinstance(default[0], float):
            return tuple(float(t) for t in items)
        return tuple(int(t) for t in items)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def make_config(study, mapping=None, **overrides):
    """Build a study config from ``key=value`` strings plus keyword overrides."""
    if study not in CONFIGS:
        raise ValueError(f"unknown study {study!r}; expected one of {sorted(CONFIGS)}")
    cls = CONFIGS[study]
    base = cls()
    known = {f.name for f in fields(cls)}
    values = {}
    for key, text in (mapping or {}).items():
        if key not in known:
            raise KeyError(f"unknown {study} config key {key!r}; known: {', '.join(sorted(known))}")
        values[key] = _parse_value(text, getattr(base, key))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**values)
