"""File formats: header tensor files, label files, model JSON, CSV tables,
and validated JSON run configuration.

All reals in text outputs are written with 17 significant digits, which
round-trips IEEE doubles exactly, so golden files are stable.
"""

import json
import math

import numpy as np

from . import __version__
from .data import Dataset, Standardizer
from .errors import DataError
from .model import Classifier
from .objective import PenaltySpec
from .simulate import MethodSpec, SimDesign, builtin_method
from .solver import FitConfig
from .tuning import CVConfig
from .bootstrap import BootstrapConfig

MODEL_FORMAT = "mwsdwd-model"


def format_real(v):
    return "%.17g" % float(v)


# ---------------------------------------------------------------- tensor files

def save_tensor_file(path, x):
    """Header `dims N P1 ... PK`, then one row-major line of values per subject."""
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w") as f:
        f.write("dims " + " ".join(str(d) for d in x.shape) + "\n")
        flat = x.reshape(x.shape[0], -1)
        for row in flat:
            f.write(" ".join(format_real(v) for v in row) + "\n")


def load_tensor_file(path):
    with open(path) as f:
        lines = f.read().splitlines()
    header = None
    values = []
    for ln, line in enumerate(lines, start=1):
        toks = line.split()
        if not toks:
            continue
        if header is None:
            if toks[0] != "dims":
                raise DataError(f"{path}:{ln}: expected header starting with 'dims'")
            try:
                shape = [int(t) for t in toks[1:]]
            except ValueError:
                raise DataError(f"{path}:{ln}: non-integer extent in header") from None
            if len(shape) < 2 or any(d < 1 for d in shape):
                raise DataError(f"{path}:{ln}: header needs N and at least one positive extent")
            header = tuple(shape)
            continue
        for t in toks:
            try:
                v = float(t)
            except ValueError:
                raise DataError(f"{path}:{ln}: unparseable value {t!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{ln}: non-finite value {t!r}")
            values.append(v)
    if header is None:
        raise DataError(f"{path}: missing 'dims' header")
    expected = int(np.prod(header))
    if len(values) != expected:
        raise DataError(f"{path}: expected {expected} values, got {len(values)}")
    return np.array(values).reshape(header)


def save_labels(path, y):
    with open(path, "w") as f:
        for v in np.asarray(y):
            f.write("%d\n" % int(v))


def load_labels(path):
    out = []
    with open(path) as f:
        for ln, line in enumerate(f.read().splitlines(), start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                v = float(tok)
            except ValueError:
                raise DataError(f"{path}:{ln}: unparseable label {tok!r}") from None
            if v not in (-1.0, 1.0):
                raise DataError(f"{path}:{ln}: label must be -1 or +1, got {tok!r}")
            out.append(v)
    return np.array(out)


def load_dataset(tensor_path, labels_path):
    x = load_tensor_file(tensor_path)
    y = load_labels(labels_path)
    if y.shape[0] != x.shape[0]:
        raise DataError(
            f"{labels_path}: {y.shape[0]} labels but tensor header says {x.shape[0]} subjects"
        )
    return Dataset(x, y)


# ----------------------------------------------------------------- model JSON

def save_model(path, clf, extra=None):
    """Factors are stored per mode as lists of component columns."""
    doc = {
        "format": MODEL_FORMAT,
        "version": __version__,
        "dims": [int(p) for p in clf.dims],
        "rank": int(clf.factors[0].shape[1]),
        "penalty": {
            "variant": clf.penalty.variant,
            "lambda1": clf.penalty.lambda1,
            "lambda2": clf.penalty.lambda2,
        },
        "b0": float(clf.b0),
        "factors": [[list(map(float, col)) for col in u.T] for u in clf.factors],
        "n_train": int(clf.n_train),
        "seed": int(clf.seed),
        "standardizer": None
        if clf.standardizer is None
        else {
            "mean": clf.standardizer.mean.tolist(),
            "scale": clf.standardizer.scale.tolist(),
        },
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def load_model(path):
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} file")
    for key in ("dims", "penalty", "b0", "factors"):
        if key not in doc:
            raise DataError(f"{path}: missing model field {key!r}")
    dims = tuple(int(p) for p in doc["dims"])
    factors = [np.array(u, dtype=np.float64).T for u in doc["factors"]]
    if tuple(u.shape[0] for u in factors) != dims:
        raise DataError(f"{path}: factor shapes disagree with dims")
    pen = doc["penalty"]
    std = doc.get("standardizer")
    return Classifier(
        factors=factors,
        b0=float(doc["b0"]),
        penalty=PenaltySpec(pen["variant"], float(pen["lambda1"]), float(pen["lambda2"])),
        dims=dims,
        n_train=int(doc.get("n_train", 0)),
        seed=int(doc.get("seed", 0)),
        standardizer=None
        if std is None
        else Standardizer(
            mean=np.array(std["mean"], dtype=np.float64),
            scale=np.array(std["scale"], dtype=np.float64),
        ),
    )


# ----------------------------------------------------------------- CSV tables

def write_scores_csv(path, scores, labels):
    with open(path, "w") as f:
        f.write("index,score,label\n")
        for i, (s, lab) in enumerate(zip(scores, labels), start=1):
            f.write("%d,%s,%d\n" % (i, format_real(s), int(lab)))


def write_cv_csv(path, cvres):
    with open(path, "w") as f:
        f.write("lambda1,lambda2,t_stat,misclassification\n")
        for i1, l1 in enumerate(cvres.lambda1_grid):
            for i2, l2 in enumerate(cvres.lambda2_grid):
                f.write("%s,%s,%s,%s\n" % (
                    format_real(l1), format_real(l2),
                    format_real(cvres.t_table[i1, i2]),
                    format_real(cvres.mis_table[i1, i2]),
                ))


def write_bootstrap_csv(path, bres):
    """One row per (mode, index, component), all 1-based."""
    with open(path, "w") as f:
        f.write("mode,index,component,estimate,lower,upper\n")
        for k, (est, lo, hi) in enumerate(zip(bres.factors, bres.lower, bres.upper), start=1):
            p_k, rank = est.shape
            for j in range(p_k):
                for r in range(rank):
                    f.write("%d,%d,%d,%s,%s,%s\n" % (
                        k, j + 1, r + 1,
                        format_real(est[j, r]), format_real(lo[j, r]), format_real(hi[j, r]),
                    ))


def write_study_csv(path, rows):
    cols = ("method,cor,mis,tp,tn,margin_cor,margin_mis,margin_tp,margin_tn,"
            "prop_cor_gt_0.5,rank_retention")

    def cell(v):
        return "-" if v is None else format_real(v)

    with open(path, "w") as f:
        f.write(cols + "\n")
        for r in rows:
            f.write(",".join([
                r.method, cell(r.cor), cell(r.mis), cell(r.tp), cell(r.tn),
                cell(r.margin_cor), cell(r.margin_mis), cell(r.margin_tp),
                cell(r.margin_tn), cell(r.prop_cor_gt_half), cell(r.rank_retention),
            ]) + "\n")


# --------------------------------------------------------------- configuration

_PENALTY_KEYS = {"variant": str, "lambda1": float, "lambda2": float}
_FIT_KEYS = {
    "rank": int, "penalty": dict, "epsilon": float, "max_outer": int,
    "max_inner": int, "n_starts": int, "prune_after": int, "seed": int,
    "standardize": bool,
}
_CV_KEYS = {
    "n_folds": int, "lambda1_grid": list, "lambda2_grid": list,
    "stratified": bool, "seed": int, "select_by_misclassification": bool,
    "fit": dict,
}
_BOOT_KEYS = {"n_boot": int, "quantiles": list, "seed": int, "fit": dict}
_DESIGN_KEYS = {
    "dims": list, "n": int, "true_rank": int, "nonzero": list,
    "alpha": float, "rho": float, "seed": int,
}
_SIM_KEYS = {"design": dict, "methods": list, "n_reps": int}
_METHOD_KEYS = {
    "name": str, "rank": int, "variant": str, "vectorize": bool, "tune": bool,
    "lambda1": float, "lambda2": float, "lambda1_grid": list,
    "lambda2_grid": list, "n_folds": int, "n_starts": int,
}


def load_config(path):
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise DataError(f"{path}: config must be a JSON object")
    return doc


def _check_keys(doc, table, where):
    if not isinstance(doc, dict):
        raise DataError(f"config section {where!r} must be an object")
    for k, v in doc.items():
        name = f"{where}.{k}" if where else k
        if k not in table:
            raise DataError(f"unknown config key {name!r}")
        want = table[k]
        if want is float:
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        elif want is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        elif want is bool:
            ok = isinstance(v, bool)
        elif want is list:
            ok = isinstance(v, list) or v is None
        else:
            ok = isinstance(v, want)
        if not ok:
            raise DataError(f"config key {name!r} has wrong type, expected {want.__name__}")


def _build(cls, kwargs, where):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise DataError(f"invalid {where} config: {e}") from None


def penalty_from_config(doc, where="penalty"):
    _check_keys(doc, _PENALTY_KEYS, where)
    return _build(PenaltySpec, doc, where)


def fit_config_from(doc, where="fit"):
    _check_keys(doc, _FIT_KEYS, where)
    kwargs = dict(doc)
    if "penalty" in kwargs:
        kwargs["penalty"] = penalty_from_config(kwargs["penalty"], where + ".penalty")
    return _build(FitConfig, kwargs, where)


def cv_config_from(doc, where=""):
    _check_keys(doc, _CV_KEYS, where)
    kwargs = dict(doc)
    if "fit" in kwargs:
        kwargs["fit"] = fit_config_from(kwargs["fit"], (where + "." if where else "") + "fit")
    for key in ("lambda1_grid", "lambda2_grid"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return _build(CVConfig, kwargs, where or "cv")


def bootstrap_config_from(doc, where=""):
    _check_keys(doc, _BOOT_KEYS, where)
    kwargs = dict(doc)
    if "fit" in kwargs:
        kwargs["fit"] = fit_config_from(kwargs["fit"], (where + "." if where else "") + "fit")
    if "quantiles" in kwargs:
        kwargs["quantiles"] = tuple(kwargs["quantiles"])
    return _build(BootstrapConfig, kwargs, where or "bootstrap")


def sim_design_from(doc, where="design"):
    _check_keys(doc, _DESIGN_KEYS, where)
    kwargs = dict(doc)
    if "dims" in kwargs:
        kwargs["dims"] = tuple(kwargs["dims"])
    if kwargs.get("nonzero") is not None:
        kwargs["nonzero"] = tuple(kwargs["nonzero"])
    return _build(SimDesign, kwargs, where)


def method_from_config(doc, where="methods"):
    if isinstance(doc, str):
        return builtin_method(doc)
    _check_keys(doc, _METHOD_KEYS, where)
    if "name" not in doc:
        raise DataError(f"config {where!r}: method objects need a name")
    kwargs = dict(doc)
    for key in ("lambda1_grid", "lambda2_grid"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    return _build(MethodSpec, kwargs, where)


def simulate_config_from(doc):
    _check_keys(doc, _SIM_KEYS, "")
    if "design" not in doc or "methods" not in doc:
        raise DataError("simulate config needs 'design' and 'methods'")
    design = sim_design_from(doc["design"])
    methods = [method_from_config(m, f"methods[{i}]") for i, m in enumerate(doc["methods"])]
    n_reps = doc.get("n_reps", 1)
    if not isinstance(n_reps, int) or isinstance(n_reps, bool) or n_reps < 1:
        raise DataError("config key 'n_reps' must be a positive integer")
    return design, methods, n_reps
