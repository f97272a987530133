"""Binary containers with JSON sidecars, plus report and CSV writers.

Arrays go into ``<base>.npy`` in column-major layout; everything the
array does not carry (index geometry, constructor parameters, space
specs) lives in ``<base>.json``.  All writers are deterministic so that
identical runs produce byte-identical artifacts.
"""

import json
from pathlib import Path

import numpy as np

from .frames import Frame
from .indexing import IndexSet


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def save_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    raise TypeError(f"cannot serialize {type(x)}")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def save_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def save_array(base, arr, sidecar):
    """Array container: <base>.npy (column-major) + <base>.json."""
    base = Path(base)
    base.parent.mkdir(parents=True, exist_ok=True)
    np.save(base.with_suffix(".npy"), np.asfortranarray(arr))
    save_json(sidecar, base.with_suffix(".json"))
    return base


def load_array(base):
    base = Path(base)
    return np.load(base.with_suffix(".npy")), load_json(base.with_suffix(".json"))


def save_frame(base, frame: Frame):
    sidecar = {
        "container": "frame",
        "name": frame.name,
        "meta": frame.meta,
        "index_set": frame.index_set.to_dict(),
    }
    return save_array(base, frame.vectors, sidecar)


def load_frame(base):
    vectors, sidecar = load_array(base)
    if sidecar.get("container") != "frame":
        raise ValueError(f"{base} is not a frame container")
    return Frame(
        vectors,
        IndexSet.from_dict(sidecar["index_set"]),
        name=sidecar["name"],
        meta=sidecar.get("meta", {}),
    )


def save_matrix(base, m, rows: IndexSet, cols: IndexSet = None, extra=None):
    """Plain matrix container carrying the index geometry of both axes."""
    sidecar = {
        "container": "matrix",
        "rows": rows.to_dict(),
        "cols": (cols or rows).to_dict(),
    }
    if extra:
        sidecar.update(extra)
    return save_array(base, m, sidecar)


def load_matrix(base):
    m, sidecar = load_array(base)
    return (m, IndexSet.from_dict(sidecar["rows"]),
            IndexSet.from_dict(sidecar["cols"]))


def save_sequence(base, c, index_set: IndexSet, weight=None):
    """Sequence container: values plus index set and optional weight family."""
    sidecar = {"container": "sequence", "index_set": index_set.to_dict()}
    if weight is not None:
        sidecar["weight"] = weight.to_dict()
    return save_array(base, np.asarray(c), sidecar)


def load_sequence(base):
    c, sidecar = load_array(base)
    return c, IndexSet.from_dict(sidecar["index_set"])


def save_galerkin_matrix(base, gm, extra=None):
    sidecar = {
        "container": "galerkin_matrix",
        "left_frame": gm.left_frame.name,
        "right_frame": gm.right_frame.name,
        "shape": list(gm.shape),
    }
    if gm.domain_space is not None:
        sidecar["domain_space"] = gm.domain_space.to_dict()
    if gm.codomain_space is not None:
        sidecar["codomain_space"] = gm.codomain_space.to_dict()
    if extra:
        sidecar.update(extra)
    return save_array(base, gm.entries, sidecar)


def shells_to_csv(path, fit):
    return save_csv(path, ["distance", "max_abs"],
                    [(d, m) for d, m in fit.shell_maxima])


def report_levels_csv(path, report):
    rows = [
        (lv.size, lv.residual,
         lv.error if lv.error is not None else float("nan"),
         lv.inverse_norm if lv.inverse_norm is not None else float("nan"),
         lv.iterations)
        for lv in report.levels
    ]
    return save_csv(path, ["N", "residual", "error", "inverse_norm", "iterations"],
                    rows)
