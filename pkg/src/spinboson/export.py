"""CSV, JSON and gnuplot output."""

import json
import math
import os

import numpy as np

from .mapper import ERROR_LABEL, LABELS, SweepGrid, ValidityCell, ValidityMap

SCHEMA_VERSION = 1
CSV_FORMAT = "%.16e"


def write_csv(stream, header, columns):
    """Write equal-length columns with 17 significant digits."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    stream.write(",".join(header) + "\n")
    for row in data:
        stream.write(",".join(CSV_FORMAT % x for x in row) + "\n")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def map_to_dict(vmap):
    cells = []
    for c in vmap.cells:
        cells.append({
            "gamma": c.gamma, "kappa": c.kappa, "beta": c.beta, "label": c.label,
            "eps": {k: _num(c.eps_by_model.get(k)) for k in ("markov", "st", "f3b", "f3")},
            "t_f": _num(c.t_f), "flags": list(c.flags),
        })
    return {"schema_version": SCHEMA_VERSION, "config": vmap.grid.config(), "cells": cells}


def dumps(document):
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def dump_map(vmap, path):
    text = dumps(map_to_dict(vmap))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def load_document(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def map_from_dict(document):
    if document.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {document.get('schema_version')!r}")
    cfg = dict(document["config"])
    cfg["order"] = tuple(cfg["order"])
    grid = SweepGrid(**cfg)
    cells = [ValidityCell(c["gamma"], c["kappa"], c["beta"], c["label"], dict(c["eps"]),
                          math.nan if c["t_f"] is None else c["t_f"], list(c["flags"]))
             for c in document["cells"]]
    return ValidityMap(grid, cells)


def label_index(label):
    return LABELS.index(label) if label in LABELS else -1


def write_gnuplot(vmap, directory):
    """One file per beta: ``gamma kappa label-index`` blocks separated by blank lines."""
    os.makedirs(directory, exist_ok=True)
    grid = vmap.grid
    paths = []
    for m, beta in enumerate(grid.beta_axis):
        path = os.path.join(directory, f"slice_beta_{m:03d}.dat")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# beta = {beta!r}\n# gamma kappa label_index "
                     f"({', '.join(f'{i}={n}' for i, n in enumerate(LABELS))}, -1={ERROR_LABEL})\n")
            for i, gamma in enumerate(grid.gamma_axis):
                for j, kappa in enumerate(grid.kappa_axis):
                    cell = vmap.cell(i, j, m)
                    fh.write(f"{CSV_FORMAT % gamma} {CSV_FORMAT % kappa} {label_index(cell.label)}\n")
                fh.write("\n")
        paths.append(path)
    return paths
