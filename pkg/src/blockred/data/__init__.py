"""Bundled example systems and reference values.

The power network fixtures describe an 8th order two-input two-output
interconnected power network.  The printed source of the verbatim variant
carries one implausible output-matrix entry (-19994 where every neighbor is
of order one); the "fixed" variant repairs it to -1.9994.  Reference files
hold the reference solvent set and dominant pole list for cross-checking.
"""

from importlib import resources

import numpy as np

from ..errors import ParseError
from ..sysdoc import build_system, parse_document

__all__ = [
    "data_path",
    "data_text",
    "load_power_network",
    "reference_solvents",
    "reference_dominant_poles",
]


def data_path(name):
    """Filesystem path of a bundled data file."""
    return resources.files(__package__) / name


def data_text(name):
    return data_path(name).read_text(encoding="utf-8")


def load_power_network(fixed=False):
    """The bundled 8th order power network model as a StateSpace.

    With fixed=True the single repaired output entry is used; the default is
    the data exactly as printed.
    """
    name = "power_network_8_fixed.sys" if fixed else "power_network_8.sys"
    return build_system(parse_document(data_text(name)))


def _parse_matrix_list(text, name):
    mats = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].split("#")[0].strip()
        i += 1
        if not line:
            continue
        tok = line.split()
        if tok[0] != "matrix" or len(tok) != 4:
            raise ParseError(f"{name}: expected 'matrix NAME ROWS COLS'", i)
        rows, cols = int(tok[2]), int(tok[3])
        data = []
        while len(data) < rows:
            row = lines[i].split("#")[0].strip()
            i += 1
            if not row:
                continue
            data.append([float(v) for v in row.split()])
            if len(data[-1]) != cols:
                raise ParseError(f"{name}: bad row width in {tok[1]}", i)
        mats[tok[1]] = np.array(data)
    return mats


def reference_solvents():
    """The reference solvent set (list of 2x2 arrays, in stated order)."""
    mats = _parse_matrix_list(
        data_text("power_network_solvents.txt"), "power_network_solvents.txt"
    )
    return [mats[k] for k in sorted(mats)]


def reference_dominant_poles():
    """The reference dominant poles (distinct values, complex array)."""
    values = []
    for line in data_text("power_network_dominant_poles.txt").splitlines():
        line = line.split("#")[0].strip()
        if not line:
            continue
        re, im = line.split()
        values.append(complex(float(re), float(im)))
    return np.array(values)
