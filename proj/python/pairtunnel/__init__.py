"""Composite-pair tunneling simulations: spectra, wave-packet propagation,
selection rules, effective potentials and classical Wigner ensembles."""

import json as _json

import numpy as _np

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401


def read_density(path):
    """Load a density-grid file written by the library or the CLI.

    Returns (values, meta): a 2D float64 array indexed [axis0, axis1] and the
    JSON header as a dict.
    """
    with open(path, "rb") as f:
        meta = _json.loads(f.readline().decode())
        n0, n1 = meta["axis0"]["n"], meta["axis1"]["n"]
        values = _np.fromfile(f, dtype="<f8", count=n0 * n1).reshape(n0, n1)
    return values, meta
