import math
import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("pinchflow", max_examples=60, deadline=None)
settings.load_profile("pinchflow")


def band_mask(surface, lo=0.35):
    """Latitude rows with ``lo < u < pi - lo`` (all rows on a torus)."""
    from pinchflow.grid import Topology

    if surface.topology is Topology.TORUS:
        return np.ones(surface.n_u, dtype=bool)
    u = surface.u
    return (u > lo) & (u < math.pi - lo)


def band_rms(surface, shape, field, lo=0.35):
    """Area-weighted RMS of ``field`` over the latitude band."""
    band = band_mask(surface, lo)
    w = np.sqrt(shape.det_g[band])
    return math.sqrt(float(np.sum(w * field[band] ** 2) / np.sum(w)))


def observed_orders(errors):
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
