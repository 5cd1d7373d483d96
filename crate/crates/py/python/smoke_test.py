"""Smoke test for the pyalphamu extension.

Build and run from the workspace root:

    cargo build --release -p alphamu-py --features extension-module
    python3 crates/py/python/smoke_test.py target/release/libpyalphamu.so
"""

import importlib.util
import math
import shutil
import sys
import tempfile
from pathlib import Path


def load(library):
    # Python only imports an extension whose file name matches the module.
    staged = Path(tempfile.mkdtemp()) / "pyalphamu.so"
    shutil.copy(library, staged)
    spec = importlib.util.spec_from_file_location("pyalphamu", staged)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    library = sys.argv[1] if len(sys.argv) > 1 else "target/release/libpyalphamu.so"
    am = load(library)

    f = am.sum_pdf(0.8, 0.2, 5.0, 3, 2.0, tol=1e-10)
    assert abs(f.value - 0.0621864) < 1e-6, f
    assert f.certified_bound is not None and f.certified_bound <= 1e-10, f
    assert f.bound_kind == "dagger", f

    rayleigh = am.sum_pdf(2.0, 1.0, 1.0, 1, 1.0)
    assert abs(rayleigh.value - 2.0 * math.exp(-1.0)) < 1e-10, rayleigh

    c = am.sum_cdf(1.2, 0.5, 1.0, 3, 2.0, tol=1e-10)
    values, band = am.mc_cdf(1.2, 0.5, 1.0, 3, [2.0], samples=200_000, seed=3)
    assert abs(c.value - values[0]) <= band, (c, values, band)

    assert am.bound(0.8, 0.2, 5.0, 3, 2.0, f.terms_used) == f.certified_bound

    diversity, coding = am.aser_gains(2.0, 1.0, 1.0, 2, "egc")
    assert abs(diversity - 2.0) < 1e-12 and coding > 0.0
    p = am.aser(1.2, 1.0, 2.0, 3, "mrc", 10.0)
    assert 0.0 < p < 0.5, p
    op = am.outage(1.2, 1.0, 3.0, 3, "egc", 20.0, 10.0)
    assert 0.0 < op < 1.0, op

    try:
        am.sum_pdf(-1.0, 1.0, 1.0, 2, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative alpha accepted")

    print("pyalphamu smoke test passed")


if __name__ == "__main__":
    main()
