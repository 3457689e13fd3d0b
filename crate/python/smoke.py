#!/usr/bin/env python3
"""Smoke test for the staircase_py extension module.

Builds the extension, copies it into a scratch directory under its
importable name, and drives the Python surface end to end: system
construction, evaluation, gaps, coding, sampling, and the rank check.

Run from anywhere:  python3 python/smoke.py
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def build_extension() -> Path:
    subprocess.run(
        [
            "cargo",
            "build",
            "--release",
            "-p",
            "staircase-py",
            "--features",
            "extension-module",
        ],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libstaircase_py.so"
    if not lib.exists():
        sys.exit(f"build did not produce {lib}")
    return lib


def import_module(lib: Path):
    scratch = tempfile.mkdtemp(prefix="staircase-py-")
    shutil.copy2(lib, Path(scratch) / "staircase_py.so")
    sys.path.insert(0, scratch)
    import staircase_py

    return staircase_py


def main() -> None:
    sc = import_module(build_extension())

    cantor = sc.System([("1/3", 0), ("1/3", "2/3")])
    assert len(cantor) == 2
    assert cantor.exact
    assert cantor.hull == (0.0, 1.0)
    assert abs(cantor.contraction_deficit - 1 / 3) < 1e-15
    assert not cantor.ambiguity_active

    sol = sc.Solution(cantor, ["1/2", "1/2"])
    assert sol.eval(0.5) == 0.5
    assert sol.eval("1/3") == 0.5
    assert abs(sol.eval(0.25) - 1 / 3) < 1e-9
    value, error = sol.eval_with_error(0.1)
    assert 0.0 < error <= 1e-10 and 0.0 <= value <= 1.0
    values = sol.eval_many([i / 64 for i in range(65)])
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
    assert sol.plateau([0]) == 0.5
    assert sol.weights == [0.5, 0.5]
    assert sol.boundary_pass()

    spans = cantor.level_set(2)
    assert len(spans) == 4
    assert abs(sum(b - a for a, b in spans) - 4 / 9) < 1e-15

    gaps = cantor.gaps(2)
    assert len(gaps) == 3
    assert gaps[0][0] == [0]
    assert abs(gaps[0][1] - 1 / 3) < 1e-15 and abs(gaps[0][2] - 2 / 3) < 1e-15

    address = cantor.extract_address(0.1, 8)
    assert address.endswith("^?")
    assert abs(cantor.point(address) - 0.1) < 3.0**-8

    digit, preimage = cantor.transfer(0.9)
    assert digit == 1 and abs(preimage - 0.7) < 1e-12

    rows = sol.sample(5, seed=7)
    assert rows == sol.sample(5, seed=7)
    assert all(0.0 <= point <= 1.0 for _, point in rows)
    assert all(len(digits) == 12 and set(digits) <= {0, 1} for digits, _ in rows)

    touching = sc.System([("1/4", 0), ("1/4", "1/4"), ("1/4", "3/4")])
    assert touching.ambiguity_active
    assert touching.touching == [0]
    assert touching.canonicalize("0^N") == "1^0"
    assert touching.point("1^0") == 0.25
    tsol = sc.Solution(touching, ["1/4", "1/4", "1/2"])
    assert tsol.series_value("0^N") == tsol.series_value("1^0") == 0.25
    assert tsol.mass([2, 2]) == 0.25

    shifted = sc.System([("1/3", "1/6"), ("1/3", "7/12")])
    rank, singular_values, threshold = sc.independence_rank(
        shifted, [["1/2", "1/2"], ["1/3", "2/3"], ["1/4", "3/4"]]
    )
    assert rank == 3 and len(singular_values) == 3 and threshold > 0.0

    curved = sc.System([("logistic", 0, 0.55), ("2/5", "3/5")])
    assert not curved.exact
    csol = sc.Solution(curved, [0.5, 0.5])
    assert abs(csol.eval(0.575) - 0.5) < 1e-9

    try:
        sc.System([("1/2", 0), ("1/2", "1/2")])
    except ValueError:
        pass
    else:
        raise AssertionError("a tiling system must be rejected")

    print("smoke ok: all checks passed")


if __name__ == "__main__":
    main()
