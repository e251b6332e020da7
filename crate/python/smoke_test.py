"""Smoke test for the Python extension.

Builds the extension with cargo, loads it from a temporary directory and
exercises the main entry points. Run from anywhere:

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_extension(dest):
    subprocess.run(
        ["cargo", "build", "--release", "-p", "chaoscope-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    lib = os.path.join(target, "release", "libchaoscope_py.so")
    shutil.copy(lib, os.path.join(dest, "chaoscope.so"))


def main():
    with tempfile.TemporaryDirectory() as tmp:
        build_extension(tmp)
        sys.path.insert(0, tmp)
        import chaoscope as cs

        assert len(cs.gallery_names()) == 6

        a = cs.PointCloud("euclidean 1", [[0.0]])
        b = cs.PointCloud("euclidean 1", [[3.0], [4.0]])
        assert cs.hausdorff(a, b) == 4.0
        assert len(cs.decimate(cs.PointCloud("euclidean 1", [[0.0], [0.004], [1.0]]), 0.01)) == 2
        assert cs.PointCloud.from_text(b.to_text()) == b

        sier = cs.build("sierpinski")
        oracle, report = sier.oracle()
        assert report["converged"], report
        orbit = sier.chaos_game(20000, 42, x0=[1.0, 1.0])
        assert orbit.replays_exactly()
        assert orbit.indices == sier.chaos_game(20000, 42, x0=[1.0, 1.0]).indices
        d = cs.hausdorff(orbit.tail_cloud(1000), oracle)
        assert d <= 0.02, d

        verdict = sier.basin_probe([2.0, -1.0], oracle)
        assert verdict["verdict"] == "ATTRACTED", verdict

        pgm = cs.render_pgm(orbit.tail_cloud(1000), 64, 64)
        assert pgm.startswith(b"P5\n64 64\n255\n") and len(pgm) == len(b"P5\n64 64\n255\n") + 64 * 64

        iterated, closed = cs.hilbert_moving_basis(100, 100, 1.0)
        assert abs(iterated - closed) < 1e-12
        assert abs(closed - (100 / 101) ** 100) < 1e-12

        doubling = cs.System.from_toml(
            'name = "doubling"\n[space]\nkind = "euclidean"\ndim = 1\n'
            '[[maps]]\nkind = "affine"\nmatrix = [[2.0]]\noffset = [0.0]\n'
        )
        try:
            doubling.chaos_game(100, 0, x0=[1.0])
        except OverflowError:
            pass
        else:
            raise AssertionError("expected the divergence guard to trip")
        try:
            cs.build("nope")
        except ValueError as e:
            assert "sierpinski" in str(e)
        else:
            raise AssertionError("expected ValueError")

        circle = cs.build("circle-rotation")
        assert math.isclose(len(circle), 2)
        print("python smoke test: ok (rng %s, oracle %d points, d_H %.5f)" % (cs.RNG_ALGORITHM, len(oracle), d))


if __name__ == "__main__":
    main()
