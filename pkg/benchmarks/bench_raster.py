"""Compare the compiled and numpy distance-field kernels.

    python3 benchmarks/bench_raster.py [--size 256] [--paths 16] [--repeat 5]

Times a full render and a render plus backward pass under each available
backend and checks that both produce identical images.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from conftest import random_scene  # noqa: E402

from hivevec.raster import _backend, backward, render  # noqa: E402


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--paths", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    scene = random_scene(rng, args.size, args.size, max_paths=args.paths)
    grad = rng.standard_normal((args.size, args.size, 4))
    print(f"{len(scene.paths)} paths on {args.size}x{args.size}, best of {args.repeat}")

    results, images = {}, {}
    for name in _backend.available():
        with _backend.using(name):
            images[name] = render(scene)
            results[name] = (best_of(lambda: render(scene), args.repeat),
                             best_of(lambda: backward(scene, grad), args.repeat))
        print(f"{name:>8}: render {results[name][0] * 1e3:8.1f} ms   backward {results[name][1] * 1e3:8.1f} ms")

    if len(results) == 2:
        speed = [results["python"][k] / results["cython"][k] for k in range(2)]
        same = np.array_equal(images["python"], images["cython"])
        print(f"speedup: render {speed[0]:.1f}x, backward {speed[1]:.1f}x; identical images: {same}")
    else:
        print("compiled kernel not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
