"""Time one presentation on the compiled and the numpy kernel.

    python benchmarks/bench_presentation.py --neurons 100 --repeats 5

Both backends are run on identical inputs; the script also checks that
they agree spike for spike and conductance for conductance.
"""

import argparse
import time

import numpy as np

from scienet import backend, synthetic
from scienet.network import SnnModel, run_presentation


def time_backend(name, model, images, learning, repeats):
    best = np.inf
    last = None
    for _ in range(repeats):
        m = model.copy()
        t0 = time.perf_counter()
        traces = [run_presentation(m, x, learning=learning, seed=(0, i), backend_name=name)
                  for i, x in enumerate(images)]
        best = min(best, (time.perf_counter() - t0) / len(images))
        last = (m, traces)
    return best, last


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--neurons", type=int, default=100)
    ap.add_argument("--images", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--no-learning", action="store_true")
    args = ap.parse_args(argv)

    images = synthetic.make_dataset(args.images, seed=0).images
    model = SnnModel.initialize(args.neurons, images.shape[1], seed=0)
    learning = not args.no_learning
    names = [n for n in backend.BACKENDS if n == "python" or backend.compiled_available()]
    results = {}
    for name in names:
        results[name] = time_backend(name, model, images, learning, args.repeats)
        print(f"{name:>8}: {results[name][0] * 1e3:9.2f} ms / presentation")
    if len(results) == 2:
        (mc, tc), (mp, tp) = results["cython"][1], results["python"][1]
        same = all(a.same_as(b) for a, b in zip(tc, tp)) and np.array_equal(mc.g, mp.g)
        print(f" speedup: {results['python'][0] / results['cython'][0]:.1f}x, identical: {same}")
    else:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
