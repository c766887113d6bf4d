"""Compare the compiled and numpy kernel backends on the model's hot shapes.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from audioscope.nn import build_model, kernels, softmax_cross_entropy

CONV_CASES = {
    # name: (input shape, weight shape)
    "conv1 k7 1->16 (98x257)": ((1, 98, 257), (16, 1, 7, 7)),
    "conv2 k5 16->16 (46x125)": ((16, 46, 125), (16, 16, 5, 5)),
    "conv3 k3 16->32 (21x60)": ((16, 21, 60), (32, 16, 3, 3)),
}


def time_call(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1e3  # ms


def bench_convs(repeats):
    rng = np.random.default_rng(7)
    rows = []
    for name, (xs, ws) in CONV_CASES.items():
        x = rng.standard_normal(xs).astype(np.float32)
        w = rng.standard_normal(ws).astype(np.float32) * 0.1
        b = np.zeros(ws[0], dtype=np.float32)
        gy_shape = (ws[0], xs[1] - ws[2] + 1, xs[2] - ws[3] + 1)
        gy = rng.standard_normal(gy_shape).astype(np.float32)
        row = {"case": name}
        for backend in kernels.available_backends():
            kernels.use_backend(backend)
            row[f"{backend} fwd"] = time_call(
                lambda: kernels.conv2d_forward(x, w, b), repeats)
            row[f"{backend} bwd"] = time_call(
                lambda: kernels.conv2d_backward(x, w, gy), repeats)
        rows.append(row)
    return rows


def bench_train_step(repeats):
    rng = np.random.default_rng(7)
    x = rng.standard_normal((1, 98, 257)).astype(np.float32)
    rows = []
    for backend in kernels.available_backends():
        kernels.use_backend(backend)
        model = build_model(seed=0)
        drop_rng = np.random.default_rng(0)

        def step():
            trace = model.forward(x, training=True, rng=drop_rng)
            _, grad, _ = softmax_cross_entropy(trace.logits, 3)
            model.backward(trace, grad)

        rows.append({"case": "full fwd+bwd (one example)",
                     "backend": backend, "ms": time_call(step, repeats)})
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=10)
    args = parser.parse_args()

    print(f"backends available: {', '.join(kernels.available_backends())}")
    if len(kernels.available_backends()) == 1:
        print("compiled extension not built; only the numpy backend runs")

    rows = bench_convs(args.repeats)
    keys = [k for k in rows[0] if k != "case"]
    width = max(len(r["case"]) for r in rows)
    print(f"\n{'case':<{width}}  " + "  ".join(f"{k:>14}" for k in keys))
    for r in rows:
        print(f"{r['case']:<{width}}  "
              + "  ".join(f"{r[k]:>11.2f} ms" for k in keys))

    print()
    for r in bench_train_step(args.repeats):
        print(f"{r['case']} [{r['backend']}]: {r['ms']:.1f} ms")


if __name__ == "__main__":
    main()
