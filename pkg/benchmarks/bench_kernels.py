#!/usr/bin/env python3
"""Benchmark the numba kernel lane against the pure-numpy fallback.

Microbenchmarks call both lane implementations directly (and verify they
agree bit for bit); the end-to-end section re-launches a toy train step
in a subprocess per lane via DISTRACTGEN_NUMBA.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--skip-end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from distractgen import kernels


def time_fn(fn, *args, repeats=50):
    fn(*args)  # warm up / compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_matmul(repeats):
    print("== matmul (sequential accumulation) ==")
    shapes = [
        (64, 16, 1),     # LSTM gate x input (toy)
        (128, 32, 1),    # LSTM gate x hidden (toy)
        (2400, 600, 1),  # LSTM gate x hidden (paper scale)
        (600, 600, 40),  # attention scores over sentences
        (256, 256, 256),
    ]
    for m, k, n in shapes:
        rng = np.random.default_rng(0)
        a = rng.standard_normal((m, k))
        b = rng.standard_normal((k, n))
        t_np = time_fn(kernels.matmul_numpy, a, b, repeats=repeats)
        line = f"  {m}x{k} @ {k}x{n}: numpy {1e6 * t_np:9.1f} us"
        if kernels.matmul_numba is not None:
            t_nb = time_fn(kernels.matmul_numba, a, b, repeats=repeats)
            same = np.array_equal(kernels.matmul_numba(a, b), kernels.matmul_numpy(a, b))
            line += f" | numba {1e6 * t_nb:9.1f} us | speedup {t_np / t_nb:6.1f}x | bitwise {'OK' if same else 'MISMATCH'}"
        print(line)


def bench_sums(repeats):
    print("== sequential sums ==")
    rng = np.random.default_rng(1)
    a = rng.standard_normal((600, 600))
    for name, np_fn, nb_fn in [
        ("sum_all", kernels.sum_all_numpy, kernels.sum_all_numba),
        ("sum_axis0", kernels.sum_axis0_numpy, kernels.sum_axis0_numba),
        ("sum_axis1", kernels.sum_axis1_numpy, kernels.sum_axis1_numba),
    ]:
        t_np = time_fn(np_fn, a, repeats=repeats)
        line = f"  {name} 600x600: numpy {1e6 * t_np:9.1f} us"
        if nb_fn is not None:
            t_nb = time_fn(nb_fn, a, repeats=repeats)
            same = np.array_equal(np.asarray(np_fn(a)), np.asarray(nb_fn(a)))
            line += f" | numba {1e6 * t_nb:9.1f} us | speedup {t_np / t_nb:6.1f}x | bitwise {'OK' if same else 'MISMATCH'}"
        print(line)


_END_TO_END = r"""
import time
from distractgen import kernels
from distractgen import tensor as T
from distractgen.model import DistractorModel
from distractgen.synth import toy_config, toy_sample
from distractgen.trainer import clip_gradients, sgd_step

cfg = toy_config()
model = DistractorModel(cfg)
sample = toy_sample(cfg.vocab_size, seed=3)

def step():
    model.zero_grad()
    loss, _ = model.sample_loss(sample)
    T.backward(loss)
    grads = model.gradients()
    clip_gradients(grads, cfg.clip_norm)
    sgd_step(model.parameters(), grads, 0.1)

step()  # warm up / compile
t0 = time.perf_counter()
for _ in range(30):
    step()
dt = (time.perf_counter() - t0) / 30
print(f"  lane={kernels.active_lane():5s}  train step: {1e3 * dt:7.2f} ms")
"""


def bench_end_to_end():
    print("== end-to-end toy train step (per lane, subprocess) ==", flush=True)
    for flag in ("1", "0"):
        env = dict(os.environ, DISTRACTGEN_NUMBA=flag)
        subprocess.run([sys.executable, "-c", _END_TO_END], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()
    print(f"active lane: {kernels.active_lane()}")
    bench_matmul(args.repeats)
    bench_sums(args.repeats)
    if not args.skip_end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
