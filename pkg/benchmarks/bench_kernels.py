"""Compare the compiled kernel lane against the numpy reference lane.

Times the four sequence kernels on training-shaped inputs and a full
training iteration (forward + backward over a 64-sample batch), then prints
one table. Run:

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np
from threadpoolctl import threadpool_limits

from pinyintypo import model as model_mod
from pinyintypo.kernels import available_backends
from pinyintypo.model import ModelConfig, Parameters, PreparedSample


def timer(fn, repeat):
    fn()  # warm up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_batch(config, rng, n=64):
    batch = []
    for _ in range(n):
        t_l = int(rng.integers(6, 20))
        t_s = int(rng.integers(2, 7))
        x = np.concatenate([rng.integers(0, 26, t_l), [26]])
        y = np.concatenate(
            [rng.integers(0, config.target_vocab_size - 2, t_s),
             [config.target_vocab_size - 2]]
        )
        target = rng.random((t_l + 1, t_s + 1))
        target /= target.sum(axis=0, keepdims=True)
        batch.append(PreparedSample(x, y, target))
    return batch


def bench_kernels(lane, rng, repeat):
    h, e, a, t_x, t_y = 64, 64, 64, 15, 6
    wx = rng.standard_normal((3 * h, e))
    wh = rng.standard_normal((3 * h, h)) * 0.3
    b = rng.standard_normal(3 * h) * 0.1
    x = rng.standard_normal((t_x, e))
    h0 = np.zeros(h)
    out = {}
    out["gru_fwd"] = timer(lambda: lane.gru_seq_forward(wx, wh, b, x, h0), repeat)
    states, gates = lane.gru_seq_forward(wx, wh, b, x, h0)
    dh = rng.standard_normal((t_x, h))
    out["gru_bwd"] = timer(
        lambda: lane.gru_seq_backward(wx, wh, x, h0, states, gates, dh), repeat
    )
    dwx = rng.standard_normal((3 * h, e + 2 * h)) * 0.2
    awd = rng.standard_normal((a, h)) * 0.3
    ab = rng.standard_normal(a) * 0.1
    av = rng.standard_normal(a) * 0.3
    estates = rng.standard_normal((t_x, 2 * h))
    p_mat = np.ascontiguousarray(estates @ rng.standard_normal((a, 2 * h)).T)
    yemb = rng.standard_normal((t_y, e))
    d0 = np.zeros(h)
    args = (dwx, wh, b, awd, ab, av, p_mat, estates, yemb, d0)
    out["dec_fwd"] = timer(lambda: lane.decoder_seq_forward(*args), repeat)
    fwd = lane.decoder_seq_forward(*args)
    dd = rng.standard_normal((t_y, h))
    dc = rng.standard_normal((t_y, 2 * h))
    da = rng.standard_normal((t_y, t_x))
    out["dec_bwd"] = timer(
        lambda: lane.decoder_seq_backward(
            dwx, wh, awd, av, estates, yemb, d0, *fwd, dd, dc, da
        ),
        repeat,
    )
    return out


def bench_train_iteration(lane, repeat):
    config = ModelConfig(
        embed_dim=64, hidden_dim=64, source_vocab_size=27,
        target_vocab_size=412, attention_dim=64, seed=1,
    )
    params = Parameters.init(config)
    batch = make_batch(config, np.random.default_rng(0))
    saved = model_mod.kernels
    model_mod.kernels = lane
    try:
        return timer(lambda: model_mod.loss_and_gradients(params, batch, 1.0), repeat)
    finally:
        model_mod.kernels = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    lanes = available_backends()
    if "c" not in lanes:
        print("note: compiled lane unavailable, timing the reference lane only")
    results = {}
    with threadpool_limits(limits=1):
        for name, lane in lanes.items():
            rng = np.random.default_rng(7)
            results[name] = bench_kernels(lane, rng, args.repeat)
            results[name]["train_iter_b64"] = bench_train_iteration(lane, args.repeat)
    rows = ["gru_fwd", "gru_bwd", "dec_fwd", "dec_bwd", "train_iter_b64"]
    have_both = "c" in results and "py" in results
    header = f"{'kernel':<16} " + " ".join(f"{n + ' (ms)':>12}" for n in results)
    if have_both:
        header += f" {'speedup':>9}"
    print(header)
    for row in rows:
        line = f"{row:<16} " + " ".join(f"{results[n][row] * 1e3:>12.3f}" for n in results)
        if have_both:
            line += f" {results['py'][row] / results['c'][row]:>8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
