import math

import numpy as np
import pytest

from pinyintypo.model import (
    ModelConfig,
    Parameters,
    PreparedSample,
    attend,
    decode_step,
    encode,
    forward_loss,
    gru_cell,
    initial_decoder_state,
    log_softmax,
    loss_and_gradients,
    softmax,
)

TINY = ModelConfig(
    embed_dim=6, hidden_dim=5, source_vocab_size=27, target_vocab_size=9,
    attention_dim=4, seed=12,
)


def tiny_params(seed=12):
    cfg = ModelConfig(**{**TINY.to_dict(), "seed": seed})
    return Parameters.init(cfg)


# --- independent scalar oracle: the whole forward pass in naive loops ---

def naive_sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def naive_gru_step(wx, wh, b, u, h_prev):
    H = wh.shape[1]
    pre = [b[i] + sum(wx[i][j] * u[j] for j in range(len(u))) for i in range(3 * H)]
    z = [naive_sigmoid(pre[i] + sum(wh[i][j] * h_prev[j] for j in range(H))) for i in range(H)]
    r = [naive_sigmoid(pre[H + i] + sum(wh[H + i][j] * h_prev[j] for j in range(H))) for i in range(H)]
    rh = [r[j] * h_prev[j] for j in range(H)]
    c = [math.tanh(pre[2 * H + i] + sum(wh[2 * H + i][j] * rh[j] for j in range(H))) for i in range(H)]
    return [(1.0 - z[i]) * h_prev[i] + z[i] * c[i] for i in range(H)]


def naive_forward(params, x_ids, y_ids):
    """Cross entropy and attention stack via plain Python loops only."""
    H = params.enc_fwd_wh.shape[1]
    E = params.src_embed.shape[1]
    xemb = [list(params.src_embed[i]) for i in x_ids]
    fwd, h = [], [0.0] * H
    for u in xemb:
        h = naive_gru_step(params.enc_fwd_wx, params.enc_fwd_wh, params.enc_fwd_b, u, h)
        fwd.append(h)
    bwd_rev, h = [], [0.0] * H
    for u in reversed(xemb):
        h = naive_gru_step(params.enc_bwd_wx, params.enc_bwd_wh, params.enc_bwd_b, u, h)
        bwd_rev.append(h)
    bwd = bwd_rev[::-1]
    estates = [f + bb for f, bb in zip(fwd, bwd)]
    d = [
        math.tanh(params.init_b[i] + sum(params.init_w[i][j] * bwd[0][j] for j in range(H)))
        for i in range(H)
    ]
    y_in = [y_ids[-1]] + list(y_ids[:-1])
    ce = 0.0
    alphas = []
    A = params.attn_v.shape[0]
    for y_prev, y_gold in zip(y_in, y_ids):
        q = []
        for e_j in estates:
            act = [
                math.tanh(
                    params.attn_b[k]
                    + sum(params.attn_wd[k][j] * d[j] for j in range(H))
                    + sum(params.attn_we[k][m] * e_j[m] for m in range(2 * H))
                )
                for k in range(A)
            ]
            q.append(sum(params.attn_v[k] * act[k] for k in range(A)))
        mx = max(q)
        exps = [math.exp(v - mx) for v in q]
        total = sum(exps)
        alpha = [v / total for v in exps]
        alphas.append(alpha)
        ctx = [sum(alpha[j] * estates[j][m] for j in range(len(estates))) for m in range(2 * H)]
        emb = list(params.tgt_embed[y_prev])
        d = naive_gru_step(params.dec_wx, params.dec_wh, params.dec_b, emb + ctx, d)
        feat = d + ctx + emb
        logits = [
            params.out_b[v] + sum(params.out_w[v][m] * feat[m] for m in range(3 * H + E))
            for v in range(params.out_b.shape[0])
        ]
        mx = max(logits)
        log_total = mx + math.log(sum(math.exp(v - mx) for v in logits))
        ce -= logits[y_gold] - log_total
    return ce, np.array(alphas)


def random_sample(cfg, rng, t_l=(3, 7), t_s=(2, 4), with_target=True):
    tl = int(rng.integers(*t_l))
    ts = int(rng.integers(*t_s))
    x = np.concatenate([rng.integers(0, cfg.source_vocab_size - 1, tl), [cfg.source_vocab_size - 1]])
    y = np.concatenate([rng.integers(0, cfg.target_vocab_size - 2, ts), [cfg.target_vocab_size - 2]])
    target = None
    if with_target:
        target = rng.random((tl + 1, ts + 1))
        target /= target.sum(axis=0, keepdims=True)
    return PreparedSample(x, y, target)


def test_encode_shapes():
    params = tiny_params()
    enc = encode(params, [0, 26])
    assert enc.states.shape == (2, 10)
    enc = encode(params, [26])
    assert enc.states.shape == (1, 10)


def test_encode_rejects_out_of_vocab():
    params = tiny_params()
    with pytest.raises(ValueError):
        encode(params, [27])
    with pytest.raises(ValueError):
        encode(params, [])


def test_zero_parameters_give_zero_states():
    params = Parameters.zeros(TINY)
    enc = encode(params, [1, 2, 3, 26])
    assert (enc.states == 0).all()


def test_encoder_matches_naive_loops(rng):
    params = tiny_params()
    x = [3, 1, 4, 26]
    enc = encode(params, x)
    H = 5
    xemb = [list(params.src_embed[i]) for i in x]
    h = [0.0] * H
    fwd = []
    for u in xemb:
        h = naive_gru_step(params.enc_fwd_wx, params.enc_fwd_wh, params.enc_fwd_b, u, h)
        fwd.append(h)
    h = [0.0] * H
    bwd_rev = []
    for u in reversed(xemb):
        h = naive_gru_step(params.enc_bwd_wx, params.enc_bwd_wh, params.enc_bwd_b, u, h)
        bwd_rev.append(h)
    naive = np.hstack([np.array(fwd), np.array(bwd_rev[::-1])])
    assert np.allclose(enc.states, naive, atol=1e-12)


def test_attend_uniform_on_equal_scores():
    params = Parameters.zeros(TINY)
    enc = encode(params, [0, 1, 2, 26])
    alpha, ctx = attend(params, np.zeros(5), enc)
    assert np.allclose(alpha, 0.25, atol=1e-12)
    assert ctx.shape == (10,)


def test_attend_saturates_to_one_hot():
    params = Parameters.zeros(TINY)
    params.attn_v[:] = 0.0
    params.attn_v[0] = 2000.0
    params.attn_we[0, 0] = 1.0
    estates = np.zeros((3, 10))
    estates[0, 0] = 1.0
    estates[1, 0] = -1.0
    estates[2, 0] = -1.0
    from pinyintypo.model import EncoderStates

    enc = EncoderStates(estates, np.zeros(5))
    alpha, _ = attend(params, np.zeros(5), enc)
    assert abs(alpha[0] - 1.0) < 1e-12
    assert alpha[1] < 1e-12 and alpha[2] < 1e-12


def test_attend_context_matches_scalar_loop(rng):
    params = tiny_params()
    enc = encode(params, [5, 6, 7, 26])
    d_prev = rng.standard_normal(5)
    alpha, ctx = attend(params, d_prev, enc)
    manual = np.zeros(10)
    for j in range(4):
        for m in range(10):
            manual[m] += alpha[j] * enc.states[j, m]
    assert np.allclose(ctx, manual, atol=1e-12)
    assert alpha.sum() == pytest.approx(1.0, abs=1e-12)


def test_decode_step_distribution_sums_to_one(rng):
    params = tiny_params()
    enc = encode(params, [5, 6, 26])
    d0 = initial_decoder_state(params, enc)
    state, logits = decode_step(params, d0, 0, enc)
    assert np.isfinite(logits).all()
    assert state.distribution.sum() == pytest.approx(1.0, abs=1e-12)
    assert state.attention.sum() == pytest.approx(1.0, abs=1e-12)
    assert (state.attention >= 0).all()
    with pytest.raises(ValueError):
        decode_step(params, d0, 99, enc)


def test_gru_cell_matches_naive(rng):
    params = tiny_params()
    u = rng.standard_normal(6 + 10)
    h_prev = rng.standard_normal(5)
    ours = gru_cell(params.dec_wx, params.dec_wh, params.dec_b, u, h_prev)
    naive = naive_gru_step(params.dec_wx, params.dec_wh, params.dec_b, list(u), list(h_prev))
    assert np.allclose(ours, naive, atol=1e-12)


def test_forward_loss_matches_naive_reimplementation(rng):
    params = tiny_params()
    batch = [random_sample(TINY, rng) for _ in range(2)]
    loss0, produced = forward_loss(params, batch, 0.0)
    naive_total = 0.0
    for sample, mat in zip(batch, produced):
        ce, alphas = naive_forward(params, sample.x, sample.y)
        naive_total += ce
        assert np.allclose(mat, alphas.T, atol=1e-10)
    assert loss0 == pytest.approx(naive_total, abs=1e-10)


def test_forward_loss_lambda_composition(rng):
    params = tiny_params()
    batch = [random_sample(TINY, rng) for _ in range(3)]
    loss0, produced = forward_loss(params, batch, 0.0)
    loss1, _ = forward_loss(params, batch, 1.0)
    penalty = sum(
        float(np.sum((s.target - m) ** 2)) for s, m in zip(batch, produced)
    )
    assert loss1 == pytest.approx(loss0 + penalty, rel=1e-12)
    loss_half, _ = forward_loss(params, batch, 0.5)
    assert loss_half == pytest.approx(loss0 + 0.5 * penalty, rel=1e-12)


def test_perfect_attention_adds_no_penalty(rng):
    params = tiny_params()
    sample = random_sample(TINY, rng, with_target=False)
    loss0, produced = forward_loss(params, [sample], 0.0)
    matched = PreparedSample(sample.x, sample.y, produced[0].copy())
    loss1, _ = forward_loss(params, [matched], 1.0)
    assert loss1 == pytest.approx(loss0, rel=1e-12)


def test_uniform_distribution_cross_entropy():
    params = Parameters.zeros(TINY)
    y = np.array([0, 1, 7])
    sample = PreparedSample(np.array([0, 1, 26]), y, None)
    loss, _ = forward_loss(params, [sample], 0.0)
    assert loss == pytest.approx(len(y) * math.log(TINY.target_vocab_size), rel=1e-12)


def test_softmax_invariants(rng):
    for _ in range(20):
        v = rng.standard_normal(int(rng.integers(1, 30))) * float(rng.integers(1, 100))
        s = softmax(v)
        assert s.sum() == pytest.approx(1.0, abs=1e-12)
        assert (s >= 0).all()
        lp = log_softmax(v)
        assert np.exp(lp).sum() == pytest.approx(1.0, abs=1e-12)


def test_backward_flags_non_finite(rng):
    from pinyintypo.model import backward

    params = tiny_params()
    params.out_w[0, 0] = np.nan
    batch = [random_sample(TINY, rng)]
    with pytest.raises(FloatingPointError, match="tensor"):
        backward(params, batch, 0.0)
