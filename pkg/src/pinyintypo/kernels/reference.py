"""Pure-numpy sequence kernels: the fallback lane and the parity oracle.

Both lanes implement the same four operations on one sequence at a time:
gated-recurrent forward/backward over a whole input, and the fused
attention + recurrence decoder forward/backward. Gate rows are laid out
[update; reset; candidate] in every (3H, .) weight matrix, and the state
update is h = (1-z) * h_prev + z * candidate.

Shared cache layout: ``gates`` stacks (z, r, candidate) per step; the
decoder additionally caches the attention scorer's tanh activations.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    # 0.5 * (1 + tanh(x/2)) is exact and overflow-free for any argument.
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def gru_seq_forward(wx, wh, b, x_seq, h0):
    """Run the recurrence over x_seq (T, D); returns states (T, H) and gates."""
    T = x_seq.shape[0]
    H = wh.shape[1]
    h_states = np.empty((T, H))
    gates = np.empty((T, 3 * H))
    pre_x = x_seq @ wx.T + b
    wh_z, wh_r, wh_c = wh[:H], wh[H : 2 * H], wh[2 * H :]
    h = h0
    for t in range(T):
        z = sigmoid(pre_x[t, :H] + wh_z @ h)
        r = sigmoid(pre_x[t, H : 2 * H] + wh_r @ h)
        c = np.tanh(pre_x[t, 2 * H :] + wh_c @ (r * h))
        h = (1.0 - z) * h + z * c
        h_states[t] = h
        gates[t, :H] = z
        gates[t, H : 2 * H] = r
        gates[t, 2 * H :] = c
    return h_states, gates


def gru_seq_backward(wx, wh, x_seq, h0, h_states, gates, dh_ext):
    """Gradients of the recurrence given per-step output gradients dh_ext."""
    T, H = h_states.shape
    wh_z, wh_r, wh_c = wh[:H], wh[H : 2 * H], wh[2 * H :]
    d_pre = np.empty((T, 3 * H))  # pre-activation grads, reused for d_wx/d_x
    d_wh = np.zeros_like(wh)
    carry = np.zeros(H)
    for t in range(T - 1, -1, -1):
        dh = dh_ext[t] + carry
        h_prev = h_states[t - 1] if t > 0 else h0
        z = gates[t, :H]
        r = gates[t, H : 2 * H]
        c = gates[t, 2 * H :]
        d_cand = dh * z * (1.0 - c * c)
        tmp = wh_c.T @ d_cand
        d_z = dh * (c - h_prev) * z * (1.0 - z)
        d_r = tmp * h_prev * r * (1.0 - r)
        d_pre[t, :H] = d_z
        d_pre[t, H : 2 * H] = d_r
        d_pre[t, 2 * H :] = d_cand
        d_wh[:H] += np.outer(d_z, h_prev)
        d_wh[H : 2 * H] += np.outer(d_r, h_prev)
        d_wh[2 * H :] += np.outer(d_cand, r * h_prev)
        carry = dh * (1.0 - z) + tmp * r + wh_z.T @ d_z + wh_r.T @ d_r
    d_wx = d_pre.T @ x_seq
    d_b = d_pre.sum(axis=0)
    d_x = d_pre @ wx
    return d_wx, d_wh, d_b, d_x, carry


def _softmax(q):
    e = np.exp(q - q.max())
    return e / e.sum()


def decoder_seq_forward(wx, wh, b, attn_wd, attn_b, attn_v, p_mat, estates, yemb, d0):
    """Attention + recurrence over all decoder steps under teacher forcing.

    p_mat is the precomputed encoder-side half of the attention scorer,
    (T_x, A); yemb holds the embedded previous-token inputs, (T_y, E).
    Returns (states, attention weights, contexts, gates, tanh cache).
    """
    T_y, E = yemb.shape
    T_x, A = p_mat.shape
    H = wh.shape[1]
    d_states = np.empty((T_y, H))
    alphas = np.empty((T_y, T_x))
    contexts = np.empty((T_y, 2 * H))
    gates = np.empty((T_y, 3 * H))
    tanh_cache = np.empty((T_y, T_x, A))
    wh_z, wh_r, wh_c = wh[:H], wh[H : 2 * H], wh[2 * H :]
    d = d0
    for i in range(T_y):
        act = np.tanh(p_mat + (attn_wd @ d + attn_b))
        alpha = _softmax(act @ attn_v)
        ctx = alpha @ estates
        u = np.concatenate([yemb[i], ctx])
        pre = wx @ u + b
        z = sigmoid(pre[:H] + wh_z @ d)
        r = sigmoid(pre[H : 2 * H] + wh_r @ d)
        c = np.tanh(pre[2 * H :] + wh_c @ (r * d))
        d = (1.0 - z) * d + z * c
        tanh_cache[i] = act
        alphas[i] = alpha
        contexts[i] = ctx
        d_states[i] = d
        gates[i, :H] = z
        gates[i, H : 2 * H] = r
        gates[i, 2 * H :] = c
    return d_states, alphas, contexts, gates, tanh_cache


def decoder_seq_backward(
    wx,
    wh,
    attn_wd,
    attn_v,
    estates,
    yemb,
    d0,
    d_states,
    alphas,
    contexts,
    gates,
    tanh_cache,
    dd_ext,
    dc_ext,
    dalpha_ext,
):
    """Gradients of the fused decoder given external per-step gradients.

    dd_ext/dc_ext come from the output projection, dalpha_ext from the
    attention-supervision term (zeros when unsupervised). Returns gradients
    for the recurrence weights, the scorer, the precomputed encoder half
    (d_p), the encoder states, the embedded inputs, and the initial state.
    """
    T_y, E = yemb.shape
    T_x, A = tanh_cache.shape[1], tanh_cache.shape[2]
    H = wh.shape[1]
    wh_z, wh_r, wh_c = wh[:H], wh[H : 2 * H], wh[2 * H :]
    d_pre = np.empty((T_y, 3 * H))
    d_wh = np.zeros_like(wh)
    d_attn_wd = np.zeros_like(attn_wd)
    d_attn_b = np.zeros(A)
    d_attn_v = np.zeros(A)
    d_p = np.zeros((T_x, A))
    d_estates = np.zeros_like(estates)
    d_yemb = np.empty_like(yemb)
    d_ctx_all = np.empty((T_y, 2 * H))
    carry = np.zeros(H)
    for i in range(T_y - 1, -1, -1):
        dd = dd_ext[i] + carry
        d_prev = d_states[i - 1] if i > 0 else d0
        z = gates[i, :H]
        r = gates[i, H : 2 * H]
        c = gates[i, 2 * H :]
        d_cand = dd * z * (1.0 - c * c)
        tmp = wh_c.T @ d_cand
        d_z = dd * (c - d_prev) * z * (1.0 - z)
        d_r = tmp * d_prev * r * (1.0 - r)
        d_pre[i, :H] = d_z
        d_pre[i, H : 2 * H] = d_r
        d_pre[i, 2 * H :] = d_cand
        d_wh[:H] += np.outer(d_z, d_prev)
        d_wh[H : 2 * H] += np.outer(d_r, d_prev)
        d_wh[2 * H :] += np.outer(d_cand, r * d_prev)
        du = np.concatenate([d_z, d_r, d_cand]) @ wx
        d_yemb[i] = du[:E]
        d_ctx = du[E:] + dc_ext[i]
        d_ctx_all[i] = d_ctx
        # context = alpha @ estates
        d_alpha = estates @ d_ctx + dalpha_ext[i]
        alpha = alphas[i]
        d_q = alpha * (d_alpha - float(d_alpha @ alpha))
        act = tanh_cache[i]
        d_act = np.outer(d_q, attn_v) * (1.0 - act * act)
        d_attn_v += act.T @ d_q
        d_p += d_act
        s = d_act.sum(axis=0)
        d_attn_b += s
        d_attn_wd += np.outer(s, d_prev)
        carry = (
            dd * (1.0 - z)
            + tmp * r
            + wh_z.T @ d_z
            + wh_r.T @ d_r
            + attn_wd.T @ s
        )
    d_estates += alphas.T @ d_ctx_all
    d_wx = d_pre.T @ np.hstack([yemb, contexts])
    d_b = d_pre.sum(axis=0)
    return (
        d_wx,
        d_wh,
        d_b,
        d_attn_wd,
        d_attn_b,
        d_attn_v,
        d_p,
        d_estates,
        d_yemb,
        carry,
    )
