# Compiled twin of reference.py: identical math, with the recurrent chain in
# C and every matrix-vector product routed through BLAS (dgemv/dger). Large
# sequence-level matmuls go through numpy. Keep the two lanes in lockstep;
# the parity tests compare them element by element.

import numpy as np

from libc.math cimport exp as cexp, tanh as ctanh
from scipy.linalg.cython_blas cimport ddot, dgemv, dger

cdef int ONE = 1
cdef char TRANS_T = b'T'
cdef char TRANS_N = b'N'


cdef inline double sig(double x) noexcept nogil:
    return 0.5 * (1.0 + ctanh(0.5 * x))


cdef inline void mv(const double* a, int rows, int cols, int lda,
                    const double* x, double* y, double alpha, double beta) noexcept nogil:
    # y = alpha * A @ x + beta * y for row-major A (rows x cols, row stride lda)
    dgemv(&TRANS_T, &cols, &rows, &alpha, <double*> a, &lda, <double*> x, &ONE,
          &beta, y, &ONE)


cdef inline void mvT(const double* a, int rows, int cols, int lda,
                     const double* x, double* y, double alpha, double beta) noexcept nogil:
    # y = alpha * A.T @ x + beta * y for row-major A (x len rows, y len cols)
    dgemv(&TRANS_N, &cols, &rows, &alpha, <double*> a, &lda, <double*> x, &ONE,
          &beta, y, &ONE)


cdef inline void outer_acc(double* a, int rows, int cols, int lda,
                           const double* u, const double* v, double alpha) noexcept nogil:
    # A += alpha * outer(u, v) for row-major A (rows x cols)
    dger(&cols, &rows, &alpha, <double*> v, &ONE, <double*> u, &ONE, a, &lda)


def gru_seq_forward(double[:, ::1] wx, double[:, ::1] wh, double[::1] b,
                    double[:, ::1] x_seq, double[::1] h0):
    cdef int T = <int> x_seq.shape[0]
    cdef int H = <int> wh.shape[1]
    h_states_np = np.empty((T, H))
    gates_np = np.empty((T, 3 * H))
    pre_x_np = np.asarray(x_seq) @ np.asarray(wx).T
    pre_x_np += np.asarray(b)
    zr_np = np.empty(2 * H)
    rh_np = np.empty(H)
    cdef double[:, ::1] hs = h_states_np
    cdef double[:, ::1] g = gates_np
    cdef double[:, ::1] px = pre_x_np
    cdef double[::1] zr = zr_np
    cdef double[::1] rh = rh_np
    cdef const double* hprev
    cdef int t, i
    cdef double z
    with nogil:
        for t in range(T):
            hprev = &hs[t - 1, 0] if t > 0 else &h0[0]
            # update/reset pre-activations: first 2H rows of wh in one call
            for i in range(2 * H):
                zr[i] = px[t, i]
            mv(&wh[0, 0], 2 * H, H, H, hprev, &zr[0], 1.0, 1.0)
            for i in range(H):
                g[t, i] = sig(zr[i])
                g[t, H + i] = sig(zr[H + i])
                rh[i] = g[t, H + i] * hprev[i]
            for i in range(H):
                zr[i] = px[t, 2 * H + i]
            mv(&wh[2 * H, 0], H, H, H, &rh[0], &zr[0], 1.0, 1.0)
            for i in range(H):
                z = g[t, i]
                g[t, 2 * H + i] = ctanh(zr[i])
                hs[t, i] = (1.0 - z) * hprev[i] + z * g[t, 2 * H + i]
    return h_states_np, gates_np


def gru_seq_backward(double[:, ::1] wx, double[:, ::1] wh,
                     double[:, ::1] x_seq, double[::1] h0,
                     double[:, ::1] h_states, double[:, ::1] gates,
                     double[:, ::1] dh_ext):
    cdef int T = <int> h_states.shape[0]
    cdef int H = <int> h_states.shape[1]
    d_pre_np = np.empty((T, 3 * H))
    d_wh_np = np.zeros((3 * H, H))
    carry_np = np.zeros(H)
    dh_np = np.empty(H)
    tmp_np = np.empty(H)
    rh_np = np.empty(H)
    cdef double[:, ::1] d_pre = d_pre_np
    cdef double[:, ::1] d_wh = d_wh_np
    cdef double[::1] carry = carry_np
    cdef double[::1] dh = dh_np
    cdef double[::1] tmp = tmp_np
    cdef double[::1] rh = rh_np
    cdef const double* hprev
    cdef int t, i
    cdef double z, r, c, d_cand
    with nogil:
        for t in range(T - 1, -1, -1):
            hprev = &h_states[t - 1, 0] if t > 0 else &h0[0]
            for i in range(H):
                dh[i] = dh_ext[t, i] + carry[i]
                z = gates[t, i]
                c = gates[t, 2 * H + i]
                d_pre[t, 2 * H + i] = dh[i] * z * (1.0 - c * c)
            mvT(&wh[2 * H, 0], H, H, H, &d_pre[t, 2 * H], &tmp[0], 1.0, 0.0)
            for i in range(H):
                z = gates[t, i]
                r = gates[t, H + i]
                c = gates[t, 2 * H + i]
                d_pre[t, i] = dh[i] * (c - hprev[i]) * z * (1.0 - z)
                d_pre[t, H + i] = tmp[i] * hprev[i] * r * (1.0 - r)
                rh[i] = r * hprev[i]
                carry[i] = dh[i] * (1.0 - z) + tmp[i] * r
            outer_acc(&d_wh[0, 0], H, H, H, &d_pre[t, 0], hprev, 1.0)
            outer_acc(&d_wh[H, 0], H, H, H, &d_pre[t, H], hprev, 1.0)
            outer_acc(&d_wh[2 * H, 0], H, H, H, &d_pre[t, 2 * H], &rh[0], 1.0)
            mvT(&wh[0, 0], 2 * H, H, H, &d_pre[t, 0], &carry[0], 1.0, 1.0)
    d_wx = d_pre_np.T @ np.asarray(x_seq)
    d_b = d_pre_np.sum(axis=0)
    d_x = d_pre_np @ np.asarray(wx)
    return d_wx, d_wh_np, d_b, d_x, carry_np


def decoder_seq_forward(double[:, ::1] wx, double[:, ::1] wh, double[::1] b,
                        double[:, ::1] attn_wd, double[::1] attn_b,
                        double[::1] attn_v, double[:, ::1] p_mat,
                        double[:, ::1] estates, double[:, ::1] yemb,
                        double[::1] d0):
    cdef int T_y = <int> yemb.shape[0]
    cdef int E = <int> yemb.shape[1]
    cdef int T_x = <int> p_mat.shape[0]
    cdef int A = <int> p_mat.shape[1]
    cdef int H = <int> wh.shape[1]
    d_states_np = np.empty((T_y, H))
    alphas_np = np.empty((T_y, T_x))
    contexts_np = np.empty((T_y, 2 * H))
    gates_np = np.empty((T_y, 3 * H))
    tanh_cache_np = np.empty((T_y, T_x, A))
    # Previous-token half of the recurrence input, batched over all steps.
    pre_y_np = np.asarray(yemb) @ np.asarray(wx)[:, :E].T
    pre_y_np += np.asarray(b)
    wdd_np = np.empty(A)
    q_np = np.empty(T_x)
    pre_np = np.empty(3 * H)
    rh_np = np.empty(H)
    cdef double[:, ::1] ds = d_states_np
    cdef double[:, ::1] al = alphas_np
    cdef double[:, ::1] cx = contexts_np
    cdef double[:, ::1] g = gates_np
    cdef double[:, :, ::1] tc = tanh_cache_np
    cdef double[:, ::1] pre_y = pre_y_np
    cdef double[::1] wdd = wdd_np
    cdef double[::1] q = q_np
    cdef double[::1] pre = pre_np
    cdef double[::1] rh = rh_np
    cdef const double* dprev
    cdef int i, j, k
    cdef double qmax, total, z
    for i in range(T_y):
        dprev = &ds[i - 1, 0] if i > 0 else &d0[0]
        with nogil:
            mv(&attn_wd[0, 0], A, H, H, dprev, &wdd[0], 1.0, 0.0)
            for j in range(T_x):
                for k in range(A):
                    tc[i, j, k] = p_mat[j, k] + wdd[k] + attn_b[k]
        act = tanh_cache_np[i]
        np.tanh(act, out=act)
        with nogil:
            mv(&tc[i, 0, 0], T_x, A, A, &attn_v[0], &q[0], 1.0, 0.0)
            qmax = q[0]
            for j in range(1, T_x):
                if q[j] > qmax:
                    qmax = q[j]
            total = 0.0
            for j in range(T_x):
                q[j] = cexp(q[j] - qmax)
                total += q[j]
            for j in range(T_x):
                al[i, j] = q[j] / total
            mvT(&estates[0, 0], T_x, 2 * H, 2 * H, &al[i, 0], &cx[i, 0], 1.0, 0.0)
            for k in range(3 * H):
                pre[k] = pre_y[i, k]
            # context half of the input columns: block of wx at offset E
            mv(&wx[0, 0] + E, 3 * H, 2 * H, E + 2 * H, &cx[i, 0], &pre[0], 1.0, 1.0)
            mv(&wh[0, 0], 2 * H, H, H, dprev, &pre[0], 1.0, 1.0)
            for k in range(H):
                g[i, k] = sig(pre[k])
                g[i, H + k] = sig(pre[H + k])
                rh[k] = g[i, H + k] * dprev[k]
            mv(&wh[2 * H, 0], H, H, H, &rh[0], &pre[2 * H], 1.0, 1.0)
            for k in range(H):
                z = g[i, k]
                g[i, 2 * H + k] = ctanh(pre[2 * H + k])
                ds[i, k] = (1.0 - z) * dprev[k] + z * g[i, 2 * H + k]
    return d_states_np, alphas_np, contexts_np, gates_np, tanh_cache_np


def decoder_seq_backward(double[:, ::1] wx, double[:, ::1] wh,
                         double[:, ::1] attn_wd, double[::1] attn_v,
                         double[:, ::1] estates, double[:, ::1] yemb,
                         double[::1] d0, double[:, ::1] d_states,
                         double[:, ::1] alphas, double[:, ::1] contexts,
                         double[:, ::1] gates, double[:, :, ::1] tanh_cache,
                         double[:, ::1] dd_ext, double[:, ::1] dc_ext,
                         double[:, ::1] dalpha_ext):
    cdef int T_y = <int> yemb.shape[0]
    cdef int E = <int> yemb.shape[1]
    cdef int T_x = <int> estates.shape[0]
    cdef int A = <int> attn_v.shape[0]
    cdef int H = <int> wh.shape[1]
    d_pre_np = np.empty((T_y, 3 * H))
    d_wh_np = np.zeros((3 * H, H))
    d_attn_wd_np = np.zeros((A, H))
    d_attn_b_np = np.zeros(A)
    d_attn_v_np = np.zeros(A)
    d_p_np = np.zeros((T_x, A))
    d_yemb_np = np.empty((T_y, E))
    d_ctx_all_np = np.empty((T_y, 2 * H))
    carry_np = np.zeros(H)
    dd_np = np.empty(H)
    tmp_np = np.empty(H)
    rh_np = np.empty(H)
    dalpha_np = np.empty(T_x)
    dq_np = np.empty(T_x)
    s_np = np.empty(A)
    cdef double[:, ::1] d_pre = d_pre_np
    cdef double[:, ::1] d_wh = d_wh_np
    cdef double[:, ::1] d_attn_wd = d_attn_wd_np
    cdef double[::1] d_attn_b = d_attn_b_np
    cdef double[::1] d_attn_v = d_attn_v_np
    cdef double[:, ::1] d_p = d_p_np
    cdef double[:, ::1] d_yemb = d_yemb_np
    cdef double[:, ::1] d_ctx_all = d_ctx_all_np
    cdef double[::1] carry = carry_np
    cdef double[::1] dd = dd_np
    cdef double[::1] tmp = tmp_np
    cdef double[::1] rh = rh_np
    cdef double[::1] dalpha = dalpha_np
    cdef double[::1] dq = dq_np
    cdef double[::1] s = s_np
    cdef const double* dprev
    cdef int i, j, k
    cdef double z, r, c, d_act, dot, a_jk
    with nogil:
        for i in range(T_y - 1, -1, -1):
            dprev = &d_states[i - 1, 0] if i > 0 else &d0[0]
            for k in range(H):
                dd[k] = dd_ext[i, k] + carry[k]
                z = gates[i, k]
                c = gates[i, 2 * H + k]
                d_pre[i, 2 * H + k] = dd[k] * z * (1.0 - c * c)
            mvT(&wh[2 * H, 0], H, H, H, &d_pre[i, 2 * H], &tmp[0], 1.0, 0.0)
            for k in range(H):
                z = gates[i, k]
                r = gates[i, H + k]
                c = gates[i, 2 * H + k]
                d_pre[i, k] = dd[k] * (c - dprev[k]) * z * (1.0 - z)
                d_pre[i, H + k] = tmp[k] * dprev[k] * r * (1.0 - r)
                rh[k] = r * dprev[k]
                carry[k] = dd[k] * (1.0 - z) + tmp[k] * r
            outer_acc(&d_wh[0, 0], H, H, H, &d_pre[i, 0], dprev, 1.0)
            outer_acc(&d_wh[H, 0], H, H, H, &d_pre[i, H], dprev, 1.0)
            outer_acc(&d_wh[2 * H, 0], H, H, H, &d_pre[i, 2 * H], &rh[0], 1.0)
            mvT(&wh[0, 0], 2 * H, H, H, &d_pre[i, 0], &carry[0], 1.0, 1.0)
            # du = d_pre[i] @ wx, split into the token and context halves
            mvT(&wx[0, 0], 3 * H, E, E + 2 * H, &d_pre[i, 0], &d_yemb[i, 0], 1.0, 0.0)
            for k in range(2 * H):
                d_ctx_all[i, k] = dc_ext[i, k]
            mvT(&wx[0, 0] + E, 3 * H, 2 * H, E + 2 * H, &d_pre[i, 0], &d_ctx_all[i, 0], 1.0, 1.0)
            for j in range(T_x):
                dalpha[j] = dalpha_ext[i, j]
            mv(&estates[0, 0], T_x, 2 * H, 2 * H, &d_ctx_all[i, 0], &dalpha[0], 1.0, 1.0)
            dot = ddot(&T_x, &dalpha[0], &ONE, <double*> &alphas[i, 0], &ONE)
            for j in range(T_x):
                dq[j] = alphas[i, j] * (dalpha[j] - dot)
            for k in range(A):
                s[k] = 0.0
            for j in range(T_x):
                for k in range(A):
                    a_jk = tanh_cache[i, j, k]
                    d_act = dq[j] * attn_v[k] * (1.0 - a_jk * a_jk)
                    d_attn_v[k] += a_jk * dq[j]
                    d_p[j, k] += d_act
                    s[k] += d_act
            for k in range(A):
                d_attn_b[k] += s[k]
            outer_acc(&d_attn_wd[0, 0], A, H, H, &s[0], dprev, 1.0)
            mvT(&attn_wd[0, 0], A, H, H, &s[0], &carry[0], 1.0, 1.0)
    d_estates = np.asarray(alphas).T @ d_ctx_all_np
    d_wx = d_pre_np.T @ np.hstack([np.asarray(yemb), np.asarray(contexts)])
    d_b = d_pre_np.sum(axis=0)
    return (d_wx, d_wh_np, d_b, d_attn_wd_np, d_attn_b_np, d_attn_v_np,
            d_p_np, d_estates, d_yemb_np, carry_np)
