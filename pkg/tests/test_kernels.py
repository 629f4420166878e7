import numpy as np
import pytest

from pinyintypo.kernels import available_backends, reference

pytestmark = pytest.mark.skipif(
    "c" not in available_backends(), reason="compiled kernel not built"
)


def make_gru_case(rng, t=9, h=8, d=6):
    wx = rng.standard_normal((3 * h, d))
    wh = rng.standard_normal((3 * h, h)) * 0.4
    b = rng.standard_normal(3 * h) * 0.1
    x = rng.standard_normal((t, d))
    h0 = rng.standard_normal(h) * 0.2
    return wx, wh, b, x, h0


def make_decoder_case(rng, t_y=4, t_x=9, h=8, e=6, a=7):
    wx = rng.standard_normal((3 * h, e + 2 * h)) * 0.3
    wh = rng.standard_normal((3 * h, h)) * 0.3
    b = rng.standard_normal(3 * h) * 0.1
    awd = rng.standard_normal((a, h)) * 0.5
    ab = rng.standard_normal(a) * 0.1
    av = rng.standard_normal(a) * 0.5
    estates = rng.standard_normal((t_x, 2 * h))
    p_mat = np.ascontiguousarray(estates @ rng.standard_normal((a, 2 * h)).T)
    yemb = rng.standard_normal((t_y, e))
    d0 = rng.standard_normal(h) * 0.2
    return wx, wh, b, awd, ab, av, p_mat, estates, yemb, d0


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_gru_forward_parity(seed):
    rng = np.random.default_rng(seed)
    wx, wh, b, x, h0 = make_gru_case(rng)
    hp, gp = reference.gru_seq_forward(wx, wh, b, x, h0)
    hc, gc = available_backends()["c"].gru_seq_forward(wx, wh, b, x, h0)
    assert np.allclose(hp, hc, rtol=1e-12, atol=1e-14)
    assert np.allclose(gp, gc, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_gru_backward_parity(seed):
    rng = np.random.default_rng(seed)
    wx, wh, b, x, h0 = make_gru_case(rng)
    h, g = reference.gru_seq_forward(wx, wh, b, x, h0)
    dh = rng.standard_normal(h.shape)
    ref = reference.gru_seq_backward(wx, wh, x, h0, h, g, dh)
    core = available_backends()["c"].gru_seq_backward(wx, wh, x, h0, h, g, dh)
    for a, c in zip(ref, core):
        assert np.allclose(a, c, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_decoder_parity(seed):
    rng = np.random.default_rng(seed)
    case = make_decoder_case(rng)
    core = available_backends()["c"]
    ref_fwd = reference.decoder_seq_forward(*case)
    core_fwd = core.decoder_seq_forward(*case)
    for a, c in zip(ref_fwd, core_fwd):
        assert np.allclose(a, c, rtol=1e-10, atol=1e-12)
    wx, wh, b, awd, ab, av, p_mat, estates, yemb, d0 = case
    t_y, t_x, h = yemb.shape[0], estates.shape[0], wh.shape[1]
    dd = rng.standard_normal((t_y, h))
    dc = rng.standard_normal((t_y, 2 * h))
    da = rng.standard_normal((t_y, t_x))
    ref_bwd = reference.decoder_seq_backward(
        wx, wh, awd, av, estates, yemb, d0, *ref_fwd, dd, dc, da
    )
    core_bwd = core.decoder_seq_backward(
        wx, wh, awd, av, estates, yemb, d0, *core_fwd, dd, dc, da
    )
    for a, c in zip(ref_bwd, core_bwd):
        assert np.allclose(a, c, rtol=1e-10, atol=1e-12)


def test_length_one_sequences():
    rng = np.random.default_rng(5)
    wx, wh, b, x, h0 = make_gru_case(rng, t=1)
    hp, gp = reference.gru_seq_forward(wx, wh, b, x, h0)
    hc, gc = available_backends()["c"].gru_seq_forward(wx, wh, b, x, h0)
    assert np.allclose(hp, hc, rtol=1e-12, atol=1e-14)
    case = make_decoder_case(rng, t_y=1, t_x=1)
    ref_fwd = reference.decoder_seq_forward(*case)
    core_fwd = available_backends()["c"].decoder_seq_forward(*case)
    for a, c in zip(ref_fwd, core_fwd):
        assert np.allclose(a, c, rtol=1e-10, atol=1e-12)


def test_full_model_gradients_agree_across_lanes():
    from pinyintypo.gradcheck import make_check_batch
    from pinyintypo.model import ModelConfig, Parameters
    from pinyintypo import model as model_mod

    cfg = ModelConfig(
        embed_dim=8, hidden_dim=8, source_vocab_size=27, target_vocab_size=12,
        attention_dim=8, seed=3,
    )
    params = Parameters.init(cfg)
    batch = make_check_batch(cfg, np.random.default_rng(21))
    lanes = available_backends()
    results = {}
    saved = model_mod.kernels
    for name, lane in lanes.items():
        model_mod.kernels = lane
        try:
            results[name] = model_mod.loss_and_gradients(params, batch, 1.0)
        finally:
            model_mod.kernels = saved
    ce_py, attn_py, g_py = results["py"]
    ce_c, attn_c, g_c = results["c"]
    assert ce_py == pytest.approx(ce_c, rel=1e-12)
    assert attn_py == pytest.approx(attn_c, rel=1e-12)
    for name, arr in g_py.tensors().items():
        assert np.allclose(arr, g_c.tensors()[name], rtol=1e-9, atol=1e-12), name
