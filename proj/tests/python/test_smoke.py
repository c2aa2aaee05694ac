"""Smoke tests for the python bindings."""

import io
import math

import numpy as np
import pytest

import edgepress as ep


def structured(h, w, seed):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.zeros((h, w))
    for _ in range(4):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        rad = rng.uniform(h / 8, h / 2)
        img += rng.uniform(0.3, 1.0) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / rad**2)
    img = 0.1 + 0.8 * img / img.max()
    img[h // 4 : h // 2, w // 4 : w // 2] = 0.95
    return img


def test_codec_roundtrip_and_framing():
    img = structured(32, 48, 0)
    data = ep.jpeg_encode(img, 90)
    assert data[:2] == b"\xff\xd8" and data[-2:] == b"\xff\xd9"
    dec = ep.jpeg_decode(data)
    assert dec.shape == (32, 48)
    ref = ep.jpeg_reference_roundtrip(img, 90)
    np.testing.assert_array_equal(dec, ref)  # pipeline-exact


def test_codec_bitrate_monotone():
    img = structured(48, 48, 1)
    sizes = [len(ep.jpeg_encode(img, qf)) for qf in (10, 50, 90)]
    assert sizes[0] <= sizes[1] <= sizes[2]
    assert ep.bits_per_pixel(1000, 512, 512) == pytest.approx(8000 / 262144)


def test_pillow_interop():
    PIL = pytest.importorskip("PIL.Image")
    img = structured(40, 40, 2)
    data = ep.jpeg_encode(img, 75)
    with io.BytesIO(data) as fh:
        pil = PIL.open(fh)
        pil.load()
    assert pil.mode == "L"
    assert pil.size == (40, 40)
    theirs = np.asarray(pil, dtype=np.float64) / 255.0
    ours = ep.jpeg_decode(data)
    assert np.abs(theirs - ours).max() <= 2 / 255


def test_quant_tables():
    assert (ep.quant_table(100) == 1).all()
    q50 = ep.quant_table(50)
    assert q50[0, 0] == 16 and q50[7, 7] == 99


def test_metric_identities():
    img = structured(64, 64, 3)
    assert math.isinf(ep.psnr(img, img))
    assert ep.ssim(img, img) == 1.0
    assert ep.ms_ssim(img, img) == 1.0
    noisy = np.clip(img + 0.05 * np.random.default_rng(0).standard_normal(img.shape), 0, 1)
    assert ep.psnrb(img, noisy) <= ep.psnr(img, noisy)
    shifted = img + 16 / 255
    assert ep.psnr(img, shifted) == pytest.approx(20 * math.log10(255 / 16), abs=1e-9)


def test_canny_and_miou():
    img = structured(64, 64, 4)
    edges = ep.canny(img)
    assert edges.shape == img.shape
    assert set(np.unique(edges)) <= {0, 1}
    assert 0 < ep.edge_density(edges) < 1
    assert ep.miou(edges, edges) == 1.0


def test_losses():
    pred = structured(32, 32, 5)
    target = structured(32, 32, 6)
    edges = ep.canny(target)
    v_mse, g_mse = ep.mse_loss(pred, target)
    v_edge, _ = ep.edge_aware_loss(pred, target, edges, alpha=0.75)
    assert 0.75 * v_mse <= v_edge <= v_mse
    v_alpha1, g_alpha1 = ep.edge_aware_loss(pred, target, edges, alpha=1.0)
    assert v_alpha1 == v_mse
    np.testing.assert_array_equal(g_alpha1, g_mse)


def test_bd_identities():
    bpp = [0.1, 0.2, 0.4, 0.8]
    q = [28.0, 31.0, 34.0, 36.0]
    assert ep.bd_psnr(bpp, q, bpp, q) == pytest.approx(0.0, abs=1e-9)
    assert ep.bd_psnr(bpp, q, bpp, [v + 1 for v in q]) == pytest.approx(1.0, abs=1e-3)
    assert ep.bd_rate(bpp, q, [2 * r for r in bpp], q) == pytest.approx(100.0, abs=0.1)


def test_model_shapes_and_roundtrip(tmp_path):
    fr = ep.Model.create("FR", qf=10, seed=1, features=8, blocks=1)
    img = structured(32, 32, 7)
    assert fr.prn_forward(img).shape == (32, 32)
    cr = ep.Model.create("CR", qf=10, seed=1, features=8, blocks=1)
    assert cr.prn_forward(img).shape == (16, 16)

    recon, stream = cr.roundtrip(img)
    assert recon.shape == img.shape
    assert stream[:2] == b"\xff\xd8"

    path = tmp_path / "model.bin"
    cr.save(str(path))
    back = ep.Model.load(str(path))
    assert back.mode == "CR" and back.qf == 10
    recon2, stream2 = back.roundtrip(img)
    assert stream2 == stream
    np.testing.assert_array_equal(recon2, recon)


def test_param_count():
    m = ep.Model.create("FR", qf=10, seed=1)
    # PrN desk config alone is 19393 learnables
    prn_count = 640 + 32 * (64 * 9 + 1) + (32 * 9 + 1)
    assert m.param_count > prn_count


def test_tiny_training_runs():
    images = [structured(32, 32, 10 + i) for i in range(2)]
    model = ep.train(images, mode="FR", qf=10, epochs=1, iterations_per_module=1,
                     batch_size=2, warmup_epochs=1, seed=3, features=8, blocks=1)
    recon, stream = model.roundtrip(images[0])
    assert recon.shape == (32, 32)
    assert len(stream) > 0
