import numpy as np
import pytest

import hqfno


def test_parameter_deltas():
    base = hqfno.count_params()["total"]
    assert base - hqfno.count_params(c_q=5, mixer="vqc")["total"] == 28799619
    assert hqfno.count_params(c_q=5, mixer="vqc")["quantum_per_layer"] == 127


def test_config_rejects_unknown_keys():
    assert hqfno.resolve_config()["model"]["width"] == 32
    with pytest.raises(hqfno.ConfigError):
        hqfno.resolve_config({"model": {"widht": 3}})
    with pytest.raises(hqfno.ConfigError):
        hqfno.count_params(c_q=3, mixer="none")


def test_h_star_round_trip():
    h = hqfno.h_star(100.0, 0.5)
    assert h == pytest.approx(5.322287547849002)
    assert hqfno.speed_for(h, 100.0) == pytest.approx(0.5)


def test_fields_and_metrics():
    t, a = hqfno.generate_fields(120.0, 0.4, 8, 8, 6)
    assert t.shape == (8, 8, 6) and a.shape == (8, 8, 6)
    assert np.all((a >= 0) & (a <= 1))
    mae, rmse = hqfno.field_errors(t, t)
    assert mae == 0 and rmse == 0
    assert hqfno.iou(a, a) == 1.0


def test_model_predict_and_checkpoint(tmp_path):
    cfg = dict(width=4, modes=[2, 2, 2], padding=1, decoder_width=5, layers=2, c_q=2, mixer="vqc")
    m = hqfno.Model.random(seed=3, **cfg)
    x = m.make_input(100.0, 0.5, (6, 5, 4))
    t, a = m.predict(x)
    assert t.shape == (1, 1, 6, 5, 4) and np.all(np.isfinite(t))
    m.save(tmp_path / "m.ckpt")
    back = hqfno.Model.load(tmp_path / "m.ckpt")
    assert back.trainable_count() == m.trainable_count()
    t2, _ = back.predict(x)
    assert np.array_equal(t, t2)
    (tmp_path / "bad.ckpt").write_bytes(b"junk")
    with pytest.raises(hqfno.LoadError):
        hqfno.Model.load(tmp_path / "bad.ckpt")


def test_diagnostics():
    assert hqfno.fim_eigenvalues(0, 1, 2, 2, 0) == pytest.approx([1.0])
    assert hqfno.fourier_support(1, 2, 32, 0) == [-2, -1, 0, 1, 2]
