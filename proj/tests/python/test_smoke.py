import math
import os
import pathlib

import pytest

hd = pytest.importorskip("heston_degen")

CONFIGS = pathlib.Path(os.environ.get("HESTON_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def set1():
    return hd.ModelParams(sigma=0.3, kappa=2.0, theta=0.04, rho=-0.7, r=0.03, q=0.0)


def test_version_and_bound():
    assert hd.__version__.startswith("heston-degen")
    assert hd.beta_strict_bound() == pytest.approx((1 + math.sqrt(17)) / 2, abs=1e-15)


def test_validate_default_weights():
    p = set1()
    rep = hd.validate(p, hd.default_weights(p, 2.5))
    assert rep.admissible
    assert rep.feller_margin == pytest.approx(2 * 0.04 - 0.045)
    assert "feller" in rep.describe().lower()


def test_reference_price_and_parity():
    p = set1()
    call = hd.price_reference(p, "call", 1.0, 0.0, 0.04, 1.0)
    put = hd.price_reference(p, "put", 1.0, 0.0, 0.04, 1.0)
    assert call == pytest.approx(0.0924252107396, abs=2e-6)
    assert call - put == pytest.approx(1.0 - math.exp(-0.03), abs=1e-9)
    with pytest.raises(ValueError):
        hd.price_reference(p, "straddle", 1.0, 0.0, 0.04, 1.0)


def test_monte_carlo_is_reproducible_and_close():
    p = set1()
    a = hd.price_mc(p, "call", 1.0, 0.0, 0.04, 1.0, paths=4000, steps=50, seed=3)
    b = hd.price_mc(p, "call", 1.0, 0.0, 0.04, 1.0, paths=4000, steps=50, seed=3)
    assert a == b
    cf = hd.price_reference(p, "call", 1.0, 0.0, 0.04, 1.0)
    assert abs(a["price"] - cf) < 4 * a["std_error"] + 2e-3


def test_black_scholes_two_ways():
    a = hd.black_scholes("call", 1.1, 1.0, 0.03, 0.01, 0.04, 0.7)
    b = hd.black_scholes_heat("call", 1.1, 1.0, 0.03, 0.01, 0.04, 0.7)
    assert a == pytest.approx(b, abs=1e-6)


def test_heat_convolution_keeps_affine_data():
    x = [0.01 * k for k in range(-1000, 1001)]
    u = [1.0 + 2.0 * v for v in x]
    xs, us = hd.heat_convolve(x, u, 0.2)
    assert len(xs) > 0
    assert max(abs(b - (1.0 + 2.0 * a)) for a, b in zip(xs, us)) < 1e-10


def test_config_and_pde_price():
    cfg = hd.load_config(str(CONFIGS / "quick.cfg"))
    assert cfg.grid_shape == (40, 24)
    assert cfg.scheme == "implicit-euler"
    (pde,) = hd.price_pde(cfg)
    x, xi = cfg.points[0]
    cf = hd.price_reference(cfg.absorbed, "call", 1.0, x, cfg.absorbed.sigma * xi, cfg.T)
    assert abs(pde - cf) / cf < 0.05
    assert "[model]" in cfg.render()
    with pytest.raises(hd.ConfigError):
        hd.parse_config("[model]\nsigma = oops\n")


def test_cli_round_trip(tmp_path):
    code, out, err = hd.run_cli(["validate", "--config", str(CONFIGS / "set1.cfg")])
    assert code == 0, err
    code, _, _ = hd.run_cli(["validate", "--config", str(CONFIGS / "bad_feller.cfg")])
    assert code == 1
    code, _, err = hd.run_cli(["price", "--config", str(CONFIGS / "quick.cfg"), "--method", "cf", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "price.csv").read_text().startswith("method,x,xi,price,half_width,runtime_ms")
    assert hd.run_cli(["nonsense"])[0] == 2


def test_imbedding_ratios_are_bounded():
    ratios = hd.imbedding_ratios("poly_bump", 5, 4, 1.5, 6.0)
    assert len(ratios) == 4
    assert all(0 < hs < 10 and h2 > 0 for hs, h2 in ratios)
