import math

import numpy as np
import pytest

from cfiermodal import dtnfit as df
from cfiermodal.errors import DomainError


def test_curve_shape_peaks_near_k():
    k = 32.0
    c = df.deviation_curve(k, df.reference_kappa2(k), n_max=128)
    assert len(c.n) == 128
    assert np.all(c.r1 >= 0) and np.all(c.r2 >= 0)
    n_peak = c.n[np.argmax(np.maximum(c.r1, c.r2))]
    assert abs(n_peak - k) <= 0.25 * k
    assert c.max_dev == max(c.r1.max(), c.r2.max())


def test_large_kappa2_worse():
    k = 32.0
    ref = df.reference_kappa2(k)
    assert df.deviation_curve(k, 10 * ref).max_dev > df.deviation_curve(k, ref).max_dev


def test_default_n_max_k160():
    c = df.deviation_curve(160.0, df.reference_kappa2(160.0))
    assert c.n[0] == 1 and c.n[-1] == 320


def test_optimize_dominates_reference():
    for k in (64.0, 128.0):
        f = df.optimize_kappa2(k, grid=[0.5, 1.0, 3.0])
        assert f.dev_star <= f.dev_ref
        assert f.kappa2_ref == pytest.approx(0.4 * k ** (1 / 3))


def test_ties_go_to_smaller(monkeypatch):
    class Flat:
        def __init__(self, k, n):
            pass

        def curve(self, kappa2, ps_mode):
            n = np.arange(1, 3)
            return df.DeviationCurve(1.0, kappa2, ps_mode, n, np.ones(2), np.ones(2))

    monkeypatch.setattr(df, "_DtN", Flat)
    f = df.optimize_kappa2(10.0, grid=[3.0, 1.0, 2.0])
    assert f.kappa2_star == min(1.0, df.reference_kappa2(10.0))


def test_deterministic():
    a = df.optimize_kappa2(100.0, ps_mode=True)
    b = df.optimize_kappa2(100.0, ps_mode=True)
    assert a == b


def test_exponent_on_independent_grid():
    g = np.geomspace(0.1, 4 * 512 ** (1 / 3), 400)
    fits = [df.optimize_kappa2(k, grid=g, ps_mode=True) for k in (64.0, 128.0, 256.0, 512.0)]
    assert 0.2 <= df.fit_exponent(fits) <= 0.5


def test_ps_versus_layer_report(capsys):
    # both approximate the same DtN map; agreement within 2x is reported, not required
    for k in (64.0, 128.0):
        kap = df.reference_kappa2(k)
        a = df.deviation_curve(k, kap)
        b = df.deviation_curve(k, kap, ps_mode=True)
        ratio = np.maximum(a.r1, a.r2) / np.maximum(b.r1, b.r2)
        bad = int(np.sum((ratio > 2) | (ratio < 0.5)))
        print(f"k={k:g}: modes outside factor 2: {bad}/{len(ratio)}; ratio range "
              f"[{ratio.min():.3g}, {ratio.max():.3g}]")
        assert np.isfinite(ratio).all()


def test_domain():
    with pytest.raises(DomainError):
        df.deviation_curve(10.0, 0.0)
    with pytest.raises(DomainError):
        df.deviation_curve(-1.0, 1.0)
    with pytest.raises(DomainError):
        df.optimize_kappa2(10.0, grid=[-1.0])
