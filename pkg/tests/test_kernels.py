import importlib
import sys

import numpy as np
import pytest

from lcfactor import _pykernels, kernels

needs_cython = pytest.mark.skipif("cython" not in kernels.AVAILABLE, reason="extension not built")


def flat_tracks(rng, T, kmin=2, kmax=6):
    k = rng.integers(kmin, kmax + 1, T)
    off = np.concatenate([[0], np.cumsum(k)])
    a = rng.normal(size=(off[-1], 3))
    w = rng.normal(size=(off[-1], 3))
    w /= np.linalg.norm(w, axis=1)[:, None]
    return a, w, off


def test_backend_selection():
    assert kernels.BACKEND in kernels.AVAILABLE
    assert kernels.get_backend("python") is _pykernels
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_fallback_when_extension_missing(monkeypatch):
    import lcfactor

    monkeypatch.setitem(sys.modules, "lcfactor._ckernels", None)
    monkeypatch.delattr(lcfactor, "_ckernels", raising=False)
    try:
        mod = importlib.reload(kernels)
        assert mod.BACKEND == "python"
        assert mod.AVAILABLE == ("python",)
        with pytest.raises(ImportError):
            mod.get_backend("cython")
    finally:
        monkeypatch.undo()
        importlib.reload(kernels)


@pytest.mark.parametrize("backend", kernels.AVAILABLE)
def test_against_dense_solve(rng, backend):
    a, w, off = flat_tracks(rng, 200)
    X, lmin, lmax, ok = kernels.symmedian_batch(a, w, off, backend=backend)
    for t in range(200):
        sl = slice(off[t], off[t + 1])
        S = sum(np.eye(3) - np.outer(wi, wi) for wi in w[sl])
        b = sum((np.eye(3) - np.outer(wi, wi)) @ ai for ai, wi in zip(a[sl], w[sl]))
        ev = np.linalg.eigvalsh(S)
        assert ok[t]
        assert lmin[t] == pytest.approx(ev[0], rel=1e-9, abs=1e-12)
        assert lmax[t] == pytest.approx(ev[2], rel=1e-12)
        want = np.linalg.solve(S, b)
        tol = 1e-12 * (ev[2] / ev[0]) * max(1, np.linalg.norm(want))
        np.testing.assert_allclose(X[t], want, atol=tol)


@needs_cython
def test_backends_agree(rng):
    a, w, off = flat_tracks(rng, 1000)
    Xc, lc, hc, okc = kernels.symmedian_batch(a, w, off, backend="cython")
    Xp, lp, hp, okp = kernels.symmedian_batch(a, w, off, backend="python")
    np.testing.assert_array_equal(okc, okp)
    cond = hp / lp
    err = np.linalg.norm(Xc - Xp, axis=1) / np.maximum(1, np.linalg.norm(Xp, axis=1))
    assert np.all(err <= 1e-12 * cond)
    dc = kernels.line_distances(Xc, a, w, off, backend="cython")
    dp = kernels.line_distances(Xc, a, w, off, backend="python")
    np.testing.assert_allclose(dc, dp, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("backend", kernels.AVAILABLE)
def test_structured_inputs(backend):
    # diagonal and repeated-eigenvalue normal matrices
    e = np.eye(3)
    a = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0.0]])
    w = np.array([e[0], e[2], e[0], e[1], e[2]])
    off = np.array([0, 2, 5])
    X, lmin, lmax, ok = kernels.symmedian_batch(a, w, off, backend=backend)
    np.testing.assert_allclose(X[0], [0, 0.5, 0], atol=1e-15)
    np.testing.assert_allclose(X[1], 0, atol=1e-15)
    assert (lmin[1], lmax[1]) == pytest.approx((2, 2))
    d = kernels.line_distances(X, a, w, off, backend=backend)
    np.testing.assert_allclose(d, [0.5, 0.5, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("backend", kernels.AVAILABLE)
def test_parallel_flagged(backend):
    a = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0], [1, 0, 0.0]])
    w = np.array([[1, 0, 0], [-1, 0, 0], [0, 0, 1], [0, 1, 0.0]])
    X, lmin, lmax, ok = kernels.symmedian_batch(a, w, [0, 2, 4], backend=backend)
    assert ok.tolist() == [False, True]
    assert np.all(np.isnan(X[0]))
    assert np.all(np.isfinite(X[1]))


def test_benchmark_smoke(capsys):
    import runpy
    from pathlib import Path

    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(script))
    mod["main"](["--tracks", "50", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "50 tracks" in out
    for name in kernels.AVAILABLE:
        assert name in out
