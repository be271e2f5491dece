import numpy as np
import pytest

from lcfactor import affine as af
from lcfactor import pinhole as ph
from lcfactor import triangulate as tr
from lcfactor.errors import AllLinesParallel, ImagePointAtInfinity, NotUnit, ParallelLines
from sampling import affine_params, pinhole_params, random_general_matrix


def unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def random_lines(rng, k):
    return [tr.Line3(rng.normal(size=3), unit(rng.normal(size=3))) for _ in range(k)]


def objective(X, lines):
    return sum(tr.point_line_distance(X, ln) ** 2 for ln in lines)


def test_projector():
    np.testing.assert_array_equal(tr.line_projector([0, 0, 1]), np.diag([1, 1, 0.0]))
    np.testing.assert_array_equal(tr.line_projector([1, 0, 0]), np.diag([0, 1, 1.0]))
    with pytest.raises(NotUnit):
        tr.line_projector([1, 1, 0])


def test_projector_properties(rng):
    for _ in range(100):
        W = unit(rng.normal(size=3))
        P = tr.line_projector(W)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(P @ W, 0, atol=1e-12)
        np.testing.assert_array_equal(P, P.T)
        np.testing.assert_array_equal(P, tr.line_projector(-W))
        assert np.linalg.matrix_rank(P) == 2


def test_line_requires_unit():
    with pytest.raises(NotUnit):
        tr.Line3([0, 0, 0], [0, 0, 2])
    ln = tr.Line3.through([0, 0, 0], [0, 0, 2])
    np.testing.assert_array_equal(ln.W, [0, 0, 1])


def test_distance():
    x_axis = tr.Line3([0, 0, 0], [1, 0, 0])
    assert tr.point_line_distance([5, 0, 0], x_axis) == 0
    assert tr.point_line_distance([0, 1, 0], x_axis) == 1


def test_distance_alternate_formula(rng):
    for _ in range(50):
        (ln,) = random_lines(rng, 1)
        X = rng.normal(size=3)
        d = X - ln.X
        want = np.linalg.norm(d - (d @ ln.W) * ln.W)
        assert tr.point_line_distance(X, ln) == pytest.approx(want, rel=1e-14)
        P = tr.line_projector(ln.W)
        assert tr.point_line_distance(X, ln) == pytest.approx(np.linalg.norm(P @ d), rel=1e-12)


def test_symmedian_examples():
    l1 = tr.Line3([0, 0, 0], [1, 0, 0])
    l2 = tr.Line3([0, 1, 0], [0, 0, 1])
    res = tr.symmedian_point([l1, l2])
    np.testing.assert_allclose(res.X_star, [0, 0.5, 0], atol=1e-15)
    np.testing.assert_allclose(res.distances, [0.5, 0.5])
    np.testing.assert_allclose(tr.midpoint_two_view(l1, l2), [0, 0.5, 0], atol=1e-15)
    axes = [tr.Line3([0, 0, 0], e) for e in np.eye(3)]
    np.testing.assert_allclose(tr.symmedian_point(axes).X_star, 0, atol=1e-15)


def test_parallel_lines():
    l1 = tr.Line3([0, 0, 0], [1, 0, 0])
    l2 = tr.Line3([0, 1, 0], [1, 0, 0])
    with pytest.raises(AllLinesParallel):
        tr.symmedian_point([l1, l2])
    with pytest.raises(ParallelLines):
        tr.midpoint_two_view(l1, l2)
    with pytest.raises(ValueError):
        tr.symmedian_point([l1])


def test_intersecting_lines():
    X = np.array([1.0, 2.0, 3.0])
    l1 = tr.Line3(X + [1, 0, 0], [1, 0, 0])
    l2 = tr.Line3(X - [0, 1, 1], unit([0, 1, 1]))
    np.testing.assert_allclose(tr.midpoint_two_view(l1, l2), X, atol=1e-14)
    np.testing.assert_allclose(tr.symmedian_point([l1, l2]).X_star, X, atol=1e-14)


def test_two_view_equivalence(rng):
    for _ in range(200):
        l1, l2 = random_lines(rng, 2)
        m = tr.midpoint_two_view(l1, l2)
        s = tr.symmedian_point([l1, l2]).X_star
        np.testing.assert_allclose(s, m, atol=1e-10 * max(1, np.linalg.norm(m)))


def test_zero_gradient(rng):
    h = 1e-5
    for _ in range(50):
        lines = random_lines(rng, rng.integers(3, 7))
        res = tr.symmedian_point(lines)
        X = res.X_star
        g = np.array([
            (objective(X + h * e, lines) - objective(X - h * e, lines)) / (2 * h) for e in np.eye(3)
        ])
        assert np.linalg.norm(g) <= 1e-6 * max(1.0, res.objective)


def test_never_beaten_by_local_search(rng):
    for _ in range(30):
        lines = random_lines(rng, rng.integers(3, 7))
        res = tr.symmedian_point(lines)
        best = res.objective
        for _ in range(20):
            Y = res.X_star + rng.normal(scale=10 ** rng.uniform(-6, 0), size=3)
            assert objective(Y, lines) >= best * (1 - 1e-10)


def test_sign_invariance(rng):
    for _ in range(50):
        lines = random_lines(rng, 4)
        flipped = [tr.Line3(ln.X, -ln.W) if i % 2 else ln for i, ln in enumerate(lines)]
        a = tr.symmedian_point(lines).X_star
        b = tr.symmedian_point(flipped).X_star
        np.testing.assert_allclose(a, b, atol=1e-14, rtol=0)


# --- lines from factors ---------------------------------------------------------


def test_principal_ray_identity_pinhole():
    fac = ph.PinholeLCFactors(-1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0)
    ln = tr.line_from_pinhole(fac, (0, 0))
    np.testing.assert_allclose(ln.X, [0, 0, 1], atol=1e-15)
    assert abs(abs(ln.W @ [0, 0, 1]) - 1) < 1e-15


def test_identity_ortho_affine_line():
    fac = af.AffineLCFactors(0, 0, 1, 1, 0, 0, 0, 0)
    ln = tr.line_from_affine(fac, (2.5, -1.5))
    np.testing.assert_allclose(ln.X, [2.5, -1.5, 0])
    np.testing.assert_array_equal(ln.W, [0, 0, 1])


def _project(P, X):
    x = P @ np.append(X, 1.0)
    return x[:2] / x[2]


def test_world_point_on_line(rng):
    for _ in range(100):
        X = rng.normal(size=3)
        fac = ph.PinholeLCFactors(**pinhole_params(rng, rng.choice(["plus", "minus"])))
        ln = tr.line_from_pinhole(fac, _project(ph.compose(fac)[0], X))
        assert tr.point_line_distance(X, ln) <= 1e-8 * max(1, np.linalg.norm(X - ln.X))
        fac = af.AffineLCFactors(**affine_params(rng, rng.choice(["plus", "minus"])))
        ln = tr.line_from_affine(fac, _project(af.compose_affine(fac)[0], X))
        assert tr.point_line_distance(X, ln) <= 1e-8


def test_general_linear_line(rng):
    for _ in range(50):
        P = random_general_matrix(rng)
        fac = af.lc_factorize_affine(P)[0]
        X = rng.normal(size=3)
        x = P @ np.append(X, 1)
        if abs(x[2]) < 1e-3 * np.linalg.norm(x):
            continue
        ln = tr.line_from_factors(fac, x[:2] / x[2])
        assert tr.point_line_distance(X, ln) <= 1e-8 * max(1, np.linalg.norm(X - ln.X))


def test_image_point_at_infinity():
    # row reduction maps pixels with u = 1 of this camera to infinity
    P = np.array([[1, 2, 3, 4], [0, 1, 5, 2], [1, 2, 3, 5.0]])
    fac = af.lc_factorize_affine(P)[0]
    with pytest.raises(ImagePointAtInfinity):
        tr.line_from_affine(fac, (1.0, 2.0))


def test_line_from_factors_type():
    with pytest.raises(TypeError):
        tr.line_from_factors(object(), (0, 0))


# --- batch ----------------------------------------------------------------------


def test_batch_matches_single(rng):
    tracks = [random_lines(rng, rng.integers(2, 6)) for _ in range(100)]
    par = [tr.Line3([0, 0, 0], [1, 0, 0]), tr.Line3([0, 1, 0], [-1, 0, 0])]
    tracks.insert(7, par)
    for backend in tr.kernels.AVAILABLE:
        out = tr.symmedian_batch(tracks, backend=backend)
        assert isinstance(out[7], AllLinesParallel)
        for t, res in zip(tracks, out):
            if t is par:
                continue
            ref = tr.symmedian_point(t)
            scale = ref.condition * max(1.0, np.linalg.norm(ref.X_star))
            np.testing.assert_allclose(res.X_star, ref.X_star, atol=1e-12 * scale)
            np.testing.assert_allclose(res.distances, ref.distances, atol=1e-12 * scale)
            assert res.smallest_singular_value == pytest.approx(ref.smallest_singular_value, rel=1e-9)


def test_batch_validation():
    assert tr.symmedian_batch([]) == []
    with pytest.raises(ValueError):
        tr.symmedian_batch([[tr.Line3([0, 0, 0], [1, 0, 0])]])
