import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ovalgame.costs import (
    Affine,
    PointDistance,
    SignedDistanceCost,
    WeightedMinDistance,
    clarke_samples,
    constant,
    cost_gradient_sample,
    eval_cost,
)
from ovalgame.errors import InvalidConfig
from ovalgame.shapes import Box, Disk, Polygon, Union, signed_distance

SQUARE = Polygon([[0, 0], [2, 0], [2, 2], [0, 2]])
TRIANGLE = Polygon([[0, 0], [0, 3], [4, 0]])  # clockwise on purpose

SHAPES = {
    "disk": Disk([0.5, -0.2], 1.3),
    "box": Box([-1, -0.5], [2, 1.5]),
    "square": SQUARE,
    "triangle": TRIANGLE,
    "union": Union((Disk([-2, 0], 1), Disk([2, 0], 1))),
    "mixed": Union((Disk([0, 3], 0.5), Box([-1, -1], [1, 1]), TRIANGLE)),
}


def dense_boundary(shape, k=20000):
    """Boundary samples independent of the distance formulas."""
    t = np.linspace(0, 1, k, endpoint=False)
    if isinstance(shape, Disk):
        th = 2 * np.pi * t
        return shape.center + shape.radius * np.stack([np.cos(th), np.sin(th)], 1)
    V = shape.vertices
    W = np.roll(V, -1, axis=0)
    per = k // len(V)
    s = np.linspace(0, 1, per, endpoint=False)[:, None]
    return np.concatenate([a + s * (b - a) for a, b in zip(V, W)])


def inside_by_halfplanes(poly, x):
    V = poly.vertices
    E = np.roll(V, -1, axis=0) - V
    cross = E[:, 0] * (x[1] - V[:, 1]) - E[:, 1] * (x[0] - V[:, 0])
    return np.all(cross >= 0)


class TestExamples:
    def test_point_distance(self):
        assert eval_cost(PointDistance([0, 0]), [3, 4]) == 5.0

    def test_disk_centre_depth(self):
        assert eval_cost(SignedDistanceCost(Disk([0, 0], 1)), [0, 0]) == -1.0

    def test_min_of_distances(self):
        g = WeightedMinDistance([[-10, 0], [10, 0]])
        assert eval_cost(g, [0, 1]) == pytest.approx(np.sqrt(101))

    def test_gradient_examples(self):
        assert np.allclose(cost_gradient_sample(PointDistance([0, 0]), [3, 4]), [0.6, 0.8])
        assert cost_gradient_sample(WeightedMinDistance([[-10, 0], [10, 0]]), [0, 7]) is None
        assert np.allclose(cost_gradient_sample(SignedDistanceCost(Disk([0, 0], 1)), [0, 3]), [0, 1])

    def test_shape_examples(self):
        unit = Disk([0, 0], 1)
        assert signed_distance(unit, [2, 0]) == 1.0
        assert signed_distance(unit, [0, 0]) == -1.0
        assert signed_distance(SHAPES["union"], [0, 0]) == pytest.approx(1.0)

    def test_affine_and_constant(self):
        g = Affine([1, -2], 0.5)
        assert eval_cost(g, [1, 1]) == pytest.approx(-0.5)
        c = constant(3.0, 2)
        assert c.is_constant and eval_cost(c, [5, 5]) == 3.0
        assert np.allclose(c.gradient([1, 2]), 0)


class TestValidation:
    def test_bad_disk(self):
        with pytest.raises(InvalidConfig):
            Disk([0, 0], 0)

    def test_bad_box(self):
        with pytest.raises(InvalidConfig):
            Box([0, 0], [1, -1])

    def test_nonconvex_polygon(self):
        with pytest.raises(InvalidConfig):
            Polygon([[0, 0], [2, 0], [1, 0.2], [1, 2]])

    def test_negative_weight(self):
        with pytest.raises(InvalidConfig):
            PointDistance([0, 0], weight=-1)

    def test_union_dimension_mismatch(self):
        with pytest.raises(InvalidConfig):
            Union((Disk([0, 0], 1), Disk([0, 0, 0], 1)))


class TestSignedDistance:
    @pytest.mark.parametrize("name", ["square", "triangle", "disk"])
    def test_matches_dense_boundary(self, name, rng):
        shape = SHAPES[name]
        B = dense_boundary(shape)
        X = rng.uniform(-3, 5, (300, 2))
        d = np.min(np.linalg.norm(X[:, None] - B[None], axis=2), axis=1)
        if isinstance(shape, Polygon):
            sign = np.array([-1 if inside_by_halfplanes(shape, x) else 1 for x in X])
        else:
            sign = np.where(np.linalg.norm(X - shape.center, axis=1) < shape.radius, -1, 1)
        assert np.allclose(shape.signed_distance(X), sign * d, atol=2e-3)

    def test_box_matches_polygon(self, rng):
        box = Box([-1, -0.5], [2, 1.5])
        poly = Polygon([[-1, -0.5], [2, -0.5], [2, 1.5], [-1, 1.5]])
        X = rng.uniform(-3, 4, (500, 2))
        assert np.allclose(box.signed_distance(X), poly.signed_distance(X), atol=1e-12)

    @pytest.mark.parametrize("name", sorted(SHAPES))
    def test_one_lipschitz(self, name, rng):
        shape = SHAPES[name]
        X1 = rng.uniform(-5, 5, (10000, 2))
        X2 = X1 + rng.normal(scale=rng.uniform(0.01, 3), size=X1.shape)
        lhs = np.abs(shape.signed_distance(X1) - shape.signed_distance(X2))
        assert np.all(lhs <= np.linalg.norm(X1 - X2, axis=1) + 1e-12)

    @pytest.mark.parametrize("name", ["square", "triangle", "disk"])
    def test_zero_on_boundary(self, name):
        shape = SHAPES[name]
        assert np.allclose(shape.signed_distance(dense_boundary(shape, 400)), 0, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(SHAPES))
    def test_gradient_matches_fd(self, name, rng):
        shape = SHAPES[name]
        h = 1e-7
        checked = 0
        for x in rng.uniform(-4, 5, (200, 2)):
            g = shape.gradient(x)
            if g is None:
                continue
            fd = np.array([(shape.signed_distance(x + h * e) - shape.signed_distance(x - h * e)) / (2 * h)
                           for e in np.eye(2)])
            if np.linalg.norm(fd - g) <= 1e-5:
                checked += 1
        # disagreement is only possible within h of a kink
        assert checked >= 195

    def test_gradient_none_at_kinks(self):
        assert Disk([0, 0], 1).gradient([0, 0]) is None
        assert SQUARE.gradient([1, 1]) is None  # centre: all edges equidistant
        assert SQUARE.gradient([2, 2]) is None  # vertex
        assert SHAPES["union"].gradient([0, 1]) is None

    def test_polygon_centre(self):
        assert np.allclose(SQUARE.deepest_point(), [1, 1], atol=1e-9)

    def test_box_rotation_becomes_polygon(self):
        c, s = np.cos(0.3), np.sin(0.3)
        R = np.array([[c, -s], [s, c]])
        moved = Box([0, 0], [1, 2]).moved(R, [1, 1])
        assert isinstance(moved, Polygon)
        x = np.array([0.2, 1.7])
        assert moved.signed_distance(R @ x + [1, 1]) == pytest.approx(Box([0, 0], [1, 2]).signed_distance(x))


class TestCosts:
    @given(st.integers(0, 10**6))
    def test_lipschitz_bounds(self, seed):
        rng = np.random.default_rng(seed)
        costs = [
            PointDistance(rng.normal(size=2), weight=rng.uniform(0, 3)),
            WeightedMinDistance(rng.normal(size=(3, 2)) * 3, rng.uniform(0, 2, 3), rng.normal(size=3)),
            Affine(rng.normal(size=2)),
            SignedDistanceCost(SHAPES["mixed"]),
        ]
        X1 = rng.uniform(-5, 5, (200, 2))
        X2 = rng.uniform(-5, 5, (200, 2))
        for g in costs:
            assert np.all(np.abs(g(X1) - g(X2)) <= g.lipschitz_bound * np.linalg.norm(X1 - X2, axis=1) + 1e-12)

    def test_pieces_recover_cost(self, rng):
        g = WeightedMinDistance([[0, 5], [3, -1]], [1.0, 2.0], [0.5, -0.5])
        X = rng.normal(size=(50, 2)) * 4
        assert np.allclose(g(X), np.min([p(X) for p in g.pieces()], axis=0))
        u = SignedDistanceCost(SHAPES["mixed"])
        assert np.allclose(u(X), np.min([p(X) for p in u.pieces()], axis=0))

    def test_clarke_samples_at_kink(self):
        g = WeightedMinDistance([[-10, 0], [10, 0]])
        Q = clarke_samples(g, [0, 0])
        assert len(Q) == 2
        assert sorted(round(q[0], 6) for q in Q) == [-1.0, 1.0]

    def test_clarke_samples_smooth(self):
        Q = clarke_samples(PointDistance([0, 0]), [3, 4])
        assert len(Q) == 1

    def test_moved_costs_are_equivariant(self, rng):
        c, s = np.cos(1.1), np.sin(1.1)
        R = np.array([[c, -s], [s, c]])
        t = np.array([0.3, -2.0])
        X = rng.normal(size=(20, 2)) * 3
        for g in [PointDistance([1, 2]), WeightedMinDistance([[1, 2], [-3, 0]]), Affine([1, -1], 2.0),
                  SignedDistanceCost(SHAPES["mixed"])]:
            assert np.allclose(g.moved(R, t)(X @ R.T + t), g(X), atol=1e-12)
