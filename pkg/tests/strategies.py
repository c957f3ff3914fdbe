"""Hypothesis strategies for random convex sets and points."""
import numpy as np
from hypothesis import strategies as st

from distset import geometry as geo

finite = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)
radii = st.floats(0.2, 3.0)


def vectors(d):
    return st.lists(finite, min_size=d, max_size=d).map(np.array)


@st.composite
def spd(draw, d):
    M = np.array(draw(st.lists(finite, min_size=d * d, max_size=d * d))).reshape(d, d)
    return M @ M.T / (d * 25.0) + 0.3 * np.eye(d)


@st.composite
def convex_sets(draw, families=("l1", "l2", "ellipsoid", "point"), max_dim=4):
    d = draw(st.integers(1, max_dim))
    fam = draw(st.sampled_from(families))
    c = draw(vectors(d))
    if fam == "l1":
        return geo.L1Ball(c, draw(radii))
    if fam == "l2":
        return geo.L2Ball(c, draw(radii))
    if fam == "ellipsoid":
        return geo.Ellipsoid(draw(spd(d)), draw(radii), c)
    if fam == "ellipsoid-affine":
        m = draw(st.integers(1, 3))
        A = np.array(draw(st.lists(finite, min_size=m * d, max_size=m * d))).reshape(m, d)
        b = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=m, max_size=m)))
        return geo.EllipsoidAffine(draw(spd(d)), draw(radii), A, b, c)
    return geo.Point(c)


@st.composite
def set_and_points(draw, k=1, **kw):
    S = draw(convex_sets(**kw))
    pts = [geo.anchor(S) + draw(vectors(S.dim)) for _ in range(k)]
    return (S, *pts)
