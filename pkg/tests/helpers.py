"""Shared helpers for the test suite."""

import numpy as np


def unit_sphere_points(rng, n_points, dim):
    """I.i.d. uniform points on the unit sphere in R^dim."""
    points = rng.standard_normal((n_points, dim))
    return points / np.linalg.norm(points, axis=1, keepdims=True)
