import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from saddlescape.problems import (
    eigen_problem,
    fixed_curvature_saddle,
    quadratic,
    random_eigen_problem,
)

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def builtin_objectives():
    """Every objective family the package ships, in a few sizes."""
    return [
        eigen_problem([2.0, 1.0]),
        eigen_problem([3.0, 1.0, 0.5, 0.0], orientation=3),
        random_eigen_problem(8, seed=1),
        random_eigen_problem(20, seed=7, lambda1=10.0, gap=5.0),
        quadratic([1.0, -1.0]),
        quadratic([3.0, 1.0, -2.0], basis=5),
        fixed_curvature_saddle(30, 0.1, 1.0, seed=2),
    ]


@pytest.fixture(params=range(7), ids=lambda i: builtin_objectives()[i].name + f"-{i}")
def objective(request):
    return builtin_objectives()[request.param]


def ball_point(rng, d, radius):
    """Uniform point in the ball (finite radius) or a unit-scale Gaussian point."""
    if not np.isfinite(radius):
        return rng.standard_normal(d)
    z = rng.standard_normal(d)
    return radius * rng.random() ** (1.0 / d) * z / np.linalg.norm(z)


def gd_suite(n_traj=20, steps=1000):
    """(objective, GD trajectory with stored iterates, eta) triples for the Lemma checks."""
    from saddlescape.optimizers import run_gd

    objs = builtin_objectives()
    out = []
    for k in range(n_traj):
        obj = objs[k % len(objs)]
        rng = np.random.default_rng(100 + k)
        radius = obj.test_radius if np.isfinite(obj.test_radius) else 1.0
        x0 = 0.5 * ball_point(rng, obj.dim, radius)
        eta = 1.0 / obj.grad_lipschitz
        # saddle quadratics are unbounded below, so keep their iterates finite
        T = min(steps, 200) if getattr(obj, "lambda_min", 0.0) < 0 else steps
        tr = run_gd(obj, x0, eta, T, store_x=True)
        out.append((obj, tr, eta))
    return out
