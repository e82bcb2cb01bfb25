import math

import numpy as np
import pytest

import steklov_cusp as sc


@pytest.fixture(scope="module")
def cusp_mesh():
    return sc.build_mesh(sc.DomainSpec.cusp(1.5), refinements=0)


def test_cap_intersection_on_both_curves():
    alpha = 1.5
    t = sc.cusp_cap_intersection(alpha)
    assert 0.0 < t < 1.0
    assert math.isclose(t ** (2 * alpha) + (t - 2.0) ** 2, 2.0, abs_tol=1e-12)


def test_mesh_arrays(cusp_mesh):
    v = cusp_mesh.vertices
    t = cusp_mesh.triangles
    assert v.shape == (cusp_mesh.n_vertices, 2)
    assert t.shape == (cusp_mesh.n_triangles, 3)
    assert t.min() >= 0 and t.max() < len(v)
    x, y = v[:, 0], v[:, 1]
    area = 0.5 * np.sum(
        (x[t[:, 1]] - x[t[:, 0]]) * (y[t[:, 2]] - y[t[:, 0]])
        - (y[t[:, 1]] - y[t[:, 0]]) * (x[t[:, 2]] - x[t[:, 0]])
    )
    assert math.isclose(area, cusp_mesh.area(), rel_tol=1e-12)
    assert set(cusp_mesh.boundary_tags) == {"cap", "lateral_left", "lateral_right"}


def test_disk_first_eigenvalue():
    mesh = sc.build_mesh(sc.DomainSpec.disk(), target_h=0.2, n_arc=64, refinements=1)
    r = sc.solve_p2(mesh, weighted=False)
    assert r.converged
    assert abs(r.lambda_ - 1.0) < 1e-3
    assert len(r.u) == mesh.n_vertices


def test_dual_paths_agree(cusp_mesh):
    direct = sc.solve_p2(cusp_mesh)
    descent = sc.solve_p(cusp_mesh, p=2.0, restarts=1)
    assert descent.converged
    assert abs(descent.lambda_ - direct.lambda_) <= 1e-3 * direct.lambda_


def test_rayleigh_scale_invariant(cusp_mesh):
    r = sc.solve_p(cusp_mesh, p=3.0, restarts=0)
    q1 = sc.rayleigh(cusp_mesh, r.u, p=3.0)
    q2 = sc.rayleigh(cusp_mesh, 7.5 * r.u, p=3.0)
    assert math.isclose(q1, q2, rel_tol=1e-12)
    assert math.isclose(q1, r.lambda_, rel_tol=1e-8)


def test_energy_gradient_matches_difference(cusp_mesh):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(cusp_mesh.n_vertices)
    d = rng.standard_normal(cusp_mesh.n_vertices)
    g = sc.energy_gradient(cusp_mesh, u, p=3.0)
    h = 1e-6
    fd = (sc.energy(cusp_mesh, u + h * d, p=3.0) - sc.energy(cusp_mesh, u - h * d, p=3.0)) / (2 * h)
    assert math.isclose(float(g @ d), fd, rel_tol=1e-6)


def test_fp_and_trace(cusp_mesh):
    fp = sc.fp_constant(cusp_mesh)
    assert fp.converged and fp.constant > 0
    sigma = sc.trace_spectrum(cusp_mesh, True, 3)
    assert len(sigma) == 3
    assert sigma[0] >= sigma[1] >= sigma[2] > 0


def test_trend():
    assert sc.classify_trend([1.0, 0.99, 0.985]) == "stable"
    assert sc.classify_trend([0.05, 0.03, 0.019]) == "decaying-to-zero"


def test_errors():
    with pytest.raises(sc.DomainError):
        sc.DomainSpec.cusp(0.5).validate()
    with pytest.raises(ValueError):
        sc.rayleigh(sc.build_mesh(sc.DomainSpec.cusp(2.0)), np.zeros(3))


def test_validate_command(tmp_path):
    code, out, err = sc.run_command("validate", out=tmp_path)
    assert code == 0, err
    assert (tmp_path / "validate.csv").exists()
    assert all(c["passed"] for c in sc.run_validation())


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[geometry]\nalpha = banana\n")
    code, _, err = sc.run_command("mesh", config=cfg, out=tmp_path)
    assert code == 1
    assert "alpha" in err
