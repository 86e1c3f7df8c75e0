import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majoconvex import DomainError, SamplingPlan
from majoconvex.potentials import catalog, eval_potential
from majoconvex.quasiconvexity import (
    QuadratureGrid,
    TestDeformation,
    deformation_catalog,
    eval_w_tilde,
    lemma_exponential_product_check,
    lemma_weyl_domination_check,
    make_deformation,
    mean_log_stretch,
    quasiconvexity_quadrature,
    schur_route_check,
    texe_chain,
    texe_hypothesis_check,
    thompson_power_check,
    thompson_similarity_check,
)
from majoconvex.sampling import random_rotation

CATALOG = catalog()
GRID = QuadratureGrid(m=32)


def _boundary_points(rng, n, count=200):
    X = rng.random((count, n))
    axis = rng.integers(0, n, count)
    X[np.arange(count), axis] = rng.integers(0, 2, count)
    return X


# --- deformations ---------------------------------------------------------------

def test_identity_gradient():
    X = np.random.default_rng(0).random((10, 3))
    np.testing.assert_array_equal(make_deformation("identity", 3).grad(X), np.broadcast_to(np.eye(3), (10, 3, 3)))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist", "laminate_zigzag"])
def test_boundary_is_fixed(kind, n):
    d = deformation_catalog(n)[kind]
    X = _boundary_points(np.random.default_rng(1), n)
    np.testing.assert_allclose(d.phi(X), X, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist", "laminate_zigzag"])
def test_gradient_matches_finite_differences(kind, n):
    d = deformation_catalog(n)[kind]
    X = np.random.default_rng(2).uniform(0.05, 0.95, (50, n))
    h = 1e-6
    D = d.grad(X)
    for j in range(n):
        E = np.zeros(n)
        E[j] = h
        col = (d.phi(X + E) - d.phi(X - E)) / (2 * h)
        # skip points whose stencil crosses a kink of the laminate
        same = np.all(np.isclose(d.grad(X + E), d.grad(X - E)), axis=(1, 2))
        np.testing.assert_allclose(col[same], D[same, :, j], atol=1e-7)


@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist"])
def test_planar_twists_preserve_area(kind):
    d = deformation_catalog(2)[kind]
    X = np.random.default_rng(3).random((500, 2))
    np.testing.assert_allclose(np.linalg.det(d.grad(X)), 1.0, atol=1e-13)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist", "laminate_zigzag"])
def test_deviation_bound_certifies_orientation(kind, n):
    d = deformation_catalog(n)[kind]
    X = np.random.default_rng(4).random((4000, n))
    dev = np.linalg.norm(d.grad(X) - np.eye(n), ord=2, axis=(1, 2))
    assert dev.max() <= d.deviation_bound() + 1e-12
    assert np.all(np.linalg.det(d.grad(X)) > 0)


def test_amplitude_beyond_bound_rejected():
    with pytest.raises(DomainError, match="bound"):
        make_deformation("radial_twist", 2, amplitude=0.6)


def test_deformation_round_trip():
    for d in deformation_catalog(3).values():
        again = TestDeformation.from_dict(d.to_dict())
        assert again == d


def test_grid_sizes():
    assert QuadratureGrid(m=64).sizes() == [16, 32, 64]
    with pytest.raises(DomainError):
        QuadratureGrid(m=30, levels=3)


# --- quadrature -------------------------------------------------------------------

@pytest.mark.parametrize("name", list(CATALOG))
def test_identity_deformation_margin_is_zero(name):
    F = np.array([[2.0, 0.3], [0.1, 0.7]])
    rep = quasiconvexity_quadrature(CATALOG[name], F, make_deformation("identity", 2), GRID)
    assert rep.margin == 0.0
    assert rep.verified


def test_log_trace_inv_u_bump():
    rep = quasiconvexity_quadrature(CATALOG["log_trace_inv_U"], np.diag([2.0, 0.5]),
                                    make_deformation("bump_shear", 2, amplitude=0.1), QuadratureGrid(m=64))
    assert rep.margin >= -rep.error_estimate


def test_modified_ogden_laminate():
    rep = quasiconvexity_quadrature(CATALOG["modified_ogden(2)"], np.eye(2),
                                    make_deformation("laminate_zigzag", 2), QuadratureGrid(m=64))
    assert rep.margin >= -rep.error_estimate


@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist", "laminate_zigzag"])
def test_convex_potential_has_nonnegative_margin(kind):
    # power_sum(2) fails the hypotheses yet is convex: the inequality must still hold
    rep = quasiconvexity_quadrature(CATALOG["power_sum(2)"], np.eye(2), deformation_catalog(2)[kind], GRID)
    assert rep.margin >= -rep.error_estimate


def test_neg_log_det_unimodular_equality():
    rep = quasiconvexity_quadrature(CATALOG["neg_log_det"], np.eye(2), deformation_catalog(2)["bump_shear"], GRID)
    assert abs(rep.margin) <= 1e-12


def test_quadrature_rejects_bad_input():
    with pytest.raises(DomainError):
        quasiconvexity_quadrature(CATALOG["neg_log_det"], np.diag([1.0, -1.0]), deformation_catalog(2)["identity"])
    with pytest.raises(DomainError):
        quasiconvexity_quadrature(CATALOG["neg_log_det"], np.eye(3), deformation_catalog(2)["identity"])


# --- mean log stretch -----------------------------------------------------------------

def test_mean_log_stretch_identity():
    M, v = mean_log_stretch(make_deformation("identity", 3), GRID)
    np.testing.assert_array_equal(M, 0)
    assert v.verified


@pytest.mark.parametrize("kind", ["bump_shear", "radial_twist"])
def test_mean_log_stretch_planar_twists(kind):
    d = deformation_catalog(2)[kind]
    M, v = mean_log_stretch(d, GRID)
    # the twists are symmetric under the half-turn about the centre, so the mean of log V vanishes
    assert np.abs(M).max() <= 1e-12
    # det = 1 forces log s1 = -log s2 >= 0 pointwise, so the top per-value integral is positive
    s = np.linalg.svd(d.grad(GRID.points(2, GRID.m)), compute_uv=False)
    top = float(np.mean(np.log(s[:, 0])))
    assert top > 1e-3
    assert v.details["per_eigenvalue"][0] == pytest.approx(top, rel=1e-12)
    assert v.refuted and v.witness["check"] == "per_eigenvalue"


# --- w tilde and the lemmas --------------------------------------------------------------

def test_w_tilde_examples():
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    for spec in CATALOG.values():
        assert eval_w_tilde(spec, S) == pytest.approx(eval_potential(spec, S))
    assert eval_w_tilde(CATALOG["neg_log_det"], [[1, 1], [0, 1]]) == pytest.approx(0.0, abs=1e-15)
    R = random_rotation(np.random.default_rng(0), 3)
    spec = CATALOG["log_trace_inv_U"]
    assert eval_w_tilde(spec, R) == pytest.approx(float(spec.g(np.ones(3))))


def test_weyl_lemma_examples():
    spec = CATALOG["log_trace_inv_U"]
    assert abs(lemma_weyl_domination_check(spec, np.diag([2.0, 0.5])).margin) <= 1e-15
    v = lemma_weyl_domination_check(spec, np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert v.verified and v.margin > 1e-3


def test_weyl_lemma_random():
    rng = np.random.default_rng(9)
    spec = CATALOG["modified_ogden(2)"]
    for _ in range(200):
        F = random_rotation(rng, 3) @ np.diag(np.exp(rng.uniform(-1, 1, 3))) @ random_rotation(rng, 3)
        assert lemma_weyl_domination_check(spec, F).margin >= -1e-9


def test_weyl_lemma_gated():
    v = lemma_weyl_domination_check(CATALOG["neg_sum"], np.eye(2))
    assert v.status == "inconclusive"


def test_exponential_product_examples():
    spec = CATALOG["log_trace_inv_U"]
    A = np.array([[0.3, 0.2, 0.0], [0.2, -0.1, 0.4], [0.0, 0.4, 0.5]])
    assert abs(lemma_exponential_product_check(spec, A, np.zeros((3, 3))).margin) <= 1e-12
    assert abs(lemma_exponential_product_check(spec, np.diag([1.0, 0, -1]), np.diag([0.2, 0.3, 0])).margin) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exponential_product_random(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(2, 3, 3))
    v = lemma_exponential_product_check(CATALOG["log_trace_inv_U"], A + A.T, B + B.T)
    assert v.margin >= -1e-9


def test_thompson_conditions():
    rng = np.random.default_rng(3)
    spec = CATALOG["log_trace_inv_U"]
    for _ in range(50):
        X = random_rotation(rng, 3) @ np.diag(np.exp(rng.uniform(-0.5, 0.5, 3))) @ random_rotation(rng, 3)
        Y = X @ X.T
        assert thompson_similarity_check(spec, X, Y).verified
        for m in (1, 2, 3):
            assert thompson_power_check(spec, X, m).verified


# --- hypotheses and the proof chain --------------------------------------------------------

def _xplan(n=3):
    return SamplingPlan.cube(n, -1.5, 1.5, seed=5, sample_count=200)


@pytest.mark.parametrize("name", ["log_trace_inv_U", "modified_ogden(2)", "modified_ogden(3)", "neg_log_det"])
def test_texe_hypotheses_hold(name):
    assert texe_hypothesis_check(CATALOG[name], _xplan()).verified


def test_texe_power_sum_fails_monotonicity_only():
    v = texe_hypothesis_check(CATALOG["power_sum(2)"], _xplan())
    assert v.refuted
    assert v.details["convex"] == "verified"
    assert v.details["nonincreasing"] == "refuted"


def test_schur_route_unimodular():
    v = schur_route_check(CATALOG["neg_log_det"], deformation_catalog(2)["bump_shear"], GRID)
    assert v.verified
    assert abs(v.details["pointwise_min_gap"]) <= 1e-12


def test_schur_route_log_trace():
    assert schur_route_check(CATALOG["log_trace_inv_U"], deformation_catalog(2)["radial_twist"], GRID).verified


def test_schur_route_gated():
    assert schur_route_check(CATALOG["neg_sum"], deformation_catalog(2)["radial_twist"], GRID).status == "inconclusive"


def test_chain_identity_is_flat():
    out = texe_chain(CATALOG["log_trace_inv_U"], np.diag([2.0, 0.5]), make_deformation("identity", 2), GRID)
    np.testing.assert_allclose(out["gaps"], 0, atol=1e-12)


def test_chain_neg_log_det_bump():
    out = texe_chain(CATALOG["neg_log_det"], np.eye(2), deformation_catalog(2)["bump_shear"], GRID)
    for key in ("w_F_Dphi", "w_tilde_UV", "w_tilde_exp_sum", "w_tilde_exp_mean", "w_F"):
        assert abs(out[key]) <= 1e-12
