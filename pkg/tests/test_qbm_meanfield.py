import itertools

import numpy as np
import pytest

from mfbm import (
    QbmParams,
    QProductCoords,
    SolverConfig,
    density_matrix,
    e_project_classical,
    e_project_quantum,
    exact_moments_quantum,
    kl_product_to_qbm,
    m_project_quantum,
    product_state,
    q_effective_field,
    qproduct_to_mean,
    quantum_relative_entropy,
    solve_naive_mf_classical,
    solve_naive_mf_quantum,
)
from mfbm.qbm_meanfield import q_residual
from mfbm.tensor_ops import site_operator, trace_product

from conftest import brute_qre, brute_rho, central_difference, random_cbm, random_qbm


def _divergence_at_m(p):
    rho = density_matrix(p)
    return lambda m: quantum_relative_entropy(product_state(QProductCoords("m", m), verify=False), rho)


class TestEffectiveField:
    def test_no_couplings(self, rng):
        h = rng.normal(size=(3, 3))
        p = QbmParams.zeros(3).replace(h=h)
        m = rng.uniform(-0.5, 0.5, (3, 3))
        np.testing.assert_array_equal(q_effective_field(p, m).values, h)

    def test_zero_magnetization(self, rng):
        p = random_qbm(rng, 3)
        np.testing.assert_array_equal(q_effective_field(p, np.zeros((3, 3))).values, p.h)

    def test_hand_value(self):
        c, g = 0.7, 0.4
        h = np.array([[0.1, 0.2, 0.3], [0, 0, 0], [0, 0, 0]])
        p = QbmParams.from_terms(3, w={((0, 1), (3, 3)): c}).replace(h=h)
        m = np.zeros((3, 3))
        m[1] = [0, 0, g]
        hb = q_effective_field(p, m).values
        assert hb[0, 2] == pytest.approx(0.3 + c * g, abs=1e-16)
        assert hb[0, 0] == 0.1 and hb[0, 1] == 0.2

    def test_is_gradient_of_coupling_energy(self, rng):
        # field = d/dm of sum h m + sum w m m + sum v m m m over canonical tuples
        p = random_qbm(rng, 4)
        m = rng.uniform(-0.5, 0.5, (4, 3))

        def energy(x):
            e = np.sum(p.h * x)
            for k, (i, j) in enumerate(itertools.combinations(range(4), 2)):
                e += np.einsum("st,s,t->", p.w[k], x[i], x[j])
            for k, (i, j, l) in enumerate(itertools.combinations(range(4), 3)):
                e += np.einsum("stu,s,t,u->", p.v[k], x[i], x[j], x[l])
            return e

        np.testing.assert_allclose(q_effective_field(p, m).values, central_difference(energy, m), atol=1e-8)


class TestSolver:
    def test_product_model(self, rng):
        h = rng.normal(size=(3, 3))
        p = QbmParams.zeros(3).replace(h=h)
        c, rep = solve_naive_mf_quantum(p)
        assert rep.converged and rep.iterations == 1
        np.testing.assert_allclose(c.values, qproduct_to_mean(QProductCoords("h", h)).values, atol=1e-15)

    def test_zero_field(self, rng):
        p = random_qbm(rng, 3).replace(h=np.zeros((3, 3)))
        c, rep = solve_naive_mf_quantum(p, SolverConfig(init="zero"))
        assert rep.converged
        np.testing.assert_array_equal(c.values, 0)

    def test_diagonal_reduces_to_classical(self, rng):
        cl = random_cbm(rng, 5, (1.0, 0.1, 0.1))
        q = QbmParams.from_classical(cl)
        cq, rq = solve_naive_mf_quantum(q)
        cc, rc = solve_naive_mf_classical(cl)
        assert rq.converged and rc.converged
        np.testing.assert_allclose(cq.values[:, 2], cc.values, atol=1e-9)
        np.testing.assert_array_equal(cq.values[:, :2], 0)

    def test_iterates_stay_in_ball(self, rng):
        p = random_qbm(rng, 3, (1.0, 0.3, 0.2))
        norms = []
        solve_naive_mf_quantum(p, callback=lambda it, m: norms.append(np.linalg.norm(m, axis=1).max()))
        assert max(norms) < 1.0


class TestClosedFormDivergence:
    def test_zero_in_product_family(self, rng):
        h = rng.normal(size=(3, 3))
        p = QbmParams.zeros(3).replace(h=h)
        assert abs(kl_product_to_qbm(QProductCoords("h", h), p)) <= 1e-12

    def test_matches_matrix_log(self, rng):
        for n in (1, 2, 3):
            p = random_qbm(rng, n)
            c = QProductCoords("h", rng.normal(size=(n, 3)))
            tau = product_state(c).op
            oracle = brute_qre(tau, brute_rho(p))
            assert abs(kl_product_to_qbm(c, p) - oracle) <= 1e-9
            assert kl_product_to_qbm(c, p) >= -1e-10


class TestEProjection:
    def test_product_model(self, rng):
        h = rng.normal(size=(2, 3))
        c, rep = e_project_quantum(QbmParams.zeros(2).replace(h=h))
        np.testing.assert_allclose(c.hbar, h, atol=1e-12)
        assert abs(rep.objective) <= 1e-12

    def test_stationarity(self, rng):
        p = random_qbm(rng, 3, (1.0, 0.1, 0.1))
        c, rep = e_project_quantum(p)
        assert rep.converged and rep.residual <= 1e-10
        assert np.max(np.abs(q_residual(p, c))) <= 1e-10
        grad = central_difference(_divergence_at_m(p), c.values)
        assert np.max(np.abs(grad)) <= 1e-5
        assert rep.objective == pytest.approx(kl_product_to_qbm(c, p), abs=1e-10)

    def test_restart_selection(self, rng):
        # ferromagnetic sigma_1 sigma_1 couplings with zero field: m = 0 is a saddle
        n = 3
        p = QbmParams.from_terms(n, w={((i, j), (1, 1)): 1.0 for i, j in itertools.combinations(range(n), 2)})
        _, rep0 = e_project_quantum(p, SolverConfig(init="zero"))
        best, rep = e_project_quantum(p, SolverConfig(init="zero", restarts=3, seed=5))
        objs = [rep0.objective]
        for s in SolverConfig(restarts=3, seed=5).restart_seeds():
            _, r = e_project_quantum(p, SolverConfig(init="random", seed=s))
            if r.converged:
                objs.append(r.objective)
        assert rep.objective == pytest.approx(min(objs), abs=1e-14)
        assert rep.objective < rep0.objective


class TestMProjection:
    def test_zero(self):
        np.testing.assert_allclose(m_project_quantum(QbmParams.zeros(2)).values, 0, atol=1e-16)

    def test_product_model(self, rng):
        h = rng.normal(size=(2, 3))
        c = m_project_quantum(QbmParams.zeros(2).replace(h=h))
        np.testing.assert_allclose(c.values, qproduct_to_mean(QProductCoords("h", h)).values, atol=1e-12)

    def test_moment_matching_and_gradient(self, rng):
        p = random_qbm(rng, 3)
        c = m_project_quantum(p)
        tau = product_state(c)
        for i in range(3):
            for s in range(3):
                assert trace_product(tau.op, site_operator(3, i + 1, s + 1)) == pytest.approx(
                    exact_moments_quantum(p).m[i, s], abs=1e-10
                )
        rho = density_matrix(p)
        grad = central_difference(
            lambda h: quantum_relative_entropy(rho, product_state(QProductCoords("h", h), verify=False)), c.hbar
        )
        assert np.max(np.abs(grad)) <= 1e-5


def test_classical_consistency_of_projections(rng):
    cl = random_cbm(rng, 4, (1.0, 0.1, 0.1))
    q = QbmParams.from_classical(cl)
    cq, rq = e_project_quantum(q)
    cc, rc = e_project_classical(cl)
    np.testing.assert_allclose(cq.values[:, 2], cc.values, atol=1e-9)
    assert abs(rq.objective - rc.objective) <= 1e-9
