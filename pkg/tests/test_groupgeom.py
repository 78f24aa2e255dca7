from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from quasipoisson import groupgeom as gg
from quasipoisson.quasilie import build_pair_from_metric, standard_triple
from quasipoisson.suites import minus_one_point


@pytest.fixture(scope="module")
def su2(bundled):
    g, rep, _ = bundled("su2")
    group = gg.MatrixGroupModel(g, rep)
    return g, group, gg.DoubleModel(group)


def test_ad_is_rotation(su2):
    # oracle: e_k = -(i/2) sigma_k exponentiates to the rotation by the same vector
    _, group, _ = su2
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(size=3)
        assert np.allclose(group.exp_point(x).Ad, Rotation.from_rotvec(x).as_matrix(), atol=1e-12)


def test_point_rejects_non_group_matrix(su2):
    _, group, _ = su2
    with pytest.raises(ValueError):
        group.point(np.array([[2, 1], [0, 1]], dtype=complex))


def test_unfaithful_representation(bundled):
    g, rep, _ = bundled("su2")
    with pytest.raises(ValueError):
        gg.MatrixGroupModel(g, [rep[0], rep[0], rep[2]])


def test_log_inverts_exp(su2):
    _, group, _ = su2
    x = np.array([0.3, -0.2, 0.5])
    assert np.allclose(group.log(group.exp(x)), x)


class TestDressing:
    def test_identity_antidiagonal(self, su2):
        _, group, _ = su2
        x = np.array([1.0, -2.0, 0.5])
        assert np.allclose(gg.dressing_field(x, -x, group.identity()), -2 * x)

    def test_diagonal_is_conjugation(self, su2):
        _, group, _ = su2
        s = group.exp_point([0.4, 0.1, -0.7])
        x = np.array([0.0, 1.0, 0.0])
        assert np.allclose(gg.dressing_field(x, x, s), x - s.Ad_inv @ x)


class TestBivectors:
    def test_P_S_vanishes_at_identity(self, su2):
        _, group, model = su2
        assert np.max(np.abs(gg.bivector_P_S(group.identity(), model))) == 0

    def test_P_S_closed_form(self, su2):
        _, group, model = su2
        rng = np.random.default_rng(1)
        for _ in range(10):
            s = gg.admissible_sample(model, rng)
            assert np.allclose(gg.bivector_P_S(s, model), gg.P_S_closed_form(s, model), atol=1e-12)

    def test_frame_field_matches_matrix(self, su2):
        g, group, model = su2
        frame = gg.FrameAlgebra(g)
        t = np.array([[0, Fraction(1, 3), 0], [Fraction(-1, 3), 0, 1], [0, -1, 0]], dtype=object)
        field = gg.P_S_field(frame, t)
        rng = np.random.default_rng(2)
        for _ in range(5):
            s = gg.admissible_sample(model, rng, gg.to_float(t))
            assert np.allclose(frame.evaluate(field, s), gg.bivector_P_S(s, model, gg.to_float(t)), atol=1e-10)

    def test_twist_law(self, su2):
        _, _, model = su2
        rng = np.random.default_rng(3)
        T = gg.random_twist(rng, 3)
        s = gg.admissible_sample(model, rng, T)
        U = model.U(s)
        assert np.allclose(gg.bivector_P_S(s, model, T), gg.bivector_P_S(s, model) - U @ T @ U.T, atol=1e-10)

    def test_P_G_zero_at_identity(self, su2):
        g, group, _ = su2
        for qt, ad in ((standard_triple(g), gg.ad_D_standard), (build_pair_from_metric(g), gg.ad_D_double)):
            assert np.max(np.abs(gg.bivector_P_G(qt, group.identity(), ad))) < 1e-15


class TestHat:
    def test_closed_form(self, su2):
        _, _, model = su2
        rng = np.random.default_rng(4)
        for _ in range(10):
            s = gg.admissible_sample(model, rng)
            x = rng.normal(size=3)
            assert gg.rel_residual(gg.hat_form(x, s, model), gg.hat_closed_form(x, s, model)) < 1e-10

    def test_identity_value(self, su2):
        # [DERIVED] 2 K (1 + 1)^-1 x = K x
        _, group, model = su2
        x = np.array([1.0, 2.0, 3.0])
        assert np.allclose(gg.hat_form(x, group.identity(), model), model.K @ x)

    def test_circle(self, bundled):
        g, rep, _ = bundled("u1")
        group = gg.MatrixGroupModel(g, rep)
        model = gg.DoubleModel(group)
        for alpha in (-2.0, 0.3, 1.1):
            p = group.exp_point([alpha])
            assert gg.hat_form([1.0], p, model) == pytest.approx([-1.0])
            assert np.max(np.abs(gg.bivector_P_S(p, model))) < 1e-15


class TestAdmissibility:
    def test_quarter_torus_flagged(self, su2):
        _, group, model = su2
        s = group.point(np.diag(np.exp(1j * np.array([np.pi / 2, -np.pi / 2]))))
        ok, margin = gg.admissibility(s, model)
        assert not ok and margin < 1e-7
        with pytest.raises(gg.NonAdmissibleError):
            gg.tau_map(s, model)

    def test_twist_restores(self, su2):
        _, _, model = su2
        s = minus_one_point(model)
        at = gg.find_admissible_twist(s, 0.5, model)
        assert len(at.pairs) == 1
        ok, margin = gg.admissibility(s, model, at.t)
        assert ok and margin > 0.1

    def test_hat_away_from_kernel(self, su2):
        # for x K-orthogonal to ker(1 + Ad_s) the twisted hat is 2 K (1 + Ad_s)^+ x
        _, _, model = su2
        s = minus_one_point(model)
        at = gg.find_admissible_twist(s, 0.5, model)
        a, b = at.pairs[0]
        x = np.cross(model.K @ a, model.K @ b)
        expected = 2 * model.K @ np.linalg.pinv(np.eye(3) + s.Ad) @ x
        assert gg.rel_residual(gg.hat_form(x, s, model, at.t), expected) < 1e-10

    def test_hat_on_kernel(self, su2):
        _, _, model = su2
        s = minus_one_point(model)
        eps = 0.5
        at = gg.find_admissible_twist(s, eps, model)
        a, b = at.pairs[0]
        assert np.allclose(gg.hat_form(a, s, model, at.t), -(1 / (2 * eps)) * model.K @ b, atol=1e-10)
        assert np.allclose(gg.hat_form(b, s, model, at.t), (1 / (2 * eps)) * model.K @ a, atol=1e-10)

    def test_generic_point_needs_no_twist(self, su2):
        _, group, model = su2
        at = gg.find_admissible_twist(group.exp_point([0.3, 0.2, 0.1]), 0.5, model)
        assert not at.pairs and not at.t.any()

    def test_tau_antisymmetric(self, su2):
        _, _, model = su2
        rng = np.random.default_rng(5)
        tau = gg.tau_map(gg.admissible_sample(model, rng), model)
        assert np.allclose(tau, -tau.T, atol=1e-10)


class TestKKS:
    def test_su2_values(self, su2):
        # [DERIVED] P^{ab} = -f_ab^k xi_k at xi = (1, 0, 0): P^{23} = -1
        g, _, _ = su2
        P = gg.kks_bivector(g.f, [1, 0, 0])
        assert P[1, 2] == -1 and P[2, 1] == 1 and P[0, 1] == 0

    def test_checks_exact(self, su2):
        g, _, _ = su2
        rep = gg.kks_check(g.f, [Fraction(1, 2), -3, Fraction(7, 5)])
        assert rep.passed
        assert all(isinstance(c.residual, Fraction) for c in rep.checks)


class TestBracket:
    def test_class_functions_commute(self, su2):
        _, _, model = su2
        rng = np.random.default_rng(6)
        f1 = lambda m: float(np.trace(m).real)  # noqa: E731
        f2 = lambda m: float(np.trace(m @ m).real)  # noqa: E731
        T = gg.random_twist(rng, 3)
        for _ in range(5):
            s = gg.admissible_sample(model, rng, T)
            assert abs(gg.invariant_bracket(f1, f2, s, model)) < 1e-6
            assert abs(gg.invariant_bracket(f1, f2, s, model, T)) < 1e-6


class TestMoment:
    def test_on_S(self, su2):
        _, _, model = su2
        assert gg.moment_check_S(model, np.random.default_rng(7), 10).passed

    def test_conjugacy_class(self, su2):
        _, group, model = su2
        rep = gg.moment_check_conjugacy(group.exp_point([1.3, 0, 0]), model, np.random.default_rng(8), 10, 1e-8)
        assert rep.passed, [c.id for c in rep.failures()]
