import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nehari_critical import bubbles
from nehari_critical.bubbles import Bubble, bubble_eval
from nehari_critical.discretization import dirichlet_form, laplacian_apply, make_grid
from nehari_critical.errors import CooperationViolated, HypothesisViolated

ST2 = 32 * np.pi**2 / 3


class TestBubble:
    def test_values(self):
        assert bubble_eval(Bubble(1.0), np.zeros(4)) == pytest.approx(2 * np.sqrt(2))
        assert bubble_eval(Bubble(1.0), [1.0, 0, 0, 0]) == pytest.approx(np.sqrt(2))
        assert bubble_eval(Bubble(2.0), np.zeros(4)) == pytest.approx(np.sqrt(2))

    def test_off_center(self):
        b = Bubble(0.5, (1.0, 2.0, 0.0, 0.0))
        assert bubble_eval(b, [1.0, 2.0, 0.0, 0.0]) == pytest.approx(2 * np.sqrt(2) / 0.5)

    @given(st.floats(1e-3, 1e3), st.floats(0, 1e3), st.floats(0, 1e3))
    def test_positive_and_decreasing(self, eps, a, b):
        u = Bubble(eps)
        lo, hi = sorted((a, b))
        assert u.radial(hi) > 0
        assert u.radial(lo) >= u.radial(hi)
        assert u.radial(0.0) == pytest.approx(2 * np.sqrt(2) / eps)

    def test_derivative_matches_finite_difference(self):
        u = Bubble(0.7)
        s = np.linspace(0.1, 3, 7)
        fd = (u.radial(s + 1e-6) - u.radial(s - 1e-6)) / 2e-6
        np.testing.assert_allclose(u.radial_derivative(s), fd, rtol=1e-7)


class TestSobolevConstant:
    def test_closed_form(self):
        assert bubbles.sobolev_tilde_sq() == pytest.approx(ST2, rel=1e-10)

    def test_gradient_quartic_ratio(self):
        ints = bubbles.bubble_integrals(1.0)
        assert abs(ints.ratio - 1) < 1e-8
        assert ints.gradient / np.sqrt(ints.quartic) == pytest.approx(np.sqrt(32 / 3) * np.pi, rel=1e-9)

    @pytest.mark.parametrize("eps", [0.1, 1.0, 10.0])
    def test_scale_invariance(self, eps):
        ints = bubbles.bubble_integrals(eps)
        assert ints.gradient == pytest.approx(ST2, rel=1e-9)
        assert ints.quartic == pytest.approx(ST2, rel=1e-9)

    def test_quadrature_refines(self):
        f = lambda s: 1.0 / (1.0 + s**2) ** 4
        # |S^3| int_0^inf s^3 (1+s^2)^-4 ds = 2 pi^2 B(2,2)/2 = pi^2/6
        assert bubbles.radial_integral(f, 1e4) == pytest.approx(np.pi**2 / 6, rel=1e-10)


class TestSubsystemLevel:
    def test_examples(self):
        assert bubbles.subsystem_level([[1.0]]) == pytest.approx(26.3190, abs=1e-4)
        assert bubbles.subsystem_level([[4.0]]) == pytest.approx(6.5797, abs=1e-4)
        assert bubbles.subsystem_level([[1.0, 3.0], [3.0, 1.0]]) == pytest.approx(13.1595, abs=1e-4)

    def test_cooperation_required(self):
        with pytest.raises(CooperationViolated):
            bubbles.subsystem_level([[1.0, -0.1], [-0.1, 1.0]])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_monotone_in_coupling(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.uniform(0, 2, (3, 3))
        B = A + A.T
        np.fill_diagonal(B, rng.uniform(0.5, 2, 3))
        i, j = rng.choice(3, 2, replace=False)
        B2 = B.copy()
        B2[i, j] = B2[j, i] = B[i, j] + rng.uniform(0, 2)
        assert bubbles.subsystem_level(B2) <= bubbles.subsystem_level(B) * (1 + 1e-12)


class TestGroundState:
    def test_scalar(self):
        gs = bubbles.subsystem_ground_state([[1.0]], eps=0.3)
        s = np.linspace(0, 5, 11)
        np.testing.assert_allclose(gs.radial_components(s)[0], Bubble(0.3).radial(s))
        assert gs.energy([[1.0]]) == pytest.approx(ST2 / 4, rel=1e-9)

    def test_two_components(self):
        B = [[1.0, 3.0], [3.0, 1.0]]
        gs = bubbles.subsystem_ground_state(B)
        s = np.linspace(0, 4, 9)
        comps = gs.radial_components(s)
        np.testing.assert_allclose(comps, np.vstack([Bubble(1.0).radial(s) / 2] * 2), rtol=1e-12)
        assert gs.energy(B) == pytest.approx(bubbles.subsystem_level(B), rel=1e-9)

    def test_energy_identity(self):
        B = np.array([[1.0, 2.0, 0.5], [2.0, 1.5, 1.0], [0.5, 1.0, 2.0]])
        gs = bubbles.subsystem_ground_state(B, eps=2.0)
        grad = np.sum(gs.coefficients**2) * bubbles.bubble_integrals(2.0).gradient
        assert grad / 4 == pytest.approx(bubbles.subsystem_level(B), rel=1e-9)
        assert gs.energy(B) == pytest.approx(bubbles.subsystem_level(B), rel=1e-9)

    def test_pde_residual_second_order(self):
        B = np.array([[1.0, 3.0], [3.0, 1.0]])
        gs = bubbles.subsystem_ground_state(B)
        errs = []
        for n in (128, 256, 512):
            g = make_grid(2.0, n)
            V = gs.radial_components(g.nodes)
            res = -laplacian_apply(g, V) - V * (B @ V**2)
            errs.append(np.abs(res[:, : 3 * n // 4]).max())
        assert np.all(np.log2(np.array(errs[:-1]) / np.array(errs[1:])) > 1.8)

    def test_cooperation_required(self):
        with pytest.raises(CooperationViolated):
            bubbles.subsystem_ground_state([[1.0, -1.0], [-1.0, 1.0]])


class TestLimitLevel:
    def test_two_singletons(self):
        lim = bubbles.limit_level([[1.0, -1.0], [-1.0, 1.0]], (0, 1, 2))
        assert lim.l_total == pytest.approx(52.638, abs=1e-3)
        assert not lim.attained and lim.marker == bubbles.NOT_ATTAINED

    def test_mixed_groups(self):
        B = [[1.0, 3.0, -0.5], [3.0, 1.0, -0.5], [-0.5, -0.5, 1.0]]
        lim = bubbles.limit_level(B, (0, 2, 3))
        assert lim.l_total == pytest.approx(ST2 / 8 + ST2 / 4, rel=1e-10)
        assert lim.l_total == pytest.approx(39.478, abs=1e-3)
        assert lim.l_total == pytest.approx(sum(lim.l_h))

    def test_cross_cooperation_rejected(self):
        with pytest.raises(HypothesisViolated):
            bubbles.limit_level([[1.0, 0.1], [0.1, 1.0]], (0, 1, 2))

    def test_same_group_competition_rejected(self):
        with pytest.raises(HypothesisViolated):
            bubbles.limit_level([[1.0, -0.1, -1], [-0.1, 1.0, -1], [-1, -1, 1]], (0, 2, 3))


class TestOverlap:
    def test_coincident_centres(self):
        assert bubbles.bubble_overlap(1.0, 1.0, 0.0) == pytest.approx(ST2, rel=1e-6)

    def test_decay(self):
        vals = [bubbles.bubble_overlap(1.0, 1.0, R) for R in (4, 8, 16, 32)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < vals[0] / 10

    def test_symmetry(self):
        a = bubbles.bubble_overlap(0.5, 2.0, 3.0)
        b = bubbles.bubble_overlap(2.0, 0.5, 3.0)
        assert a == pytest.approx(b, rel=1e-6)

    def test_two_center_integral_against_separable_case(self):
        # f = 1 on the unit ball about 0, g = 1: integral is the unit-ball volume
        val = bubbles.two_center_integral(
            lambda s: (s <= 1.0).astype(float), lambda s: np.ones_like(s), 3.0,
            reach_f=1.0, reach_g=10.0, breaks_f=(1.0,),
        )
        assert val == pytest.approx(np.pi**2 / 2, rel=1e-6)


class TestVectorSobolev:
    def test_equality_at_ground_state(self):
        B = np.array([[1.0, 3.0], [3.0, 1.0]])
        gs = bubbles.subsystem_ground_state(B)
        fn = lambda s: (gs.radial_components(s),
                        gs.coefficients[:, None] * gs.bubble.radial_derivative(s)[None, :])
        res = bubbles.vector_sobolev_residual(fn, B)
        assert abs(res) < 1e-7 * ST2**2

    def test_equality_with_zero_component(self):
        B = np.eye(2)
        U = Bubble(1.0)
        fn = lambda s: (np.vstack([U.radial(s), 0 * s]), np.vstack([U.radial_derivative(s), 0 * s]))
        assert abs(bubbles.vector_sobolev_residual(fn, B)) < 1e-7 * ST2**2

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_inequality_on_random_states(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(1.0, 400)
        r = g.nodes
        v = np.array([rng.uniform(0, 2) * np.exp(-((r - rng.uniform(0, .5)) / rng.uniform(.02, .4)) ** 2)
                      * (1 - r) for _ in range(2)])
        B = np.array([[1.0, 2.0], [2.0, 1.5]])
        res = bubbles.vector_sobolev_residual(v, B, grid=g)
        scale = sum(dirichlet_form(g, vi) for vi in v) ** 2
        assert res >= -1e-8 * scale
