import numpy as np
import pytest
from conftest import scalar_problem

from blockprox.core import BlockVector, KTPoint, kt_residual
from blockprox.exceptions import PlanViolation
from blockprox.experiments import compute_reference, random_problem
from blockprox.prox import prox_zero
from blockprox.schedule import CyclicSweep, FixedSequence, RandomSubset
from blockprox.solver_dr import DRConfig, dr_init, dr_kt_point, dr_run, dr_step
from blockprox.solver_ps import PSConfig, ps_init, ps_run, ps_step, separator_value


def flat_state(state):
    return np.concatenate([state.x.flat(), state.v_star.flat()])


class TestDR:
    def test_config_validation(self, toy_problem):
        for bad in (DRConfig(gamma=0.0), DRConfig(relaxation=2.0), DRConfig(relaxation=0.0)):
            with pytest.raises(ValueError):
                dr_init(toy_problem, bad)
        with pytest.raises(ValueError):
            dr_run(toy_problem, DRConfig(relaxation=lambda n: 2.5), max_epochs=3)

    def test_init(self, zero_problem):
        state = dr_init(zero_problem, DRConfig())
        assert state.n == 0 and state.z.norm() == state.y.norm() == state.x.norm() == 0.0
        z0 = [np.ones(2), np.arange(3.0)]
        warm = dr_init(zero_problem, DRConfig(), z0=z0, y0=np.full(2, 4.0))
        assert warm.z == BlockVector(z0) and warm.x == BlockVector(z0) and warm.w == BlockVector([np.full(2, 4.0)])

    def test_fixed_point_on_V(self, zero_problem):
        z = BlockVector([np.array([1.0, -2.0]), np.array([0.5, 0.0, 3.0])])
        y = zero_problem.grid.apply(z)
        config = DRConfig(relaxation=1.5)
        state, _ = dr_step(zero_problem, config, dr_init(zero_problem, config, z0=z, y0=y))
        assert np.allclose(state.z.flat(), z.flat()) and np.allclose(state.y.flat(), y.flat())

    def test_unit_relaxation_gives_projection(self, zero_problem):
        rng = np.random.default_rng(1)
        config = DRConfig(relaxation=1.0)
        state = dr_init(zero_problem, config, z0=rng.standard_normal(5), y0=rng.standard_normal(2))
        t, u = zero_problem.projector().project_flat(state.z.flat(), state.y.flat())
        new, _ = dr_step(zero_problem, config, state)
        assert np.allclose(new.z.flat(), t) and np.allclose(new.x.flat(), t) and np.allclose(new.y.flat(), u)

    def test_unselected_blocks_untouched(self):
        problem = random_problem(3)
        config = DRConfig(plan=FixedSequence(problem.m, problem.p, [([0], [0])]))
        rng = np.random.default_rng(0)
        state = dr_init(problem, config, z0=rng.standard_normal(sum(problem.primal_dims)),
                        y0=rng.standard_normal(sum(problem.dual_dims)))
        new, info = dr_step(problem, config, state)
        assert list(info.primal) == [0] and list(info.dual) == [0]
        for i in range(1, problem.m):
            assert new.z.blocks[i] is state.z.blocks[i] and new.x.blocks[i] is state.x.blocks[i]
        for k in range(1, problem.p):
            assert new.y.blocks[k] is state.y.blocks[k] and new.w.blocks[k] is state.w.blocks[k]

    def test_empty_plan_step(self, toy_problem):
        config = DRConfig(plan=FixedSequence(1, 1, [([], [0])]))
        with pytest.raises(PlanViolation):
            dr_step(toy_problem, config, dr_init(toy_problem, config))

    def test_zero_functions(self, zero_problem):
        state, records = dr_run(zero_problem, DRConfig(max_iterations=2))
        assert kt_residual(zero_problem, dr_kt_point(zero_problem, state, 1.0)) == 0.0

    def test_toy_problem(self, toy_problem):
        config = DRConfig(gamma=1.0, relaxation=1.0, max_iterations=500, tolerance=1e-8)
        state = dr_init(toy_problem, config, z0=[3.0], y0=[-2.0])
        state, _ = dr_run(toy_problem, config, state=state)
        point = dr_kt_point(toy_problem, state, 1.0)
        assert state.n <= 500 and kt_residual(toy_problem, point) < 1e-8
        assert abs(point.x[0][0]) < 1e-8 and abs(point.v_star[0][0]) <= 1.0 + 1e-8

    def test_random_activation_converges(self):
        problem = random_problem(11)
        config = DRConfig(plan=RandomSubset(problem.m, problem.p, 0.5, 0.5), max_iterations=20000,
                          tolerance=1e-5, check_every=10)
        for seed in range(20):
            state, _ = dr_run(problem, config, seed, full_metrics=False, trace_every=1e9)
            assert kt_residual(problem, dr_kt_point(problem, state, 1.0)) < 1e-5

    def test_deterministic(self):
        problem = random_problem(5)
        config = DRConfig(plan=RandomSubset(problem.m, problem.p, 0.5, 0.5), max_iterations=200)
        s1, r1 = dr_run(problem, config, 4)
        s2, r2 = dr_run(problem, config, 4)
        assert s1.z == s2.z and s1.y == s2.y and r1 == r2

    def test_fejer(self):
        problem = random_problem(2)
        config = DRConfig(relaxation=1.5, max_iterations=100000, tolerance=1e-13, check_every=50)
        limit, _ = dr_run(problem, config, full_metrics=False, trace_every=1e9)
        target = np.concatenate([limit.z.flat(), limit.y.flat()])
        state = dr_init(problem, config)
        dist = np.inf
        for _ in range(300):
            state, _ = dr_step(problem, config, state)
            new = np.linalg.norm(np.concatenate([state.z.flat(), state.y.flat()]) - target)
            assert new <= dist + 1e-9
            dist = new


class TestPS:
    def test_hand_step(self, toy_problem):
        config = PSConfig(gamma=1.0, mu=1.0, relaxation=1.0)
        state = ps_init(toy_problem, config, x0=[1.0], v0=[0.0])
        new, rep = ps_step(toy_problem, config, state)
        assert rep.tau == pytest.approx(4.0) and rep.pi == pytest.approx(2.0) and rep.theta == pytest.approx(0.5)
        assert rep.updated
        assert new.a[0][0] == 0.0 and new.a_star[0][0] == 1.0 and new.b[0][0] == 0.0 and new.b_star[0][0] == 1.0
        assert new.x[0][0] == pytest.approx(0.0) and new.v_star[0][0] == pytest.approx(0.0)
        assert kt_residual(toy_problem, KTPoint(new.x, new.v_star)) == pytest.approx(0.0, abs=1e-15)

    def test_kt_point_is_held(self, toy_problem):
        config = PSConfig(relaxation=1.0)
        state = ps_init(toy_problem, config, x0=[0.0], v0=[0.5])
        new, rep = ps_step(toy_problem, config, state)
        assert rep.tau == 0.0 and not rep.updated and rep.theta == 0.0
        assert new.x is state.x and new.v_star is state.v_star

    def test_zero_functions(self, zero_problem):
        state, _ = ps_run(zero_problem, PSConfig(max_iterations=1))
        assert state.t.norm() == state.t_star.norm() == 0.0
        assert state.x.norm() == 0.0

    def test_init(self, zero_problem):
        state = ps_init(zero_problem, PSConfig())
        assert state.a is None and state.x.norm() == state.v_star.norm() == 0.0
        warm = ps_init(zero_problem, PSConfig(), x0=np.arange(5.0), v0=[1.0, 2.0])
        assert np.array_equal(warm.x.flat(), np.arange(5.0)) and np.array_equal(warm.v_star.flat(), [1.0, 2.0])

    def test_config_validation(self, zero_problem):
        for bad in (PSConfig(gamma=-1.0), PSConfig(mu=[1.0, 1.0]), PSConfig(relaxation=2.0)):
            with pytest.raises(ValueError):
                ps_init(zero_problem, bad)
        with pytest.raises(ValueError):
            ps_init(zero_problem, PSConfig(plan=CyclicSweep(3, 1)))

    def test_first_step_activates_everything(self):
        problem = random_problem(4)
        config = PSConfig(plan=FixedSequence(problem.m, problem.p, [([0], [0])]))
        state, rep = ps_step(problem, config, ps_init(problem, config))
        assert len(rep.primal) == problem.m and len(rep.dual) == problem.p
        assert all(a is not None for a in state.a) and all(b is not None for b in state.b)

    def test_unselected_caches_untouched(self):
        problem = random_problem(6)
        config = PSConfig(plan=CyclicSweep(problem.m, problem.p, problem.m, problem.p))
        state, _ = ps_step(problem, config, ps_init(problem, config, x0=np.ones(sum(problem.primal_dims))))
        new, rep = ps_step(problem, config, state)
        for i in set(range(problem.m)) - set(rep.primal):
            assert new.a[i] is state.a[i] and new.a_star[i] is state.a_star[i]
        for k in set(range(problem.p)) - set(rep.dual):
            assert new.b[k] is state.b[k] and new.b_star[k] is state.b_star[k]
        # t is refreshed for every dual block from the caches
        L = problem.grid.matrix()
        assert np.allclose(new.t.flat(), np.concatenate(new.b) - L @ np.concatenate(new.a))

    @pytest.mark.parametrize("seed", range(4))
    def test_separator_vanishes_after_unit_step(self, seed):
        problem = random_problem(seed)
        config = PSConfig(relaxation=1.0)
        state = ps_init(problem, config)
        L = problem.grid.matrix()
        for _ in range(40):
            new, rep = ps_step(problem, config, state)
            if rep.updated:
                assert abs(separator_value(new)) <= 1e-10
                x, v = new.x.flat(), new.v_star.flat()
                a, as_, b, bs = (np.concatenate(c) for c in (new.a, new.a_star, new.b, new.b_star))
                expanded = x @ new.t_star.flat() - a @ as_ + new.t.flat() @ v - b @ bs
                assert abs(expanded) <= 1e-10
                assert np.allclose(new.t_star.flat(), as_ + L.T @ bs)
            assert rep.tau >= 0.0
            state = new

    def test_cyclic_matches_full(self):
        problem = random_problem(8, max_m=4, max_p=4)
        full, _ = ps_run(problem, PSConfig(max_iterations=200000, tolerance=1e-10, check_every=20),
                         full_metrics=False, trace_every=1e9)
        plan = CyclicSweep(problem.m, problem.p, min(4, problem.m), min(4, problem.p))
        cyc, _ = ps_run(problem, PSConfig(plan=plan, max_iterations=400000, tolerance=1e-10, check_every=20),
                        full_metrics=False, trace_every=1e9)
        assert np.linalg.norm(full.x.flat() - cyc.x.flat()) <= 1e-4

    def test_fejer(self):
        problem = random_problem(9)
        config = PSConfig(relaxation=1.0)
        limit = compute_reference(problem, tolerance=1e-12)
        target = np.concatenate([limit.x.flat(), limit.v_star.flat()])
        state = ps_init(problem, config)
        dist = np.inf
        for _ in range(300):
            state, _ = ps_step(problem, config, state)
            new = np.linalg.norm(flat_state(state) - target)
            assert new <= dist + 1e-9
            dist = new

    def test_deterministic(self):
        problem = random_problem(1)
        config = PSConfig(plan=CyclicSweep(problem.m, problem.p, problem.m, problem.p), max_iterations=300)
        s1, r1 = ps_run(problem, config)
        s2, r2 = ps_run(problem, config)
        assert s1.x == s2.x and s1.v_star == s2.v_star and r1 == r2


def test_solvers_agree():
    problem = random_problem(12)
    dr, _ = dr_run(problem, DRConfig(max_iterations=100000, tolerance=1e-9, check_every=10),
                   full_metrics=False, trace_every=1e9)
    ps, _ = ps_run(problem, PSConfig(max_iterations=100000, tolerance=1e-9, check_every=10),
                   full_metrics=False, trace_every=1e9)
    assert np.linalg.norm(dr_kt_point(problem, dr, 1.0).x.flat() - ps.x.flat()) <= 1e-6


def test_scalar_zero_problem_has_trivial_kt():
    problem = scalar_problem(prox_zero(1), prox_zero(1), 2.0)
    state, _ = ps_run(problem, PSConfig(max_iterations=3))
    assert kt_residual(problem, KTPoint(state.x, state.v_star)) == 0.0
