import numpy as np
import pytest

from proxkit import (
    CyclicSampler,
    FullBatchSampler,
    MemoryLogger,
    UniformSampler,
    assemble_solver,
    maxiter,
)
from proxkit.errors import (
    DivergenceDetected,
    IncompatiblePolicies,
    InvalidBatch,
)


def quad_loss(x, g):
    g[:] = x
    return 0.5 * float(x @ x)


class CountingLoss:
    def __init__(self, d):
        self.d = d
        self.n_components = 1
        self.evals = 0

    def full_eval(self, x, g):
        self.evals += 1
        g[:] = x
        return 0.5 * float(x @ x)

    def partial_eval(self, x, g, indices):
        return self.full_eval(x, g)


# ---------------------------------------------------------------- terminators


def test_maxiter_boundaries():
    t = maxiter(2500)
    assert t(2499, 0.0, None, None) is True
    assert t(2500, 0.0, None, None) is False
    t0 = maxiter(0)
    assert t0(0, 0.0, None, None) is False


def test_maxiter_counts_gradient_evaluations_exactly():
    loss = CountingLoss(3)
    s = assemble_solver(step_params={"gamma": 0.1})
    s.initialize(np.ones(3))
    res = s.solve(loss, maxiter(5))
    assert loss.evals == 5
    assert res.k == 5


def test_maxiter_zero_returns_x0_no_records():
    logger = MemoryLogger()
    s = assemble_solver(step_params={"gamma": 0.1})
    s.initialize([4.0, -2.0])
    res = s.solve(quad_loss, maxiter(0), logger=logger)
    assert np.array_equal(res.x, [4.0, -2.0])
    assert logger.records == []


# ------------------------------------------------------------------- samplers


def test_uniform_single_component():
    sm = UniformSampler(1, batch_size=1, seed=0)
    idx, origin = sm.next_batch()
    assert list(idx) == [0]
    assert origin == 0


def test_uniform_without_replacement_full_is_permutation():
    sm = UniformSampler(10, batch_size=10, seed=3, replace=False)
    idx, origin = sm.next_batch()
    assert sorted(idx) == list(range(10))
    assert origin is None


def test_uniform_seed_reproducibility():
    a = UniformSampler(100, batch_size=1, seed=42)
    b = UniformSampler(100, batch_size=1, seed=42)
    stream_a = [int(a.next_batch()[0][0]) for _ in range(1000)]
    stream_b = [int(b.next_batch()[0][0]) for _ in range(1000)]
    assert stream_a == stream_b


def test_uniform_indices_in_range():
    sm = UniformSampler(7, batch_size=3, seed=1)
    for _ in range(200):
        idx, origin = sm.next_batch()
        assert origin is None
        assert np.all((idx >= 0) & (idx < 7))


def test_invalid_batch_sizes():
    with pytest.raises(InvalidBatch):
        UniformSampler(5, batch_size=0)
    with pytest.raises(InvalidBatch):
        UniformSampler(5, batch_size=6, replace=False)
    with pytest.raises(InvalidBatch):
        CyclicSampler(5, batch_size=6)


def test_cyclic_sampler_batches_and_origins():
    sm = CyclicSampler(7, batch_size=3)
    seen = [sm.next_batch() for _ in range(4)]
    assert [list(b[0]) for b in seen] == [[0, 1, 2], [3, 4, 5], [6], [0, 1, 2]]
    assert [b[1] for b in seen] == [0, 1, 2, 0]
    assert sm.n_origins == 3


def test_full_batch_sampler():
    sm = FullBatchSampler(4)
    idx, origin = sm.next_batch()
    assert list(idx) == [0, 1, 2, 3]
    assert origin == 0
    assert sm.n_origins == 1


# ------------------------------------------------------------------- assembly


def test_default_assembly_is_vanilla_gd():
    from proxkit.policies.boosting import NoBoost
    from proxkit.policies.prox import IdentityProx
    from proxkit.policies.smoothing import NoSmooth
    from proxkit.policies.step import ConstantStep

    s = assemble_solver()
    assert isinstance(s.stack.boosting, NoBoost)
    assert isinstance(s.stack.smoothing, NoSmooth)
    assert isinstance(s.stack.step, ConstantStep)
    assert isinstance(s.stack.prox, IdentityProx)
    assert s.executor == "serial"


def test_adam_assembly():
    from proxkit.policies.boosting import Momentum
    from proxkit.policies.smoothing import RmsProp

    s = assemble_solver(boosting="momentum", smoothing="rmsprop")
    assert isinstance(s.stack.boosting, Momentum)
    assert isinstance(s.stack.smoothing, RmsProp)


def test_proxasaga_assembly_on_lockfree():
    s = assemble_solver(
        boosting="saga",
        prox="l1norm",
        prox_params={"lambda1": 1e-4},
        executor="inconsistent",
        workers=2,
    )
    assert s.executor == "inconsistent"


def test_incompatible_momentum_on_lockfree():
    with pytest.raises(IncompatiblePolicies):
        assemble_solver(boosting="momentum", executor="inconsistent")


def test_incompatible_nonseparable_prox_on_lockfree():
    class FancyProx:
        separable = False
        shrinks_rest = True

        def initialize(self, d):
            pass

        def prox(self, gamma, x, d):
            return x - gamma * d

    with pytest.raises(IncompatiblePolicies):
        assemble_solver(prox=FancyProx(), executor="inconsistent")


def test_table_boosting_needs_origin_identity():
    s = assemble_solver(boosting="saga", step_params={"gamma": 0.01})
    s.initialize(np.zeros(3))

    class TwoComponentLoss:
        n_components = 4

        def full_eval(self, x, g):
            g[:] = x
            return 0.5 * float(x @ x)

        def partial_eval(self, x, g, indices):
            return self.full_eval(x, g)

    sampler = UniformSampler(4, batch_size=2, seed=0)  # no stable origin
    with pytest.raises(IncompatiblePolicies):
        s.solve(TwoComponentLoss(), maxiter(1), sampler=sampler)


def test_full_batch_allowed_with_table_boosting():
    s = assemble_solver(boosting="aggregated", step_params={"gamma": 0.5})
    s.initialize(np.ones(2))
    res = s.solve(quad_loss, maxiter(3))
    assert res.k == 3


# ---------------------------------------------------------------- serial runs


def test_gd_single_newton_step():
    s = assemble_solver(step_params={"gamma": 1.0})
    s.initialize([1.0])
    res = s.solve(quad_loss, maxiter(1))
    assert res.x[0] == 0.0


def test_gd_geometric_decay():
    s = assemble_solver(step_params={"gamma": 0.5})
    s.initialize([2.0])
    logger = MemoryLogger(keep_x=True)
    s.solve(quad_loss, maxiter(3), logger=logger)
    xs = [r.x[0] for r in logger.records]
    assert xs == [1.0, 0.5, 0.25]
    assert [r.fval for r in logger.records] == [2.0, 0.5, 0.125]


def test_gd_matches_textbook_recursion_bitwise():
    rng = np.random.default_rng(0)
    d, K, gamma = 8, 50, 0.17
    x0 = rng.standard_normal(d)
    A = rng.standard_normal((d, d))
    Q = A.T @ A / d + np.eye(d)
    q = rng.standard_normal(d)

    def loss(x, g):
        g[:] = Q @ x + q
        return 0.5 * float(x @ Q @ x) + float(q @ x)

    s = assemble_solver(step_params={"gamma": gamma})
    s.initialize(x0)
    res = s.solve(loss, maxiter(K))

    x = x0.copy()
    for _ in range(K):
        x = x - gamma * (Q @ x + q)
    assert np.array_equal(res.x, x)


def test_logger_completeness_and_monotone_records():
    logger = MemoryLogger()
    s = assemble_solver(step_params={"gamma": 0.1})
    s.initialize(np.ones(4))
    s.solve(quad_loss, maxiter(37), logger=logger)
    ks = [r.k for r in logger.records]
    ts = [r.t_ns for r in logger.records]
    assert ks == list(range(37))
    assert all(t2 >= t1 for t1, t2 in zip(ts, ts[1:]))


def test_pipeline_call_order_with_spies():
    calls = []

    class SpyBoost:
        requires_origin = False

        def initialize(self, d, n_slots=1):
            pass

        def boost(self, origin, kl, kg, g):
            calls.append("boost")
            return g

    class SpySmooth:
        def initialize(self, d):
            pass

        def smooth(self, kl, kg, x, g):
            calls.append("smooth")
            return g

    class SpyStep:
        def initialize(self, d):
            pass

        def step(self, kl, kg, fval, x, g):
            calls.append("step")
            return 0.1

    class SpyProx:
        separable = True
        shrinks_rest = False

        def initialize(self, d):
            pass

        def prox(self, gamma, x, d):
            calls.append("prox")
            return x - gamma * d

        def prox_coord(self, gamma, xj, dj):
            return xj - gamma * dj

    s = assemble_solver(boosting=SpyBoost(), smoothing=SpySmooth(), step=SpyStep(), prox=SpyProx())
    s.initialize(np.ones(2))
    s.solve(quad_loss, maxiter(2))
    assert calls == ["boost", "smooth", "step", "prox"] * 2


def test_serial_determinism_same_seed():
    from proxkit.problems import LogisticLoss, generate_logistic_dataset

    ds = generate_logistic_dataset(50, 10, 0.4, seed=5)

    def run():
        loss = LogisticLoss(ds)
        s = assemble_solver(
            boosting="momentum",
            smoothing="rmsprop",
            step_params={"gamma": 0.05},
        )
        s.initialize(np.zeros(10))
        logger = MemoryLogger()
        s.solve(loss, maxiter(40), sampler=UniformSampler(50, 8, seed=9), logger=logger)
        return [(r.k, r.fval) for r in logger.records]

    assert run() == run()


def test_divergence_detected():
    def nan_loss(x, g):
        g[:] = np.nan
        return float("nan")

    s = assemble_solver(step_params={"gamma": 0.1})
    s.initialize(np.ones(2))
    with pytest.raises(DivergenceDetected):
        s.solve(nan_loss, maxiter(3))


def test_divergence_check_skippable():
    def nan_loss(x, g):
        g[:] = np.nan
        return float("nan")

    s = assemble_solver(step_params={"gamma": 0.1}, check_divergence=False)
    s.initialize(np.ones(2))
    res = s.solve(nan_loss, maxiter(2))
    assert np.all(np.isnan(res.x))


def test_solve_requires_initialize():
    s = assemble_solver()
    with pytest.raises(ValueError):
        s.solve(quad_loss, maxiter(1))
