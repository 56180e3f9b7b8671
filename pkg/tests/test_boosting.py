import numpy as np
import pytest

from proxkit.errors import DimensionMismatch, UnknownOrigin
from proxkit.policies import boosting


def test_none_is_identity():
    b = boosting.make("none")
    b.initialize(2)
    g = np.array([1.0, 2.0])
    out = b.boost(0, 0, 0, g)
    assert np.array_equal(out, g)
    assert np.array_equal(b.boost(3, 5, 7, np.zeros(2)), np.zeros(2))


def test_momentum_first_and_second_call():
    b = boosting.make("momentum", mu=0.9, eps=0.1)
    b.initialize(2)
    out1 = b.boost(0, 0, 0, np.array([1.0, 1.0]))
    assert np.allclose(out1, [0.1, 0.1], atol=0, rtol=0)
    # hand-evaluated second application: v = 0.9*0.1 + 0.1*1 = 0.19
    out2 = b.boost(0, 1, 1, np.array([1.0, 1.0]))
    assert np.allclose(out2, [0.19, 0.19], atol=1e-16)


def test_momentum_degenerate_is_identity_bitwise():
    b = boosting.make("momentum", mu=0.0, eps=1.0)
    b.initialize(3)
    g = np.array([0.25, -1.5, 3.0])
    for _ in range(4):
        out = b.boost(0, 0, 0, g)
        assert np.array_equal(out, g)


def test_momentum_dimension_mismatch():
    b = boosting.make("momentum")
    b.initialize(2)
    with pytest.raises(DimensionMismatch):
        b.boost(0, 0, 0, np.zeros(3))


def test_nesterov_lookahead_vector():
    b = boosting.make("nesterov", mu=0.9, eps=0.1)
    b.initialize(2)
    out = b.boost(0, 0, 0, np.array([1.0, 0.0]))
    # v = (0.1, 0); output mu*v + eps*g = (0.19, 0)
    assert np.allclose(b.velocity, [0.1, 0.0], atol=1e-16)
    assert np.allclose(out, [0.19, 0.0], atol=1e-16)


def test_nesterov_mu_zero_reduces_to_identity():
    b = boosting.make("nesterov", mu=0.0, eps=1.0)
    b.initialize(2)
    g = np.array([2.0, -3.0])
    assert np.array_equal(b.boost(0, 0, 0, g), g)


def test_nesterov_dominates_momentum_from_zero_state():
    # from equal zero states, one call gives (1+mu)*eps*g vs eps*g
    rng = np.random.default_rng(7)
    for _ in range(10):
        g = rng.random(3)
        mom = boosting.make("momentum", mu=0.8, eps=0.3)
        nes = boosting.make("nesterov", mu=0.8, eps=0.3)
        mom.initialize(3)
        nes.initialize(3)
        out_m = mom.boost(0, 0, 0, g)
        out_n = nes.boost(0, 0, 0, g)
        assert np.all(out_n >= out_m - 1e-15)


def test_nesterov_vs_momentum_gap_identity():
    # over a shared stream the states coincide and the outputs differ by
    # mu*(eps*g - (1-mu)*v_prev)
    mu, eps = 0.8, 0.3
    mom = boosting.make("momentum", mu=mu, eps=eps)
    nes = boosting.make("nesterov", mu=mu, eps=eps)
    mom.initialize(3)
    nes.initialize(3)
    rng = np.random.default_rng(8)
    for k in range(20):
        g = rng.standard_normal(3)
        v_prev = mom.velocity.copy()
        out_m = mom.boost(0, k, k, g)
        out_n = nes.boost(0, k, k, g)
        assert np.allclose(out_n - out_m, mu * (eps * g - (1 - mu) * v_prev), atol=1e-12)


def test_aggregated_update_rule():
    b = boosting.make("aggregated")
    b.initialize(2, n_slots=2)
    b.boost(0, 0, 0, np.array([1.0, 0.0]))
    b.boost(1, 1, 1, np.array([0.0, 2.0]))
    out = b.boost(0, 2, 2, np.array([3.0, 0.0]))
    assert np.allclose(out, [3.0, 2.0], atol=0)


def test_aggregated_from_zero_table():
    b = boosting.make("aggregated")
    b.initialize(2, n_slots=4)
    g = np.array([0.5, -0.5])
    assert np.allclose(b.boost(2, 0, 0, g), g, atol=0)


def test_aggregated_full_pass_equals_full_gradient():
    # after each component reports once at a fixed point, the aggregate is
    # the sum of fresh component gradients
    rng = np.random.default_rng(3)
    n, d = 6, 4
    grads = rng.standard_normal((n, d))
    b = boosting.make("aggregated")
    b.initialize(d, n_slots=n)
    for i in range(n):
        out = b.boost(i, i, i, grads[i])
    assert np.allclose(out, grads.sum(axis=0), atol=1e-12)


def test_aggregated_matches_recomputed_sum():
    rng = np.random.default_rng(11)
    n, d = 5, 3
    b = boosting.make("aggregated")
    b.initialize(d, n_slots=n)
    for k in range(50):
        i = int(rng.integers(n))
        b.boost(i, k, k, rng.standard_normal(d))
        assert np.allclose(b.aggregate, b.grad_table.sum(axis=0), atol=1e-10)


def test_aggregated_unknown_origin():
    b = boosting.make("aggregated")
    b.initialize(2, n_slots=2)
    with pytest.raises(UnknownOrigin):
        b.boost(2, 0, 0, np.zeros(2))


def test_saga_all_equal_returns_fresh():
    b = boosting.make("saga")
    b.initialize(2, n_slots=3)
    g = np.array([1.0, -1.0])
    for i in range(3):
        b.boost(i, i, i, g)
    out = b.boost(1, 3, 3, g)
    assert np.allclose(out, g, atol=1e-15)


def test_saga_forced_example():
    b = boosting.make("saga")
    b.initialize(2, n_slots=2)
    b.grad_table[0] = [2.0, 0.0]
    b.grad_table[1] = [0.0, 0.0]
    b.table_mean[:] = [1.0, 0.0]
    out = b.boost(0, 0, 0, np.array([4.0, 0.0]))
    assert np.allclose(out, [3.0, 0.0], atol=0)
    assert np.allclose(b.grad_table[0], [4.0, 0.0], atol=0)


def test_saga_mean_matches_recomputation():
    rng = np.random.default_rng(5)
    n, d = 8, 4
    b = boosting.make("saga")
    b.initialize(d, n_slots=n)
    for k in range(100):
        i = int(rng.integers(n))
        b.boost(i, k, k, rng.standard_normal(d))
        assert np.allclose(b.table_mean, b.grad_table.mean(axis=0), atol=1e-10)


def test_saga_unbiasedness_over_components():
    # fixed x, fully populated table: averaging the outputs over all i equals
    # the mean of the fresh component gradients (brute force, d<=10, n<=8)
    rng = np.random.default_rng(13)
    n, d = 8, 10
    stored = rng.standard_normal((n, d))
    fresh = rng.standard_normal((n, d))
    outs = []
    for i in range(n):
        b = boosting.make("saga")
        b.initialize(d, n_slots=n)
        b.grad_table[:] = stored
        b.table_mean[:] = stored.mean(axis=0)
        outs.append(b.boost(i, 0, 0, fresh[i]))
    assert np.allclose(np.mean(outs, axis=0), fresh.mean(axis=0), atol=1e-12)


def test_state_isolation_between_solvers():
    from proxkit import assemble_solver, maxiter

    s1 = assemble_solver(boosting="momentum", step_params={"gamma": 0.1})
    s2 = assemble_solver(boosting="momentum", step_params={"gamma": 0.1})
    s1.initialize(np.ones(3))
    s2.initialize(np.ones(3))

    def quad(x, g):
        g[:] = x
        return 0.5 * float(x @ x)

    s2.solve(quad, maxiter(5))
    s1.stack.initialize(3)  # fresh state as solve() would set it
    assert np.array_equal(s1.stack.boosting.velocity, np.zeros(3))
    assert not np.array_equal(s2.stack.boosting.velocity, np.zeros(3))
