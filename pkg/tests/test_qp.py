import numpy as np
import pytest

from proxkit.errors import InvalidSpectrum
from proxkit.problems import generate_qp, load_qp, save_qp


def test_isotropic_instance_acts_as_identity():
    qp = generate_qp(2, 1.0, 1.0, seed=0)
    rng = np.random.default_rng(1)
    for _ in range(5):
        v = rng.standard_normal(2)
        assert np.allclose(qp.matvec(v), v, rtol=1e-12, atol=1e-12)
    assert np.allclose(qp.x_star, -qp.q, rtol=1e-12)


def test_spectrum_extremes_via_iterative_estimates():
    qp = generate_qp(100, 0.05, 20.0, seed=7)
    rng = np.random.default_rng(2)
    v = rng.standard_normal(100)
    for _ in range(500):
        v = qp.matvec(v)
        v /= np.linalg.norm(v)
    lam_max = v @ qp.matvec(v)
    assert lam_max == pytest.approx(20.0, rel=1e-3)
    w = rng.standard_normal(100)
    for _ in range(500):
        w = qp._solve(w)
        w /= np.linalg.norm(w)
    lam_min = w @ qp.matvec(w)
    assert lam_min == pytest.approx(0.05, rel=1e-3)


def test_gradient_vanishes_at_minimizer():
    for seed in (0, 1, 2):
        qp = generate_qp(50, 0.1, 10.0, seed=seed)
        g = np.empty(50)
        f_star = qp.full_eval(qp.x_star, g)
        assert np.linalg.norm(g) <= 1e-8 * np.linalg.norm(qp.q)
        assert f_star == qp.f_star


def test_minimizer_is_strict():
    for seed in (3, 4, 5):
        qp = generate_qp(20, 0.5, 5.0, seed=seed)
        g = np.empty(20)
        e1 = np.zeros(20)
        e1[0] = 1e-3
        assert qp.full_eval(qp.x_star + e1, g) > qp.f_star


def test_eval_at_zero():
    qp = generate_qp(10, 0.5, 2.0, seed=9)
    g = np.empty(10)
    f = qp.full_eval(np.zeros(10), g)
    assert f == 0.0
    assert np.array_equal(g, qp.q)


def test_rayleigh_quotient_bounds():
    qp = generate_qp(40, 0.2, 8.0, seed=11)
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.standard_normal(40)
        r = (v @ qp.matvec(v)) / (v @ v)
        assert 0.2 - 1e-10 <= r <= 8.0 + 1e-10


def test_gradient_matches_central_differences():
    qp = generate_qp(15, 0.3, 6.0, seed=13)
    rng = np.random.default_rng(4)
    g = np.empty(15)
    h = 1e-6
    scratch = np.empty(15)
    for _ in range(20):
        x = rng.standard_normal(15)
        qp.full_eval(x, g)
        for j in range(15):
            e = np.zeros(15)
            e[j] = h
            fd = (qp.full_eval(x + e, scratch) - qp.full_eval(x - e, scratch)) / (2 * h)
            assert fd == pytest.approx(g[j], rel=1e-5, abs=1e-8)


def test_gd_contraction_factor():
    # error contracts by at most (kappa-1)/(kappa+1) per iterate
    from proxkit import MemoryLogger, assemble_solver, maxiter

    qp = generate_qp(30, 0.1, 10.0, seed=17)
    gamma = 2.0 / (0.1 + 10.0)
    rho = (100.0 - 1.0) / (100.0 + 1.0)
    s = assemble_solver(step_params={"gamma": gamma})
    rng = np.random.default_rng(5)
    s.initialize(rng.normal(5.0, 3.0, size=30))
    logger = MemoryLogger(keep_x=True)
    s.solve(qp, maxiter(200), logger=logger)
    errs = [np.linalg.norm(r.x - qp.x_star) for r in logger.records]
    for e_prev, e_next in zip(errs, errs[1:]):
        assert e_next <= rho * e_prev + 1e-10


def test_save_load_roundtrip(tmp_path):
    qp = generate_qp(25, 0.4, 9.0, seed=21)
    path = tmp_path / "instance.qp"
    save_qp(qp, path)
    back = load_qp(path)
    assert back.d == qp.d and back.seed == qp.seed
    assert np.array_equal(back.spectrum, qp.spectrum)
    assert np.array_equal(back.q, qp.q)
    assert np.array_equal(back.x_star, qp.x_star)


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.qp"
    path.write_bytes(b"NOTQP!" + b"\x00" * 28)
    with pytest.raises(ValueError):
        load_qp(path)


def test_invalid_spectrum():
    with pytest.raises(InvalidSpectrum):
        generate_qp(10, 2.0, 1.0, seed=0)
    with pytest.raises(InvalidSpectrum):
        generate_qp(10, 0.0, 1.0, seed=0)
    with pytest.raises(ValueError):
        generate_qp(1, 0.5, 1.0, seed=0)


def test_deterministic_in_seed():
    a = generate_qp(12, 0.2, 3.0, seed=33)
    b = generate_qp(12, 0.2, 3.0, seed=33)
    c = generate_qp(12, 0.2, 3.0, seed=34)
    assert np.array_equal(a.q, b.q)
    assert np.array_equal(a.spectrum, b.spectrum)
    assert not np.array_equal(a.q, c.q)
