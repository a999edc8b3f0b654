from dataclasses import replace

import numpy as np

from splitqc.optimizers import AdamState, SpsaState, adam_step, spsa_step


def quad(x):
    return float(np.sum(x * x))


def test_adam_first_step_is_signed_lr():
    st = AdamState.init(3, lr=0.05)
    params = np.array([1.0, -2.0, 0.5])
    grad = np.array([0.3, -0.1, 0.0])
    st2, new = adam_step(st, params, grad)
    expected = params - 0.05 * np.sign(grad) * (np.abs(grad) > 0)
    assert np.allclose(new, expected, atol=1e-6)
    assert st2.t == 1
    # zero gradient leaves parameters in place
    st3, same = adam_step(AdamState.init(3), params, np.zeros(3))
    assert np.allclose(same, params)


def test_adam_converges_on_quadratic():
    st = AdamState.init(4, lr=0.1)
    x = np.array([2.0, -3.0, 1.5, 0.7])
    for _ in range(400):
        st, x = adam_step(st, x, 2 * x)
    assert np.max(np.abs(x)) < 1e-3


def test_adam_state_is_immutable_record():
    st = AdamState.init(2)
    st2, _ = adam_step(st, np.zeros(2), np.ones(2))
    assert st.t == 0 and st2.t == 1
    assert np.all(st.m == 0)


def test_spsa_gains_decrease():
    st = SpsaState.init(seed=0, iterations=100)
    gains_a = [replace(st, k=k).gain_a() for k in range(5)]
    gains_c = [replace(st, k=k).gain_c() for k in range(5)]
    assert all(x > y for x, y in zip(gains_a, gains_a[1:]))
    assert all(x > y for x, y in zip(gains_c, gains_c[1:]))


def test_spsa_step_is_deterministic_given_seed():
    # 16 dims so a sign-pattern collision between two seeds is implausible
    p = np.linspace(-1, 1, 16)
    a = spsa_step(SpsaState.init(seed=12), p, quad)
    b = spsa_step(SpsaState.init(seed=12), p, quad)
    assert np.array_equal(a[1], b[1])
    c = spsa_step(SpsaState.init(seed=13), p, quad)
    assert not np.array_equal(a[1], c[1])


def test_spsa_records_both_evaluations():
    st, _ = spsa_step(SpsaState.init(seed=5), np.array([1.0, 2.0]), quad)
    assert st.last_evals is not None
    y_plus, y_minus = st.last_evals
    assert y_plus != y_minus or abs(y_plus - y_minus) < 1e-12
    assert st.k == 1


def test_spsa_converges_on_quadratic_bowl():
    wins = 0
    for seed in range(50):
        st = SpsaState.init(seed=seed)
        x = np.full(4, 1.0)
        for _ in range(500):
            st, x = spsa_step(st, x, quad)
        if quad(x) < 0.1:
            wins += 1
    assert wins >= 45
