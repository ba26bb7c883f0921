import numpy as np
import pytest

import switchfit as sf


def make_random_model(rng, n, p, sigma_lo=0.4, sigma_hi=1.2):
    """Well-conditioned random model: transition entries bounded away
    from zero, tame AR dynamics, moderate noise scales."""
    trans = rng.uniform(0.1, 1.0, size=(n, n))
    trans /= trans.sum(axis=0, keepdims=True)
    regimes = []
    for _ in range(n):
        coeffs = np.empty(p + 1)
        coeffs[0] = rng.uniform(-1.0, 1.0)
        if p:
            raw = rng.uniform(-1.0, 1.0, size=p)
            coeffs[1:] = 0.7 * raw / max(1.0, float(np.abs(raw).sum()))
        regimes.append(sf.RegimeParams(coeffs, rng.uniform(sigma_lo, sigma_hi)))
    pi = rng.uniform(0.2, 1.0, size=n)
    pi /= pi.sum()
    return sf.SwitchingModel(
        n_regimes=n,
        ar_order=p,
        transition=trans,
        regimes=tuple(regimes),
        initial_dist=pi,
    )


def make_instance(seed, n, p, t):
    """Random model plus a series simulated from it."""
    rng = np.random.default_rng(seed)
    model = make_random_model(rng, n, p)
    sim = sf.simulate(model, t, seed=seed + 10_000)
    return model, sim.series


def chain_marginals(model, t_steps):
    """Unconditional P(regime at each driver time) for t_steps emissions."""
    probs = np.empty((t_steps, model.n_regimes))
    v = model.initial_dist.copy()
    for t in range(t_steps):
        probs[t] = v
        v = model.transition @ v
    return probs


def expected_chain_jumps(model, t_steps):
    """Closed-form unconditional expected transition counts."""
    marg = chain_marginals(model, t_steps)
    out = np.zeros((model.n_regimes, model.n_regimes))
    for t in range(t_steps):
        out += marg[t][:, None] * model.transition.T
    return out


def identical_regime_model(n, p=0):
    """All regimes emit standard normals: observations carry no regime
    information, so filters must reduce to pure chain prediction."""
    rng = np.random.default_rng(1234 + n)
    trans = rng.uniform(0.2, 1.0, size=(n, n))
    trans /= trans.sum(axis=0, keepdims=True)
    pi = rng.uniform(0.2, 1.0, size=n)
    pi /= pi.sum()
    regimes = tuple(sf.RegimeParams(np.zeros(p + 1), 1.0) for _ in range(n))
    return sf.SwitchingModel(
        n_regimes=n, ar_order=p, transition=trans, regimes=regimes, initial_dist=pi
    )


@pytest.fixture
def two_regime_model():
    return sf.SwitchingModel(
        n_regimes=2,
        ar_order=1,
        transition=np.array([[0.85, 0.25], [0.15, 0.75]]),
        regimes=(
            sf.RegimeParams([0.3, 0.5], 0.5),
            sf.RegimeParams([-0.6, -0.1], 0.8),
        ),
        initial_dist=np.array([0.6, 0.4]),
    )
