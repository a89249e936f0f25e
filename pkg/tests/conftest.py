import numpy as np
import pytest

from commuteq import ScenarioParams, derive, validate


def base_params(**overrides) -> ScenarioParams:
    """Corridor used throughout: 100k commuters, 200 veh/min bottleneck."""
    fields = dict(alpha=0.3, beta=0.1, gamma=0.4, s=200.0, theta=0.001,
                  R=1.0, F=4.0, W=3.0, S0=3.0, eps=0.0, N=100000.0, t_star=540.0)
    fields.update(overrides)
    return validate(ScenarioParams(**fields))


@pytest.fixture(scope="session")
def P0() -> ScenarioParams:
    return base_params()


@pytest.fixture(scope="session")
def P1() -> ScenarioParams:
    """Same corridor with ride-sourcing dearer than driving (W > W0)."""
    return base_params(W=6.0)


def draw_road_scenario(rng: np.random.Generator) -> tuple[ScenarioParams, float]:
    """Random valid scenario with W > W0 and a binding parking stock.

    Rejection-samples until the draw sits inside the model's taxonomy:
    both road modes priced in, interior mode split, and (for eps > 0)
    W above the congested indifference threshold W1, below which the
    search-time normalization admits no consistent pattern.
    """
    for _ in range(500):
        beta = rng.uniform(0.05, 0.5)
        alpha = beta * rng.uniform(1.3, 3.0)
        gamma = alpha * rng.uniform(1.1, 3.0)
        s = rng.uniform(50.0, 400.0)
        theta = rng.uniform(0.0003, 0.003)
        N = rng.uniform(3e4, 2e5)
        R = rng.uniform(0.5, 3.0)
        F = rng.uniform(1.0, 6.0)
        S0 = rng.uniform(0.5, 8.0)
        eps = 0.0 if rng.random() < 0.5 else rng.uniform(0.2, 3.0)
        w1 = (alpha - beta) * (S0 + eps) + F
        w_cap = R + theta * N
        if w1 * 1.02 >= w_cap * 0.9:
            continue
        p = validate(ScenarioParams(
            alpha=alpha, beta=beta, gamma=gamma, s=s, theta=theta, R=R, F=F,
            W=rng.uniform(w1 * 1.02, w_cap * 0.9), S0=S0, eps=eps, N=N, t_star=540.0,
        ))
        dc = derive(p, 0.0)
        if not (0.05 * N < dc.NC0_raw < 0.95 * N):
            continue
        if not (0.05 * N < dc.N0_raw < 0.95 * N):
            continue
        if p.transit_cost(N - dc.N0) <= alpha * S0 + F + 0.05:
            continue
        return p, rng.uniform(0.02, 0.98) * dc.NC0
    raise RuntimeError("scenario sampler exhausted its attempts")


def draw_reserved_scenario(rng: np.random.Generator) -> tuple[ScenarioParams, float, float]:
    """Random valid scenario in the reserved regime (W <= W0, eps = 0)."""
    for _ in range(500):
        beta = rng.uniform(0.05, 0.5)
        alpha = beta * rng.uniform(1.3, 3.0)
        gamma = alpha * rng.uniform(1.1, 3.0)
        s = rng.uniform(50.0, 400.0)
        theta = rng.uniform(0.0003, 0.003)
        N = rng.uniform(3e4, 2e5)
        R = rng.uniform(0.5, 3.0)
        F = rng.uniform(1.0, 6.0)
        S0 = rng.uniform(0.5, 8.0)
        w0 = (alpha - beta) * S0 + F
        if w0 * 0.2 >= min(w0, (R + theta * N) * 0.9):
            continue
        p = validate(ScenarioParams(
            alpha=alpha, beta=beta, gamma=gamma, s=s, theta=theta, R=R, F=F,
            W=rng.uniform(w0 * 0.2, min(w0, (R + theta * N) * 0.9)),
            S0=S0, eps=0.0, N=N, t_star=540.0,
        ))
        dc = derive(p, 0.0)
        if not (0.1 * N < dc.NC0_raw < 0.9 * N):
            continue
        if dc.NF0_raw <= 0.05 * N:
            continue
        M = rng.uniform(0.05, 1.0) * dc.NC0
        NF = rng.uniform(0.0, 0.95) * dc.NF0
        return p, M, NF
    raise RuntimeError("scenario sampler exhausted its attempts")
