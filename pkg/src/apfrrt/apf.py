"""Artificial potential field used to bias tree growth.

The attractive term pulls toward the goal configuration, the repulsive terms
push away from the nearest permeable and nearest impermeable obstacle. The
field is only ever used as a bias on top of random exploration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from apfrrt.environments import CSpaceEnvironment
from apfrrt.geometry import Region

EPS = 1e-12


@dataclass(frozen=True)
class PotentialParams:
    k_att: float = 50.0
    k_rep_perm: float = 500.0
    k_rep_imp: float = 500.0
    d_obs_star: float = 5.0
    beta: float = 1.0
    # None: filled in per environment as the attractive force magnitude at the start
    f_att_max: Optional[float] = None
    d_obs_star_imp: Optional[float] = None
    d_min: float = 1e-3
    fd_step: float = 1e-5

    def __post_init__(self):
        for name in ("k_att", "k_rep_perm", "k_rep_imp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative")
        if not self.d_obs_star > 0 or (self.d_obs_star_imp is not None and not self.d_obs_star_imp > 0):
            raise ValueError("d_obs_star must be positive")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError("beta must be > 0")
        if self.f_att_max is not None and not (math.isfinite(self.f_att_max) and self.f_att_max > 0):
            raise ValueError("f_att_max must be > 0")
        if not (self.d_min > 0 and self.fd_step > 0):
            raise ValueError("d_min and fd_step must be positive")

    def rep_params(self, cls: Region) -> tuple[float, float]:
        """(gain, influence distance) for an obstacle class."""
        if cls is Region.IMPERMEABLE:
            return self.k_rep_imp, self.d_obs_star if self.d_obs_star_imp is None else self.d_obs_star_imp
        return self.k_rep_perm, self.d_obs_star


def resolve_for(params: PotentialParams, env: CSpaceEnvironment) -> PotentialParams:
    """Fill ``f_att_max`` from the environment when it was left unset."""
    if params.f_att_max is not None:
        return params
    f = 2.0 * params.k_att * env.distance(env.start, env.goal)
    return replace(params, f_att_max=f) if f > 0 else params


class PotentialSample(NamedTuple):
    u_att: float
    u_rep: float
    u_tot: float
    grad_u_tot: np.ndarray
    f_total_scalar: float
    lam: float


def attractive_potential(params: PotentialParams, d_goal: float) -> float:
    if d_goal < 0:
        raise ValueError("negative goal distance")
    return params.k_att * d_goal * d_goal


def _rep(k: float, d: float, dstar: float, d_min: float) -> float:
    if d > dstar:
        return 0.0
    d = max(d, d_min)
    t = 1.0 / d - 1.0 / dstar
    return 0.5 * k * t * t


def _rep_slope(k: float, d: float, dstar: float, d_min: float) -> float:
    # d/dd of _rep; flat below d_min where the distance is clamped
    if d > dstar or d <= d_min:
        return 0.0
    return -k * (1.0 / d - 1.0 / dstar) / (d * d)


def repulsive_potential(params: PotentialParams, d_obs: float, cls: Region = Region.PERMEABLE) -> float:
    """Quadratic inverse-distance barrier, zero beyond the influence distance.

    At contact the distance is clamped to ``params.d_min`` so the value stays
    finite (permeable contact is a legal configuration).
    """
    if d_obs < 0:
        raise ValueError("negative obstacle distance")
    k, dstar = params.rep_params(cls)
    return _rep(k, d_obs, dstar, params.d_min)


def _u_rep(params: PotentialParams, dp: float, di: float) -> float:
    u = 0.0
    if not math.isinf(dp):
        u += _rep(params.k_rep_perm, dp, params.d_obs_star, params.d_min)
    if not math.isinf(di):
        k, dstar = params.rep_params(Region.IMPERMEABLE)
        u += _rep(k, di, dstar, params.d_min)
    return u


def total_potential(env: CSpaceEnvironment, params: PotentialParams, q) -> float:
    dp, di = env.clearance_batch(np.asarray(q, dtype=float).reshape(1, env.dim))
    return attractive_potential(params, env.goal_distance(q)) + _u_rep(params, float(dp[0]), float(di[0]))


def potential_terms(env: CSpaceEnvironment, params: PotentialParams, q) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the attractive and repulsive potentials at ``q``.

    Point robots use the closed form through the nearest obstacle of each
    class. Other environments difference the repulsive potential centrally,
    since their clearance is a minimum over sampled link points.
    """
    q = np.asarray(q, dtype=float)
    grad_att = 2.0 * params.k_att * env.difference(q, env.goal)
    if params.k_rep_perm == 0.0 and params.k_rep_imp == 0.0:
        return grad_att, np.zeros(env.dim)
    if hasattr(env, "clearance_gradients"):
        dp, gp, di, gi = env.clearance_gradients(q)
        grad_rep = np.zeros(env.dim)
        if not math.isinf(dp):
            grad_rep += _rep_slope(params.k_rep_perm, dp, params.d_obs_star, params.d_min) * gp
        if not math.isinf(di):
            k, dstar = params.rep_params(Region.IMPERMEABLE)
            grad_rep += _rep_slope(k, di, dstar, params.d_min) * gi
        return grad_att, grad_rep
    return grad_att, _fd_rep_gradient(env, params, q)


def _fd_rep_gradient(env: CSpaceEnvironment, params: PotentialParams, q: np.ndarray) -> np.ndarray:
    h = params.fd_step
    n = env.dim
    Q = np.repeat(q[None, :], 2 * n, axis=0)
    for j in range(n):
        Q[2 * j, j] += h
        Q[2 * j + 1, j] -= h
    dp, di = env.clearance_batch(Q)
    u = [_u_rep(params, float(a), float(b)) for a, b in zip(dp, di)]
    return np.array([(u[2 * j] - u[2 * j + 1]) / (2.0 * h) for j in range(n)])


def potential_gradient(env: CSpaceEnvironment, params: PotentialParams, q) -> np.ndarray:
    ga, gr = potential_terms(env, params, q)
    return ga + gr


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


def total_force_scalar(f_att: np.ndarray, f_rep: np.ndarray) -> float:
    """Net force projected on the attractive direction (0 with no attraction)."""
    n = _norm(f_att)
    if n == 0.0:
        return 0.0
    return float((f_att + f_rep) @ f_att) / n


def lambda_weight(params: PotentialParams, f_att_vec, f_rep_vec) -> float:
    """Exploration weight in (0, 1]; exactly 1 when the net force does not point goalward."""
    f_total = total_force_scalar(np.asarray(f_att_vec, dtype=float), np.asarray(f_rep_vec, dtype=float))
    if f_total <= 0.0:
        return 1.0
    if params.f_att_max is None:
        raise ValueError("f_att_max unset; call resolve_for(params, env) first")
    return 1.0 / (params.beta * f_total / params.f_att_max + 1.0)


def blend_directions(lam: float, v_r: np.ndarray, v_p: np.ndarray) -> np.ndarray:
    if lam == 1.0:
        return v_r
    b = lam * v_r + (1.0 - lam) * v_p
    nb = _norm(b)
    if nb < EPS:
        return v_r
    return b / nb


def biased_extend_direction(env: CSpaceEnvironment, params: PotentialParams, q_near, q_rand) -> np.ndarray:
    """Unit extension direction mixing the random-sample direction with the
    descent direction of the potential at the nearest node."""
    v = env.difference(q_rand, q_near)
    nv = _norm(v)
    if nv == 0.0:
        raise ValueError("q_rand coincides with q_near")
    v_r = v / nv
    ga, gr = potential_terms(env, params, q_near)
    g = ga + gr
    ng = _norm(g)
    if ng < EPS:
        return v_r
    lam = lambda_weight(params, -ga, -gr)
    return blend_directions(lam, v_r, -g / ng)


def bias_random_sample(env: CSpaceEnvironment, params: PotentialParams, q_rand, step: float, iters: int) -> np.ndarray:
    """Walk a random sample down the potential: ``iters`` steps of length ``step``,
    re-evaluating the gradient each time. Stops before entering an impermeable
    region or when the gradient vanishes."""
    if not step > 0 or iters < 0:
        raise ValueError("step must be positive and iters non-negative")
    q = np.asarray(q_rand, dtype=float)
    for _ in range(iters):
        g = potential_gradient(env, params, q)
        ng = _norm(g)
        if ng < EPS:
            break
        q_next = env.steer(q, -g / ng, step)
        if env.classify(q_next).region is Region.IMPERMEABLE:
            break
        q = q_next
    return q


def sample_potential(env: CSpaceEnvironment, params: PotentialParams, q) -> PotentialSample:
    q = np.asarray(q, dtype=float)
    dp, di = env.clearance_batch(q.reshape(1, env.dim))
    u_att = attractive_potential(params, env.goal_distance(q))
    u_rep = _u_rep(params, float(dp[0]), float(di[0]))
    ga, gr = potential_terms(env, params, q)
    f_total = total_force_scalar(-ga, -gr)
    lam = lambda_weight(params, -ga, -gr) if params.f_att_max is not None or f_total <= 0 else float("nan")
    return PotentialSample(u_att, u_rep, u_att + u_rep, ga + gr, f_total, lam)
