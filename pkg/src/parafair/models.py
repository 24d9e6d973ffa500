"""Recommender models and their SGD trainers.

Five parametric predictors share one interface: plain dot-product MF on the
raw rating scale, cosine-normalized MF, the hyperplane-constrained variant
(all factor rows projected onto a fixed hyperplane through the origin), the
two-channel paraboloid-surface model, and two non-learned placement
baselines. ``predict`` / ``predict_pairs`` / ``score_matrix`` give scalar,
pairwise and full-row predictions for any trained model.

Each fit owns its factor matrices while training; a returned TrainedModel's
arrays are frozen read-only, so finished models are safe for concurrent
prediction, and independent runs may train in parallel over a shared
dataset (derive per-run seeds with ``child_seed``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from .analysis import EpochTrace
from .data import Dataset, TrainConfig, child_seed, seeded_rng
from .exceptions import (
    DegenerateVectorError,
    DivergenceError,
    InvalidInputError,
)

logger = logging.getLogger(__name__)

MODEL_TAGS = ("classic-mf", "cosine-mf", "linfac", "paramat", "random", "zipf-placement")

# Per-sample gradient-norm clip for the unnormalized objective, which is
# otherwise prone to blow-ups on raw rating scales.
CLASSIC_CLIP_NORM = 10.0

EpochEval = Callable[["TrainedModel"], tuple[float, float]]


@dataclass
class FactorSet:
    """Learned embeddings: user rows U, item rows V, and for the surface
    model the second channel W (users) and P (items); ``alpha`` is the
    hyperplane normal of the constrained variant."""

    U: np.ndarray | None = None
    V: np.ndarray | None = None
    W: np.ndarray | None = None
    P: np.ndarray | None = None
    alpha: np.ndarray | None = None


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    factors: FactorSet | None
    config: TrainConfig
    trace: EpochTrace | None
    aux: "TrainedModel | None" = None
    n_users: int = 0
    n_items: int = 0
    r_min: float = 0.0
    r_max: float = 1.0
    item_scores: np.ndarray | None = None
    train_loss_curve: tuple[float, ...] = ()
    counters: dict = field(default_factory=dict)


# --------------------------------------------------------------- primitives

def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise InvalidInputError("u and v must be 1-d vectors of equal length")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVectorError("cosine of a zero-norm vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def project_onto_hyperplane(v, alpha) -> np.ndarray:
    """Remove the component of v along the unit normal alpha."""
    v = np.asarray(v, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if v.shape != alpha.shape or v.ndim != 1:
        raise InvalidInputError("v and alpha must be 1-d vectors of equal length")
    if abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
        raise InvalidInputError("alpha must be a unit vector")
    return v - np.dot(alpha, v) * alpha


def paramat_surface_distance(a, b, r):
    """Distance from the origin to (a, b, r*sqrt(a^2+b^2)): sqrt((a^2+b^2)(1+r^2)).

    Total on finite inputs; accepts scalars or broadcastable arrays.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    out = np.sqrt((a * a + b * b) * (1.0 + r * r))
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------- training utils

def _check_nonempty(train: Dataset):
    if len(train) == 0:
        raise InvalidInputError("training dataset is empty")


def _draw_factors(rng: np.random.Generator, n_rows: int, k: int, scale: float, eps: float) -> np.ndarray:
    """Uniform [-scale, scale] init; rows below the norm guard are re-drawn."""
    m = rng.uniform(-scale, scale, size=(n_rows, k))
    for _ in range(100):
        bad = np.linalg.norm(m, axis=1) < eps
        if not bad.any():
            break
        m[bad] = rng.uniform(-scale, scale, size=(int(bad.sum()), k))
    return m


def _pair_dots(M: np.ndarray, N: np.ndarray, users: np.ndarray, items: np.ndarray,
               chunk: int = 1 << 18) -> np.ndarray:
    out = np.empty(len(users), dtype=np.float64)
    for lo in range(0, len(users), chunk):
        sl = slice(lo, lo + chunk)
        out[sl] = np.einsum("ij,ij->i", M[users[sl]], N[items[sl]])
    return out


def _classic_total_loss(U, V, users, items, ratings) -> float:
    # overflow to inf is the divergence signal, not an error
    with np.errstate(over="ignore", invalid="ignore"):
        e = ratings - _pair_dots(U, V, users, items)
        return float(np.dot(e, e))


def _cosine_total_loss(U, V, users, items, rnorm, eps) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        dots = _pair_dots(U, V, users, items)
        nu = np.maximum(np.linalg.norm(U, axis=1), eps)
        nv = np.maximum(np.linalg.norm(V, axis=1), eps)
        e = rnorm - dots / (nu[users] * nv[items])
        return float(np.dot(e, e))


def _paramat_total_loss(U, V, W, P, users, items, rnorm) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        a = _pair_dots(U, V, users, items)
        b = _pair_dots(W, P, users, items)
        e = rnorm - np.sqrt((a * a + b * b) * (1.0 + rnorm * rnorm))
        return float(np.dot(e, e))


def _freeze(*arrays: np.ndarray | None):
    for a in arrays:
        if a is not None:
            a.flags.writeable = False


def _epoch_metrics(epoch_eval: EpochEval | None, view: TrainedModel) -> tuple[float, float]:
    if epoch_eval is None:
        return (math.nan, math.nan)
    m, d = epoch_eval(view)
    return (float(m), float(d))


# ------------------------------------------------------------------- models

def fit_classic_mf(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
    init_factors: FactorSet | None = None,
) -> TrainedModel:
    """Per-sample SGD on the raw-scale squared error (rating - U_i.V_j)^2.

    The raw-scale objective takes larger steps than the normalized models;
    epoch-end losses are reliably non-increasing at learning rates up to
    about 0.005 (the normalized models are stable at the 0.01 default).
    """
    _check_nonempty(train)
    if init_factors is not None:
        U = np.array(init_factors.U, dtype=np.float64)
        V = np.array(init_factors.V, dtype=np.float64)
    else:
        rng = seeded_rng(child_seed(config.seed, "init"))
        U = _draw_factors(rng, train.n_users, config.latent_dim, config.init_scale, config.grad_guard_eps)
        V = _draw_factors(rng, train.n_items, config.latent_dim, config.init_scale, config.grad_guard_eps)
    rng_order = seeded_rng(child_seed(config.seed, "order"))
    users, items, ratings = train.user_ids, train.item_ids, train.ratings
    counters = {"clipped_samples": 0}
    losses: list[float] = []
    maes: list[float] = []
    dmes: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng_order.permutation(len(train)).astype(np.int64)
        counters["clipped_samples"] += _kernels.classic_sgd_epoch(
            U, V, users, items, ratings, order,
            config.learning_rate, config.regularization, CLASSIC_CLIP_NORM,
        )
        loss = _classic_total_loss(U, V, users, items, ratings)
        if not math.isfinite(loss):
            raise DivergenceError("classic-mf", epoch)
        losses.append(loss)
        view = _assemble("classic-mf", FactorSet(U=U, V=V), config, None, train, counters=counters)
        m, d = _epoch_metrics(epoch_eval, view)
        maes.append(m)
        dmes.append(d)
    _freeze(U, V)
    trace = EpochTrace("classic-mf", config.epochs, tuple(maes), tuple(dmes))
    return _assemble("classic-mf", FactorSet(U=U, V=V), config, trace, train,
                     losses=losses, counters=counters)


def fit_cosine_mf(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
    init_factors: FactorSet | None = None,
) -> TrainedModel:
    """Per-sample SGD fitting cos(U_i, V_j) to the rating divided by r_max."""
    _check_nonempty(train)
    if init_factors is not None:
        U = np.array(init_factors.U, dtype=np.float64)
        V = np.array(init_factors.V, dtype=np.float64)
    else:
        rng = seeded_rng(child_seed(config.seed, "init"))
        U = _draw_factors(rng, train.n_users, config.latent_dim, config.init_scale, config.grad_guard_eps)
        V = _draw_factors(rng, train.n_items, config.latent_dim, config.init_scale, config.grad_guard_eps)
    rng_order = seeded_rng(child_seed(config.seed, "order"))
    users, items = train.user_ids, train.item_ids
    rnorm = train.ratings / train.r_max
    counters = {"rescued_rows": 0}
    losses: list[float] = []
    maes: list[float] = []
    dmes: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng_order.permutation(len(train)).astype(np.int64)
        counters["rescued_rows"] += _kernels.cosine_sgd_epoch(
            U, V, users, items, rnorm, order,
            config.learning_rate, config.regularization,
            config.grad_guard_eps, config.init_scale,
        )
        loss = _cosine_total_loss(U, V, users, items, rnorm, config.grad_guard_eps)
        if not math.isfinite(loss):
            raise DivergenceError("cosine-mf", epoch)
        losses.append(loss)
        view = _assemble("cosine-mf", FactorSet(U=U, V=V), config, None, train, counters=counters)
        m, d = _epoch_metrics(epoch_eval, view)
        maes.append(m)
        dmes.append(d)
    _freeze(U, V)
    trace = EpochTrace("cosine-mf", config.epochs, tuple(maes), tuple(dmes))
    return _assemble("cosine-mf", FactorSet(U=U, V=V), config, trace, train,
                     losses=losses, counters=counters)


def _draw_unit_vector(rng: np.random.Generator, k: int) -> np.ndarray:
    for _ in range(100):
        vec = rng.standard_normal(k)
        n = np.linalg.norm(vec)
        if n > 1e-8:
            return vec / n
    raise DegenerateVectorError("could not draw a unit vector")  # pragma: no cover


def _project_rows(M: np.ndarray, alpha: np.ndarray) -> None:
    M -= np.outer(M @ alpha, alpha)


def _inplane_fallback(alpha: np.ndarray, scale: float) -> np.ndarray:
    """A deterministic in-plane replacement row at init scale."""
    d = int(np.argmin(np.abs(alpha)))
    e = np.zeros(len(alpha))
    e[d] = 1.0
    e -= alpha[d] * alpha
    return scale * e / np.linalg.norm(e)


def fit_linfac(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
    init_factors: FactorSet | None = None,
    alpha: np.ndarray | None = None,
) -> TrainedModel:
    """Cosine-loss SGD with all factor rows confined to a hyperplane.

    The hyperplane normal ``alpha`` is a fixed seeded unit vector (the
    cosine objective is rotation invariant, so any plane through the origin
    has the same capacity); every touched row is re-projected after its
    update, so the constraint holds to machine precision at every epoch end.
    """
    _check_nonempty(train)
    k = config.latent_dim
    if k < 2:
        raise InvalidInputError("the hyperplane constraint needs latent_dim >= 2")
    if alpha is None:
        alpha = _draw_unit_vector(seeded_rng(child_seed(config.seed, "alpha")), k)
    else:
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.shape != (k,):
            raise InvalidInputError(f"alpha must have length {k}")
        if abs(np.linalg.norm(alpha) - 1.0) > 1e-12:
            raise InvalidInputError("alpha must be a unit vector")
    eps = config.grad_guard_eps
    rng = seeded_rng(child_seed(config.seed, "init"))
    if init_factors is not None:
        U = np.array(init_factors.U, dtype=np.float64)
        V = np.array(init_factors.V, dtype=np.float64)
    else:
        U = _draw_factors(rng, train.n_users, k, config.init_scale, eps)
        V = _draw_factors(rng, train.n_items, k, config.init_scale, eps)
    counters = {"reinit_rows": 0}
    for M in (U, V):
        _project_rows(M, alpha)
        for _ in range(100):
            bad = np.linalg.norm(M, axis=1) < eps
            if not bad.any():
                break
            counters["reinit_rows"] += int(bad.sum())
            M[bad] = _draw_factors(rng, int(bad.sum()), k, config.init_scale, eps)
            _project_rows(M, alpha)
    fallback = _inplane_fallback(alpha, config.init_scale)
    rng_order = seeded_rng(child_seed(config.seed, "order"))
    users, items = train.user_ids, train.item_ids
    rnorm = train.ratings / train.r_max
    losses: list[float] = []
    maes: list[float] = []
    dmes: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng_order.permutation(len(train)).astype(np.int64)
        counters["reinit_rows"] += _kernels.linfac_sgd_epoch(
            U, V, alpha, fallback, users, items, rnorm, order,
            config.learning_rate, config.regularization, eps,
        )
        loss = _cosine_total_loss(U, V, users, items, rnorm, eps)
        if not math.isfinite(loss):
            raise DivergenceError("linfac", epoch)
        losses.append(loss)
        view = _assemble("linfac", FactorSet(U=U, V=V, alpha=alpha), config, None, train,
                         counters=counters)
        m, d = _epoch_metrics(epoch_eval, view)
        maes.append(m)
        dmes.append(d)
    counters["max_constraint_violation"] = float(
        max(np.abs(U @ alpha).max(), np.abs(V @ alpha).max())
    )
    if counters["reinit_rows"]:
        logger.warning("linfac: %d row(s) re-initialized within the hyperplane", counters["reinit_rows"])
    _freeze(U, V, alpha)
    trace = EpochTrace("linfac", config.epochs, tuple(maes), tuple(dmes))
    return _assemble("linfac", FactorSet(U=U, V=V, alpha=alpha), config, trace, train,
                     losses=losses, counters=counters)


def fit_paramat(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
    init_factors: FactorSet | None = None,
) -> TrainedModel:
    """Two-stage trainer for the paraboloid-surface model.

    Stage one fits an internal cosine model whose (clamped) cosine supplies
    the normalized-rating estimate at prediction time. Stage two runs SGD
    on the surface-distance loss, with the observed normalized rating
    inside the lift during training.
    """
    _check_nonempty(train)
    aux_config = replace(config, seed=child_seed(config.seed, "aux"))
    try:
        aux = fit_cosine_mf(train, aux_config)
    except DivergenceError as err:
        raise DivergenceError("paramat", err.epoch, stage="aux") from err
    eps = config.grad_guard_eps
    if init_factors is not None:
        U = np.array(init_factors.U, dtype=np.float64)
        V = np.array(init_factors.V, dtype=np.float64)
        W = np.array(init_factors.W, dtype=np.float64)
        P = np.array(init_factors.P, dtype=np.float64)
    else:
        rng = seeded_rng(child_seed(config.seed, "init"))
        U = _draw_factors(rng, train.n_users, config.latent_dim, config.init_scale, eps)
        V = _draw_factors(rng, train.n_items, config.latent_dim, config.init_scale, eps)
        W = _draw_factors(rng, train.n_users, config.latent_dim, config.init_scale, eps)
        P = _draw_factors(rng, train.n_items, config.latent_dim, config.init_scale, eps)
    rng_order = seeded_rng(child_seed(config.seed, "order"))
    users, items = train.user_ids, train.item_ids
    rnorm = train.ratings / train.r_max
    losses: list[float] = []
    maes: list[float] = []
    dmes: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng_order.permutation(len(train)).astype(np.int64)
        _kernels.paramat_sgd_epoch(
            U, V, W, P, users, items, rnorm, order,
            config.learning_rate, config.regularization, eps,
        )
        loss = _paramat_total_loss(U, V, W, P, users, items, rnorm)
        if not math.isfinite(loss):
            raise DivergenceError("paramat", epoch, stage="surface")
        losses.append(loss)
        view = _assemble("paramat", FactorSet(U=U, V=V, W=W, P=P), config, None, train, aux=aux)
        m, d = _epoch_metrics(epoch_eval, view)
        maes.append(m)
        dmes.append(d)
    _freeze(U, V, W, P)
    trace = EpochTrace("paramat", config.epochs, tuple(maes), tuple(dmes))
    return _assemble("paramat", FactorSet(U=U, V=V, W=W, P=P), config, trace, train,
                     aux=aux, losses=losses)


def fit_random_placement(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
) -> TrainedModel:
    """Uniform-random predictor over [r_min, r_max].

    Each (user, item) cell gets its own hash-derived substream of the
    config seed, so predictions are deterministic and order independent.
    """
    model = _assemble("random", None, config, None, train)
    maes, dmes = _static_trace(model, config, epoch_eval)
    trace = EpochTrace("random", config.epochs, maes, dmes)
    return replace(model, trace=trace)


def fit_zipf_placement(
    train: Dataset,
    config: TrainConfig,
    *,
    epoch_eval: EpochEval | None = None,
) -> TrainedModel:
    """Popularity-rank predictor: the rank-k item scores r_min + (r_max - r_min)/k.

    Ranks order items by descending training interaction count, ties broken
    by ascending item index; predictions do not depend on the user.
    """
    _check_nonempty(train)
    counts = np.bincount(train.item_ids, minlength=train.n_items)
    by_pop = np.lexsort((np.arange(train.n_items), -counts))
    ranks = np.empty(train.n_items, dtype=np.float64)
    ranks[by_pop] = np.arange(1, train.n_items + 1)
    scores = train.r_min + (train.r_max - train.r_min) / ranks
    scores.flags.writeable = False
    model = _assemble("zipf-placement", None, config, None, train, item_scores=scores)
    maes, dmes = _static_trace(model, config, epoch_eval)
    trace = EpochTrace("zipf-placement", config.epochs, maes, dmes)
    return replace(model, trace=trace)


def _static_trace(model: TrainedModel, config: TrainConfig, epoch_eval: EpochEval | None):
    """Placement baselines do not change across epochs: evaluate once, replicate."""
    m, d = _epoch_metrics(epoch_eval, model)
    return (m,) * config.epochs, (d,) * config.epochs


def _assemble(
    kind: str,
    factors: FactorSet | None,
    config: TrainConfig,
    trace: EpochTrace | None,
    train: Dataset,
    *,
    aux: TrainedModel | None = None,
    item_scores: np.ndarray | None = None,
    losses: list[float] | None = None,
    counters: dict | None = None,
) -> TrainedModel:
    return TrainedModel(
        kind=kind,
        factors=factors,
        config=config,
        trace=trace,
        aux=aux,
        n_users=train.n_users,
        n_items=train.n_items,
        r_min=train.r_min,
        r_max=train.r_max,
        item_scores=item_scores,
        train_loss_curve=tuple(losses) if losses else (),
        counters=counters if counters is not None else {},
    )


FIT_FUNCTIONS: dict[str, Callable[..., TrainedModel]] = {
    "classic-mf": fit_classic_mf,
    "cosine-mf": fit_cosine_mf,
    "linfac": fit_linfac,
    "paramat": fit_paramat,
    "random": fit_random_placement,
    "zipf-placement": fit_zipf_placement,
}


# ---------------------------------------------------------------- prediction

_U64 = np.uint64
_H_C1 = _U64(0xBF58476D1CE4E5B9)
_H_C2 = _U64(0x94D049BB133111EB)
_H_GOLDEN = _U64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z + _H_GOLDEN)
    z = (z ^ (z >> _U64(30))) * _H_C1
    z = (z ^ (z >> _U64(27))) * _H_C2
    return z ^ (z >> _U64(31))


def _hash_uniform(seed: int, users: np.ndarray, items: np.ndarray) -> np.ndarray:
    """Deterministic uniform [0, 1) per (seed, user, item), vectorized."""
    z = _mix64(np.full(np.broadcast(users, items).shape, _U64(seed), dtype=np.uint64))
    z = _mix64(z ^ users.astype(np.uint64))
    z = _mix64(z ^ items.astype(np.uint64))
    return (z >> _U64(11)).astype(np.float64) * (2.0 ** -53)


def _unit_rows(M: np.ndarray, eps: float) -> np.ndarray:
    norms = np.maximum(np.linalg.norm(M, axis=1, keepdims=True), eps)
    return M / norms


def _clamp_mode(model: TrainedModel, clamp: bool | None) -> bool:
    return model.config.clamp_predictions if clamp is None else clamp


def predict(model: TrainedModel, user: int, item: int, clamp: bool | None = None) -> float:
    """Predicted raw-scale rating for one (user, item) cell."""
    if not 0 <= user < model.n_users:
        raise IndexError(f"user index {user} out of range [0, {model.n_users})")
    if not 0 <= item < model.n_items:
        raise IndexError(f"item index {item} out of range [0, {model.n_items})")
    out = predict_pairs(model, np.array([user], dtype=np.int64),
                        np.array([item], dtype=np.int64), clamp=clamp)
    return float(out[0])


def predict_pairs(model: TrainedModel, users: np.ndarray, items: np.ndarray,
                  clamp: bool | None = None) -> np.ndarray:
    """Vectorized predictions for aligned index arrays."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    if len(users) and (users.min() < 0 or users.max() >= model.n_users):
        raise IndexError("user index out of range")
    if len(items) and (items.min() < 0 or items.max() >= model.n_items):
        raise IndexError("item index out of range")
    eps = model.config.grad_guard_eps
    f = model.factors
    if model.kind == "classic-mf":
        out = _pair_dots(f.U, f.V, users, items)
    elif model.kind in ("cosine-mf", "linfac"):
        cos = _pair_dots(_unit_rows(f.U, eps), _unit_rows(f.V, eps), users, items)
        np.clip(cos, -1.0, 1.0, out=cos)
        out = model.r_max * cos
    elif model.kind == "paramat":
        aux = model.aux
        af = aux.factors
        rhat = _pair_dots(_unit_rows(af.U, eps), _unit_rows(af.V, eps), users, items)
        np.clip(rhat, 0.0, 1.0, out=rhat)
        a = _pair_dots(f.U, f.V, users, items)
        b = _pair_dots(f.W, f.P, users, items)
        out = model.r_max * np.sqrt((a * a + b * b) * (1.0 + rhat * rhat))
    elif model.kind == "random":
        u = _hash_uniform(child_seed(model.config.seed, "placement"), users, items)
        out = model.r_min + (model.r_max - model.r_min) * u
    elif model.kind == "zipf-placement":
        out = model.item_scores[items].astype(np.float64, copy=True)
    else:
        raise InvalidInputError(f"unknown model kind {model.kind!r}")
    if _clamp_mode(model, clamp):
        np.clip(out, model.r_min, model.r_max, out=out)
    return out


def score_matrix(model: TrainedModel, users: np.ndarray, clamp: bool | None = None) -> np.ndarray:
    """Predictions for every item, one row per requested user.

    Row (u, i) equals ``predict(model, u, i, clamp=clamp)``; computed as
    matrix products for speed.
    """
    users = np.asarray(users, dtype=np.int64)
    if len(users) and (users.min() < 0 or users.max() >= model.n_users):
        raise IndexError("user index out of range")
    eps = model.config.grad_guard_eps
    f = model.factors
    if model.kind == "classic-mf":
        out = f.U[users] @ f.V.T
    elif model.kind in ("cosine-mf", "linfac"):
        cos = _unit_rows(f.U, eps)[users] @ _unit_rows(f.V, eps).T
        np.clip(cos, -1.0, 1.0, out=cos)
        out = model.r_max * cos
    elif model.kind == "paramat":
        af = model.aux.factors
        rhat = _unit_rows(af.U, eps)[users] @ _unit_rows(af.V, eps).T
        np.clip(rhat, 0.0, 1.0, out=rhat)
        a = f.U[users] @ f.V.T
        b = f.W[users] @ f.P.T
        out = model.r_max * np.sqrt((a * a + b * b) * (1.0 + rhat * rhat))
    elif model.kind == "random":
        grid_u = users[:, None]
        grid_i = np.arange(model.n_items, dtype=np.int64)[None, :]
        u = _hash_uniform(child_seed(model.config.seed, "placement"), grid_u, grid_i)
        out = model.r_min + (model.r_max - model.r_min) * u
    elif model.kind == "zipf-placement":
        out = np.tile(model.item_scores, (len(users), 1))
    else:
        raise InvalidInputError(f"unknown model kind {model.kind!r}")
    if _clamp_mode(model, clamp):
        np.clip(out, model.r_min, model.r_max, out=out)
    return out


# ---------------------------------------------------------------- diagnostics

def colinearity_diagnostic(
    model: TrainedModel,
    threshold: float,
    *,
    max_pairs: int = 100_000,
    seed: int | None = None,
) -> float:
    """Fraction of sampled (user, item) pairs whose factor cosine exceeds the
    threshold in absolute value.

    All pairs are used when the grid is small; otherwise a seeded uniform
    subsample of ``max_pairs`` cells. Rows below the norm guard are skipped
    (and counted in the log).
    """
    if not (0.0 < threshold < 1.0):
        raise InvalidInputError("threshold must be in (0, 1)")
    f = model.factors
    if f is None or f.U is None or f.V is None:
        raise InvalidInputError("model has no U/V factors")
    n_pairs = model.n_users * model.n_items
    if n_pairs <= max_pairs:
        u_idx = np.repeat(np.arange(model.n_users, dtype=np.int64), model.n_items)
        i_idx = np.tile(np.arange(model.n_items, dtype=np.int64), model.n_users)
    else:
        if seed is None:
            seed = child_seed(model.config.seed, "colinearity")
        cells = seeded_rng(seed).integers(0, n_pairs, size=max_pairs)
        u_idx = (cells // model.n_items).astype(np.int64)
        i_idx = (cells % model.n_items).astype(np.int64)
    eps = model.config.grad_guard_eps
    nu = np.linalg.norm(f.U, axis=1)[u_idx]
    nv = np.linalg.norm(f.V, axis=1)[i_idx]
    ok = (nu >= eps) & (nv >= eps)
    skipped = int((~ok).sum())
    if skipped:
        logger.warning("colinearity_diagnostic: skipped %d degenerate pair(s)", skipped)
    if not ok.any():
        raise InvalidInputError("all sampled pairs are degenerate")
    dots = _pair_dots(f.U, f.V, u_idx[ok], i_idx[ok])
    cos = dots / (nu[ok] * nv[ok])
    return float(np.mean(np.abs(cos) >= threshold))
