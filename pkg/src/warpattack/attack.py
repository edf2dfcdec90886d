"""Outer iterative attack loop, query accounting, traces, and metrics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import SeededRng, VideoTensor, clip_perturbation, linf_norm, sign
from .estimator import EstimatorState, OracleFailure, grad_est, oracle_loss_fn, update_g
from .losses import (
    DEFAULT_FLICKER_MARGIN,
    Goal,
    LossKind,
    Targeted,
    Untargeted,
    evaluate_loss,
    is_success,
)
from .samplers import DirectionSampler, GeoTrapSampler
from .victims import CountingOracle, VictimOracle

__all__ = [
    "AttackConfig",
    "AttackResult",
    "TraceRecord",
    "AttackTrace",
    "AttackError",
    "run_attack",
    "compute_anq_sr",
    "min_frame_psnr",
    "eval_gradient_quality",
    "DEFAULT_UNTARGETED_BUDGET",
    "DEFAULT_TARGETED_BUDGET",
    "DEFAULT_RHO_MAX",
    "DEFAULT_STEP",
]

DEFAULT_RHO_MAX = 10.0 / 255.0
DEFAULT_STEP = 1.0 / 255.0
DEFAULT_UNTARGETED_BUDGET = 60_000
DEFAULT_TARGETED_BUDGET = 200_000


@dataclass(frozen=True)
class AttackConfig:
    goal: Goal
    loss: LossKind
    sampler: DirectionSampler = field(default_factory=GeoTrapSampler)
    rho_max: float = DEFAULT_RHO_MAX  # normalized units
    h: float = DEFAULT_STEP  # image step size per iteration
    epsilon: float = 0.1
    delta: float = 0.1
    eta: float = 0.1
    query_budget: int = DEFAULT_UNTARGETED_BUDGET
    seed: int = 0
    count_success_checks: bool = True  # every forward pass is a query
    flicker_margin: float = DEFAULT_FLICKER_MARGIN

    def __post_init__(self):
        if self.query_budget < 2:
            raise ValueError("query budget must be >= 2")
        if not (0.0 < self.rho_max <= 1.0):
            raise ValueError("rho_max must lie in (0, 1]")
        if not (0.0 < self.h <= self.rho_max):
            raise ValueError("h must satisfy 0 < h <= rho_max")
        if isinstance(self.goal, Targeted) and self.loss is not LossKind.TARGETED_CE:
            raise ValueError("targeted goals require the targeted-ce loss")
        if isinstance(self.goal, Untargeted) and self.loss is LossKind.TARGETED_CE:
            raise ValueError("targeted-ce requires a targeted goal")

    def describe(self) -> dict:
        """Resolved config for trace headers; fully determines a run."""
        goal = ({"kind": "targeted", "y_target": self.goal.y_target}
                if isinstance(self.goal, Targeted)
                else {"kind": "untargeted", "y": self.goal.y})
        d = {
            "goal": goal,
            "loss": self.loss.value,
            "sampler": self.sampler.name,
            "rho_max": self.rho_max,
            "h": self.h,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "eta": self.eta,
            "query_budget": self.query_budget,
            "seed": self.seed,
            "count_success_checks": self.count_success_checks,
            "flicker_margin": self.flicker_margin,
            "rng_algorithm": SeededRng.algorithm,
        }
        return d


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    queries: int
    l1: float
    l2: float
    loss: float
    linf: float
    success: bool

    def to_json(self) -> dict:
        return {
            "type": "record",
            "iter": self.iteration,
            "queries": self.queries,
            "l1": self.l1,
            "l2": self.l2,
            "loss": self.loss,
            "linf": self.linf,
            "success": self.success,
        }


@dataclass(frozen=True)
class AttackResult:
    success: bool
    queries: int
    iterations: int
    x_adv: VideoTensor
    min_frame_psnr: float

    def to_json(self) -> dict:
        psnr = "inf" if math.isinf(self.min_frame_psnr) else self.min_frame_psnr
        return {
            "type": "result",
            "success": self.success,
            "queries": self.queries,
            "iterations": self.iterations,
            "min_frame_psnr": psnr,
        }


@dataclass
class AttackTrace:
    header: dict
    records: list[TraceRecord] = field(default_factory=list)
    result: AttackResult | None = None

    def write_jsonl(self, path) -> None:
        with open(path, "w") as f:
            f.write(json.dumps({"type": "header", **self.header}, sort_keys=True) + "\n")
            for rec in self.records:
                f.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
            if self.result is not None:
                f.write(json.dumps(self.result.to_json(), sort_keys=True) + "\n")


class AttackError(RuntimeError):
    """Oracle failure mid-attack; carries the trace accumulated so far."""

    def __init__(self, message: str, trace: AttackTrace, queries: int):
        super().__init__(message)
        self.trace = trace
        self.queries = queries


def run_attack(x: VideoTensor, cfg: AttackConfig,
               oracle: VictimOracle) -> tuple[AttackResult, AttackTrace]:
    """Iterative sign-update attack under an L-inf budget.

    Loop: sample a direction, estimate the surrogate gradient with two
    queries, descend g, take a sign step projected back into the budget
    box, then check success with one more forward pass (counted iff
    configured). Budget exhaustion yields success=False, not an error.
    """
    if not x.in_pixel_domain():
        raise ValueError("input clip must lie in the pixel domain [0, 1]")
    counting = CountingOracle(oracle)
    rng = SeededRng(cfg.seed)
    trace = AttackTrace(header=cfg.describe())
    loss_fn = oracle_loss_fn(counting, cfg.loss, cfg.goal, cfg.flicker_margin)

    def fail(exc: OracleFailure, queries: int):
        raise AttackError(str(exc), trace, queries) from exc

    # initial classification check: the clip may already satisfy the goal
    try:
        p0 = counting.query(x)
    except Exception as exc:
        raise AttackError(str(exc), trace, 0) from exc
    queries = 1
    if is_success(p0, cfg.goal):
        result = AttackResult(True, queries, 0, x, min_frame_psnr(x, x))
        trace.result = result
        return result, trace

    state = EstimatorState.initial(x.shape, cfg.epsilon, cfg.delta, cfg.eta)
    x_adv = x
    iterations = 0
    success = False
    while not success and queries < cfg.query_budget:
        pi = cfg.sampler.sample(rng, x.shape)
        try:
            delta_tensor, used, (l1, l2) = grad_est(x_adv, state, pi, loss_fn)
        except OracleFailure as exc:
            fail(exc, queries + exc.queries_used)
        queries += used
        state = update_g(state, delta_tensor)
        stepped = VideoTensor(x_adv.data - cfg.h * sign(state.g))
        x_adv = clip_perturbation(stepped, x, cfg.rho_max)
        try:
            p = counting.query(x_adv)  # loop-guard forward pass
        except Exception as exc:
            fail(OracleFailure(str(exc)), queries)
        if cfg.count_success_checks:
            queries += 1
        iterations += 1
        success = is_success(p, cfg.goal)
        trace.records.append(TraceRecord(
            iteration=iterations,
            queries=queries,
            l1=l1,
            l2=l2,
            loss=evaluate_loss(cfg.loss, p, cfg.goal, cfg.flicker_margin),
            linf=linf_norm(x_adv, x),
            success=success,
        ))

    result = AttackResult(success, queries, iterations, x_adv, min_frame_psnr(x, x_adv))
    trace.result = result
    return result, trace


def compute_anq_sr(results: list[AttackResult], query_budget: int) -> tuple[float, float]:
    """ANQ averages spent queries over ALL results, failed attacks included
    at their full spend; SR is the success fraction."""
    if not results:
        raise ValueError("need at least one result")
    anq = float(np.mean([r.queries for r in results]))
    sr = float(np.mean([1.0 if r.success else 0.0 for r in results]))
    return anq, sr


def min_frame_psnr(x: VideoTensor, x_adv: VideoTensor) -> float:
    """Worst per-frame PSNR in dB (MAX = 1.0); identical frames give +inf."""
    if x.shape != x_adv.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_adv.shape}")
    worst = math.inf
    for t in range(x.shape[0]):
        mse = float(np.mean((x.data[t] - x_adv.data[t]) ** 2))
        psnr = math.inf if mse == 0.0 else 10.0 * math.log10(1.0 / mse)
        worst = min(worst, psnr)
    return worst


def eval_gradient_quality(victim, samplers: list[DirectionSampler], n_videos: int,
                          seed: int, loss: LossKind = LossKind.UNTARGETED_CE,
                          epsilon: float = 0.1, delta: float = 0.1) -> dict:
    """First-iteration gradient quality per sampler.

    For each random video, runs exactly one two-query estimation from g = 0
    and records the cosine between the resulting update direction and the
    victim's true gradient at that video. The first iteration is used
    because the true gradient there is identical across samplers. Videos
    with a zero-norm true gradient are excluded and counted.
    """
    shape = victim.info().shape
    out = {}
    for s_idx, sampler in enumerate(samplers):
        cosines = []
        excluded = 0
        for v_idx in range(n_videos):
            video_rng = SeededRng(seed * 1_000_003 + v_idx)
            x = VideoTensor(video_rng.uniform(shape))
            p = victim.query(x)
            goal = (Targeted(int(np.argmin(p.probs))) if loss is LossKind.TARGETED_CE
                    else Untargeted(p.argmax()))
            g_star = victim.true_gradient(x, loss, goal)
            g_norm = float(np.linalg.norm(g_star))
            if g_norm == 0.0:
                excluded += 1
                continue
            state = EstimatorState.initial(shape, epsilon, delta, eta=1.0)
            loss_fn = oracle_loss_fn(victim, loss, goal, clamp=False)
            rng = SeededRng(seed * 7_777_777 + v_idx * 31 + s_idx)
            pi = sampler.sample(rng, shape)
            delta_tensor, _, _ = grad_est(x, state, pi, loss_fn)
            g1 = -delta_tensor  # direction of the g update, eta-invariant
            g1_norm = float(np.linalg.norm(g1))
            if g1_norm == 0.0:
                cosines.append(0.0)
                continue
            cosines.append(float(np.dot(g1.ravel(), g_star.ravel())) / (g1_norm * g_norm))
        out[sampler.name] = {
            "mean_cosine": float(np.mean(cosines)) if cosines else float("nan"),
            "cosines": cosines,
            "excluded": excluded,
            "n": len(cosines),
        }
    return out
