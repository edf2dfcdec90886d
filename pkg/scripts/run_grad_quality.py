#!/usr/bin/env python3
"""First-iteration gradient-quality comparison across direction samplers.

On a victim with a known gradient, measures the cosine between the
two-query update direction and the true gradient for each sampler, over
many seeded videos, including every geometric transform family. Higher
mean cosine at equal query cost is what makes a search space better.

Example:
  python3 scripts/run_grad_quality.py --n 200 --seed 11
"""
from __future__ import annotations

import argparse

import numpy as np
from scipy import stats

from warpattack.attack import eval_gradient_quality
from warpattack.samplers import GeoTrapSampler, MultiNoiseSampler, OneNoiseSampler
from warpattack.victims import StructuredGradientVictim
from warpattack.warp import TransformFamily

SHAPE = (8, 16, 16, 1)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--victim-seed", type=int, default=42)
    parser.add_argument("--k", type=int, default=5)
    args = parser.parse_args()

    victim = StructuredGradientVictim(SHAPE, k=args.k, seed=args.victim_seed)
    samplers = [GeoTrapSampler(f) for f in TransformFamily]
    samplers += [OneNoiseSampler(), MultiNoiseSampler()]
    table = eval_gradient_quality(victim, samplers, n_videos=args.n,
                                  seed=args.seed)

    baseline = np.array(table["multi-noise"]["cosines"])
    print(f"{'sampler':<24} {'mean-cos':>9} {'std':>8} {'p-vs-multi':>11}")
    for name, row in table.items():
        cos = np.array(row["cosines"])
        if name == "multi-noise":
            p_str = "-"
        else:
            _, p = stats.ttest_rel(cos, baseline, alternative="greater")
            p_str = f"{p:.2e}"
        print(f"{name:<24} {cos.mean():>9.4f} {cos.std():>8.4f} {p_str:>11}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
