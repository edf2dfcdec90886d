"""Single-binary CLI: `attack run`, `attack bench`, `attack grad-eval`."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import gtt1
from .attack import (
    AttackConfig,
    DEFAULT_TARGETED_BUDGET,
    DEFAULT_UNTARGETED_BUDGET,
    compute_anq_sr,
    eval_gradient_quality,
    run_attack,
)
from .core import VideoTensor
from .losses import LossKind, Targeted, Untargeted
from .remote import RemoteVictim
from .samplers import sampler_from_string
from .victims import LinearSoftmaxVictim, MovingBlobVictim, StructuredGradientVictim
from .warp import TransformFamily

_INPROCESS = {
    "moving-blob": lambda shape, o: MovingBlobVictim(
        shape, k=int(o.get("k", 4)), temperature=float(o.get("temperature", 0.5))),
    "linear-softmax": lambda shape, o: LinearSoftmaxVictim.random(
        shape, k=int(o.get("k", 5)), seed=int(o.get("seed", 0)),
        scale=float(o.get("scale", 1.0))),
    "structured": lambda shape, o: StructuredGradientVictim(
        shape, k=int(o.get("k", 5)), seed=int(o.get("seed", 0)),
        family=TransformFamily.from_string(o.get("family", "trans-dilation")),
        logit_scale=float(o.get("scale", 3.0))),
}


def build_victim(spec: str, shape: tuple[int, int, int, int]):
    if spec.startswith("http://") or spec.startswith("https://"):
        return RemoteVictim(spec)
    if spec.startswith("http:"):
        return RemoteVictim(spec[len("http:"):])
    if not spec.startswith("inprocess:"):
        raise SystemExit(f"victim spec must be inprocess:<name> or http:<url>, got {spec!r}")
    rest = spec[len("inprocess:"):]
    name, _, opts_str = rest.partition("?")
    opts = dict(kv.split("=", 1) for kv in opts_str.split("&") if kv)
    if name not in _INPROCESS:
        raise SystemExit(f"unknown in-process victim {name!r}; "
                         f"available: {sorted(_INPROCESS)}")
    return _INPROCESS[name](shape, opts)


def _parse_shape(s: str) -> tuple[int, int, int, int]:
    parts = tuple(int(p) for p in s.split(","))
    if len(parts) != 4:
        raise SystemExit(f"shape must be T,H,W,C, got {s!r}")
    return parts


def _build_sampler(args) -> object:
    family = TransformFamily.from_string(args.family)
    flow = gtt1.read_tensor(args.flow) if getattr(args, "flow", None) else None
    return sampler_from_string(args.sampler, family=family, flow=flow)


def _attack_config(args, label: int, target: int | None) -> AttackConfig:
    if target is not None:
        goal = Targeted(target)
        default_budget = DEFAULT_TARGETED_BUDGET
    else:
        goal = Untargeted(label)
        default_budget = DEFAULT_UNTARGETED_BUDGET
    return AttackConfig(
        goal=goal,
        loss=LossKind.from_string(args.loss),
        sampler=_build_sampler(args),
        rho_max=args.rho_max / 255.0,
        h=args.h / 255.0,
        epsilon=args.epsilon,
        delta=args.delta,
        eta=args.eta,
        query_budget=args.budget if args.budget is not None else default_budget,
        seed=args.seed,
        count_success_checks=not args.free_success_checks,
        flicker_margin=args.flicker_margin,
    )


def cmd_run(args) -> int:
    x = VideoTensor(gtt1.read_tensor(args.video))
    cfg = _attack_config(args, args.label, args.target)
    victim = build_victim(args.victim, x.shape)
    result, trace = run_attack(x, cfg, victim)
    if args.out:
        trace.write_jsonl(args.out)
    if args.save_adv:
        gtt1.write_tensor(args.save_adv, result.x_adv.data)
    psnr = "inf" if math.isinf(result.min_frame_psnr) else f"{result.min_frame_psnr:.2f}"
    print(f"success={result.success} queries={result.queries} "
          f"iterations={result.iterations} min_frame_psnr={psnr}")
    return 0 if result.success else 1


def cmd_bench(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    dataset = manifest.get("dataset", Path(args.manifest).stem)
    base_dir = Path(args.manifest).parent
    entries = manifest["videos"]
    loss = LossKind.from_string(manifest.get("loss", args.loss))
    rho_max = float(manifest.get("rho_max", args.rho_max)) / 255.0
    budget = int(manifest.get("budget", args.budget or DEFAULT_UNTARGETED_BUDGET))
    seed = int(manifest.get("seed", args.seed))
    victim_spec = manifest.get("victim", args.victim)
    sampler_specs = manifest.get("samplers",
                                 [{"sampler": args.sampler, "family": args.family}])

    rows = []
    for spec in sampler_specs:
        family = TransformFamily.from_string(spec.get("family", args.family))
        flow_path = spec.get("flow")
        flow = gtt1.read_tensor(base_dir / flow_path) if flow_path else None
        sampler = sampler_from_string(spec["sampler"], family=family, flow=flow)
        results = []
        psnrs = []
        for i, entry in enumerate(entries):
            x = VideoTensor(gtt1.read_tensor(base_dir / entry["path"]))
            target = entry.get("target")
            goal = Targeted(int(target)) if target is not None else Untargeted(int(entry["label"]))
            cfg = AttackConfig(
                goal=goal, loss=loss, sampler=sampler, rho_max=rho_max,
                h=args.h / 255.0, epsilon=args.epsilon, delta=args.delta,
                eta=args.eta, query_budget=budget, seed=seed + i,
                flicker_margin=args.flicker_margin)
            victim = build_victim(victim_spec, x.shape)
            result, _ = run_attack(x, cfg, victim)
            results.append(result)
            if math.isfinite(result.min_frame_psnr):
                psnrs.append(result.min_frame_psnr)
        anq, sr = compute_anq_sr(results, budget)
        mean_psnr = float(np.mean(psnrs)) if psnrs else math.inf
        rows.append({
            "dataset": dataset,
            "sampler": spec["sampler"],
            "family": family.key if spec["sampler"] == "geotrap" else "",
            "loss": loss.value,
            "ANQ": f"{anq:.1f}",
            "SR": f"{sr:.4f}",
            "mean-min-PSNR": "inf" if math.isinf(mean_psnr) else f"{mean_psnr:.2f}",
        })

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.DictWriter(out, fieldnames=["dataset", "sampler", "family", "loss",
                                             "ANQ", "SR", "mean-min-PSNR"])
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        out.close()
    return 0


def cmd_grad_eval(args) -> int:
    shape = _parse_shape(args.shape)
    victim = build_victim(args.victim, shape)
    if not hasattr(victim, "true_gradient"):
        raise SystemExit("grad-eval needs an analytic in-process victim")
    family = TransformFamily.from_string(args.family)
    samplers = []
    for name in args.samplers.split(","):
        flow = gtt1.read_tensor(args.flow) if name == "flow" and args.flow else None
        samplers.append(sampler_from_string(name.strip(), family=family, flow=flow))
    table = eval_gradient_quality(
        victim, samplers, n_videos=args.n, seed=args.seed,
        loss=LossKind.from_string(args.loss),
        epsilon=args.epsilon, delta=args.delta)
    writer = csv.writer(sys.stdout)
    writer.writerow(["sampler", "mean_cosine", "n", "excluded"])
    for name, stats in table.items():
        writer.writerow([name, f"{stats['mean_cosine']:.6f}", stats["n"], stats["excluded"]])
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--loss", default="flicker",
                   choices=[k.value for k in LossKind])
    p.add_argument("--sampler", default="geotrap",
                   choices=["geotrap", "one-noise", "multi-noise", "flow"])
    p.add_argument("--family", default="trans-dilation",
                   choices=[f.key for f in TransformFamily])
    p.add_argument("--flow", default=None, help="GTT1 flow file for the flow sampler")
    p.add_argument("--rho-max", dest="rho_max", type=float, default=10.0,
                   help="perturbation budget in pixel values out of 255")
    p.add_argument("--h", type=float, default=1.0,
                   help="image step size in pixel values out of 255")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--flicker-margin", dest="flicker_margin", type=float, default=0.05)
    p.add_argument("--free-success-checks", action="store_true",
                   help="do not count loop-guard forward passes against the budget")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="attack",
                                     description="Black-box video attack engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="attack one video")
    p_run.add_argument("--video", required=True, help="GTT1 clip, values in [0,1]")
    p_run.add_argument("--label", type=int, required=True)
    p_run.add_argument("--target", type=int, default=None)
    p_run.add_argument("--victim", required=True)
    p_run.add_argument("--out", default=None, help="trace JSONL path")
    p_run.add_argument("--save-adv", default=None, help="write x_adv as GTT1")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="run a manifest of videos, emit CSV")
    p_bench.add_argument("--manifest", required=True)
    p_bench.add_argument("--victim", default="inprocess:moving-blob")
    p_bench.add_argument("--out", default=None)
    _add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_ge = sub.add_parser("grad-eval", help="first-iteration gradient quality table")
    p_ge.add_argument("--victim", required=True)
    p_ge.add_argument("--samplers", default="geotrap,one-noise,multi-noise")
    p_ge.add_argument("--n", type=int, default=200)
    p_ge.add_argument("--shape", default="8,16,16,1")
    _add_common(p_ge)
    p_ge.set_defaults(func=cmd_grad_eval)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
