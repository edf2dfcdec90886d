#!/usr/bin/env python3
"""Export cross-package test fixtures.

Writes, into fixtures/ at the repo root:
  linear_softmax.npz   reference victim weights/bias/shape
  roundtrip.npz        100 random inputs plus their in-process probabilities
  protocol_vectors.json  wire-protocol conformance exchanges with exact,
                         platform-independent expected responses (the wrapped
                         model is uniform, so every probability is 1/K)

Any server claiming to speak the victim wire protocol must replay the
vectors byte-for-byte; the adapter package consumes all three files.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from warpattack.core import SeededRng, VideoTensor
from warpattack.remote import encode_tensor
from warpattack.victims import LinearSoftmaxVictim

SHAPE = (2, 4, 4, 1)
K = 3
SEED = 0
N_ROUNDTRIP = 100


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    default_out = Path(__file__).resolve().parent.parent / "fixtures"
    parser.add_argument("--out", type=Path, default=default_out)
    args = parser.parse_args()
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    victim = LinearSoftmaxVictim.random(SHAPE, k=K, seed=SEED)
    np.savez(out / "linear_softmax.npz", weights=victim.weights,
             bias=victim.bias, shape=np.array(SHAPE))

    rng = SeededRng(123)
    inputs = np.stack([rng.uniform(SHAPE) for _ in range(N_ROUNDTRIP)])
    # inputs travel the wire as f32; golden probs are computed on what a
    # server actually receives
    inputs = inputs.astype(np.float32)
    probs = np.stack([
        victim.query(VideoTensor(x.astype(np.float64))).probs for x in inputs
    ])
    np.savez(out / "roundtrip.npz", inputs=inputs, probs=probs)

    # conformance vectors against a uniform 4-class model: responses are
    # exactly representable, so "replays identically" is well defined
    k_uniform = 4
    uniform_probs = [1.0 / k_uniform] * k_uniform
    req1 = encode_tensor(SeededRng(7).uniform(SHAPE))
    req2 = encode_tensor(SeededRng(8).uniform(SHAPE))
    bad_b64 = dict(req1, data="%%%not-base64%%%")
    bad_shape = encode_tensor(SeededRng(9).uniform((3, 4, 4, 1)))
    vectors = {
        "model": "uniform probabilities over 4 classes, input shape [2,4,4,1]",
        "info": {"k": k_uniform, "shape": list(SHAPE)},
        "exchanges": [
            {"path": "/v1/query", "request": req1, "status": 200,
             "response": {"probs": uniform_probs}},
            {"path": "/v1/query_batch", "request": {"items": [req1, req2]},
             "status": 200,
             "response": {"probs": [uniform_probs, uniform_probs]}},
            {"path": "/v1/query", "request": bad_b64, "status": 400},
            {"path": "/v1/query", "request": bad_shape, "status": 400},
        ],
    }
    (out / "protocol_vectors.json").write_text(
        json.dumps(vectors, indent=2, sort_keys=True) + "\n")

    print(f"wrote fixtures to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
