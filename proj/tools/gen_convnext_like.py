#!/usr/bin/env python3
# Copyright 2026 The Slicer Authors. All rights reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the synthetic 28-layer ConvNeXt-shaped fixture and its sample corpus.

Operator footprints follow a fixed linear law per op_type in (s, p), with s
and p in millions. The corpus samples the same laws with 3% noise.

usage: gen_convnext_like.py OUT_DIR
"""

import json
import random
import sys
from pathlib import Path

# op_type: (memory: a_s, b_p, c), (time: a_s, b_p, c)
LAWS = {
    "conv_dw": ((60.0, 2.0, 8.0), (0.05, 0.1, 0.05)),
    "layernorm": ((20.0, 0.0, 4.0), (0.02, 0.0, 0.02)),
    "conv_pw": ((200.0, 8.0, 16.0), (0.08, 0.3, 0.05)),
    "gelu": ((40.0, 0.0, 4.0), (0.03, 0.0, 0.02)),
    "add": ((30.0, 0.0, 4.0), (0.01, 0.0, 0.01)),
    "conv_ds": ((180.0, 8.0, 16.0), (0.06, 0.4, 0.05)),
    "pool": ((10.0, 0.0, 2.0), (0.01, 0.0, 0.01)),
    "linear": ((150.0, 8.0, 8.0), (0.05, 0.2, 0.02)),
}

BATCH = 8
MILLION = 1_000_000


def footprint(op_type, s, p):
    (ms, mp, mc), (ts, tp, tc) = LAWS[op_type]
    sm, pm = s / MILLION, p / MILLION
    return ms * sm + mp * pm + mc, ts * sm + tp * pm + tc


def solve_s(op_type, memory, p):
    (ms, mp, mc), _ = LAWS[op_type]
    return int(round((memory - mp * p / MILLION - mc) / ms * MILLION))


def op(op_id, op_type, s, p=0):
    m, t = footprint(op_type, s, p)
    return {"id": op_id, "op_type": op_type, "input_size": s, "param_count": p,
            "memory_mib": m, "exec_time_ms": t}


def block(rng, lid, level, dim, hw):
    """Depthwise 7x7, norm, 4x expand, GELU, project; residual add branch."""
    p1 = dim * 4 * dim
    s1 = solve_s("conv_pw", level * (1 + rng.uniform(-0.015, 0.015)), p1)
    chain = [
        op(f"{lid}.dw", "conv_dw", s1 // 4, dim * 49),
        op(f"{lid}.ln", "layernorm", s1 // 4),
        op(f"{lid}.pw1", "conv_pw", s1, p1),
        op(f"{lid}.gelu", "gelu", s1),
        op(f"{lid}.pw2", "conv_pw", s1 // 4, p1),
    ]
    branch = [op(f"{lid}.add", "add", s1 // 4)]
    return {"id": lid, "topology": "Hybrid", "operators": chain, "branches": [branch],
            "output_bytes": BATCH * dim * hw * hw * 4}


def downsample(rng, lid, level, dim_in, dim_out, hw_out, kernel):
    p = dim_in * dim_out * kernel * kernel
    s = solve_s("conv_ds", level * (1 + rng.uniform(-0.015, 0.015)), p)
    return {"id": lid, "topology": "Chain",
            "operators": [op(f"{lid}.ln", "layernorm", s // 2), op(f"{lid}.conv", "conv_ds", s, p)],
            "output_bytes": BATCH * dim_out * hw_out * hw_out * 4}


def single(rng, lid, level, op_type, p, out_bytes):
    s = solve_s(op_type, level * (1 + rng.uniform(-0.015, 0.015)), p)
    return {"id": lid, "topology": "Chain", "operators": [op(f"{lid}.op", op_type, s, p)],
            "output_bytes": out_bytes}


def build_model(rng):
    # (depth, dim, spatial, memory level MiB)
    stages = [(3, 96, 56, 820.0), (3, 192, 28, 1640.0), (12, 384, 14, 5400.0), (3, 768, 7, 7200.0)]
    layers = [downsample(rng, "stem", stages[0][3], 3, 96, 56, 4)]
    for si, (depth, dim, hw, level) in enumerate(stages):
        if si > 0:
            layers.append(downsample(rng, f"ds{si}", level, stages[si - 1][1], dim, hw, 2))
        for b in range(depth):
            layers.append(block(rng, f"s{si + 1}b{b + 1}", level, dim, hw))
    head = 2000.0
    layers.append(single(rng, "head_pool", head, "pool", 0, BATCH * 768 * 4))
    layers.append(single(rng, "head_norm", head, "layernorm", 0, BATCH * 768 * 4))
    layers.append(single(rng, "head_fc", head, "linear", 768 * 1000, BATCH * 1000 * 4))
    edges = [{"src": a["id"], "dst": b["id"], "tensor_bytes": a["output_bytes"]}
             for a, b in zip(layers, layers[1:])]
    return {"name": "convnext_like", "layers": layers, "edges": edges}


def build_samples(rng):
    samples = []
    for op_type, ((_, mp, _), _) in LAWS.items():
        for k in range(24):
            s = int(rng.uniform(0.2, 40.0) * MILLION)
            p = int(rng.uniform(0.0, 2.5) * MILLION) if mp else 0
            m, t = footprint(op_type, s, p)
            samples.append({"model_id": f"corpus{k % 4}", "op_type": op_type, "input_size": s,
                            "param_count": p, "memory_mib": m * (1 + rng.uniform(-0.03, 0.03)),
                            "exec_time_ms": t * (1 + rng.uniform(-0.03, 0.03))})
    return samples


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    out = Path(sys.argv[1])
    rng = random.Random(20261015)
    model = build_model(rng)
    assert len(model["layers"]) == 28
    (out / "convnext_like.json").write_text(json.dumps(model, indent=2) + "\n")
    (out / "convnext_like.samples.json").write_text(json.dumps(build_samples(rng), indent=2) + "\n")


if __name__ == "__main__":
    main()
