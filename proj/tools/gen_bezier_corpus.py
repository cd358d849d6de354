#!/usr/bin/env python3
"""Writes the Bezier parser corpus: an SVG with 20 curved paths and a JSON
file holding the same curves as absolute control points."""
import json
import random
import sys
from pathlib import Path

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "data"
rng = random.Random(20240521)

def pt():
    return [round(rng.uniform(-20, 420), 3), round(rng.uniform(-20, 320), 3)]

paths, curves = [], []
for k in range(20):
    relative = k % 2 == 1
    cur = pt()
    start = cur
    d = [f"{'m' if relative else 'M'} {cur[0]} {cur[1]}"]
    segs = []
    for _ in range(rng.randint(1, 5)):
        if rng.random() < 0.6:
            c1, c2, end = pt(), pt(), pt()
            pts = [c1, c2, end]
            cmd = "c" if relative else "C"
            segs.append({"type": "cubic", "points": [cur, c1, c2, end]})
        else:
            c1, end = pt(), pt()
            pts = [c1, end]
            cmd = "q" if relative else "Q"
            segs.append({"type": "quadratic", "points": [cur, c1, end]})
        if relative:
            pts = [[round(p[0] - cur[0], 3), round(p[1] - cur[1], 3)] for p in pts]
        d.append(cmd + " " + ", ".join(f"{p[0]} {p[1]}" for p in pts))
        cur = end
    closed = k % 5 == 4
    if closed:
        d.append("z" if relative else "Z")
    paths.append(" ".join(d))
    curves.append({"segments": segs, "closed": closed, "start": start})

svg = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="-50 -50 500 400">']
svg += [f'  <path d="{d}"/>' for d in paths]
svg.append("</svg>")
(out / "bezier_corpus.svg").write_text("\n".join(svg) + "\n")
(out / "bezier_corpus.json").write_text(json.dumps(curves, indent=1) + "\n")
