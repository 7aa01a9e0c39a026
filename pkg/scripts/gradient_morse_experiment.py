"""Gradient rays of a Busemann field: are they contracting, and does the
derivative coding identify distinct rays?

Part 1 enumerates every gradient ray of h_c from the center (capped) and
samples the contraction profile of each one.  Part 2 codes a family of rays
by the derivative of their Busemann fields on a fixed window and counts
collisions (rays whose codes agree on the window), a finite-scale look at
whether the coding is finite-to-one.  No claims, just statistics.
"""
import argparse
import itertools
import json
from collections import Counter

import numpy as np

from horoshift import fixtures
from horoshift.cayley_ball import build_ball
from horoshift.gradient import gradient_ray
from horoshift.group_model import RayWalk
from horoshift.morse_metrics import contraction_profile
from horoshift.rays_fields import busemann
from horoshift.symbolic import derivative


def gradient_contraction(group, ray, radius, radii, cap):
    ball = build_ball(group, radius=radius)
    h = busemann(ball, ray)
    tree = gradient_ray(h, ball.index[ball.center], policy="all", cap=cap)
    verdicts = Counter()
    d_hats = []
    for path in tree.paths:
        gamma = [ball.vertices[v] for v in path.vertices]
        prof = contraction_profile(group, gamma, radii)
        verdicts[prof.verdict] += 1
        d_hats.append(prof.d_hat)
    return {"rays": len(tree.paths), "truncated": tree.truncated,
            "verdicts": dict(verdicts), "max_d_hat": max(d_hats), "min_d_hat": min(d_hats)}


def coding_collisions(group, period_len, radius):
    """Periodic rays with period words of the given length; collisions of their codes."""
    ball = build_ball(group, radius=radius)
    codes = {}
    for word in itertools.product(range(group.num_letters), repeat=period_len):
        try:
            ray = RayWalk(group, (), word)
        except Exception:
            continue
        sigma = derivative(busemann(ball, ray))
        codes.setdefault(sigma.letters.tobytes(), []).append(group.format_word(word))
    sizes = Counter(len(v) for v in codes.values())
    return {"rays": sum(len(v) for v in codes.values()), "distinct_codes": len(codes),
            "fiber_sizes": dict(sorted(sizes.items())),
            "largest_fiber": max(codes.values(), key=len)}


def run():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--group", default="z2")
    ap.add_argument("--ray", default="z2_staircase_red")
    ap.add_argument("--radius", type=int, default=6)
    ap.add_argument("--radii", default="1,2")
    ap.add_argument("--cap", type=int, default=200)
    ap.add_argument("--period-length", type=int, default=2)
    args = ap.parse_args()
    group = fixtures.group(args.group)
    ray = fixtures.ray(args.ray, group)
    radii = [int(r) for r in args.radii.split(",")]
    out = {"gradient_contraction": gradient_contraction(group, ray, args.radius, radii, args.cap),
           "coding_collisions": coding_collisions(group, args.period_length, args.radius)}
    print(json.dumps(out, indent=2, default=lambda x: int(x) if isinstance(x, np.integer) else str(x)))


if __name__ == "__main__":
    run()
