"""Sweep every split of every fixture and check S(rescaled) against the profile.

Writes one CSV row per (fixture, r, f) with the worst residual over the sample
points, plus the threshold and asymptotic sign at the first point.
"""

import argparse
import csv
import sys

from framecurv import zoo
from framecurv.collapse import SplitSpec, collapse_profile, rescale_frame, sign_thresholds
from framecurv.curvature import scalar_curvature_frame
from framecurv.geometry import sample_points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--f", type=float, nargs="+", default=[0.25, 0.5, 1, 2, 5, 10])
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["fixture", "r", "f", "max_residual", "threshold", "asymptotic_sign"])
    for zoo_id in zoo.ZOO_IDS:
        m = zoo.get(zoo_id).manifold
        pts = sample_points(m, args.points, 0)
        for r in range(1, m.dim):
            split = SplitSpec.for_dim(m.dim, r)
            profiles = [collapse_profile(m, split, x) for x in pts]
            th = sign_thresholds(profiles[0])
            for f in args.f:
                rm = rescale_frame(m, split, f)
                res = max(abs(scalar_curvature_frame(rm, x) - p(f)) for x, p in zip(pts, profiles))
                w.writerow([zoo_id, r, f, format(res, ".3e"),
                            "" if th.largest is None else format(th.largest, ".12g"),
                            th.asymptotic_sign])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
