"""The 7-manifold N x S^2 x H collapsed along its leaves {e1, e4, e5}.

For several curvatures K_H of the hyperbolic factor, print the profile,
the NPB indicator and the f beyond which the rescaled metric has S > 0.
The constant term tracks 2*K_H; the value -4 only appears at K_H = -2.
"""

import math

from framecurv import zoo
from framecurv.collapse import classify, collapse_profile, npb_indicator, sign_thresholds
from framecurv.geometry import sample_points


def main():
    print(f"{'K_H':>6} {'q2':>8} {'q0':>8} {'npb':>8} {'f*':>10} {'sqrt(-4K/3)':>12}")
    for K in (-8.0, -4.0, -2.0, -1.0, -0.25):
        e = zoo.seven_manifold(K)
        x = sample_points(e.manifold, 1, 0)[0]
        p = collapse_profile(e.manifold, e.default_split, x)
        npb = npb_indicator(e.manifold, e.default_split, x)
        th = sign_thresholds(p)
        print(f"{K:6.2f} {p.q2:8.4f} {p.q0:8.4f} {npb:8.4f} {th.largest:10.6f} "
              f"{math.sqrt(-4 * K / 3):12.6f}")
    e = zoo.seven_manifold()
    rep = classify(e.manifold, e.default_split, sample_points(e.manifold, 32, 1))
    print("classification:", {k: v for k, v in rep.as_dict().items() if k != "witnesses"})
    print("bundle-like witness:", rep.witnesses["bundle_like"]["entry"],
          "=", rep.witnesses["bundle_like"]["value"])


if __name__ == "__main__":
    main()
