"""Fixture manifolds with known curvature.

Every expected value is tagged with where it comes from: ``paper`` (a published
value), ``derived`` (computed independently here or by an oracle) or
``trivial``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collapse import SplitSpec
from .geometry import ChartManifold
from .structure import StructureTensor, structure_from_brackets

PROVENANCE = ("paper", "derived", "trivial")


@dataclass(frozen=True)
class Expected:
    value: float
    provenance: str
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class ZooEntry:
    id: str
    manifold: ChartManifold | None
    default_split: SplitSpec | None = None
    expected: dict[str, Expected] = field(default_factory=dict)
    constants: StructureTensor | None = None

    @property
    def dim(self) -> int:
        if self.manifold is not None:
            return self.manifold.dim
        return int(self.constants.shape[0])


def flat(n: int) -> ZooEntry:
    if not 1 <= n <= 8:
        raise ValueError("flat(n) supports 1 <= n <= 8")
    names = [f"x{i + 1}" for i in range(n)]
    frame = [["1" if i == a else "0" for i in range(n)] for a in range(n)]
    m = ChartManifold.from_strings(f"flat{n}", names, frame, [(-1.0, 1.0)] * n)
    split = SplitSpec.for_dim(n, n - 1) if n > 1 else None
    expected = {"scalar_curvature": Expected(0.0, "trivial")}
    for name in ("q4", "q2", "q0", "qm2"):
        expected[name] = Expected(0.0, "trivial")
    return ZooEntry(f"flat{n}", m, split, expected)


def sphere2() -> ZooEntry:
    """Unit 2-sphere in (p, q) with frame {d_p, csc p d_q}."""
    m = ChartManifold.from_strings(
        "s2", ["p", "q"], [["1", "0"], ["0", "csc(p)"]],
        [(0.2, math.pi - 0.2), (0.2, 2 * math.pi - 0.2)], ["e4", "e5"])
    return ZooEntry("s2", m, SplitSpec(1, 1), {
        "scalar_curvature": Expected(2.0, "derived", "coordinate oracle; 2csc^2 p - 2cot^2 p"),
    })


# Stereographic projection from the north pole (0,0,0,1): with rho = |y|^2 the
# pushforward of an ambient tangent field V is (1+rho)/2 * (V^i + y_i V^4).
# For the left-invariant fields below this collapses to polynomials.
_S3_X = ["0.5*(1-y1^2-y2^2-y3^2)+y1^2", "y1*y2-y3", "y2+y1*y3"]
_S3_Y = ["y3+y1*y2", "0.5*(1-y1^2-y2^2-y3^2)+y2^2", "y2*y3-y1"]
_S3_Z = ["y1*y3-y2", "y1+y2*y3", "0.5*(1-y1^2-y2^2-y3^2)+y3^2"]


def sphere3_chart(order: str = "ZXY") -> ChartManifold:
    fields = {"X": _S3_X, "Y": _S3_Y, "Z": _S3_Z}
    return ChartManifold.from_strings(
        "s3", ["y1", "y2", "y3"], [fields[k] for k in order],
        [(-1.1, 1.1)] * 3, list(order))


# In the order (X, Y, Z): [X,Y] = -2Z, [X,Z] = 2Y, [Y,Z] = -2X.
SU2_CONSTANTS = structure_from_brackets(3, {(1, 2): {3: -2.0}, (1, 3): {2: 2.0},
                                            (2, 3): {1: -2.0}})


def sphere3() -> ZooEntry:
    """Unit 3-sphere, frame ordered (Z, X, Y) so that span{X, Y} is collapsed."""
    m = sphere3_chart("ZXY")
    return ZooEntry("s3", m, SplitSpec(1, 2), {
        "scalar_curvature": Expected(6.0, "paper", "f = 1 in -2f^4 + 8f^2"),
        "q4": Expected(-2.0, "paper"),
        "q2": Expected(8.0, "paper"),
        "q0": Expected(0.0, "paper"),
        "qm2": Expected(0.0, "paper"),
        "threshold": Expected(2.0, "paper", "S < 0 for f > 2"),
    }, constants=SU2_CONSTANTS)


def seven_manifold(K_H: float = -4.0) -> ZooEntry:
    """N x S^2 x H in (t, x1, x2, p, q, u, v).

    Frame e1 = d_t, e2 = d_x1, e3 = t d_x1 + d_x2, e4 = d_p, e5 = csc p d_q and
    e6, e7 = sqrt(-K_H) v d_u, sqrt(-K_H) v d_v on a half-plane chart of
    constant curvature K_H. Reordered as (e2, e3, e6, e7 | e1, e4, e5) so the
    leaf directions form the trailing block.
    """
    if not K_H < 0:
        raise ValueError("K_H must be negative")
    a = repr(math.sqrt(-K_H))
    z = "0"
    frame = {
        "e1": ["1", z, z, z, z, z, z],
        "e2": [z, "1", z, z, z, z, z],
        "e3": [z, "t", "1", z, z, z, z],
        "e4": [z, z, z, "1", z, z, z],
        "e5": [z, z, z, z, "csc(p)", z, z],
        "e6": [z, z, z, z, z, f"{a}*v", z],
        "e7": [z, z, z, z, z, z, f"{a}*v"],
    }
    order = ["e2", "e3", "e6", "e7", "e1", "e4", "e5"]
    box = [(-1.5, 1.5), (-1.0, 1.0), (-1.0, 1.0), (0.2, math.pi - 0.2),
           (0.2, 2 * math.pi - 0.2), (-1.0, 1.0), (0.5, 2.0)]
    m = ChartManifold.from_strings("seven", ["t", "x1", "x2", "p", "q", "u", "v"],
                                   [frame[k] for k in order], box, order)
    return ZooEntry("seven", m, SplitSpec(4, 3), {
        "S2": Expected(2.0, "paper"),
        "npb_indicator": Expected(1.5, "paper"),
        "q4": Expected(0.0, "derived"),
        "q2": Expected(1.5, "paper"),
        "q0": Expected(2.0 * K_H, "derived",
                       "scalar curvature of H is 2*K_H; printed total 3/2 f^2 - 4 implies -4"),
        "q0_as_printed": Expected(-4.0, "paper", "reproduced when K_H = -2"),
        "qm2": Expected(0.0, "derived"),
        "scalar_curvature": Expected(1.5 + 2.0 * K_H, "derived", "q2 + q0 at f = 1"),
    })


def hyperbolic(K: float = -4.0) -> ZooEntry:
    """Half-plane chart of constant curvature K: metric (du^2 + dv^2) / (-K v^2)."""
    if not K < 0:
        raise ValueError("K must be negative")
    a = repr(math.sqrt(-K))
    m = ChartManifold.from_strings("h2", ["u", "v"], [[f"{a}*v", "0"], ["0", f"{a}*v"]],
                                   [(-1.0, 1.0), (0.5, 2.0)])
    return ZooEntry("h2", m, SplitSpec(1, 1), {
        "scalar_curvature": Expected(2.0 * K, "derived", "surface: S = 2K"),
    })


def heisenberg_chart() -> ChartManifold:
    return ChartManifold.from_strings("heisenberg", ["x", "y", "z"],
                                      [["1", "0", "0"], ["0", "1", "x"], ["0", "0", "1"]],
                                      [(-1.0, 1.0)] * 3)


def lie_group(constants: StructureTensor, name: str,
              chart: ChartManifold | None = None,
              expected: dict[str, Expected] | None = None,
              split: SplitSpec | None = None) -> ZooEntry:
    """Constant structure functions, optionally with a chart realising them."""
    c = np.asarray(constants, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise ValueError("constants must be an n x n x n array")
    if np.max(np.abs(c + c.transpose(0, 2, 1)), initial=0.0) > 0:
        raise ValueError("constants must be antisymmetric in the lower indices")
    if chart is not None and chart.dim != c.shape[0]:
        raise ValueError("chart dimension does not match the constants")
    return ZooEntry(f"lie:{name}", chart, split, dict(expected or {}), constants=c)


LIE_GROUPS = {
    "su2": lambda: lie_group(SU2_CONSTANTS, "su2", sphere3_chart("XYZ"),
                             {"scalar_curvature": Expected(6.0, "paper")}, SplitSpec(1, 2)),
    "abelian": lambda: lie_group(np.zeros((3, 3, 3)), "abelian", flat(3).manifold,
                                 {"scalar_curvature": Expected(0.0, "trivial")}, SplitSpec(1, 2)),
    "heisenberg": lambda: lie_group(structure_from_brackets(3, {(1, 2): {3: 1.0}}),
                                    "heisenberg", heisenberg_chart(),
                                    {"scalar_curvature": Expected(-0.5, "derived")},
                                    SplitSpec(1, 2)),
}

ZOO_IDS = ("flat2", "flat7", "s2", "s3", "seven", "h2",
           "lie:su2", "lie:abelian", "lie:heisenberg")


def get(zoo_id: str, K_H: float | None = None) -> ZooEntry:
    """Look up a fixture by its command-line name."""
    if zoo_id.startswith("lie:"):
        key = zoo_id[4:]
        if key not in LIE_GROUPS:
            raise KeyError(f"unknown Lie group {key!r}; known: {sorted(LIE_GROUPS)}")
        return LIE_GROUPS[key]()
    if zoo_id.startswith("flat") and zoo_id[4:].isdigit():
        return flat(int(zoo_id[4:]))
    if zoo_id == "s2":
        return sphere2()
    if zoo_id == "s3":
        return sphere3()
    if zoo_id == "seven":
        return seven_manifold(-4.0 if K_H is None else K_H)
    if zoo_id == "h2":
        return hyperbolic()
    raise KeyError(f"unknown manifold {zoo_id!r}; known: {', '.join(ZOO_IDS)}")


def chart_entries(K_H: float = -4.0) -> list[ZooEntry]:
    """Every fixture that has a chart (used by the sweep-style checks)."""
    return [flat(2), flat(7), sphere2(), sphere3(), seven_manifold(K_H), hyperbolic()]
