"""Collapsing the metric along the last ``s`` frame directions.

The frame is split as ``(e_1..e_r | e_{r+1}..e_n)``: the first block spans the
transverse bundle X (indices ``i, j, k``), the second the collapse bundle Y
(indices ``alpha, beta, gamma``). Scaling ``g_Y`` by ``1/f^2`` multiplies the
Y frame vectors by ``f``; for constant ``f`` the new scalar curvature is the
Laurent polynomial ``q4 f^4 + q2 f^2 + q0 + qm2 f^-2`` computed here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import expr as ex
from .curvature import scalar_from_structure
from .geometry import AD, ChartManifold, DerivativeEngine, as_point, sample_points
from .structure import StructureTensor, structure_derivatives

log = logging.getLogger(__name__)

ZERO_TOL = 1e-8
NONZERO_TOL = 1e-6
ROOT_IMAG_TOL = 1e-9


class HypothesisError(ValueError):
    """A reduced formula was requested where its hypotheses fail."""


@dataclass(frozen=True)
class SplitSpec:
    r: int
    s: int

    def __post_init__(self):
        if self.r < 0 or self.s < 1:
            raise ValueError(f"need r >= 0 and s >= 1, got r={self.r}, s={self.s}")

    @classmethod
    def for_dim(cls, n: int, r: int) -> "SplitSpec":
        return cls(r, n - r)

    @property
    def n(self) -> int:
        return self.r + self.s

    @property
    def transverse(self) -> np.ndarray:
        return np.arange(self.r)

    @property
    def collapse(self) -> np.ndarray:
        return np.arange(self.r, self.n)

    def check(self, n: int):
        if self.n != n:
            raise ValueError(f"split r={self.r}, s={self.s} does not fit dimension {n}")


RescaleFactor = Union[float, ex.Expr, str]


def _factor_expr(manifold: ChartManifold, f: RescaleFactor) -> ex.Expr:
    if isinstance(f, (int, float)):
        if not f > 0 or not math.isfinite(f):
            raise ValueError(f"rescale factor must be positive, got {f}")
        return ex.Num(float(f))
    node = ex.parse(f, manifold.coord_names) if isinstance(f, str) else f
    points = sample_points(manifold, 64, seed=0)
    for x in points:
        value = ex.evaluate(node, manifold.env(x))
        if not value > 0:
            raise ValueError(f"rescale factor is not positive ({value}) at {x.tolist()}")
    return node


def rescale_frame(manifold: ChartManifold, split: SplitSpec, f: RescaleFactor,
                  name: str | None = None) -> ChartManifold:
    """Frame ``(e_i, f e_alpha)``: the metric becomes ``g_X + g_Y / f^2``."""
    split.check(manifold.dim)
    factor = _factor_expr(manifold, f)
    rows = list(manifold.frame)
    for a in split.collapse:
        rows[a] = tuple(ex.product(factor, node) for node in rows[a])
    label = ex.to_text(factor)
    return ChartManifold(name or f"{manifold.name}[f={label}]", manifold.coord_names,
                         tuple(rows), manifold.sample_box, manifold.frame_labels)


def transform_structure_functions(c: StructureTensor, split: SplitSpec, f_value: float,
                                  grad_f: Sequence[float] | None = None) -> StructureTensor:
    """Structure functions of the rescaled frame from those of the original.

    ``grad_f[A]`` holds ``e_A(f)`` (original frame); omit it for constant ``f``.
    Only entries with ``I < J`` are computed from the rules; the rest follow by
    antisymmetry.
    """
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    split.check(n)
    if not f_value > 0:
        raise ValueError(f"f must be positive, got {f_value}")
    f = float(f_value)
    df = np.zeros(n) if grad_f is None else np.asarray(grad_f, dtype=float)
    r = split.r
    out = np.zeros_like(c)
    for I in range(n):
        for J in range(I + 1, n):
            for K in range(n):
                v = c[K, I, J]
                if J < r:  # [e_i, e_j]
                    new = v if K < r else v / f
                elif I < r:  # [e_i, e_alpha]
                    if K < r:
                        new = f * v
                    elif K == J:
                        new = df[I] / f + v
                    else:
                        new = v
                else:  # [e_alpha, e_beta]
                    if K < r:
                        new = f * f * v
                    elif K == I:
                        new = f * v - df[J]
                    elif K == J:
                        new = f * v + df[I]
                    else:
                        new = f * v
                out[K, I, J] = new
                out[K, J, I] = -new
    return out


# ------------------------------------------------------------ the profile


@dataclass(frozen=True)
class CollapseProfile:
    """Coefficients of ``S(f) = q4 f^4 + q2 f^2 + q0 + qm2 / f^2``."""

    q4: float
    q2: float
    q0: float
    qm2: float

    def __post_init__(self):
        for name in ("q4", "q2", "q0", "qm2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def __call__(self, f: float) -> float:
        return evaluate_profile(self, f)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.q4, self.q2, self.q0, self.qm2)


def evaluate_profile(profile: CollapseProfile, f: float) -> float:
    if not f > 0:
        raise ValueError(f"f must be positive, got {f}")
    f2 = f * f
    return profile.q4 * f2 * f2 + profile.q2 * f2 + profile.q0 + profile.qm2 / f2


def _sub(t: np.ndarray, *blocks) -> np.ndarray:
    return t[np.ix_(*blocks)]


def restricted_from_structure(c: StructureTensor, D: np.ndarray,
                              split: SplitSpec) -> tuple[float, float]:
    """The scalar-curvature formula with every index confined to one block."""
    R, G = split.transverse, split.collapse
    s1 = scalar_from_structure(_sub(c, R, R, R), _sub(D, R, R, R, R)) if len(R) else 0.0
    s2 = scalar_from_structure(_sub(c, G, G, G), _sub(D, G, G, G, G))
    return s1, s2


def restricted_scalars(manifold: ChartManifold, split: SplitSpec, point,
                       engine: DerivativeEngine = AD) -> tuple[float, float]:
    split.check(manifold.dim)
    c, D = structure_derivatives(manifold, point, engine)
    return restricted_from_structure(c, D, split)


def _q4(c, R, G) -> float:
    return float(-0.25 * np.sum(_sub(c, R, G, G) ** 2))


def _qm2(c, R, G) -> float:
    return float(-0.25 * np.sum(_sub(c, G, R, R) ** 2))


def _q2_group(c, D, R, G) -> float:
    """f^2 coefficient without S2 (the bracketed group)."""
    deriv = 2.0 * np.einsum("gjgj->", _sub(D, G, R, G, R))
    tr_x = np.einsum("kak->a", _sub(c, R, G, R))     # c^k_{alpha k}
    tr_y = np.einsum("bab->a", _sub(c, G, G, G))     # c^beta_{alpha beta}
    return float(deriv
                 - tr_x @ tr_x
                 - 2.0 * tr_x @ tr_y
                 - 0.5 * np.einsum("kib,ikb->", _sub(c, R, R, G), _sub(c, R, R, G))
                 - np.einsum("igb,gib->", _sub(c, R, G, G), _sub(c, G, R, G))
                 - 0.5 * np.sum(_sub(c, R, G, R) ** 2))


def _q0_group(c, D, R, G) -> float:
    """f^0 coefficient without S1."""
    deriv = 2.0 * np.einsum("kbkb->", _sub(D, R, G, R, G))
    tr_y = np.einsum("gig->i", _sub(c, G, R, G))     # c^gamma_{i gamma}
    tr_x = np.einsum("jij->i", _sub(c, R, R, R))     # c^j_{ij}
    return float(deriv
                 - tr_y @ tr_y
                 - 2.0 * tr_y @ tr_x
                 - 0.5 * np.einsum("agj,gaj->", _sub(c, G, G, R), _sub(c, G, G, R))
                 - np.einsum("igj,gij->", _sub(c, R, G, R), _sub(c, G, R, R))
                 - 0.5 * np.sum(_sub(c, G, R, G) ** 2))


def profile_from_structure(c: StructureTensor, D: np.ndarray,
                           split: SplitSpec) -> CollapseProfile:
    split.check(c.shape[0])
    R, G = split.transverse, split.collapse
    s1, s2 = restricted_from_structure(c, D, split)
    return CollapseProfile(_q4(c, R, G), s2 + _q2_group(c, D, R, G),
                           s1 + _q0_group(c, D, R, G), _qm2(c, R, G))


def collapse_profile(manifold: ChartManifold, split: SplitSpec, point,
                     engine: DerivativeEngine = AD) -> CollapseProfile:
    """Laurent coefficients of the collapsed scalar curvature at ``point``."""
    split.check(manifold.dim)
    c, D = structure_derivatives(manifold, point, engine)
    return profile_from_structure(c, D, split)


def lie_profile(constants: StructureTensor, split: SplitSpec) -> CollapseProfile:
    c = np.asarray(constants, dtype=float)
    return profile_from_structure(c, np.zeros((c.shape[0],) * 4), split)


def npb_from_structure(c: StructureTensor, D: np.ndarray, split: SplitSpec) -> float:
    R, G = split.transverse, split.collapse
    _, s2 = restricted_from_structure(c, D, split)
    tr_x = np.einsum("kak->a", _sub(c, R, G, R))
    return float(s2
                 + 2.0 * np.einsum("gjgj->", _sub(D, G, R, G, R))
                 - tr_x @ tr_x
                 - 0.5 * np.einsum("kib,ikb->", _sub(c, R, R, G), _sub(c, R, R, G))
                 - 0.5 * np.sum(_sub(c, R, G, R) ** 2))


def npb_indicator(manifold: ChartManifold, split: SplitSpec, point,
                  engine: DerivativeEngine = AD) -> float:
    """Leafwise scalar curvature plus the correction terms; positive
    everywhere means the frame certifies the nearly-positively-bundle-like
    condition."""
    split.check(manifold.dim)
    c, D = structure_derivatives(manifold, point, engine)
    return npb_from_structure(c, D, split)


# ------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class Thresholds:
    roots: tuple[float, ...]
    asymptotic_sign: int

    @property
    def largest(self) -> float | None:
        return self.roots[-1] if self.roots else None


def _polish(poly: np.ndarray, u0: float) -> float:
    p = np.poly1d(poly)
    width = 1e-6 * max(1.0, abs(u0))
    lo, hi = u0 - width, u0 + width
    plo, phi = p(lo), p(hi)
    if plo == 0:
        return lo
    if phi == 0:
        return hi
    if np.sign(plo) == np.sign(phi):
        return u0  # even multiplicity: no bracket to bisect
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        pm = p(mid)
        if pm == 0:
            return mid
        if np.sign(pm) == np.sign(plo):
            lo, plo = mid, pm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sign_thresholds(profile: CollapseProfile, rel_zero: float = 1e-12) -> Thresholds:
    """Positive ``f`` where the profile changes sign, and its sign as ``f -> oo``.

    With ``u = f^2`` the profile times ``u`` is the cubic
    ``q4 u^3 + q2 u^2 + q0 u + qm2``; its roots come from companion-matrix
    eigenvalues and are then polished by bisection. Coefficients below
    ``rel_zero`` times the largest one are treated as zero.
    """
    coeffs = np.array(profile.as_tuple(), dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("profile must be finite")
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return Thresholds((), 0)
    coeffs = np.where(np.abs(coeffs) <= rel_zero * scale, 0.0, coeffs)
    lead = coeffs[np.nonzero(coeffs)[0][0]]
    sign = int(np.sign(lead))
    trimmed = np.trim_zeros(coeffs, "f")
    trimmed = np.trim_zeros(trimmed, "b")  # factors of u: root u = 0 is not f > 0
    roots = []
    if len(trimmed) > 1:
        for u in np.roots(trimmed):
            if abs(u.imag) < ROOT_IMAG_TOL * (1 + abs(u.real)) and u.real > 0:
                u_ref = _polish(trimmed, float(u.real))
                roots.append(math.sqrt(u_ref))
    return Thresholds(tuple(sorted(roots)), sign)


# ---------------------------------------------------------- classification


def _format_entry(labels: Sequence[str], K: int, I: int, J: int) -> str:
    return f"c^{labels[K]}_{{{labels[I]},{labels[J]}}}"


def _max_entry(block: np.ndarray, rows, cols_a, cols_b):
    if block.size == 0:
        return 0.0, None
    flat = int(np.argmax(np.abs(block)))
    a, b, cc = np.unravel_index(flat, block.shape)
    return float(abs(block[a, b, cc])), (int(rows[a]), int(cols_a[b]), int(cols_b[cc]))


@dataclass
class ClassificationReport:
    involutive: bool
    everywhere_noninvolutive: bool
    everywhere_noninvolutive_literal: bool
    bundle_like_certificate: str
    npb_certificate: str
    npb_min: float
    npb_max: float
    sample_count: int
    witnesses: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "involutive": self.involutive,
            "everywhere_noninvolutive": self.everywhere_noninvolutive,
            "everywhere_noninvolutive_literal": self.everywhere_noninvolutive_literal,
            "bundle_like_certificate": self.bundle_like_certificate,
            "npb_certificate": self.npb_certificate,
            "npb_min": self.npb_min,
            "npb_max": self.npb_max,
            "sample_count": self.sample_count,
            "witnesses": self.witnesses,
            "warnings": list(self.warnings),
        }


def classify(manifold: ChartManifold, split: SplitSpec, samples,
             engine: DerivativeEngine = AD) -> ClassificationReport:
    """Involutivity, everywhere non-involutivity and the two frame certificates.

    The bundle-like and NPB verdicts are certificates for *this* frame only: a
    ``"not-for-this-frame"`` answer does not rule out some other adapted frame.
    """
    split.check(manifold.dim)
    points = [as_point(manifold, x) for x in samples]
    if not points:
        raise ValueError("classification needs at least one sample point")
    R, G = split.transverse, split.collapse
    labels = manifold.frame_labels
    worst_inv = (-1.0, None, None)      # largest |c^i_{gamma beta}|
    weakest_noninv = (math.inf, None, None)  # smallest per-point max
    worst_bl = (-1.0, None, None)       # largest |c^k_{alpha j}|
    literal = True
    npb_vals = []
    warnings = []
    npb_witness = None
    for x in points:
        c, D = structure_derivatives(manifold, x, engine)
        inv_val, inv_idx = _max_entry(_sub(c, R, G, G), R, G, G)
        bl_val, bl_idx = _max_entry(_sub(c, R, G, R), R, G, R)
        if inv_val > worst_inv[0]:
            worst_inv = (inv_val, inv_idx, x)
        if inv_val < weakest_noninv[0]:
            weakest_noninv = (inv_val, inv_idx, x)
        if bl_val > worst_bl[0]:
            worst_bl = (bl_val, bl_idx, x)
        if ZERO_TOL <= inv_val <= NONZERO_TOL:
            warnings.append(f"indeterminate involutivity at {x.tolist()}: "
                            f"max |c^i_(gamma beta)| = {inv_val:.3e}")
        block = _sub(c, R, G, G)
        off_diag = [block[:, a, b] for a in range(len(G)) for b in range(len(G)) if a != b]
        if not off_diag or np.min(np.abs(np.array(off_diag))) <= NONZERO_TOL:
            literal = False
        val = npb_from_structure(c, D, split)
        npb_vals.append(val)
        if npb_witness is None or val < npb_witness[0]:
            npb_witness = (val, x)
    for w in warnings:
        log.warning(w)

    def witness(entry):
        value, idx, x = entry
        out = {"point": x.tolist(), "abs_value": value}
        if idx is not None and value > 0:
            out["entry"] = _format_entry(labels, *idx)
            out["indices"] = list(idx)
        return out

    involutive = worst_inv[0] < ZERO_TOL
    noninv = weakest_noninv[0] > NONZERO_TOL
    bundle_like = worst_bl[0] < ZERO_TOL
    npb = min(npb_vals) > 0
    witnesses = {
        "involutivity": witness(worst_inv),
        "noninvolutivity": witness(weakest_noninv),
        "bundle_like": witness(worst_bl),
        "npb": {"point": npb_witness[1].tolist(), "value": npb_witness[0]},
    }
    if worst_bl[1] is not None and worst_bl[0] > 0:
        K, I, J = worst_bl[1]
        witnesses["bundle_like"]["value"] = float(
            structure_derivatives(manifold, worst_bl[2], engine)[0][K, I, J])
    return ClassificationReport(
        involutive=involutive,
        everywhere_noninvolutive=noninv,
        everywhere_noninvolutive_literal=literal and noninv,
        bundle_like_certificate="yes" if bundle_like else "not-for-this-frame",
        npb_certificate="yes" if npb else "not-for-this-frame",
        npb_min=float(min(npb_vals)),
        npb_max=float(max(npb_vals)),
        sample_count=len(points),
        witnesses=witnesses,
        warnings=warnings,
    )


# ------------------------------------------------------ reduced formulas

CASES = ("codim1", "foliation1d", "bundle_like_1d", "involutive", "bundle_like")


def _require_zero(block: np.ndarray, rows, a, b, labels, what: str):
    value, idx = _max_entry(block, rows, a, b)
    if value >= ZERO_TOL:
        K, I, J = idx
        raise HypothesisError(f"{what} fails: {_format_entry(labels, K, I, J)} "
                              f"= {value:.6g} (|.| >= {ZERO_TOL:g})")


def _codim1(c, D, s2) -> CollapseProfile:
    n = c.shape[0]
    G = range(1, n)
    q4 = -0.25 * sum(c[0, g, b] ** 2 for g in G for b in G)
    q2 = (s2
          + 2 * sum(D[g, 0, g, 0] for g in G)
          - 2 * sum(c[0, a, 0] ** 2 for a in G)
          - 2 * sum(c[0, a, 0] * sum(c[b, a, b] for b in G) for a in G)
          - sum(c[0, g, b] * c[g, 0, b] for g in G for b in G))
    q0 = (2 * sum(D[0, b, 0, b] for b in G)
          - sum(c[g, 0, g] for g in G) ** 2
          - 0.5 * sum(c[a, g, 0] * c[g, a, 0] for a in G for g in G)
          - 0.5 * sum(c[a, 0, b] ** 2 for a in G for b in G))
    return CollapseProfile(q4, q2, q0, 0.0)


def _foliation1d(c, D, s1, bundle_like: bool) -> CollapseProfile:
    n = c.shape[0]
    a = n - 1
    X = range(a)
    q0 = (s1
          + 2 * sum(D[k, a, k, a] for k in X)
          - 2 * sum(c[a, i, a] ** 2 for i in X)
          - 2 * sum(c[a, i, a] * sum(c[j, i, j] for j in X) for i in X)
          - sum(c[i, a, j] * c[a, i, j] for i in X for j in X))
    qm2 = -0.25 * sum(c[a, k, j] ** 2 for k in X for j in X)
    if bundle_like:
        return CollapseProfile(0.0, 0.0, q0, qm2)
    q2 = (2 * sum(D[a, j, a, j] for j in X)
          - sum(c[k, a, k] for k in X) ** 2
          - 0.5 * sum(c[k, i, a] * c[i, k, a] for k in X for i in X)
          - 0.5 * sum(c[i, a, j] ** 2 for i in X for j in X))
    return CollapseProfile(0.0, q2, q0, qm2)


def specialized_from_structure(case: str, c: StructureTensor, D: np.ndarray,
                               split: SplitSpec,
                               labels: Sequence[str] | None = None) -> CollapseProfile:
    n = c.shape[0]
    split.check(n)
    labels = labels or tuple(f"e{a + 1}" for a in range(n))
    R, G = split.transverse, split.collapse
    s1, s2 = restricted_from_structure(c, D, split)
    if case == "codim1":
        if split.r != 1:
            raise HypothesisError(f"codim1 needs r = 1, got r = {split.r}")
        return _codim1(c, D, s2)
    if case in ("foliation1d", "bundle_like_1d"):
        if split.s != 1:
            raise HypothesisError(f"{case} needs s = 1, got s = {split.s}")
        _require_zero(_sub(c, R, G, G), R, G, G, labels, "involutivity")
        bl = case == "bundle_like_1d"
        if bl:
            _require_zero(_sub(c, R, G, R), R, G, R, labels, "bundle-like condition")
        return _foliation1d(c, D, s1, bl)
    if case in ("involutive", "bundle_like"):
        _require_zero(_sub(c, R, G, G), R, G, G, labels, "involutivity")
        if case == "bundle_like":
            _require_zero(_sub(c, R, G, R), R, G, R, labels, "bundle-like condition")
            return CollapseProfile(0.0, s2, s1 + _q0_group(c, D, R, G), _qm2(c, R, G))
        return CollapseProfile(0.0, s2 + _q2_group(c, D, R, G),
                               s1 + _q0_group(c, D, R, G), _qm2(c, R, G))
    raise ValueError(f"unknown case {case!r}; expected one of {CASES}")


def specialized_profile(case: str, manifold: ChartManifold, split: SplitSpec, point,
                        engine: DerivativeEngine = AD) -> CollapseProfile:
    """Profile from one of the reduced formulas, after checking its hypotheses.

    Cases: ``codim1`` (r = 1), ``foliation1d`` (s = 1), ``bundle_like_1d``
    (s = 1 and bundle-like frame), ``involutive`` and ``bundle_like``
    (involutive with bundle-like frame).
    """
    split.check(manifold.dim)
    c, D = structure_derivatives(manifold, point, engine)
    return specialized_from_structure(case, c, D, split, manifold.frame_labels)
