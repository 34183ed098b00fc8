"""Charts, frame fields and the derivative engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import expr as ex


class SingularFrameError(ArithmeticError):
    """The frame matrix is (numerically) singular at a point."""


class NumericalDegeneracyError(ArithmeticError):
    """Nested finite differences lost too many significant digits."""


SINGULAR_DET = 1e-10


@dataclass(frozen=True)
class DerivativeEngine:
    """How derivatives are taken: forward-mode AD (``"ad"``) or central FD (``"fd"``).

    ``fd_step`` is the first-level step and ``nested_step`` the step for the
    outer level of nested differences.
    """

    mode: str = "ad"
    fd_step: float = 1e-5
    nested_step: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("ad", "fd"):
            raise ValueError(f"unknown derivative mode {self.mode!r}")
        for name in ("fd_step", "nested_step"):
            h = getattr(self, name)
            if not 0 < h < 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2), got {h}")


AD = DerivativeEngine("ad")
FD = DerivativeEngine("fd")


def _as_expr(item: Union[str, ex.Expr], names: Sequence[str]) -> ex.Expr:
    if isinstance(item, str):
        return ex.parse(item, names)
    return item


@dataclass(frozen=True)
class ChartManifold:
    """A coordinate chart carrying an orthonormal frame given by expressions.

    ``frame[A][i]`` is the ``i``-th coordinate component of the frame vector
    ``e_A``. The metric is the one for which this frame is orthonormal.
    """

    name: str
    coord_names: tuple[str, ...]
    frame: tuple[tuple[ex.Expr, ...], ...]
    sample_box: tuple[tuple[float, float], ...]
    frame_labels: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.coord_names)
        if n == 0:
            raise ValueError("chart needs at least one coordinate")
        if len(set(self.coord_names)) != n:
            raise ValueError("duplicate coordinate names")
        for name in self.coord_names:
            if name in ex.RESERVED:
                raise ValueError(f"coordinate name {name!r} is reserved")
        if len(self.frame) != n or any(len(row) != n for row in self.frame):
            raise ValueError(f"frame must be {n}x{n}")
        for row in self.frame:
            for node in row:
                extra = ex.variables_of(node) - set(self.coord_names)
                if extra:
                    raise ValueError(f"frame uses unknown coordinates {sorted(extra)}")
        if len(self.sample_box) != n:
            raise ValueError("sample_box needs one interval per coordinate")
        for lo, hi in self.sample_box:
            if not lo <= hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")
        if not self.frame_labels:
            object.__setattr__(self, "frame_labels",
                               tuple(f"e{a + 1}" for a in range(n)))
        elif len(self.frame_labels) != n:
            raise ValueError("one frame label per frame vector")

    @classmethod
    def from_strings(cls, name: str, coord_names: Sequence[str],
                     frame: Sequence[Sequence[Union[str, ex.Expr]]],
                     sample_box: Sequence[Sequence[float]],
                     frame_labels: Sequence[str] = ()) -> "ChartManifold":
        names = tuple(coord_names)
        rows = tuple(tuple(_as_expr(item, names) for item in row) for row in frame)
        box = tuple((float(lo), float(hi)) for lo, hi in sample_box)
        return cls(name, names, rows, box, tuple(frame_labels))

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def frame_text(self) -> list[list[str]]:
        return [[ex.to_text(node) for node in row] for row in self.frame]

    def reordered(self, order: Sequence[int], name: str | None = None) -> "ChartManifold":
        """Same chart with the frame vectors permuted (``order[new] = old``)."""
        if sorted(order) != list(range(self.dim)):
            raise ValueError("order must be a permutation of the frame indices")
        return ChartManifold(name or self.name, self.coord_names,
                             tuple(self.frame[a] for a in order), self.sample_box,
                             tuple(self.frame_labels[a] for a in order))

    def env(self, point) -> dict[str, float]:
        coords = as_point(self, point)
        return dict(zip(self.coord_names, coords.tolist()))


Point = np.ndarray


def as_point(manifold: ChartManifold, point) -> np.ndarray:
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape != (manifold.dim,):
        raise ValueError(f"point must have {manifold.dim} coordinates, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must be finite")
    return x


def _check_invertible(E: np.ndarray, x: np.ndarray):
    det = np.linalg.det(E)
    if not abs(det) > SINGULAR_DET:
        raise SingularFrameError(f"frame is singular (det={det:.3e}) at {x.tolist()}")


def _raw_frame(manifold: ChartManifold, x: np.ndarray) -> np.ndarray:
    env = dict(zip(manifold.coord_names, x.tolist()))
    n = manifold.dim
    E = np.empty((n, n))
    for a, row in enumerate(manifold.frame):
        for i, node in enumerate(row):
            E[i, a] = ex.evaluate(node, env)
    return E


def frame_matrix(manifold: ChartManifold, point) -> np.ndarray:
    """Column ``A`` holds the coordinate components of ``e_A`` at ``point``."""
    x = as_point(manifold, point)
    E = _raw_frame(manifold, x)
    _check_invertible(E, x)
    return E


def metric_from_frame(manifold: ChartManifold, point) -> np.ndarray:
    """Coordinate metric ``g = (E E^T)^-1`` in which the frame is orthonormal."""
    E = frame_matrix(manifold, point)
    g = np.linalg.inv(E @ E.T)
    return 0.5 * (g + g.T)


def directional_derivative(engine: DerivativeEngine,
                           field_: Union[ex.Expr, Callable[[np.ndarray], float]],
                           point, direction, manifold: ChartManifold | None = None) -> float:
    """d/dt field(point + t*direction) at t = 0.

    Expression-backed fields are differentiated with dual numbers in ``"ad"``
    mode (``manifold`` supplies the coordinate names); callables, and anything
    in ``"fd"`` mode, use a central difference with ``engine.fd_step``.
    """
    x = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    if not callable(field_):
        if manifold is None:
            raise ValueError("expression fields need the manifold for coordinate names")
        node, names = field_, manifold.coord_names
        if engine.mode == "ad":
            return ex.eval_dual(node, dict(zip(names, x.tolist())),
                                dict(zip(names, d.tolist()))).tangent

        def field_(y):
            return ex.evaluate(node, dict(zip(names, y.tolist())))
    h = engine.fd_step
    return (field_(x + h * d) - field_(x - h * d)) / (2 * h)


@dataclass(frozen=True)
class FrameJet:
    """Frame values with first and (optionally) second coordinate derivatives.

    ``E[i, A]``, ``dE[i, A, m] = d_m E[i, A]``,
    ``d2E[i, A, m, p] = d_m d_p E[i, A]``.
    """

    point: np.ndarray
    E: np.ndarray
    dE: np.ndarray
    d2E: np.ndarray | None = field(default=None)


def _ad_frame_jet(manifold: ChartManifold, x: np.ndarray, second: bool) -> FrameJet:
    n = manifold.dim
    E = np.empty((n, n))
    dE = np.empty((n, n, n))
    d2E = np.empty((n, n, n, n)) if second else None
    names = manifold.coord_names
    for a, row in enumerate(manifold.frame):
        for i, node in enumerate(row):
            if ex.is_constant(node):
                E[i, a] = ex.evaluate(node, {})
                dE[i, a] = 0.0
                if second:
                    d2E[i, a] = 0.0
                continue
            jet = ex.eval_jet(node, names, x)
            E[i, a] = jet.value
            dE[i, a] = jet.grad
            if second:
                d2E[i, a] = jet.hess
    return FrameJet(x, E, dE, d2E)


def _fd_first(manifold: ChartManifold, x: np.ndarray, h: float) -> np.ndarray:
    n = manifold.dim
    dE = np.empty((n, n, n))
    for m in range(n):
        step = np.zeros(n)
        step[m] = h
        dE[:, :, m] = (_raw_frame(manifold, x + step) - _raw_frame(manifold, x - step)) / (2 * h)
    return dE


def _fd_frame_jet(manifold: ChartManifold, x: np.ndarray, engine: DerivativeEngine,
                  second: bool) -> FrameJet:
    n = manifold.dim
    E = _raw_frame(manifold, x)
    dE = _fd_first(manifold, x, engine.fd_step)
    d2E = None
    if second:
        H = engine.nested_step
        d2E = np.empty((n, n, n, n))
        for p in range(n):
            step = np.zeros(n)
            step[p] = H
            d2E[:, :, :, p] = (_fd_first(manifold, x + step, engine.fd_step)
                               - _fd_first(manifold, x - step, engine.fd_step)) / (2 * H)
        d2E = 0.5 * (d2E + d2E.transpose(0, 1, 3, 2))
    return FrameJet(x, E, dE, d2E)


def frame_jet(manifold: ChartManifold, point, engine: DerivativeEngine = AD,
              second: bool = False) -> FrameJet:
    """Frame and its coordinate derivatives at ``point``."""
    x = as_point(manifold, point)
    if engine.mode == "ad":
        jet = _ad_frame_jet(manifold, x, second)
    else:
        jet = _fd_frame_jet(manifold, x, engine, second)
    _check_invertible(jet.E, x)
    return jet


def jacobian(manifold: ChartManifold, index: int, point,
             engine: DerivativeEngine = AD) -> np.ndarray:
    """Entry ``(i, j)`` is ``d_j`` of the ``i``-th component of ``e_index``."""
    return frame_jet(manifold, point, engine).dE[:, index, :].copy()


def sample_points(manifold: ChartManifold, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy (scrambled Halton) points in the sample box."""
    from scipy.stats import qmc

    if count < 1:
        raise ValueError("count must be positive")
    box = np.asarray(manifold.sample_box, dtype=float)
    unit = qmc.Halton(d=manifold.dim, scramble=True, seed=seed).random(count)
    return box[:, 0] + unit * (box[:, 1] - box[:, 0])
