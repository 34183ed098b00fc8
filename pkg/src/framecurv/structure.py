"""Lie brackets of frame fields and their structure functions.

Index convention used throughout the package: ``c[K, I, J]`` is the
``e_K``-coefficient of ``[e_I, e_J]``, so ``[e_I, e_J] = sum_K c[K, I, J] e_K``.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .geometry import (AD, ChartManifold, DerivativeEngine, FrameJet, as_point,
                       frame_jet, frame_matrix)

StructureTensor = np.ndarray


def brackets_from_jet(jet: FrameJet) -> np.ndarray:
    """``b[i, I, J]``: coordinate components of ``[e_I, e_J]``."""
    # [X, Y]^i = X^m d_m Y^i - Y^m d_m X^i
    term = np.einsum("ijm,mI->iIj", jet.dE, jet.E)  # (Jac e_J . e_I)^i
    return term - term.transpose(0, 2, 1)


def lie_bracket(manifold: ChartManifold, I: int, J: int, point,
                engine: DerivativeEngine = AD) -> np.ndarray:
    """Coordinate components of ``[e_I, e_J]`` at ``point``."""
    n = manifold.dim
    if I == J:
        return np.zeros(n)
    jet = frame_jet(manifold, point, engine)
    EI, EJ = jet.E[:, I], jet.E[:, J]
    return jet.dE[:, J, :] @ EI - jet.dE[:, I, :] @ EJ


def structure_from_jet(jet: FrameJet) -> StructureTensor:
    n = jet.E.shape[0]
    b = brackets_from_jet(jet)
    return np.linalg.solve(jet.E, b.reshape(n, n * n)).reshape(n, n, n)


def structure_tensor(manifold: ChartManifold, point,
                     engine: DerivativeEngine = AD) -> StructureTensor:
    """Structure functions ``c[K, I, J]`` of the frame at ``point``."""
    return structure_from_jet(frame_jet(manifold, point, engine))


def _structure_gradient(jet: FrameJet) -> tuple[StructureTensor, np.ndarray]:
    """``c`` and ``dc[K, I, J, p] = d_p c[K, I, J]`` by propagating the jet
    through the bracket and the linear solve."""
    n = jet.E.shape[0]
    E, dE, d2E = jet.E, jet.dE, jet.d2E
    c = structure_from_jet(jet)
    # d_p of (dE[i,J,m] E[m,I])
    t = (np.einsum("iJmp,mI->iIJp", d2E, E)
         + np.einsum("iJm,mIp->iIJp", dE, dE))
    db = t - t.transpose(0, 2, 1, 3)
    rhs = db - np.einsum("iLp,LIJ->iIJp", dE, c)
    dc = np.linalg.solve(E, rhs.reshape(n, -1)).reshape(n, n, n, n)
    return c, dc


def structure_derivatives(manifold: ChartManifold, point,
                          engine: DerivativeEngine = AD) -> tuple[StructureTensor, np.ndarray]:
    """Structure tensor and its frame derivatives ``D[K, A, I, J] = e_K(c[A, I, J])``.

    In ``"ad"`` mode the derivative is exact forward-mode differentiation of the
    whole bracket-and-solve pipeline. In ``"fd"`` mode each ``e_K`` derivative
    is a central difference of :func:`structure_tensor` along the straight line
    through ``point`` in direction ``e_K(point)``, with step ``nested_step``.
    """
    x = as_point(manifold, point)
    if engine.mode == "ad":
        jet = frame_jet(manifold, x, engine, second=True)
        c, dc = _structure_gradient(jet)
        D = np.einsum("AIJp,pK->KAIJ", dc, jet.E)
        return c, D
    E = frame_matrix(manifold, x)
    c = structure_tensor(manifold, x, engine)
    n = manifold.dim
    h = engine.nested_step
    D = np.empty((n, n, n, n))
    for K in range(n):
        d = E[:, K]
        D[K] = (structure_tensor(manifold, x + h * d, engine)
                - structure_tensor(manifold, x - h * d, engine)) / (2 * h)
    return c, D


def structure_derivative(manifold: ChartManifold, K: int, target: tuple[int, int, int],
                         point, engine: DerivativeEngine = AD) -> float:
    """``e_K`` applied to the scalar field ``x -> c(x)[target]``."""
    _, D = structure_derivatives(manifold, point, engine)
    A, I, J = target
    return float(D[K, A, I, J])


def structure_from_brackets(n: int, brackets: Mapping[tuple[int, int], Mapping[int, float]],
                            one_based: bool = True) -> StructureTensor:
    """Build an antisymmetric tensor from ``{(I, J): {K: c^K_IJ}}``.

    Only one ordering of each pair needs to be listed; the other is filled in.
    """
    off = 1 if one_based else 0
    c = np.zeros((n, n, n))
    for (I, J), coeffs in brackets.items():
        if I == J:
            raise ValueError("bracket of a field with itself is zero")
        for K, value in coeffs.items():
            c[K - off, I - off, J - off] = value
            c[K - off, J - off, I - off] = -value
    return c


def antisymmetry_defect(c: StructureTensor) -> float:
    return float(np.max(np.abs(c + c.transpose(0, 2, 1)), initial=0.0))
