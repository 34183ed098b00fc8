"""Scalar curvature from structure functions, plus a coordinate oracle.

All frame-side quantities use ``c[K, I, J]`` (``[e_I, e_J] = c[K, I, J] e_K``)
and ``D[K, A, I, J] = e_K(c[A, I, J])``.

Transcription table (superscript = first array index):

=========================  =======================================
written form               array form
=========================  =======================================
``c^k_{ij}``               ``c[k, i, j]``
``Gamma^k_{ij}``           ``Gam[k, i, j]`` (``nabla_{e_i} e_j``)
``omega^j_i(e_p)``         ``omega[j, i, p] = Gam[j, p, i]``
``Omega^k_j(e_m, e_p)``    ``Omega[k, j, m, p]``
``e_k(c^j_{kj})``          ``D[k, j, k, j]``
=========================  =======================================
"""

from __future__ import annotations

import numpy as np

from .geometry import (AD, ChartManifold, DerivativeEngine, NumericalDegeneracyError,
                       as_point, frame_jet, metric_from_frame)
from .structure import StructureTensor, structure_derivatives


def frame_christoffel(c: StructureTensor) -> np.ndarray:
    """``Gam[k, i, j] = 1/2 (c[k,i,j] - c[i,j,k] + c[j,k,i])``."""
    return 0.5 * (c - np.einsum("ijk->kij", c) + np.einsum("jki->kij", c))


def connection_form(gamma: np.ndarray) -> np.ndarray:
    """``omega[j, i, p]``: coefficient of ``e^p`` in ``omega^j_i``."""
    return gamma.transpose(0, 2, 1)


def curvature_form_from_structure(c: StructureTensor, D: np.ndarray) -> np.ndarray:
    """``Omega[k, j, m, p] = Omega^k_j(e_m, e_p)`` assembled from the
    derivative, ``de^i`` and ``omega ^ omega`` terms of the curvature 2-form."""
    gam = frame_christoffel(c)
    # e_m(Gam[k, p, j]) as dgam[m, k, p, j]
    dgam = 0.5 * (D - np.einsum("mpjk->mkpj", D) + np.einsum("mjkp->mkpj", D))
    deriv = np.einsum("mkpj->kjmp", dgam)
    deriv = deriv - deriv.transpose(0, 1, 3, 2)
    # de^i(e_m, e_p) = -c[i, m, p]
    dcoframe = -np.einsum("kij,imp->kjmp", gam, c)
    wedge = np.einsum("kml,lpj->kjmp", gam, gam)
    wedge = wedge - wedge.transpose(0, 1, 3, 2)
    return deriv + dcoframe + wedge


def curvature_two_form(manifold: ChartManifold, point,
                       engine: DerivativeEngine = AD) -> np.ndarray:
    c, D = structure_derivatives(manifold, point, engine)
    return curvature_form_from_structure(c, D)


def scalar_from_curvature_form(omega: np.ndarray) -> float:
    return float(np.einsum("kjkj->", omega))


def quadratic_terms(c: StructureTensor) -> float:
    """Derivative-free part of the scalar curvature formula."""
    trace = np.einsum("kik->i", c)
    return float(-np.dot(trace, trace)
                 - 0.5 * np.einsum("ikj,kij->", c, c)
                 - 0.25 * np.sum(c * c))


def scalar_from_structure(c: StructureTensor, D: np.ndarray) -> float:
    return float(2.0 * np.einsum("kjkj->", D)) + quadratic_terms(c)


def scalar_curvature_frame(manifold: ChartManifold, point,
                           engine: DerivativeEngine = AD) -> float:
    """Scalar curvature of the metric in which the chart's frame is orthonormal."""
    c, D = structure_derivatives(manifold, point, engine)
    return scalar_from_structure(c, D)


def scalar_curvature_lie(constants: StructureTensor) -> float:
    """Scalar curvature for constant structure functions (no derivative terms)."""
    return quadratic_terms(np.asarray(constants, dtype=float))


# ----------------------------------------------------------------- oracle


def scalar_from_metric_derivatives(g: np.ndarray, dg: np.ndarray,
                                   d2g: np.ndarray) -> float:
    """Classical coordinate computation.

    ``dg[i, j, a] = d_a g_ij`` and ``d2g[i, j, a, b] = d_a d_b g_ij``.
    """
    ginv = np.linalg.inv(g)
    ginv = 0.5 * (ginv + ginv.T)
    # T[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    T = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
    dT = d2g.transpose(0, 2, 1, 3) + d2g - d2g.transpose(2, 0, 1, 3)
    gam = 0.5 * np.einsum("kl,lij->kij", ginv, T)
    dginv = -np.einsum("ka,abm,bl->klm", ginv, dg, ginv)
    dgam = 0.5 * (np.einsum("klm,lij->kijm", dginv, T)
                  + np.einsum("kl,lijm->kijm", ginv, dT))
    # R_{sn} = d_r Gam^r_{ns} - d_n Gam^r_{rs} + Gam^r_{rl} Gam^l_{ns} - Gam^r_{nl} Gam^l_{rs}
    ricci = (np.einsum("rnsr->sn", dgam) - np.einsum("rrsn->sn", dgam)
             + np.einsum("rrl,lns->sn", gam, gam) - np.einsum("rnl,lrs->sn", gam, gam))
    return float(np.einsum("sn,sn->", ginv, ricci))


def _metric_jet_ad(manifold: ChartManifold, x: np.ndarray):
    jet = frame_jet(manifold, x, AD, second=True)
    E, dE, d2E = jet.E, jet.dE, jet.d2E
    G = E @ E.T  # inverse metric
    dG = np.einsum("iAa,jA->ija", dE, E)
    dG = dG + dG.transpose(1, 0, 2)
    d2G = (np.einsum("iAab,jA->ijab", d2E, E) + np.einsum("iAa,jAb->ijab", dE, dE))
    d2G = d2G + d2G.transpose(1, 0, 2, 3)
    g = np.linalg.inv(G)
    g = 0.5 * (g + g.T)
    # derivatives of the matrix inverse
    A = np.einsum("ik,kla->ila", g, dG)  # g dG_a
    dg = -np.einsum("ila,lj->ija", A, g)
    d2g = (np.einsum("ila,lmb,mj->ijab", A, A, g)
           + np.einsum("ilb,lma,mj->ijab", A, A, g)
           - np.einsum("ik,klab,lj->ijab", g, d2G, g))
    return g, dg, d2g


def _metric_jet_fd(manifold: ChartManifold, x: np.ndarray, h: float, H: float):
    n = manifold.dim

    def first(y):
        out = np.empty((n, n, n))
        for a in range(n):
            s = np.zeros(n)
            s[a] = h
            out[:, :, a] = (metric_from_frame(manifold, y + s)
                            - metric_from_frame(manifold, y - s)) / (2 * h)
        return out

    g = metric_from_frame(manifold, x)
    dg = first(x)
    d2g = np.empty((n, n, n, n))
    for b in range(n):
        s = np.zeros(n)
        s[b] = H
        d2g[:, :, :, b] = (first(x + s) - first(x - s)) / (2 * H)
    d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
    return g, dg, d2g


DEGENERACY_RTOL = 1e-4


def scalar_curvature_oracle(manifold: ChartManifold, point,
                            engine: DerivativeEngine = AD) -> float:
    """Scalar curvature from the coordinate metric: Christoffel symbols, Riemann
    tensor, Ricci contraction and metric trace.

    Shares no code with the frame formula beyond evaluating the frame
    expressions. In ``"fd"`` mode the second derivatives are nested central
    differences; the result is recomputed with halved steps and a
    :class:`NumericalDegeneracyError` is raised if the two disagree by more
    than ``DEGENERACY_RTOL * (1 + |S|)``.
    """
    x = as_point(manifold, point)
    if engine.mode == "ad":
        return scalar_from_metric_derivatives(*_metric_jet_ad(manifold, x))
    s1 = scalar_from_metric_derivatives(
        *_metric_jet_fd(manifold, x, engine.fd_step, engine.nested_step))
    s2 = scalar_from_metric_derivatives(
        *_metric_jet_fd(manifold, x, engine.fd_step / 2, engine.nested_step / 2))
    if abs(s1 - s2) > DEGENERACY_RTOL * (1 + abs(s2)):
        raise NumericalDegeneracyError(
            f"nested differences unstable at {x.tolist()}: {s1!r} vs {s2!r}")
    return s2
