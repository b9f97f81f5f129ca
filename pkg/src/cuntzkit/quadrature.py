"""Composite Gauss-Legendre quadrature on the circle ``[0, 1)``."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_panels(edges, nodes: int, per_panel: bool = False, min_panel: int = 8):
    """Nodes and weights of a composite Gauss-Legendre rule.

    ``edges`` are increasing panel boundaries.  With ``per_panel`` every panel
    gets ``nodes`` points; otherwise ``nodes`` is a total spread in proportion
    to panel length (at least ``min_panel`` per panel).
    """
    edges = np.asarray(edges, dtype=float)
    xs, ws = [], []
    span = edges[-1] - edges[0]
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        n = nodes if per_panel else max(min_panel, math.ceil(nodes * (b - a) / span))
        g, gw = _gl(n)
        xs.append(0.5 * (b - a) * g + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * gw)
    return np.concatenate(xs), np.concatenate(ws)


class Quadrature:
    """Rule for integrals against ``mu`` on ``[0, 1)``.

    ``density`` (optional) multiplies the weights so that ``sum(w * f(x))``
    approximates ``int f dmu``.
    """

    def __init__(self, breakpoints, nodes: int = 4096, density=None):
        pts = sorted({0.0, 1.0, *(float(b) % 1.0 for b in breakpoints)})
        if pts[-1] != 1.0:
            pts.append(1.0)
        pts = np.array(pts)
        pts = pts[np.concatenate([[True], np.diff(pts) > 1e-13])]
        pts[-1] = 1.0
        self.breakpoints = pts
        self.nodes = nodes
        self.x, w = gauss_legendre_panels(pts, nodes)
        self.lebesgue_weights = w
        self.w = w * density(self.x) if density is not None else w

    def integrate(self, values) -> np.ndarray:
        """Integral of samples along axis 0."""
        values = np.asarray(values)
        return np.tensordot(self.w, values, axes=(0, 0))

    def gram(self, F: np.ndarray, G: np.ndarray) -> np.ndarray:
        """``<F_a, G_b>`` for sample matrices of shape ``(nodes, a)`` and ``(nodes, b)``."""
        return (F.conj() * self.w[:, None]).T @ G

    def __len__(self):
        return self.x.size
