"""Weighted quadrature pieces: the common currency for line integrals over curves.

A piece is a pair of arrays ``(points, weights)`` such that
``sum(weights * f(points))`` approximates ``int f dH^1`` over the piece.
Non-simple traces are represented with multiplicity by repeating pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre


@dataclass(frozen=True, eq=False)
class Piece:
    points: np.ndarray
    weights: np.ndarray
    kind: str = "arc"

    @property
    def length(self):
        return float(self.weights.sum())


def segment_piece(p, q, order=12):
    """Gauss-Legendre rule on the straight segment from ``p`` to ``q``."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    tau, w = gauss_legendre(0.0, 1.0, order)
    pts = p[None, :] * (1 - tau)[:, None] + q[None, :] * tau[:, None]
    return Piece(points=pts, weights=w * float(np.hypot(*(q - p))), kind="segment")


def polyline_pieces(points, closed=True):
    """Exact rules for a polygonal chain (one segment piece per edge)."""
    pts = np.asarray(points, dtype=float)
    if closed:
        pts = np.vstack((pts, pts[:1]))
    return [segment_piece(a, b) for a, b in zip(pts[:-1], pts[1:])]


def doubly_covered_segment(length=1.0):
    """The closed curve running along ``[-length/4, length/4] x {0}`` and back.

    Each pass is split at the origin so that integrands like ``|x|^p`` are
    smooth on every piece.
    """
    a = np.array([-0.25 * length, 0.0])
    b = np.array([0.25 * length, 0.0])
    o = np.zeros(2)
    return [segment_piece(a, o), segment_piece(o, b), segment_piece(b, o), segment_piece(o, a)]


def as_pieces(obj):
    """Coerce curves, parallel sets, cover curves and piece lists to a list of pieces."""
    from .cover import CoverCurve
    from .curve import SampledCurve
    from .offset import ParallelSet

    if isinstance(obj, Piece):
        return [obj]
    if isinstance(obj, SampledCurve):
        return [Piece(obj.points, np.full(obj.n, obj.h), kind="curve")]
    if isinstance(obj, ParallelSet):
        return [Piece(p, w) for p, w in obj.quad]
    if isinstance(obj, CoverCurve):
        return list(obj.quad_pieces)
    if isinstance(obj, (list, tuple)):
        out = []
        for item in obj:
            out.extend(as_pieces(item))
        return out
    raise TypeError(f"cannot integrate over {type(obj).__name__}")


def stack(pieces):
    """Concatenate pieces into one ``(points, weights)`` pair."""
    pieces = as_pieces(pieces)
    if not pieces:
        return np.empty((0, 2)), np.empty(0)
    return np.vstack([p.points for p in pieces]), np.concatenate([p.weights for p in pieces])
