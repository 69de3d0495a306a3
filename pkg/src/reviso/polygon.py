"""Planar convex polygon arithmetic: shoelace areas and Sutherland-Hodgman clipping."""

import numpy as np


def polygon_area(verts):
    verts = np.asarray(verts, dtype=float)
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_perimeter(verts):
    verts = np.asarray(verts, dtype=float)
    return float(np.sum(np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)))


def clip_halfplane(verts, u, b):
    """Clip a convex polygon (ordered vertices) to {x : <x,u> <= b}."""
    if len(verts) == 0:
        return verts
    s = verts @ u - b
    out = []
    m = len(verts)
    for i in range(m):
        j = (i + 1) % m
        p, q = verts[i], verts[j]
        sp, sq = s[i], s[j]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            lam = sp / (sp - sq)
            out.append(p + lam * (q - p))
    return np.array(out) if out else np.zeros((0, 2))


def clip_convex(verts, normals, offsets):
    """Intersect a convex polygon with every halfplane ``<x, normals[i]> <= offsets[i]``."""
    verts = np.asarray(verts, dtype=float)
    for u, b in zip(np.atleast_2d(normals), np.atleast_1d(offsets)):
        verts = clip_halfplane(verts, u, b)
        if len(verts) == 0:
            break
    return verts


def ordered(verts):
    verts = np.asarray(verts, dtype=float)
    c = verts.mean(axis=0)
    return verts[np.argsort(np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0]))]


def regular_polygon(m, radius=1.0, phase=0.0):
    ang = phase + 2 * np.pi * np.arange(m) / m
    return radius * np.c_[np.cos(ang), np.sin(ang)]
