"""Shared synthetic data builders for the test suite.

Everything is generated through the package's own PRNG so datasets are
identical across platforms and runs.
"""
from __future__ import annotations

import math

from multiupdate.core import SparseVector
from multiupdate.rng import Xoshiro256StarStar


def gauss_stream(rng: Xoshiro256StarStar):
    """Yield standard normals (Box-Muller, one per call)."""
    while True:
        u1 = max(rng.next_float(), 1e-12)
        u2 = rng.next_float()
        r = math.sqrt(-2.0 * math.log(u1))
        yield r * math.cos(2.0 * math.pi * u2)
        yield r * math.sin(2.0 * math.pi * u2)


def separable_instances(n: int, d: int, seed: int, *, margin: float = 0.1,
                        scale: float = 1.0, noise: float = 0.0):
    """Linearly separable +/-1 instances with directional margin >= `margin`.

    Labels come from a random unit vector; candidates inside the margin band
    are rejected, so the clean dataset is separable by construction. `noise`
    flips that fraction of labels; `scale` multiplies features (small scales
    put PA-style updates into the clipped regime where inner repeats matter).
    """
    rng = Xoshiro256StarStar(seed)
    g = gauss_stream(rng)
    w = [next(g) for _ in range(d)]
    norm = math.sqrt(sum(v * v for v in w))
    w = [v / norm for v in w]
    out = []
    while len(out) < n:
        x = [next(g) for _ in range(d)]
        xnorm = math.sqrt(sum(v * v for v in x))
        s = sum(a * b for a, b in zip(w, x)) / xnorm
        if abs(s) < margin:
            continue
        y = 1 if s > 0 else -1
        if noise > 0.0 and rng.next_float() < noise:
            y = -y
        out.append((SparseVector(list(range(d)), [v * scale for v in x]), y))
    return out


def blob_instances(n: int, d: int, k: int, seed: int, *, spread: float = 4.0):
    """k Gaussian blobs with unit jitter; labels are 0..k-1."""
    rng = Xoshiro256StarStar(seed)
    g = gauss_stream(rng)
    centers = [[spread * next(g) for _ in range(d)] for _ in range(k)]
    out = []
    for _ in range(n):
        c = int(rng.next_u64() % k)
        x = [centers[c][j] + next(g) for j in range(d)]
        out.append((SparseVector(list(range(d)), x), c))
    return out


def instances_to_text(instances, *, multiclass: bool = False) -> str:
    """Render (SparseVector, label) pairs in the sparse text format."""
    lines = []
    for x, y in instances:
        label = str(int(y) + 1) if multiclass else f"{int(y):+d}"
        feats = " ".join(f"{i + 1}:{v!r}" for i, v in x.pairs())
        lines.append(f"{label} {feats}")
    return "\n".join(lines) + "\n"
