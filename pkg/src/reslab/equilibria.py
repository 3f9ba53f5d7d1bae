"""Slowly varying equilibria of the amplitude equation.

The cubic y^3 - t*y - 1 = 0, its branches and labels, the saddle-center
coalescence constants, the frozen-system energy, and sampled level curves
of the frozen phase portraits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import EmptyLevel
from .numkernel import poly_roots

# saddle-center coalescence constants (closed forms)
T_STAR = 3.0 * 0.5 ** (2.0 / 3.0)
U_STAR = -(0.5 ** (1.0 / 3.0))
E_STAR = 0.75 * 0.5 ** (1.0 / 3.0)
X_PLUS_STAR = -3.0 * U_STAR

CLUSTER_TOL = 1.0e-8


@dataclass(frozen=True)
class BifurcationConstants:
    t_star: float
    U_star: float
    E_star: float
    x_plus_star: float


@dataclass(frozen=True)
class EquilibriumBranch:
    label: str            # U1 | U2 | U3 | single
    t: float
    value: float
    multiplicity: int = 1


def bifurcation_constants() -> BifurcationConstants:
    return BifurcationConstants(T_STAR, U_STAR, E_STAR, X_PLUS_STAR)


def equilibrium_branches(t: float) -> list[EquilibriumBranch]:
    """Real roots of y^3 - t*y - 1 = 0, labeled and sorted ascending.

    For t > t* returns [U3, U2, U1]; near coalescence the double root is
    returned with multiplicity 2; below t* the single root is labeled
    ``single``.
    """
    # a double real root computed in doubles can sit ~1e-8 off the axis
    roots = poly_roots([1.0, 0.0, -t, -1.0], kind="real-only", real_tol=1e-7)
    roots.sort(key=lambda rm: rm[0])
    n = sum(m for _, m in roots)
    if len(roots) == 3:
        labels = ["U3", "U2", "U1"]
        return [EquilibriumBranch(lbl, t, r, m)
                for lbl, (r, m) in zip(labels, roots)]
    if len(roots) == 2:
        # coalescence: double root is the lower pair U2=U3
        out = []
        for r, m in roots:
            out.append(EquilibriumBranch("U2" if m == 2 else "U1", t, r, m))
        return out
    return [EquilibriumBranch("single", t, roots[0][0], roots[0][1])]


def frozen_energy(V, T: float):
    """First integral (1/2)|V|^4 - T|V|^2 - 2 Re V of the frozen system."""
    V = np.asarray(V)
    return 0.5 * np.abs(V) ** 4 - T * np.abs(V) ** 2 - 2.0 * np.real(V)


def frozen_rhs(T: float):
    """Right-hand side V' = -i (1 + T V - |V|^2 V) of the frozen system."""
    def rhs(t, V):
        return -1j * (1.0 + T * V - np.abs(V) ** 2 * V)
    return rhs


def _centers(T: float) -> list[float]:
    """Real equilibria that are extrema of the frozen energy (centers)."""
    eqs = equilibrium_branches(T)
    out = []
    for b in eqs:
        x = b.value
        d2x = 6 * x * x - 2 * T         # d^2F/dx^2 on the real axis
        d2e = 2 * x * x - 2 * T         # d^2F/deta^2 on the real axis
        if d2x * d2e > 0:               # extremum => center
            out.append(x)
    return out


def _march_level(center: float, T: float, level: float, n: int):
    """Radial root solve of frozen_energy = level on rays around center."""
    pts = np.empty(n, dtype=complex)
    f0 = frozen_energy(center + 0j, T)
    if level < f0 and abs(level - f0) > 1e-12 * max(1.0, abs(level)):
        sgn = -1.0   # center is a local max: energy decreases outward
    else:
        sgn = 1.0
    for i, phi in enumerate(np.linspace(0.0, 2 * np.pi, n, endpoint=False)):
        d = np.exp(1j * phi)

        def g(r):
            return (frozen_energy(center + r * d, T) - level) * sgn

        if abs(g(0.0)) <= 1e-13 * max(1.0, abs(level)):
            pts[i] = center
            continue
        if g(0.0) > 0:
            return None                  # level on the wrong side of center
        r_hi = 0.05
        while g(r_hi) < 0:
            r_hi *= 1.35
            if r_hi > 1e3:
                return None
        r = brentq(g, 0.0, r_hi, xtol=1e-14, rtol=8.9e-16)
        pts[i] = center + r * d
    return pts


def frozen_portrait(T: float, levels, n: int = 512) -> list[dict]:
    """Sampled closed level curves of the frozen energy at the given levels.

    Curves are found by angular marches around each center; duplicates
    (the same loop reached from different centers) are dropped.  Raises
    EmptyLevel if some level intersects no orbit.
    """
    curves = []
    centers = _centers(T)
    for level in levels:
        found = []
        for c in centers:
            f0 = float(frozen_energy(c + 0j, T))
            if abs(level - f0) <= 1e-12 * max(1.0, abs(level)):
                found.append({"level": level, "center": c,
                              "points": np.array([c + 0j]), "degenerate": True})
                continue
            pts = _march_level(c, T, level, n)
            if pts is None:
                continue
            cur = {"level": level, "center": c, "points": pts, "degenerate": False}
            dup = False
            for other in found:
                if not other["degenerate"] and not cur["degenerate"]:
                    if abs(other["points"][0] - pts[0]) < 1e-9:
                        dup = True
            if not dup:
                found.append(cur)
        if not found:
            raise EmptyLevel(f"level {level} intersects no closed orbit at T={T}")
        curves.extend(found)
    return curves


def count_level_regions(T: float, level: float, extent: float = 4.0, n: int = 400) -> int:
    """Number of connected plane regions the level curve separates.

    Flood fill on a grid of sign(F - level) cells, counting components of
    the complement of a thin band around the curve.
    """
    xs = np.linspace(-extent, extent, n)
    ys = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, ys)
    F = frozen_energy(X + 1j * Y, T) - level
    band = np.abs(F) < 0.5 * np.median(np.abs(np.diff(F, axis=0)))
    free = ~band
    seen = np.zeros_like(free, dtype=bool)
    sgn = F > 0
    count = 0
    stack = []
    for i0 in range(n):
        for j0 in range(n):
            if free[i0, j0] and not seen[i0, j0]:
                count += 1
                stack.append((i0, j0))
                s0 = sgn[i0, j0]
                seen[i0, j0] = True
                while stack:
                    i, j = stack.pop()
                    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        a, b = i + di, j + dj
                        if 0 <= a < n and 0 <= b < n and free[a, b] and \
                           not seen[a, b] and sgn[a, b] == s0:
                            seen[a, b] = True
                            stack.append((a, b))
    return count
