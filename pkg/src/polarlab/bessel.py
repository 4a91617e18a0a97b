"""Bessel zeros and the closed-form Dirichlet spectrum of circular sectors."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

__all__ = ["bessel_zero", "sector_eigenvalues"]


def bessel_zero(nu: float, m: int, step: float = 0.1) -> float:
    """The ``m``-th positive zero of ``J_nu`` (``nu >= 0``), bracketed by a scan."""
    if nu < 0 or m < 1:
        raise ValueError("need nu >= 0 and m >= 1")
    # zeros of J_nu lie beyond nu, spaced roughly pi apart
    x = max(nu, step)
    f = jv(nu, x)
    found = 0
    while True:
        y = x + step
        g = jv(nu, y)
        if f == 0.0:
            found += 1
            if found == m:
                return float(x)
        elif f * g < 0:
            found += 1
            if found == m:
                return float(brentq(lambda t: jv(nu, t), x, y, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        x, f = y, g


def sector_eigenvalues(beta: float, r_max: float, count: int) -> list[float]:
    """Lowest ``count`` Dirichlet Laplacian eigenvalues of ``{r < r_max, |phi| < beta}``.

    Modes are ``J_nu(j r / r_max) sin(nu (phi + beta))`` with
    ``nu = n pi / (2 beta)``, so eigenvalues are ``(j_{nu, m} / r_max)^2``.
    """
    if not 0 < beta < math.pi:
        raise ValueError("beta must lie in (0, pi)")
    vals = []
    # enough (n, m) pairs to be sure the lowest `count` are present
    for n in range(1, count + 1):
        nu = n * math.pi / (2 * beta)
        for m in range(1, count + 1):
            vals.append((bessel_zero(nu, m) / r_max) ** 2)
    return sorted(vals)[:count]
