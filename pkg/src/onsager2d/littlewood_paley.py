"""Dyadic frequency decomposition on the torus.

The cutoff chi is radial, equal to 1 on r <= 1/2 and 0 on r >= 1. Blocks
use phi(r) = chi(r/2) - chi(r), truncations S_q use chi(|a| / 2^q).

At integer wavevectors the two plateau conditions are decided with integer
arithmetic (4|a|^2 <= lam^2, |a|^2 >= lam^2), so chi is exactly 1 or 0 at
the lattice points where that matters and no rounding enters there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .spectral import GridField, SparseSpectralField, lp_norm, wavenumbers


def _bump(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step_down(t):
    """C-infinity transition from 1 (t <= 0) to 0 (t >= 1)."""
    t = np.asarray(t, dtype=np.float64)
    a = _bump(1.0 - t)
    b = _bump(t)
    return a / (a + b)


def polynomial_step_down(t):
    """C^2 quintic smoothstep, an alternative admissible transition."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    return np.clip(1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2), 0.0, 1.0)


@dataclass(frozen=True)
class LPProfile:
    """Radial cutoff pair (chi, phi).

    ``transition`` maps t in (0, 1) to chi(1/2 + t/2); it must decrease from
    1 to 0.
    """

    transition: Callable[[np.ndarray], np.ndarray] = smooth_step_down
    name: str = "exp-bump"

    def chi(self, r):
        r = np.asarray(r, dtype=np.float64)
        out = np.where(r <= 0.5, 1.0, 0.0)
        mid = (r > 0.5) & (r < 1.0)
        if np.any(mid):
            out = np.array(out, dtype=np.float64)
            out[mid] = self.transition(2.0 * r[mid] - 1.0)
        return out

    def phi(self, r):
        r = np.asarray(r, dtype=np.float64)
        return self.chi(r / 2.0) - self.chi(r)

    def chi_k2(self, k2, lam: int):
        """chi(|a|/lam) from integer |a|^2, exact on both plateaus."""
        k2 = np.asarray(k2, dtype=np.int64)
        lam2 = int(lam) * int(lam)
        out = np.zeros(k2.shape, dtype=np.float64)
        low = 4 * k2 <= lam2
        out[low] = 1.0
        mid = ~low & (k2 < lam2)
        if np.any(mid):
            out[mid] = self.transition(2.0 * np.sqrt(k2[mid].astype(np.float64)) / lam - 1.0)
        return out

    def phi_k2(self, k2, lam: int):
        return self.chi_k2(k2, 2 * lam) - self.chi_k2(k2, lam)


DEFAULT_PROFILE = LPProfile()
QUINTIC_PROFILE = LPProfile(polynomial_step_down, "quintic")

PROFILES = {"exp-bump": DEFAULT_PROFILE, "quintic": QUINTIC_PROFILE}


def get_profile(name: str) -> LPProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValidationError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


@dataclass(frozen=True)
class DyadicIndex:
    q: int

    def __post_init__(self):
        if self.q < 0:
            raise ValidationError("dyadic index must be >= 0")

    @property
    def lam(self) -> int:
        return 1 << self.q


def _lam(q) -> int:
    q = q.q if isinstance(q, DyadicIndex) else int(q)
    if q < 0:
        raise ValidationError("dyadic index must be >= 0")
    return 1 << q


def _k2_sparse(F):
    return (F.k[:, 0] ** 2 + F.k[:, 1] ** 2).astype(np.int64)


def _apply(F, mult_k2):
    if isinstance(F, SparseSpectralField):
        if not len(F):
            return F
        return F.apply_multiplier(mult_k2(_k2_sparse(F))).pruned()
    k1, k2 = wavenumbers(F.n)
    m = mult_k2(k1**2 + k2**2)
    return GridField.from_fourier(F.fourier * m)


def truncate(F, q, prof: LPProfile = DEFAULT_PROFILE):
    """S_q F: multiply coefficients by chi(|a| / 2^q); the mean is kept."""
    lam = _lam(q)
    return _apply(F, lambda k2: prof.chi_k2(k2, lam))


def lp_block(F, q, prof: LPProfile = DEFAULT_PROFILE):
    """Delta_q F: multiply coefficients by phi(|a| / 2^q)."""
    lam = _lam(q)
    return _apply(F, lambda k2: prof.phi_k2(k2, lam))


def spectral_radius_l2(F) -> float:
    """Largest Euclidean |a| in the spectral support."""
    if isinstance(F, SparseSpectralField):
        return float(np.sqrt(_k2_sparse(F).max())) if len(F) else 0.0
    k1, k2 = wavenumbers(F.n)
    f = np.abs(F.fourier).max(axis=0)
    if f.max() == 0:
        return 0.0
    return float(np.sqrt((k1**2 + k2**2)[f > 1e-13 * f.max()].max()))


def default_q_max(F) -> int:
    """Smallest q with 2^q >= max |a|; every block above it vanishes."""
    r = spectral_radius_l2(F)
    if r <= 1:
        return 0
    return int(math.ceil(math.log2(r) - 1e-12))


def besov_seminorm(F, s: float, p: float, q_max: int | None = None, prof: LPProfile = DEFAULT_PROFILE,
                   n: int | None = None):
    """sup over 0 <= q <= q_max of 2^(q s) ||Delta_q F||_p.

    Returns ``(value, per_q)``. Block norms of sparse fields are evaluated by
    :func:`lp_norm` with automatic resolution unless ``n`` is given.
    """
    if q_max is None:
        q_max = default_q_max(F)
    per_q = []
    for q in range(q_max + 1):
        block = lp_block(F, q, prof)
        if isinstance(block, SparseSpectralField) and not len(block):
            per_q.append(0.0)
            continue
        per_q.append(float(2.0 ** (q * s) * lp_norm(block, p, n)))
    return (max(per_q) if per_q else 0.0), per_q


def profile_table(prof: LPProfile = DEFAULT_PROFILE, r_max=2.5, samples=251):
    """Rows (r, chi(r), phi(r)) on a uniform radius grid."""
    r = np.linspace(0.0, r_max, samples)
    return np.column_stack([r, prof.chi(r), prof.phi(r)])
