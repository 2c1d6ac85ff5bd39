"""Energy flux through the dyadic cutoff lambda_q = 2^q.

    Pi_q[u] = int S_q[u] . S_q[(u . grad) u] dx

Integrating by parts (u divergence-free) gives the tensor form

    Pi_q[u] = - int S_q[u (x) u] : grad S_q[u] dx,   (grad v)_ij = d_j v_i.

Note the minus sign. Both forms are computed and returned.

Two methods:

``sparse-exact``
    Explicit convolution over coefficient pairs; every elementary term is
    collected and summed with :func:`math.fsum`, so the result carries only
    the rounding of the individual terms.
``grid``
    Pseudospectral products on an n x n grid, with the sum done by Parseval.
    Exact for band-limited u whenever no aliased product mode lands inside
    the support of S_q u, i.e. n >= 2K + lambda_q + 1 with K = max |a|_inf.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, DivergenceError, ValidationError
from .littlewood_paley import DEFAULT_PROFILE, LPProfile, default_q_max, truncate
from .spectral import TWO_PI, GridField, SparseSpectralField, _encode, sparse_rfft, to_sparse

SPARSE = "sparse-exact"
GRID = "grid"

# pair-count guard for the exact path (memory ~ 100 bytes per pair)
MAX_SPARSE_PAIRS = 20_000_000


@dataclass(frozen=True)
class FluxRecord:
    q: int
    value: float
    method: str
    resolution: int = 0
    tensor_value: float = float("nan")
    wall_time_ms: float = field(default=0.0, compare=False)

    @property
    def lambda_q(self) -> int:
        return 1 << self.q

    def row(self):
        return {
            "q": self.q,
            "lambda_q": self.lambda_q,
            "flux_value": repr(self.value),
            "method": self.method,
            "resolution": self.resolution,
            "wall_time_ms": f"{self.wall_time_ms:.3f}",
        }


CSV_COLUMNS = ["q", "lambda_q", "flux_value", "method", "resolution", "wall_time_ms"]


def _check_div_free(u, tol=1e-10):
    if isinstance(u, SparseSpectralField):
        if u.ncomp != 2 or not u.is_divergence_free(tol):
            raise DivergenceError("flux needs a divergence-free vector field")
        return
    k = np.fft.fftfreq(u.n, 1.0 / u.n)
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    fh = u.fourier
    div = np.abs(k1 * fh[0] + k2 * fh[1]).max()
    scale = np.abs(fh).max() * max(1.0, np.abs(k).max())
    if scale > 0 and div > tol * scale:
        raise DivergenceError("flux needs a divergence-free vector field")


# ----------------------------------------------------------------- sparse


def _pairs_into(u: SparseSpectralField, target: SparseSpectralField):
    """Index pairs (a, b) over supp u whose sum lies in supp target."""
    npairs = len(u) * len(u)
    if npairs > MAX_SPARSE_PAIRS:
        raise ValidationError(f"sparse-exact flux would need {npairs} pairs; use the grid method")
    ia = np.repeat(np.arange(len(u)), len(u))
    ib = np.tile(np.arange(len(u)), len(u))
    g = u.k[ia] + u.k[ib]
    hit = np.isin(_encode(g), target._codes)
    return ia[hit], ib[hit], g[hit]


def sparse_flux_forms(u: SparseSpectralField, q: int, prof: LPProfile = DEFAULT_PROFILE):
    """(velocity form, tensor form) of Pi_q, summed with math.fsum."""
    lam = 1 << q
    v = truncate(u, q, prof)
    if not len(v):
        return 0.0, 0.0
    ia, ib, g = _pairs_into(u, v)
    if not len(g):
        return 0.0, 0.0
    k2 = (g[:, 0] ** 2 + g[:, 1] ** 2).astype(np.int64)
    w = prof.chi_k2(k2, lam) ** 2
    ug = u.lookup(g)
    ua, ub = u.c[ia], u.c[ib]
    kb = u.k[ib].astype(np.float64)
    gf = g.astype(np.float64)
    adv = TWO_PI * 1j * (ua[:, 0] * kb[:, 0] + ua[:, 1] * kb[:, 1])
    vel = w * (np.conj(ug[:, 0]) * adv * ub[:, 0] + np.conj(ug[:, 1]) * adv * ub[:, 1]).real
    ten = [
        -w * (ua[:, i] * ub[:, j] * np.conj(TWO_PI * 1j * gf[:, j] * ug[:, i])).real
        for i in range(2)
        for j in range(2)
    ]
    return math.fsum(vel), math.fsum(np.concatenate(ten))


def trilinear_sparse(u: SparseSpectralField, q: int, prof: LPProfile = DEFAULT_PROFILE):
    """int S_q u . (S_q u . grad) S_q u, exactly; returns (value, scale)."""
    v = truncate(u, q, prof)
    if not len(v):
        return 0.0, 0.0
    ia, ib, g = _pairs_into(v, v)
    vg = v.lookup(g)
    kb = v.k[ib].astype(np.float64)
    adv = TWO_PI * 1j * (v.c[ia, 0] * kb[:, 0] + v.c[ia, 1] * kb[:, 1])
    terms = (np.conj(vg[:, 0]) * adv * v.c[ib, 0] + np.conj(vg[:, 1]) * adv * v.c[ib, 1]).real
    radius = math.sqrt(float((v.k**2).sum(axis=1).max()))
    scale = TWO_PI * radius * v.l2_norm() ** 3
    return math.fsum(terms), scale


# ------------------------------------------------------------------- grid


def _half_weights(n):
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w[None, :]


def _rwavenumbers(n):
    k1 = np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64)[:, None]
    k2 = np.arange(n // 2 + 1, dtype=np.int64)[None, :]
    return k1, k2


class GridFluxEngine:
    """Grid evaluation of Pi_q for one field and many q.

    The velocity spectrum, the (dealiased) nonlinear term and the products
    u_i u_j are transformed once; each q is then a weighted Parseval sum.
    """

    def __init__(self, u, n: int | None = None, *, tensor=True):
        if isinstance(u, SparseSpectralField):
            if n is None:
                raise ValidationError("grid flux of a sparse field needs a resolution n")
            K = u.max_freq
            uh = sparse_rfft(u, n)
        else:
            n = u.n
            K = u.spectral_radius()
            uh = np.fft.rfft2(u.samples, axes=(-2, -1)) / (n * n)
        self.n = n
        self.K = K
        if n < 3 * K + 1:
            raise AliasingError(f"grid flux: n={n} < 3K+1={3 * K + 1}")
        k1, k2 = _rwavenumbers(n)
        self.k1, self.k2 = k1, k2
        self.kk = (k1**2 + k2**2).astype(np.int64)
        self.w = _half_weights(n)
        self.uh = uh
        us = np.fft.irfft2(uh * (n * n), s=(n, n), axes=(-2, -1))
        nyq = n // 2 if n % 2 == 0 else None
        d1 = TWO_PI * 1j * np.where(np.abs(k1) == nyq, 0, k1)
        d2 = TWO_PI * 1j * np.where(k2 == nyq, 0, k2)
        mask = (np.maximum(np.abs(k1), np.abs(k2)) < n / 3.0)
        Nh = []
        for i in range(2):
            gi1 = np.fft.irfft2(d1 * uh[i] * (n * n), s=(n, n))
            acc = us[0] * gi1
            del gi1
            gi2 = np.fft.irfft2(d2 * uh[i] * (n * n), s=(n, n))
            acc += us[1] * gi2
            del gi2
            Nh.append(np.fft.rfft2(acc) / (n * n) * mask)
            del acc
        self.Nh = Nh
        self.Mh = None
        if tensor:
            self.Mh = {}
            for i, j in ((0, 0), (0, 1), (1, 1)):
                self.Mh[i, j] = np.fft.rfft2(us[i] * us[j]) / (n * n)
            self.Mh[1, 0] = self.Mh[0, 1]
        self._d = (TWO_PI * 1j * k1, TWO_PI * 1j * k2)

    def check_q(self, q):
        lam = 1 << q
        if self.n < 2 * self.K + min(lam, self.K) + 1:
            raise AliasingError(f"grid flux at q={q}: n={self.n} < 2K + min(lam_q, K) + 1")

    def forms(self, q: int, prof: LPProfile = DEFAULT_PROFILE):
        self.check_q(q)
        chi = prof.chi_k2(self.kk, 1 << q)
        w = self.w * chi**2
        vel = 0.0
        for i in range(2):
            vel += float(np.sum(w * (np.conj(self.uh[i]) * self.Nh[i]).real))
        ten = float("nan")
        if self.Mh is not None:
            ten = 0.0
            for i in range(2):
                for j in range(2):
                    ten -= float(np.sum(w * (self.Mh[i, j] * np.conj(self._d[j] * self.uh[i])).real))
        return vel, ten


def trilinear_grid(u: GridField, q: int, prof: LPProfile = DEFAULT_PROFILE):
    """Grid version of :func:`trilinear_sparse`."""
    v = truncate(u, q, prof)
    eng = GridFluxEngine(v, tensor=False)
    val = float(sum(np.sum(eng.w * (np.conj(eng.uh[i]) * eng.Nh[i]).real) for i in range(2)))
    l2 = math.sqrt(float(np.sum(eng.w * (np.abs(eng.uh) ** 2).sum(axis=0))))
    vs = to_sparse(v, 1e-14)
    radius = math.sqrt(float((vs.k**2).sum(axis=1).max())) if len(vs) else 0.0
    return val, TWO_PI * radius * l2**3


# ------------------------------------------------------------------ public


def flux(u, q: int, prof: LPProfile = DEFAULT_PROFILE, method: str = SPARSE, n: int | None = None,
         *, engine: GridFluxEngine | None = None) -> FluxRecord:
    """Pi_q[u] as a :class:`FluxRecord`; ``tensor_value`` holds the tensor form."""
    t0 = time.perf_counter()
    if method == SPARSE:
        if not isinstance(u, SparseSpectralField):
            u = to_sparse(u, 1e-14)
        _check_div_free(u)
        vel, ten = sparse_flux_forms(u, q, prof)
        res = 0
    elif method == GRID:
        if engine is None:
            _check_div_free(u)
            engine = GridFluxEngine(u, n)
        vel, ten = engine.forms(q, prof)
        res = engine.n
    else:
        raise ValidationError(f"unknown flux method {method!r}")
    ms = (time.perf_counter() - t0) * 1e3
    return FluxRecord(q, vel, method, res, ten, ms)


def trilinear_check(u, q: int, prof: LPProfile = DEFAULT_PROFILE, *, relative=False):
    """|int S_q u . (S_q u . grad) S_q u dx|, optionally divided by its scale."""
    _check_div_free(u)
    if isinstance(u, SparseSpectralField):
        val, scale = trilinear_sparse(u, q, prof)
    else:
        val, scale = trilinear_grid(u, q, prof)
    val = abs(val)
    if relative:
        return val / scale if scale > 0 else 0.0
    return val


def default_q_range(u):
    """1 .. the first q at which S_q acts as the identity on u."""
    top = default_q_max(u) + 1
    return range(1, max(top, 1) + 1)


def flux_profile(u, q_range=None, prof: LPProfile = DEFAULT_PROFILE, method: str = SPARSE,
                 n: int | None = None):
    if q_range is None:
        q_range = default_q_range(u)
    engine = None
    if method == GRID:
        _check_div_free(u)
        engine = GridFluxEngine(u, n)
    else:
        if not isinstance(u, SparseSpectralField):
            u = to_sparse(u, 1e-14)
        _check_div_free(u)
    return [flux(u, q, prof, method, n, engine=engine) for q in q_range]


def decay_summary(records):
    """Top-half versus overall maximum of |Pi_q| over a profile."""
    vals = [abs(r.value) for r in records]
    if not vals:
        return {"overall_max": 0.0, "top_half_max": 0.0, "ratio": 0.0}
    half = len(vals) // 2
    top = max(vals[half:]) if vals[half:] else 0.0
    overall = max(vals)
    return {"overall_max": overall, "top_half_max": top, "ratio": top / overall if overall else 0.0}
