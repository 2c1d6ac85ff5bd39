"""Constructors for the test fields.

Skeleton triples and their superpositions, lattice-block refinements,
Dirichlet kernels, random power-law fields and shear flows. All vector
fields returned here are real and divergence-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlockOverlapError, GapRuleError, ValidationError
from .spectral import SparseSpectralField, leray_project


@dataclass(frozen=True)
class SkeletonSpec:
    q_list: tuple

    def __post_init__(self):
        q = tuple(int(v) for v in self.q_list)
        object.__setattr__(self, "q_list", q)
        if not q:
            raise ValidationError("q_list is empty")
        if q[0] < 2:
            raise ValidationError("active scales must satisfy q >= 2")
        for a, b in zip(q, q[1:]):
            if not a + 1 < b - 1:
                raise GapRuleError(f"gap rule q_(j-1) + 1 < q_j - 1 fails for {a}, {b}")


@dataclass(frozen=True)
class LatticeSpec(SkeletonSpec):
    eps: float = 1.0 / 16

    def __post_init__(self):
        super().__post_init__()
        if not 0 < self.eps <= 0.125:
            raise ValidationError("eps must lie in (0, 1/8]")


def default_q_list(q1: int, count: int, gap: int = 5):
    """q_j = q1 + gap (j - 1)."""
    return tuple(q1 + gap * j for j in range(count))


def skeleton_triple(q: int) -> SparseSpectralField:
    """The six-mode interaction triple u_q = v_{q-1} + w_q."""
    if q < 2:
        raise ValidationError("skeleton_triple needs q >= 2")
    L, l = 1 << q, 1 << (q - 1)
    a, b = l ** (-1.0 / 3.0), L ** (-1.0 / 3.0)
    modes = {
        (0, l): (1j * a, 0.0),
        (0, -l): (-1j * a, 0.0),
        (L, 0): (0.0, b),
        (-L, 0): (0.0, b),
        (L, l): (-b, 2 * b),
        (-L, -l): (-b, 2 * b),
    }
    return SparseSpectralField.from_dict(modes)


def skeleton_field(spec: SkeletonSpec) -> SparseSpectralField:
    if not isinstance(spec, SkeletonSpec):
        spec = SkeletonSpec(tuple(spec))
    out = SparseSpectralField.zero(2)
    for q in spec.q_list:
        out = out + skeleton_triple(q)
    return out


# --------------------------------------------------------------- lattice


def _block(center, m):
    r = np.arange(-m, m + 1)
    b1, b2 = np.meshgrid(r, r, indexing="ij")
    return np.stack([b1.ravel() + center[0], b2.ravel() + center[1]], axis=1)


def _lattice_blocks(q: int, eps: float):
    """(centers, half-widths, coefficient vectors) of the six blocks of u_q."""
    L, l = 1 << q, 1 << (q - 1)
    mv, mw = int(math.floor(eps * l)), int(math.floor(eps * L))
    cv, cw = l ** (-5.0 / 3.0), L ** (-5.0 / 3.0)
    return [
        ((0, l), mv, (1j * cv, 0.0)),
        ((0, -l), mv, (-1j * cv, 0.0)),
        ((L, 0), mw, (0.0, cw)),
        ((-L, 0), mw, (0.0, cw)),
        ((L, l), mw, (-cw, 2 * cw)),
        ((-L, -l), mw, (-cw, 2 * cw)),
    ]


def _check_disjoint(blocks):
    boxes = [(c[0] - m, c[0] + m, c[1] - m, c[1] + m) for c, m, _ in blocks]
    for i, (x0, x1, y0, y1) in enumerate(boxes):
        if x0 <= 0 <= x1 and y0 <= 0 <= y1:
            raise BlockOverlapError(f"block around {blocks[i][0]} contains the origin")
        for j in range(i):
            a0, a1, b0, b1 = boxes[j]
            if x0 <= a1 and a0 <= x1 and y0 <= b1 and b0 <= y1:
                raise BlockOverlapError(f"blocks around {blocks[j][0]} and {blocks[i][0]} overlap")


def lattice_triple(q: int, eps: float, *, project=True) -> SparseSpectralField:
    """Lattice-block version of the triple at scale q, Leray-projected."""
    if q < 2:
        raise ValidationError("lattice_triple needs q >= 2")
    blocks = _lattice_blocks(q, eps)
    _check_disjoint(blocks)
    return _assemble(blocks, project)


def _assemble(blocks, project):
    ks, cs = [], []
    for center, m, vec in blocks:
        k = _block(center, m)
        ks.append(k)
        cs.append(np.broadcast_to(np.asarray(vec, np.complex128), (len(k), 2)))
    F = SparseSpectralField(np.vstack(ks), np.vstack(cs), validate=False)
    if project:
        F = leray_project(F)
    F.check_real()
    return F


def lattice_field(spec: LatticeSpec, *, project=True) -> SparseSpectralField:
    """Superposition of lattice triples; all blocks must be pairwise disjoint."""
    blocks = []
    for q in spec.q_list:
        blocks.extend(_lattice_blocks(q, spec.eps))
    _check_disjoint(blocks)
    return _assemble(blocks, project)


def projection_factor(q: int, eps: float) -> float:
    """||P u_q||_2 / ||u_q||_2 for the lattice triple at scale q."""
    raw = lattice_triple(q, eps, project=False)
    return lattice_triple(q, eps).l2_norm() / raw.l2_norm()


# -------------------------------------------------------------- Dirichlet


def dirichlet_kernel(n: int, samples: int | None = None):
    """D_n(x) = sum_{|k| <= n} e^{2 pi i k x} on a uniform grid of [0, 1).

    Returns ``(x, values)``. Default grid has 16 (2n + 1) points rounded up
    to a power of two.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if samples is None:
        samples = 1 << int(math.ceil(math.log2(16 * (2 * n + 1))))
    if samples < 2 * n + 1:
        raise ValidationError("too few samples to resolve D_n")
    x = np.arange(samples) / samples
    coef = np.zeros(samples, np.complex128)
    coef[: n + 1] = 1.0
    if n:
        coef[-n:] = 1.0
    vals = np.fft.ifft(coef).real * samples
    return x, vals


def dirichlet_lp_norm(n: int, p: float, samples: int | None = None) -> float:
    _, d = dirichlet_kernel(n, samples)
    a = np.abs(d)
    return float(a.max() * np.mean((a / a.max()) ** p) ** (1.0 / p))


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


# ------------------------------------------------------ regular fields


def power_law_field(gamma: float, max_freq: int, seed: int = 0) -> SparseSpectralField:
    """Random-phase divergence-free field with |u^(a)| = |a|^-gamma on 0 < |a|_inf <= max_freq."""
    if gamma <= 1:
        raise ValidationError("gamma must exceed 1")
    if max_freq < 4:
        raise ValidationError("max_freq must be >= 4")
    rng = np.random.default_rng(seed)
    r = np.arange(-max_freq, max_freq + 1)
    k1, k2 = np.meshgrid(r, r, indexing="ij")
    k = np.stack([k1.ravel(), k2.ravel()], axis=1)
    half = (k[:, 0] > 0) | ((k[:, 0] == 0) & (k[:, 1] > 0))
    kh = k[half]
    mag = np.hypot(kh[:, 0], kh[:, 1])
    theta = rng.uniform(0.0, 2.0 * np.pi, len(kh))
    # direction a_perp / |a| is already solenoidal; projection below is a no-op guard
    amp = mag ** (-gamma) * np.exp(1j * theta)
    c = amp[:, None] * np.stack([-kh[:, 1], kh[:, 0]], axis=1) / mag[:, None]
    F = SparseSpectralField(np.vstack([kh, -kh]), np.vstack([c, np.conj(c)]))
    return leray_project(F)


def shear_field(coeffs) -> SparseSpectralField:
    """u = (f(x2), 0) with f(x2) = sum_k f^(k) e^{2 pi i k x2}.

    ``coeffs`` maps integer k to f^(k); missing conjugate partners are
    filled in, and the mean k = 0 is dropped.
    """
    modes = {}
    for k, v in dict(coeffs).items():
        k = int(k)
        if k == 0:
            continue
        modes[(0, k)] = (complex(v), 0.0)
        modes.setdefault((0, -k), (complex(v).conjugate(), 0.0))
    return SparseSpectralField.from_dict(modes, ncomp=2)


def taylor_green() -> SparseSpectralField:
    """u = (sin 2pi x1 cos 2pi x2, -cos 2pi x1 sin 2pi x2)."""
    m = {}
    for s1 in (1, -1):
        for s2 in (1, -1):
            # sin(a)cos(b) = sum of e^{i(+-a +-b)} / (4i) * sign
            m[(s1, s2)] = (s1 / (4j), -s2 / (4j))
    return SparseSpectralField.from_dict(m)
