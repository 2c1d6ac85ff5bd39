"""Pseudospectral 2D Navier-Stokes in vorticity form.

    d_t w + u . grad w = nu Lap w,   u = Biot-Savart(w),

on the unit torus. The state is the half-plane spectrum of w (rfft2
layout, normalised so entries equal Fourier coefficients). Time stepping
is integrating-factor RK4: the viscous factor exp(-4 pi^2 nu |k|^2 dt) is
applied exactly, the advection term is evaluated pseudospectrally and
truncated with the 2/3 rule, so the Galerkin system conserves energy and
enstrophy when nu = 0.
"""

from __future__ import annotations

import configparser
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import CFLViolation, ConfigError, NaNDetected, ValidationError
from .spectral import GridField, SparseSpectralField, grid_lp_norm, sparse_rfft

TWO_PI = 2.0 * np.pi
THREADS_ENV = "ONSAGER2D_THREADS"


@dataclass(frozen=True)
class NSEConfig:
    n: int = 128
    nu: float = 1e-3
    t_end: float = 1.0
    cfl: float = 0.5
    p: tuple = (1.2, 1.5, 1.8)
    sample_every: float = 0.1
    dt: float | None = None  # fixed step; must satisfy the CFL bound
    dt_max: float = 0.05
    ic: str = "random"  # random | mode | taylor-green | rough | file
    amp: float = 1.0
    kmax: int = 8
    seed: int = 0
    mode: tuple = (1, 0)
    ic_file: str | None = None
    rough_alpha: float = 1.2
    rough_c: float = 2.5
    snapshots: bool = False

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ConfigError("n must be an even integer >= 8")
        if self.nu < 0:
            raise ConfigError("nu must be >= 0")
        if self.t_end < 0 or self.sample_every <= 0:
            raise ConfigError("t_end must be >= 0 and sample_every > 0")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        ps = tuple(float(v) for v in np.atleast_1d(self.p))
        if not ps or any(not 1 < v < 2 for v in ps):
            raise ConfigError("every p must lie in (1, 2)")
        object.__setattr__(self, "p", ps)
        object.__setattr__(self, "mode", tuple(int(v) for v in self.mode))
        if self.ic not in IC_KINDS:
            raise ConfigError(f"unknown ic {self.ic!r}; choose from {IC_KINDS}")
        if self.ic == "file" and not self.ic_file:
            raise ConfigError("ic = file needs ic_file")
        if self.ic == "rough" and not 0 < self.rough_alpha < 2:
            raise ConfigError("rough_alpha must lie in (0, 2)")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")


IC_KINDS = ("random", "mode", "taylor-green", "rough", "file")


def _parse_value(name, typ, raw):
    raw = raw.strip()
    if name in ("p", "mode"):
        return tuple(float(v) if name == "p" else int(v) for v in raw.replace(",", " ").split())
    if name in ("dt", "ic_file") and raw.lower() in ("", "none"):
        return None
    if name == "snapshots":
        return raw.lower() in ("1", "true", "yes", "on")
    if name in ("n", "kmax", "seed"):
        return int(raw)
    if name in ("ic", "ic_file"):
        return raw
    return float(raw)


def load_config(path_or_text, section="nse", **overrides) -> NSEConfig:
    """Read an NSEConfig from an INI-style key = value file (section [nse])."""
    cp = configparser.ConfigParser()
    if os.path.exists(str(path_or_text)):
        with open(path_or_text) as fh:
            text = fh.read()
    else:
        text = str(path_or_text)
    if not text.lstrip().startswith("["):
        text = f"[{section}]\n" + text
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if not cp.has_section(section):
        raise ConfigError(f"missing [{section}] section")
    known = {f.name: f.type for f in fields(NSEConfig)}
    kw = {}
    for key, raw in cp.items(section):
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            kw[key] = _parse_value(key, known[key], raw)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    kw.update(overrides)
    return NSEConfig(**kw)


def dump_config(cfg: NSEConfig) -> str:
    lines = ["[nse]"]
    for k, v in asdict(cfg).items():
        if isinstance(v, (tuple, list)):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- grid


class SpectralGrid:
    """Wavenumbers, masks and Parseval weights for the rfft2 layout."""

    def __init__(self, n: int):
        self.n = n
        k1 = np.fft.fftfreq(n, 1.0 / n).round()
        k2 = np.arange(n // 2 + 1, dtype=np.float64)
        self.k1, self.k2 = np.meshgrid(k1, k2, indexing="ij")
        self.kk = self.k1**2 + self.k2**2
        self.mask = (np.abs(self.k1) < n / 3.0) & (self.k2 < n / 3.0)
        # Parseval weights: interior half-plane columns stand for two modes
        w = np.full(self.k1.shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        self.weight = w
        inv = np.zeros_like(self.kk)
        inv[self.kk > 0] = 1.0 / (TWO_PI**2 * self.kk[self.kk > 0])
        self.inv_lap = inv  # psi^ = w^ / (4 pi^2 |k|^2)
        self.d1 = TWO_PI * 1j * self.k1 * self.mask
        self.d2 = TWO_PI * 1j * self.k2 * self.mask

    def to_real(self, fh):
        return np.fft.irfft2(fh * (self.n * self.n), s=(self.n, self.n))

    def to_spec(self, f):
        return np.fft.rfft2(f) / (self.n * self.n)

    def velocity_hat(self, wh):
        psi = wh * self.inv_lap
        return self.d2 * psi, -self.d1 * psi

    def sum_sq(self, fh) -> float:
        return float(np.sum(self.weight * (fh.real**2 + fh.imag**2)))


@dataclass
class NSEState:
    t: float
    w_hat: np.ndarray


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    lp_vorticity: dict
    enstrophy: float
    palinstrophy: float
    cum_dissipation: float


@dataclass
class NSETrajectory:
    config: NSEConfig
    snapshots: list = field(default_factory=list)
    records: list = field(default_factory=list)
    steps: int = 0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def lp_column(self, p):
        return np.array([r.lp_vorticity[float(p)] for r in self.records])

    def energy_identity_residual(self) -> float:
        """max_t | ||u(t)||^2 - ||u0||^2 + 2 nu int ||w||^2 | / ||u0||^2."""
        e = 2.0 * self.column("energy")
        cum = self.column("cum_dissipation")
        scale = e[0] if e[0] > 0 else 1.0
        return float(np.max(np.abs(e - e[0] + cum)) / scale)


class NSESolver:
    def __init__(self, n: int, nu: float, cfl: float = 0.5, dt_max: float = 0.05):
        self.g = SpectralGrid(n)
        self.nu = float(nu)
        self.cfl = cfl
        self.dt_max = dt_max
        self.last_umax = 0.0

    def advection(self, wh):
        """-(u . grad w)^ with 2/3-rule truncation; also records max |u|."""
        g = self.g
        u1h, u2h = g.velocity_hat(wh)
        u1, u2 = g.to_real(u1h), g.to_real(u2h)
        wx, wy = g.to_real(g.d1 * wh), g.to_real(g.d2 * wh)
        self.last_umax = float(np.sqrt((u1 * u1 + u2 * u2).max()))
        return -g.to_spec(u1 * wx + u2 * wy) * g.mask

    def factors(self, dt):
        e = np.exp(-(TWO_PI**2) * self.nu * self.g.kk * dt)
        return e, np.exp(-(TWO_PI**2) * self.nu * self.g.kk * dt / 2)

    def stable_dt(self, umax):
        dt = self.dt_max
        if umax > 0:
            dt = min(dt, self.cfl / (self.g.n * umax))
        return dt

    def step(self, state: NSEState, dt: float, k1=None) -> NSEState:
        """One integrating-factor RK4 step (Lawson form)."""
        wh = state.w_hat
        E, Eh = self.factors(dt)
        if k1 is None:
            k1 = self.advection(wh)
        umax = self.last_umax
        if umax * dt * self.g.n > 1.0 + 1e-12:
            raise CFLViolation(f"Courant number {umax * dt * self.g.n:.3g} > 1 at t={state.t:.6g}")
        k2 = self.advection(Eh * (wh + 0.5 * dt * k1))
        k3 = self.advection(Eh * wh + 0.5 * dt * k2)
        k4 = self.advection(E * wh + dt * Eh * k3)
        new = E * wh + dt / 6.0 * (E * k1 + 2.0 * Eh * (k2 + k3) + k4)
        new *= self.g.mask
        if not np.all(np.isfinite(new)):
            raise NaNDetected(f"non-finite vorticity after step at t={state.t:.6g}")
        return NSEState(state.t + dt, new)

    # diagnostics

    def energy(self, wh) -> float:
        """E = 1/2 ||u||^2 = 1/2 sum |w^|^2 / (4 pi^2 |k|^2)."""
        return 0.5 * self.g.sum_sq(wh * np.sqrt(self.g.inv_lap))

    def enstrophy(self, wh) -> float:
        return self.g.sum_sq(wh)

    def palinstrophy(self, wh) -> float:
        return self.g.sum_sq(wh * TWO_PI * np.sqrt(self.g.kk))

    def vorticity(self, wh) -> GridField:
        return GridField(self.g.to_real(wh))

    def record(self, state: NSEState, p_list, cum) -> DiagnosticsRecord:
        w = self.g.to_real(state.w_hat)
        return DiagnosticsRecord(
            t=state.t,
            energy=self.energy(state.w_hat),
            lp_vorticity={float(p): grid_lp_norm(w, p) for p in p_list},
            enstrophy=self.enstrophy(state.w_hat),
            palinstrophy=self.palinstrophy(state.w_hat),
            cum_dissipation=cum,
        )


# ------------------------------------------------------- initial data


def _rough_cutoff(cfg: NSEConfig) -> int:
    grid = int(math.ceil(cfg.n / 3.0)) - 1
    if cfg.nu <= 0:
        return grid
    return max(1, min(grid, int(math.floor(cfg.rough_c / math.sqrt(cfg.nu)))))


ROUGH_CENTERS = ((0.3, 0.4), (0.7, 0.55))


def rough_coefficient(a: float) -> float:
    """C_a with  FT(|x|^-a)(k) = C_a |k|^(a-2)  in R^2 (0 < a < 2)."""
    return math.pi ** (a - 1) * math.gamma(1 - a / 2) / math.gamma(a / 2)


def initial_vorticity(cfg: NSEConfig) -> np.ndarray:
    """Half-plane spectrum of the initial vorticity (mean zero, dealiased)."""
    g = SpectralGrid(cfg.n)
    if cfg.ic == "mode":
        a = np.array(cfg.mode)
        if not a.any():
            raise ConfigError("mode must be nonzero")
        # w = amp cos(2 pi a.x)
        F = SparseSpectralField(np.array([a, -a]), np.array([[cfg.amp / 2], [cfg.amp / 2]]), ncomp=1)
        wh = sparse_rfft(F, cfg.n)[0]
    elif cfg.ic == "taylor-green":
        # w = amp sin(2 pi x1) sin(2 pi x2), four modes on the shell |k|^2 = 2
        m = {(s1, s2): (-s1 * s2 * cfg.amp / 4,) for s1 in (1, -1) for s2 in (1, -1)}
        wh = sparse_rfft(SparseSpectralField.from_dict(m, ncomp=1), cfg.n)[0]
    elif cfg.ic == "random":
        wh = _random_ic(cfg)
    elif cfg.ic == "rough":
        wh = _rough_ic(cfg, g)
    else:
        from .fieldio import read_field

        F = read_field(cfg.ic_file)
        if F.ncomp != 1:
            raise ConfigError("vorticity file must hold a scalar field")
        if F.max_freq >= cfg.n / 3.0:
            raise ConfigError("vorticity file not resolved below the 2/3 cutoff")
        wh = sparse_rfft(F, cfg.n)[0]
    wh = wh * g.mask
    wh[0, 0] = 0.0
    return wh


def _random_ic(cfg: NSEConfig) -> np.ndarray:
    K = cfg.kmax
    if K < 1 or K >= cfg.n / 3.0:
        raise ConfigError("kmax must lie in [1, n/3)")
    rng = np.random.default_rng(cfg.seed)
    r = np.arange(-K, K + 1)
    k1, k2 = np.meshgrid(r, r, indexing="ij")
    k = np.stack([k1.ravel(), k2.ravel()], axis=1)
    half = (k[:, 0] > 0) | ((k[:, 0] == 0) & (k[:, 1] > 0))
    kh = k[half]
    mag = np.hypot(kh[:, 0], kh[:, 1])
    c = mag**-1.0 * np.exp(1j * rng.uniform(0, TWO_PI, len(kh)))
    F = SparseSpectralField(np.vstack([kh, -kh]), np.concatenate([c, np.conj(c)])[:, None], ncomp=1)
    F = (cfg.amp / F.l2_norm()) * F
    return sparse_rfft(F, cfg.n)[0]


def _rough_ic(cfg: NSEConfig, g: SpectralGrid) -> np.ndarray:
    """Periodised dipole |x - c1|^-a - |x - c2|^-a truncated at |k|_inf <= Lambda(nu)."""
    a = cfg.rough_alpha
    lam = _rough_cutoff(cfg)
    k1, k2 = g.k1, g.k2
    keep = (np.maximum(np.abs(k1), k2) <= lam) & (g.kk > 0)
    (c1x, c1y), (c2x, c2y) = ROUGH_CENTERS
    kk = np.where(g.kk > 0, g.kk, 1.0)
    ph1 = np.exp(-TWO_PI * 1j * (k1 * c1x + k2 * c1y))
    ph2 = np.exp(-TWO_PI * 1j * (k1 * c2x + k2 * c2y))
    wh = cfg.amp * rough_coefficient(a) * kk ** ((a - 2) / 2) * (ph1 - ph2)
    wh = np.where(keep, wh, 0.0)
    # the k2 = 0 and Nyquist columns must be Hermitian in k1; the formula already is
    return wh


# ------------------------------------------------------------------ run


def run(cfg: NSEConfig, w0_hat: np.ndarray | None = None) -> NSETrajectory:
    """Integrate to t_end, recording diagnostics every ``sample_every``.

    The dissipation integral 2 nu int ||w||^2 is accumulated over every
    time step by the trapezoidal rule with its first end-point correction.
    """
    solver = NSESolver(cfg.n, cfg.nu, cfg.cfl, cfg.dt_max)
    state = NSEState(0.0, initial_vorticity(cfg) if w0_hat is None else np.asarray(w0_hat) * solver.g.mask)
    traj = NSETrajectory(cfg)
    cum = 0.0
    traj.records.append(solver.record(state, cfg.p, cum))
    if cfg.snapshots:
        traj.snapshots.append((0.0, solver.vorticity(state.w_hat)))
    n_samples = int(math.floor(cfg.t_end / cfg.sample_every + 1e-9))
    targets = [cfg.sample_every * (i + 1) for i in range(n_samples)]
    if not targets or targets[-1] < cfg.t_end - 1e-12:
        targets.append(cfg.t_end)
    if cfg.t_end == 0:
        targets = []
    ens, pal = solver.enstrophy(state.w_hat), solver.palinstrophy(state.w_hat)
    for target in targets:
        while state.t < target - 1e-14 * max(1.0, target):
            k1 = solver.advection(state.w_hat)
            if cfg.dt is not None:
                dt = cfg.dt
                if solver.last_umax * dt * cfg.n > cfg.cfl * (1 + 1e-12):
                    raise CFLViolation(
                        f"fixed dt={dt:g} exceeds the CFL bound {cfg.cfl / (cfg.n * solver.last_umax):.3g}"
                    )
            else:
                dt = solver.stable_dt(solver.last_umax)
            remaining = target - state.t
            if dt >= remaining or remaining - dt < 1e-12 * max(1.0, target):
                dt = remaining
            state = solver.step(state, dt, k1)
            traj.steps += 1
            new_ens, new_pal = solver.enstrophy(state.w_hat), solver.palinstrophy(state.w_hat)
            # trapezoid plus the Euler-Maclaurin end correction, using
            # d/dt ||w||^2 = -2 nu ||grad w||^2 (exact for the Galerkin system)
            cum += cfg.nu * dt * (ens + new_ens) + cfg.nu * dt * dt / 6.0 * (2.0 * cfg.nu) * (new_pal - pal)
            ens, pal = new_ens, new_pal
        state.t = target
        traj.records.append(solver.record(state, cfg.p, cum))
        if cfg.snapshots:
            traj.snapshots.append((target, solver.vorticity(state.w_hat)))
    return traj


DIAG_COLUMNS_BASE = ("t", "energy", "enstrophy", "palinstrophy", "cum_dissipation")


def diagnostics_rows(traj: NSETrajectory):
    """Rows for the diagnostics CSV: t, energy, lp_vorticity_{p}..., enstrophy, palinstrophy, cum_dissipation."""
    header = ["t", "energy"] + [f"lp_vorticity_{p:g}" for p in traj.config.p] + [
        "enstrophy",
        "palinstrophy",
        "cum_dissipation",
    ]
    rows = []
    for r in traj.records:
        rows.append(
            [r.t, r.energy]
            + [r.lp_vorticity[p] for p in traj.config.p]
            + [r.enstrophy, r.palinstrophy, r.cum_dissipation]
        )
    return header, rows


# --------------------------------------------------------------- bounds

SLACK = 1.05


def energy_loss_constant(p: float) -> float:
    """C_p with ||u0||^2 - ||u(t)||^2 <= C_p (nu t)^(2(p-1)/p) ||w0||_p^2.

    C_p = 2^(2(p-1)/p) (p / (2 - p))^(-(2-p)/p) p / (2 (p - 1)).
    """
    _check_p(p)
    a = 2.0 * (p - 1.0) / p
    return 2.0**a * (p / (2.0 - p)) ** (-(2.0 - p) / p) * p / (2.0 * (p - 1.0))


def _check_p(p):
    if not 1.1 <= p <= 1.9:
        raise ValidationError("bound checks need p in [1.1, 1.9]")


@dataclass(frozen=True)
class BoundCheck:
    t: float
    max_principle: bool
    max_principle_margin: float
    gagliardo_nirenberg: bool
    gn_margin: float
    enstrophy_bound: bool
    enstrophy_margin: float
    energy_loss_bound: bool
    energy_loss_margin: float

    @property
    def ok(self) -> bool:
        return self.max_principle and self.gagliardo_nirenberg and self.enstrophy_bound and self.energy_loss_bound


def check_bounds(traj: NSETrajectory, p: float, slack: float = SLACK):
    """Evaluate the four vanishing-viscosity inequalities at every sample.

    Margins are ratios lhs / rhs (<= slack means satisfied); the enstrophy
    bound has no content at t = 0 and reports margin 0 there.
    """
    _check_p(p)
    nu = traj.config.nu
    if nu <= 0:
        raise ValidationError("check_bounds needs nu > 0")
    p = float(p)
    if p not in traj.config.p:
        raise ValidationError(f"trajectory has no L^{p} diagnostics")
    r0 = traj.records[0]
    wp0 = r0.lp_vorticity[p]
    C0 = wp0 ** (-2.0 * p / (2.0 - p))
    a = 2.0 * (p - 1.0) / p
    Cp = energy_loss_constant(p)
    out = []
    for r in traj.records:
        wp = r.lp_vorticity[p]
        m_a = wp / wp0 if wp0 > 0 else 0.0
        w2 = math.sqrt(r.enstrophy)
        gn_rhs = math.sqrt(r.palinstrophy) ** (1.0 - p / 2.0) * wp ** (p / 2.0)
        m_b = w2 / gn_rhs if gn_rhs > 0 else 0.0
        if r.t > 0:
            m_c = r.enstrophy / (2.0 * nu * p * C0 * r.t / (2.0 - p)) ** (-(2.0 - p) / p)
            loss = 2.0 * (r0.energy - r.energy)
            m_d = loss / (Cp * (nu * r.t) ** a * wp0**2)
        else:
            m_c = m_d = 0.0
        out.append(
            BoundCheck(r.t, m_a <= slack, m_a, m_b <= slack, m_b, m_c <= slack, m_c, m_d <= slack, m_d)
        )
    return out


# ---------------------------------------------------------------- sweep


SWEEP_COLUMNS = ("nu", "delta_E", "eps_nu", "bound_margin", "fit_residual")


@dataclass
class SweepResult:
    rows: list
    slope: float
    intercept: float
    trajectories: list
    bound_reports: dict

    def table(self):
        return [[r[c] for c in SWEEP_COLUMNS] for r in self.rows]


def _run_member(cfg):
    return run(cfg)


def _workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None


def viscosity_sweep(base: NSEConfig, nu_list, roughen: bool = False, p_bound: float = 1.5):
    """Run ``base`` at each viscosity and fit delta_E ~ nu^slope.

    delta_E = ||u0||^2 - ||u(T)||^2; eps_nu = nu int_0^T ||w||^2 dt; the
    bound margin is the worst ratio of the energy-loss inequality at
    exponent ``p_bound`` over all samples. With ``roughen`` the initial
    vorticity is the truncated power-law dipole with cutoff
    Lambda(nu) = min(grid cutoff, rough_c nu^-1/2).
    """
    nus = [float(v) for v in nu_list]
    if any(v <= 0 for v in nus):
        raise ValidationError("sweep viscosities must be positive")
    if any(b >= a for a, b in zip(nus, nus[1:])):
        raise ValidationError("nu_list must be strictly decreasing")
    p_set = tuple(sorted(set(base.p) | {float(p_bound)}))
    cfgs = [replace(base, nu=v, p=p_set, ic="rough" if roughen else base.ic) for v in nus]
    workers = min(_workers(), len(cfgs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            trajs = list(ex.map(_run_member, cfgs))
    else:
        trajs = [run(c) for c in cfgs]
    rows = []
    reports = {}
    for v, tr in zip(nus, trajs):
        first, last = tr.records[0], tr.records[-1]
        rep = {p: check_bounds(tr, p) for p in p_set if 1.1 <= p <= 1.9}
        reports[v] = rep
        rows.append(
            {
                "nu": v,
                "delta_E": 2.0 * (first.energy - last.energy),
                "eps_nu": last.cum_dissipation / 2.0,
                "bound_margin": max(b.energy_loss_margin for b in rep[float(p_bound)]),
                "fit_residual": 0.0,
            }
        )
    x = np.log([r["nu"] for r in rows])
    y = np.log([max(r["delta_E"], 1e-300) for r in rows])
    if len(rows) >= 2:
        slope, intercept = np.polyfit(x, y, 1)
    else:
        slope, intercept = float("nan"), float("nan")
    for r, xi, yi in zip(rows, x, y):
        r["fit_residual"] = float(yi - (slope * xi + intercept)) if len(rows) >= 2 else 0.0
    return SweepResult(rows, float(slope), float(intercept), trajs, reports)
