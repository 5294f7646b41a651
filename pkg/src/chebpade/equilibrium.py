"""Mixed Green-logarithmic equilibrium problems on E = [-1,1] relative to a compact K.

The energy of a unit measure mu on E is

    J_theta(mu) = iint (theta*log(1/|x-t|) + g_K(x,t)) dmu(x) dmu(t),

minimized over probability measures; the minimizer lam satisfies
theta*V^lam + G^lam_K = w on E with the equilibrium constant w = J_theta(lam).

Compacts are segments or conjugation-symmetric circline arcs, both with
closed-form conformal maps Phi onto the exterior of the unit disk, so the
Green's function of the complement is

    g_K(z,t) = log|Phi(z)*conj(Phi(t)) - 1| - log|Phi(z) - Phi(t)|.

Discretization: E is cut into n panels at the Chebyshev edges -cos(j*pi/n),
i.e. uniform panels in the angle phi (x = -cos phi).  A measure is a vector of
panel masses; its density in phi is the per-panel linear reconstruction with
central-difference slopes (even reflection at the ends), which resolves the
inverse-square-root edge behavior of equilibrium densities and gives
pointwise potential residuals O(n^-3).  Piecewise-constant panel densities
were tried first and converge only O(n^-1) pointwise, far short of the 1e-6
residual target at 256 panels.

Everything here runs in float64; the residual targets (1e-6 .. 1e-12) do not
require extended precision.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .numio import canonical_json_bytes


class AdmissibilityError(ValueError):
    """The compact is degenerate or not disjoint from [-1,1] with margin."""


class ResolutionError(RuntimeError):
    """The discretized kernel is not positive definite; increase n_panels."""


_E_MARGIN = 1e-6


# ---------------------------------------------------------------------------
# compacts and their exterior maps
# ---------------------------------------------------------------------------

def _inv_joukowski(w):
    # branch with |w + sqrt(w-1)sqrt(w+1)| > 1 off [-1,1]
    return w + np.sqrt(w - 1 + 0j) * np.sqrt(w + 1 + 0j)


class Segment:
    """A straight segment [e1, e2] disjoint from [-1,1]."""

    kind = "segment"

    def __init__(self, e1, e2):
        self.e1, self.e2 = complex(e1), complex(e2)
        if abs(self.e2 - self.e1) < 1e-12:
            raise AdmissibilityError("degenerate segment")
        if self.distance_to_E() < _E_MARGIN:
            raise AdmissibilityError("segment not disjoint from [-1,1] with margin")

    def __repr__(self):
        return f"Segment({self.e1}, {self.e2})"

    # param s in [-1,1] along the segment
    def ell(self, z):
        return (2 * np.asarray(z, dtype=complex) - self.e1 - self.e2) / (self.e2 - self.e1)

    def point_of_param(self, s):
        return 0.5 * (self.e1 + self.e2) + 0.5 * np.asarray(s) * (self.e2 - self.e1)

    def param_of(self, z):
        return np.clip(np.real(self.ell(z)), -1.0, 1.0)

    def phi(self, z):
        return _inv_joukowski(self.ell(z))

    def phi_deriv(self, z):
        w = self.ell(z)
        s = np.sqrt(w - 1 + 0j) * np.sqrt(w + 1 + 0j)
        return (1 + w / s) * 2 / (self.e2 - self.e1)

    def boundary_points(self, ts):
        return self.point_of_param(2 * np.asarray(ts) - 1)

    def boundary_normals(self, ts):
        tang = (self.e2 - self.e1) / abs(self.e2 - self.e1)
        return np.full(np.shape(ts), 1j * tang, dtype=complex)

    def length_scale(self):
        return abs(self.e2 - self.e1)

    def distance_to_E(self):
        ts = np.linspace(0, 1, 257)
        return _dist_to_E(self.boundary_points(ts)).min()

    def distance_to(self, z):
        z = np.asarray(z, dtype=complex)
        d = self.e2 - self.e1
        t = np.clip(np.real(np.conj(d) * (z - self.e1)) / abs(d) ** 2, 0.0, 1.0)
        return np.abs(z - (self.e1 + t * d))

    def is_conjugation_symmetric(self):
        pts = {self.e1, self.e2}
        return all(any(abs(np.conj(p) - q) < 1e-12 for q in pts) for p in pts)


class CirclineArc:
    """Arc through conjugate points b, conj(b) and the real point 1/u, avoiding E.

    u in (-1,1); u = 0 selects the arc through infinity (two vertical rays).
    The complement maps to a segment exterior through the Moebius map
    T(z) = 1/(z - x1), x1 being the other real crossing of the circline.
    """

    kind = "circline_arc"

    def __init__(self, b, u):
        self.b = complex(b)
        self.u = float(u)
        if not self.b.imag > 0:
            raise AdmissibilityError("need Im b > 0")
        if not -1 < self.u < 1:
            raise AdmissibilityError("arc parameter u must lie in (-1,1)")
        # real point of the complementary arc; continuous through u = 0.  It may
        # lie inside [-1,1]: only the arc itself must avoid E, checked below.
        self.x1 = (self.b.real - self.u * abs(self.b) ** 2) / (1 - self.u * self.b.real)
        e2 = 1 / (self.b - self.x1)
        self.seg_image = Segment.__new__(Segment)  # raw segment, no E check in T-space
        self.seg_image.e1, self.seg_image.e2 = np.conj(e2), e2
        if self.distance_to_E() < _E_MARGIN:
            raise AdmissibilityError("arc not disjoint from [-1,1] with margin")

    def __repr__(self):
        return f"CirclineArc(b={self.b}, u={self.u})"

    def T(self, z):
        return 1 / (np.asarray(z, dtype=complex) - self.x1)

    def T_inv(self, w):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.x1 + 1 / np.asarray(w, dtype=complex)

    def phi(self, z):
        return self.seg_image.phi(self.T(z))

    def phi_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        return self.seg_image.phi_deriv(self.T(z)) * (-1 / (z - self.x1) ** 2)

    def param_of(self, z):
        return self.seg_image.param_of(self.T(z))

    def point_of_param(self, s):
        return self.T_inv(self.seg_image.point_of_param(s))

    def boundary_points(self, ts):
        return self.T_inv(self.seg_image.boundary_points(ts))

    def boundary_normals(self, ts):
        w = self.seg_image.boundary_points(np.asarray(ts))
        tang = -(self.seg_image.e2 - self.seg_image.e1) / w**2
        tang = tang / np.abs(tang)
        return 1j * tang

    def length_scale(self):
        return 2 * self.b.imag

    def real_crossing(self):
        """The real point of the arc itself (inf for u = 0)."""
        return np.inf if self.u == 0 else 1 / self.u

    def distance_to_E(self):
        # even count: the arc through infinity (u = 0) hits w = 0 at the exact
        # parameter midpoint, which must not be sampled
        ts = np.linspace(1e-4, 1 - 1e-4, 1024)
        d = _dist_to_E(self.boundary_points(ts))
        d = d[np.isfinite(d)].min()
        x0 = self.real_crossing()
        if np.isfinite(x0):
            d = min(d, max(abs(x0) - 1, 0.0))
        return d

    def distance_to(self, z):
        z = np.asarray(z, dtype=complex)
        ts = np.linspace(1e-6, 1 - 1e-6, 4096)
        pts = self.boundary_points(ts)
        pts = pts[np.isfinite(pts)]
        return np.min(np.abs(z[..., None] - pts[None, :]), axis=-1)

    def is_conjugation_symmetric(self):
        return True


def _dist_to_E(pts):
    pts = np.asarray(pts, dtype=complex)
    dx = np.maximum(np.abs(pts.real) - 1, 0.0)
    return np.hypot(dx, pts.imag)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass
class DiscreteMeasure:
    """Nonnegative unit mass on panels of a carrier set.

    carrier "cheb-E": panels of [-1,1] with edges -cos(j*pi/n); the density is
    the angle-variable linear reconstruction described in the module docstring.
    carrier "compact": panels of a compact K (balayage output); treated as
    midpoint atoms by the potential evaluators.
    carrier "atoms": point masses (zero-width panels).
    """

    panels: np.ndarray  # (n, 2) complex endpoints
    masses: np.ndarray  # (n,) float
    carrier: str = "cheb-E"

    def __post_init__(self):
        self.panels = np.asarray(self.panels, dtype=complex).reshape(-1, 2)
        self.masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if self.panels.shape[0] != self.masses.shape[0]:
            raise ValueError("panel/mass count mismatch")
        if np.any(self.masses < -1e-13):
            raise ValueError("negative panel mass")
        if abs(self.masses.sum() - 1.0) > 1e-12:
            raise ValueError(f"total mass {self.masses.sum()} != 1")

    @property
    def n_panels(self):
        return len(self.masses)

    def midpoints(self):
        return 0.5 * (self.panels[:, 0] + self.panels[:, 1])


def chebyshev_panel_edges(n):
    """Panel edges -cos(j*pi/n), j=0..n, symmetrized."""
    e = -np.cos(np.arange(n + 1) * np.pi / n)
    return 0.5 * (e - e[::-1])


def cheb_E_measure(masses):
    n = len(masses)
    e = chebyshev_panel_edges(n)
    panels = np.stack([e[:-1], e[1:]], axis=1).astype(complex)
    return DiscreteMeasure(panels=panels, masses=masses, carrier="cheb-E")


def arcsine_measure(n):
    """Equilibrium measure of [-1,1] itself: equal masses on Chebyshev panels."""
    return cheb_E_measure(np.full(n, 1.0 / n))


def point_mass(x):
    return DiscreteMeasure(
        panels=np.array([[x, x]], dtype=complex), masses=np.array([1.0]), carrier="atoms"
    )


def _profile(masses):
    """Panel means and slopes of the angle-variable density reconstruction."""
    n = len(masses)
    delta = np.pi / n
    vbar = masses / delta
    ghost = np.concatenate([[vbar[0]], vbar, [vbar[-1]]])  # even reflection
    slope = (ghost[2:] - ghost[:-2]) / (2 * delta)
    return vbar, slope, delta


def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def _profile_nodes(masses, ng=8):
    """Gauss nodes in phi, weights, and density values of the reconstruction."""
    n = len(masses)
    vbar, slope, delta = _profile(masses)
    gx, gw = _gauss(ng)
    mid = (np.arange(n) + 0.5) * delta
    phi = (mid[:, None] + 0.5 * delta * gx[None, :]).ravel()
    wts = np.tile(0.5 * delta * gw, n)
    dens = (vbar[:, None] + slope[:, None] * (0.5 * delta * gx)[None, :]).ravel()
    return phi, wts, dens


# ---------------------------------------------------------------------------
# Green's function
# ---------------------------------------------------------------------------

def green_function(K, z, t):
    """g_K(z,t) >= 0, zero for z on K; raises on the diagonal z = t."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=complex)
    if np.any(np.abs(z - t) < 1e-14):
        raise ValueError("Green's function is infinite at z = t")
    wz, wt = K.phi(z), K.phi(t)
    val = np.log(np.abs(wz * np.conj(wt) - 1)) - np.log(np.abs(wz - wt))
    return np.maximum(val, 0.0)


def _green_reg(K, z, x):
    """h(z,x) = g_K(z,x) + log|z-x| on a (z, x) grid; smooth through z = x."""
    z = np.asarray(z, dtype=complex).ravel()
    x = np.asarray(x, dtype=float).ravel()
    wz = K.phi(z)[:, None]
    wx = K.phi(x.astype(complex))[None, :]
    num = np.abs(wz * np.conj(wx) - 1)
    dif = z[:, None] - x[None, :]
    ratio = np.empty(num.shape)
    off = np.abs(dif) > 1e-15
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio[off] = np.abs((wz - wx)[off] / dif[off])
    if not off.all():
        dphi = np.abs(K.phi_deriv(z))
        ratio[~off] = np.broadcast_to(dphi[:, None], num.shape)[~off]
    return np.log(num) - np.log(ratio)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

def log_potential(mu, z):
    """V^mu(z) = int log(1/|z-t|) dmu(t), valid on and off the carrier."""
    z = np.asarray(z, dtype=complex)
    zf = z.ravel()
    if mu.carrier == "cheb-E":
        on = (np.abs(zf.imag) < 1e-9) & (np.abs(zf.real) <= 1 + 1e-12)
        out = np.empty(zf.shape)
        if on.any():
            out[on] = _log_potential_on_E(mu.masses, np.arccos(-np.clip(zf.real[on], -1, 1)))
        if (~on).any():
            out[~on] = _log_potential_off_E(mu.masses, zf[~on])
        return out.reshape(z.shape) if z.shape else float(out[0])
    mids = mu.midpoints()
    d = np.abs(zf[:, None] - mids[None, :])
    if np.any(d < 1e-14):
        raise ValueError("evaluation point coincides with an atom")
    out = -(np.log(d) @ mu.masses)
    return out.reshape(z.shape) if z.shape else float(out[0])


def _log_potential_on_E(masses, phis):
    """Singularity-subtracted quadrature of the angle-variable reconstruction.

    log|x(phi)-x(psi)| = log|2 sin((psi-phi)/2)| + log|2 sin((psi+phi)/2)| - log 2;
    the first factor is integrated in closed form (against the linear profile)
    on the panel containing phi and its neighbors, Gauss elsewhere.
    """
    n = len(masses)
    vbar, slope, delta = _profile(masses)
    phi_q, wts, dens = _profile_nodes(masses, ng=12)
    phis = np.atleast_1d(phis)
    # far-field: full kernel at Gauss nodes
    d1 = phis[:, None] - phi_q[None, :]
    with np.errstate(divide="ignore"):
        ker = np.log(np.abs(2 * np.sin(d1 / 2))) + np.log(
            np.abs(2 * np.sin((phis[:, None] + phi_q[None, :]) / 2))
        ) - np.log(2.0)
    total = ker @ (wts * dens)
    # near panels: replace the singular factor contribution by closed form
    ng = 12
    idx = np.minimum((phis / delta).astype(int), n - 1)
    for kz in range(len(phis)):
        phi = phis[kz]
        for i in range(max(idx[kz] - 1, 0), min(idx[kz] + 2, n)):
            a, b = i * delta, (i + 1) * delta
            midp = 0.5 * (a + b)
            rows = slice(i * ng, (i + 1) * ng)
            nodes = phi_q[rows]
            w = wts[rows]
            prof = dens[rows]
            dd = nodes - phi
            # remove the Gauss contribution of log|2 sin(d/2)| ~ log|d| near d=0
            with np.errstate(divide="ignore"):
                sing_gauss = np.log(np.abs(2 * np.sin(dd / 2)))
                smooth = np.where(np.abs(dd) < 1e-300, 0.0, sing_gauss - np.log(np.abs(dd)))
            total[kz] -= np.sum(w * prof * sing_gauss)
            total[kz] += np.sum(w * prof * smooth)
            # closed form of int (vbar + s*(psi-mid)) log|psi-phi| dpsi over [a,b]
            t1, t0 = b - phi, a - phi
            f0 = lambda t: t * np.log(abs(t)) - t if t != 0 else 0.0
            f1 = lambda t: 0.5 * t * t * np.log(abs(t)) - 0.25 * t * t if t != 0 else 0.0
            j0 = f0(t1) - f0(t0)
            j1 = f1(t1) - f1(t0)
            total[kz] += vbar[i] * j0 + slope[i] * (j1 + (phi - midp) * j0)
    return -total


def _log_potential_off_E(masses, z):
    """Expansion V(z) = log(2/|Phi_E(z)|) + sum_k (2/k) Re Phi_E(z)^-k * vhat_k."""
    w = _inv_joukowski(np.asarray(z, dtype=complex))
    r = np.abs(w)
    rmin = r.min()
    # term k decays like rmin^-k; pick the cutoff for ~1e-14 tails
    kc = int(min(max(64, 40 / np.log(max(rmin, 1 + 1e-7))), 2_000_000))
    vhat = _cosine_moments(masses, kc)
    kk = np.arange(1, kc + 1)
    # evaluate sum_k (2/k) vhat_k Re(w^-k) by a stable Horner-type loop in w^-1
    winv = 1 / w
    acc = np.zeros(len(z), dtype=complex)
    for k in range(kc, 0, -1):
        acc = (acc + (2.0 / k) * vhat[k - 1]) * winv
    return np.log(2.0 / r) + np.real(acc)


def _cosine_moments(masses, kc):
    """vhat_k = int v(psi) cos(k psi) dpsi, k = 1..kc, of the reconstruction."""
    n = len(masses)
    vbar, slope, delta = _profile(masses)
    edges = np.arange(n + 1) * delta
    k = np.arange(1, kc + 1)[:, None]
    S = np.sin(k * edges[None, :])
    C = np.cos(k * edges[None, :])
    I0 = (S[:, 1:] - S[:, :-1]) / k
    I1 = (C[:, 1:] - C[:, :-1]) / k**2 + (delta / 2) * (S[:, 1:] + S[:, :-1]) / k
    return I0 @ vbar + I1 @ slope


def green_potential(K, mu, z):
    """G^mu_K(z) = int g_K(z,t) dmu(t) = V^mu(z) + int h(z,t) dmu(t)."""
    z = np.asarray(z, dtype=complex)
    zf = np.atleast_1d(z.ravel())
    if mu.carrier == "cheb-E":
        phi_q, wts, dens = _profile_nodes(mu.masses, ng=8)
        x = -np.cos(phi_q)
        H = _green_reg(K, zf, x) @ (wts * dens)
        out = log_potential(mu, zf) + H
    else:
        mids = mu.midpoints()
        g = np.array(
            [[float(green_function(K, zz, m)) for m in mids] for zz in zf]
        )
        out = g @ mu.masses
    return out.reshape(z.shape) if z.shape else float(out[0])


def potentials(mu, K, z):
    """(V, G) of a measure at z (scalar or array)."""
    scalar = np.isscalar(z) or np.asarray(z).shape == ()
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    V = log_potential(mu, za)
    G = green_potential(K, mu, za)
    if scalar:
        return float(np.atleast_1d(V)[0]), float(np.atleast_1d(G)[0])
    return V, G


# ---------------------------------------------------------------------------
# equilibrium solve
# ---------------------------------------------------------------------------

_ALOG_CACHE = {}


def _log_energy_matrix(n, kc=None):
    """Galerkin matrix of log(1/|x-t|) in the unit-mass panel basis."""
    kc = kc or max(16 * n, 8192)
    key = (n, kc)
    if key not in _ALOG_CACHE:
        delta = np.pi / n
        # moment matrix of the per-unit-mass basis (mass e_j -> profile)
        eye = np.eye(n)
        vb = eye / delta
        ghost = np.vstack([vb[:1], vb, vb[-1:]])
        sl = (ghost[2:] - ghost[:-2]) / (2 * delta)
        edges = np.arange(n + 1) * delta
        k = np.arange(1, kc + 1)[:, None]
        S = np.sin(k * edges[None, :])
        C = np.cos(k * edges[None, :])
        I0 = (S[:, 1:] - S[:, :-1]) / k
        I1 = (C[:, 1:] - C[:, :-1]) / k**2 + (delta / 2) * (S[:, 1:] + S[:, :-1]) / k
        B = I0 @ vb + I1 @ sl
        kk = np.arange(1, kc + 1)
        A = np.log(2.0) * np.ones((n, n)) + (B.T * (2.0 / kk)) @ B
        _ALOG_CACHE[key] = 0.5 * (A + A.T)
    return _ALOG_CACHE[key]


def _energy_matrix(K, theta, n, ng=8):
    Alog = _log_energy_matrix(n)
    delta = np.pi / n
    gx, gw = _gauss(ng)
    mid = (np.arange(n) + 0.5) * delta
    phi = (mid[:, None] + 0.5 * delta * gx[None, :]).ravel()
    wts = np.tile(0.5 * delta * gw, n)
    x = -np.cos(phi)
    # basis density values at the Gauss nodes
    eye = np.eye(n)
    vb = eye / delta
    ghost = np.vstack([vb[:1], vb, vb[-1:]])
    sl = (ghost[2:] - ghost[:-2]) / (2 * delta)
    P = np.repeat(vb, ng, axis=0) + ((0.5 * delta * gx)[None, :].repeat(n, 0).ravel())[
        :, None
    ] * np.repeat(sl, ng, axis=0)
    H = _green_reg(K, x, x)
    Ah = P.T @ ((wts[:, None] * wts[None, :]) * H) @ P
    A = (theta + 1) * Alog + Ah
    return 0.5 * (A + A.T)


@dataclass
class EquilibriumResult:
    measure: DiscreteMeasure
    w: float
    energy: float
    residual: float
    theta: float
    compact: object
    n_panels: int


def solve_equilibrium(K, theta, n_panels=256, residual_points_per_panel=3):
    """Minimize the discretized energy over unit panel-mass vectors.

    Solves the equality-constrained KKT system under the full-support
    assumption, drops negative masses by an active-set loop, and reports the
    pointwise equilibrium defect max_E |theta*V + G - w| on a fresh grid of
    panel-interior points.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if n_panels < 16:
        raise ValueError("need n_panels >= 16")
    A = _energy_matrix(K, theta, n_panels)
    # conditional positive definiteness on the zero-sum subspace
    n = n_panels
    Q = np.eye(n) - np.full((n, n), 1.0 / n)
    evmin = np.linalg.eigvalsh(Q @ A @ Q)[1]  # skip the constraint null direction
    if evmin <= 0:
        raise ResolutionError(
            f"discretized kernel indefinite (min eig {evmin:.2e}); increase n_panels"
        )
    active = np.ones(n, dtype=bool)
    for _ in range(n):
        m = np.zeros(n)
        idx = np.where(active)[0]
        k = len(idx)
        M = np.zeros((k + 1, k + 1))
        M[:k, :k] = 2 * A[np.ix_(idx, idx)]
        M[:k, k] = -1
        M[k, :k] = 1
        rhs = np.zeros(k + 1)
        rhs[k] = 1
        sol = np.linalg.solve(M, rhs)
        m[idx] = sol[:k]
        w = sol[k] / 2
        if m.min() >= -1e-13:
            m = np.maximum(m, 0.0)
            m /= m.sum()
            break
        active &= m > -1e-13
    mu = cheb_E_measure(m)
    energy = float(m @ A @ m)
    # pointwise defect on panel-interior points
    delta = np.pi / n
    fr = np.linspace(0.18, 0.82, residual_points_per_panel)
    tphi = (np.arange(n)[:, None] * delta + fr[None, :] * delta).ravel()
    tx = -np.cos(tphi)
    V = _log_potential_on_E(m, tphi)
    phi_q, wts, dens = _profile_nodes(m, ng=8)
    H = _green_reg(K, tx.astype(complex), -np.cos(phi_q)) @ (wts * dens)
    pot = theta * V + (V + H)
    residual = float(np.max(np.abs(pot - w)))
    return EquilibriumResult(
        measure=mu,
        w=float(w),
        energy=energy,
        residual=residual,
        theta=float(theta),
        compact=K,
        n_panels=n_panels,
    )


# ---------------------------------------------------------------------------
# balayage
# ---------------------------------------------------------------------------

def balayage(mu, K, n_panels=None):
    """Sweep a measure from the complement of K onto K via harmonic measure.

    The harmonic measure of a boundary arc seen from z in the exterior-disk
    coordinate is evaluated in closed form (subtended-angle formula after
    inversion); panel masses on K collect both sides of the slit.
    """
    if n_panels is None:
        n_panels = mu.n_panels if mu.carrier != "atoms" else 256
    # source atoms
    if mu.carrier == "cheb-E":
        phi_q, wts, dens = _profile_nodes(mu.masses, ng=8)
        src = (-np.cos(phi_q)).astype(complex)
        srcm = wts * dens
    else:
        src = mu.midpoints()
        srcm = mu.masses.copy()
    # output panels: Chebyshev-distributed in the segment parameter of K
    s_edges = -np.cos(np.arange(n_panels + 1) * np.pi / n_panels)
    geo = K.point_of_param(s_edges)
    panels = np.stack([geo[:-1], geo[1:]], axis=1)
    alpha = np.arccos(np.clip(s_edges, -1, 1))  # circle angles, decreasing pi -> 0
    masses = np.zeros(n_panels)
    w0 = K.phi(src)
    on_K = np.abs(np.abs(w0) - 1) < 1e-8
    if on_K.any():
        # already swept: assign by parameter
        sK = K.param_of(src[on_K])
        j = np.clip(np.searchsorted(s_edges, sK) - 1, 0, n_panels - 1)
        np.add.at(masses, j, srcm[on_K])
    zin = 1 / w0[~on_K]
    wsrc = srcm[~on_K]
    if len(zin):
        for a_hi, a_lo, j in zip(alpha[:-1], alpha[1:], range(n_panels)):
            masses[j] += wsrc @ (
                _disk_arc_measure(zin, -a_hi, -a_lo) + _disk_arc_measure(zin, a_lo, a_hi)
            )
    total = masses.sum()
    masses = np.maximum(masses, 0.0)
    masses /= masses.sum()
    if abs(total - 1) > 1e-9:
        raise RuntimeError(f"balayage mass defect {total - 1:.2e}")
    return DiscreteMeasure(panels=panels, masses=masses, carrier="compact")


def _disk_arc_measure(z, a, b):
    """Harmonic measure at interior points z of the unit-circle arc (a, b).

    Reflected from the exterior: omega_ext(w, arc(a,b)) = omega_int(1/w, arc(-b,-a));
    callers pass the reflected angles.  Valid while the subtended angle < pi,
    true here because output arcs are short and sources stay off the circle.
    """
    ea, eb = np.exp(1j * a), np.exp(1j * b)
    ang = np.angle((eb - z) / (ea - z))
    return (2 * ang - (b - a)) / (2 * np.pi)


# ---------------------------------------------------------------------------
# stationarity defect
# ---------------------------------------------------------------------------

def s_property_residual(K, mu, h=None, n_samples=17, end_exclusion=0.05):
    """Normal-derivative mismatch of the Green potential across the open arcs of K.

    Samples interior boundary points zeta, estimates the one-sided normal
    derivatives from G(zeta +/- h n) (G = 0 on K), and returns
    max |d+ - d-| / (|d+| + |d-| + 1e-30).
    """
    if h is None:
        h = 1e-4 * K.length_scale()
    ts = np.linspace(end_exclusion, 1 - end_exclusion, n_samples)
    zeta = K.boundary_points(ts)
    nrm = K.boundary_normals(ts)
    gp = green_potential(K, mu, zeta + h * nrm) / h
    gm = green_potential(K, mu, zeta - h * nrm) / h
    return float(np.max(np.abs(gp - gm) / (np.abs(gp) + np.abs(gm) + 1e-30)))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def measure_to_csv(mu, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["panel_left_re", "panel_left_im", "panel_right_re", "panel_right_im", "mass"])
        for (a, b), m in zip(mu.panels, mu.masses):
            wr.writerow([repr(a.real), repr(a.imag), repr(b.real), repr(b.imag), repr(float(m))])


def measure_from_csv(path, carrier="cheb-E"):
    rows = list(csv.reader(open(path)))
    panels = []
    masses = []
    for r in rows[1:]:
        panels.append([complex(float(r[0]), float(r[1])), complex(float(r[2]), float(r[3]))])
        masses.append(float(r[4]))
    return DiscreteMeasure(panels=np.array(panels), masses=np.array(masses), carrier=carrier)


def compact_to_json(K):
    if isinstance(K, Segment):
        return {
            "kind": "segment",
            "e1_re": K.e1.real, "e1_im": K.e1.imag,
            "e2_re": K.e2.real, "e2_im": K.e2.imag,
        }
    if isinstance(K, CirclineArc):
        return {"kind": "circline_arc", "b_re": K.b.real, "b_im": K.b.imag, "u": K.u}
    raise TypeError(f"unknown compact {K!r}")


def compact_from_json(data):
    if data["kind"] == "segment":
        return Segment(complex(data["e1_re"], data["e1_im"]), complex(data["e2_re"], data["e2_im"]))
    if data["kind"] == "circline_arc":
        return CirclineArc(complex(data["b_re"], data["b_im"]), data["u"])
    raise ValueError(f"unknown compact kind {data['kind']!r}")


def equilibrium_to_json(res):
    return {
        "theta": res.theta,
        "w": repr(res.w),
        "energy": repr(res.energy),
        "residual": repr(res.residual),
        "n_panels": res.n_panels,
        "compact": compact_to_json(res.compact),
    }


def equilibrium_json_bytes(res):
    return canonical_json_bytes(equilibrium_to_json(res))
