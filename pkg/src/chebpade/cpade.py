"""Linear (coefficient-system) and nonlinear (coefficient-matching) Chebyshev-Pade
approximants of type (L, M).

The linear scheme solves the homogeneous conditions c_k(Q f - P) = 0 for
k = 0..L+M: after eliminating the numerator (p_k = c_k(Q f) for k <= L) this
is an M x (M+1) null-space problem in the denominator coefficients, extracted
from an arbitrary-precision SVD.  The nonlinear scheme asks for a rational
function holomorphic on [-1,1] whose own Chebyshev coefficients match those of
f through index L+M; it is solved by a damped Newton iteration on the
coefficient mismatch, seeded from the linear solution.  The nonlinear
approximant may fail to exist; that outcome is reported, not raised.

All coefficient work is done with mpmath at the precision carried by the
input series.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf

from .chebseries import ChebSeries, TruncationError, clenshaw, product_coeff_from_list
from .numio import to_decimal


class DegenerateSeriesError(ValueError):
    """The input series is identically zero."""


class MultiplicityWarning(UserWarning):
    """The linear system has a null space of dimension > 1."""


@dataclass
class RationalApproximant:
    """p/q with Chebyshev-basis coefficient vectors (basis tag kept explicit)."""

    p_coeffs: list
    q_coeffs: list
    scheme: str  # "frobenius" | "baker"
    type_LM: tuple
    cond_estimate: float
    precision_bits: int
    residual: float
    basis: str = "chebyshev"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not any(c != 0 for c in self.q_coeffs):
            raise ValueError("denominator is identically zero")

    def eval(self, z):
        with mp.workprec(self.precision_bits + 16):
            if self.basis == "chebyshev":
                num = clenshaw(self.p_coeffs, z)
                den = clenshaw(self.q_coeffs, z)
            else:
                num = _horner(self.p_coeffs, z)
                den = _horner(self.q_coeffs, z)
            return num / den


@dataclass
class BakerNonexistence:
    """Normal terminal outcome when no pole-free coefficient match is found."""

    type_LM: tuple
    attempts: list  # (seed description, reason) pairs

    def __bool__(self):
        return False


def _horner(coeffs, z):
    acc = 0 * z
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _norm_proxy(a):
    """sum |a_k| bounds the sup norm of the series on [-1,1]."""
    return mp.fsum([abs(c) for c in a])


def _normalize_q(p, q):
    nrm = mp.sqrt(mp.fsum([c * c for c in q]))
    lead = next((c for c in reversed(q) if c != 0), None)
    sgn = 1 if lead > 0 else -1
    return [c * sgn / nrm for c in p], [c * sgn / nrm for c in q]


# ---------------------------------------------------------------------------
# linear scheme
# ---------------------------------------------------------------------------

def frobenius(f, L, M):
    """Type-(L,M) approximant from the linear coefficient conditions.

    Returns a RationalApproximant whose meta carries the singular values and,
    when the null space is degenerate, its full basis; ties are broken toward
    minimal denominator degree.
    """
    _require_length(f, L, M)
    a = f.coeffs
    prec = f.precision_bits
    with mp.workprec(prec):
        if all(c == 0 for c in a):
            raise DegenerateSeriesError("cannot approximate the zero series")
        if M == 0:
            p = list(a[: L + 1])
            return RationalApproximant(
                p_coeffs=p, q_coeffs=[mpf(1)], scheme="frobenius", type_LM=(L, M),
                cond_estimate=1.0, precision_bits=prec, residual=0.0,
            )
        A = mp.matrix(M, M + 1)
        for r in range(M):
            k = L + 1 + r
            for j in range(M + 1):
                A[r, j] = _product_kernel(a, k, j)
        U, S, V = mp.svd_r(A, full_matrices=True, compute_uv=True)
        svals = [S[i] for i in range(M)]
        tol = mpf(2) ** (-(prec // 2)) * max(svals[0], mpf(1))
        null_dim = 1 + sum(1 for s in svals if s <= tol)
        basis = [[V[M - d, j] for j in range(M + 1)] for d in range(null_dim)]
        if null_dim > 1:
            warnings.warn(
                f"null space of dimension {null_dim} for type {(L, M)}; "
                "returning the minimal-degree denominator",
                MultiplicityWarning,
            )
            q = _minimal_degree_vector(basis)
        else:
            q = basis[0]
        p = [product_coeff_from_list(a, q, k) for k in range(L + 1)]
        p, q = _normalize_q(p, q)
        resid = mpf(0)
        for r in range(M):
            k = L + 1 + r
            resid = max(resid, abs(mp.fsum([A[r, j] * q[j] for j in range(M + 1)])))
        kept = [s for s in svals if s > tol]
        cond = float(svals[0] / kept[-1]) if kept else float("inf")
        return RationalApproximant(
            p_coeffs=p, q_coeffs=q, scheme="frobenius", type_LM=(L, M),
            cond_estimate=cond, precision_bits=prec,
            residual=float(resid / _norm_proxy(a[: L + M + 1])),
            meta={
                "singular_values": [float(s) for s in svals],
                "null_dim": null_dim,
                "null_basis": basis if null_dim > 1 else None,
            },
        )


def _product_kernel(a, k, j):
    """Coefficient of T_k in T_j * f for k >= 1 (the T_0 weight doubles at j = k)."""

    def abar(i):
        i = abs(i)
        return 2 * a[0] if i == 0 else a[i]

    return (abar(k + j) + abar(k - j)) / 2


def _require_length(f, L, M):
    need = L + 2 * M + 1
    if len(f.coeffs) < need:
        raise TruncationError(
            f"type ({L},{M}) needs at least {need} series coefficients "
            f"(got {len(f.coeffs)}): indices up to L+2M = {L + 2 * M} enter the system"
        )


def _minimal_degree_vector(basis):
    """Eliminate top-degree entries across null vectors; keep the shortest."""
    rows = [list(v) for v in basis]
    col = len(rows[0]) - 1
    while len(rows) > 1 and col >= 0:
        piv = max(range(len(rows)), key=lambda i: abs(rows[i][col]))
        if abs(rows[piv][col]) == 0:
            col -= 1
            continue
        pr = rows.pop(piv)
        rows = [
            [r[i] - r[col] / pr[col] * pr[i] for i in range(len(r))] for r in rows
        ]
        col -= 1
    return rows[0]


# ---------------------------------------------------------------------------
# nonlinear scheme
# ---------------------------------------------------------------------------

class _QuadTable:
    """Chebyshev-Gauss nodes and the cos(k theta_m) table at working precision."""

    def __init__(self, n_nodes, kmax, prec):
        self.n = n_nodes
        with mp.workprec(prec):
            self.x = [mp.cos(mp.pi * (2 * m + 1) / (2 * n_nodes)) for m in range(n_nodes)]
            rows = [[mp.mpf(1)] * n_nodes]
            if kmax >= 1:
                rows.append(list(self.x))
            for _ in range(2, kmax + 1):
                prev, cur = rows[-2], rows[-1]
                rows.append([2 * self.x[m] * cur[m] - prev[m] for m in range(n_nodes)])
            self.cos = rows

    def coeffs(self, vals, kmax):
        out = []
        for k in range(kmax + 1):
            s = mp.fsum([vals[m] * self.cos[k][m] for m in range(self.n)])
            out.append(s / self.n if k == 0 else 2 * s / self.n)
        return out


def rational_cheb_coeffs(p, q, kmax, prec, n_nodes=None, table=None):
    """Chebyshev coefficients of p/q (Chebyshev-basis inputs) by quadrature."""
    with mp.workprec(prec):
        N = n_nodes or max(4 * (kmax + 2), 256)
        tb = table or _QuadTable(N, max(kmax, len(p) - 1, len(q) - 1), prec)
        vals = [
            clenshaw(p, tb.x[m]) / clenshaw(q, tb.x[m]) for m in range(tb.n)
        ]
        return tb.coeffs(vals, kmax)


def _poles_on_E(q, prec, tol=1e-9):
    rts = _q_roots(q, prec)
    return [r for r, _ in rts if abs(r.imag) < tol and -1 - tol <= r.real <= 1 + tol]


def baker(f, spec=None, L=None, M=None, max_steps=50):
    """Nonlinear type-(L,M) approximant, or a nonexistence report.

    Newton iteration on the coefficient mismatch with the largest denominator
    coefficient frozen; seeds are the linear solution, the linear solution of
    type (L-1, M-1), and the pole-free constant-denominator projection.  The
    `spec` argument is accepted for interface compatibility; the matching
    target is the coefficient series itself.
    """
    if L is None or M is None:
        raise TypeError("baker requires explicit L and M")
    _require_length(f, L, M)
    prec = f.precision_bits
    attempts = []
    with mp.workprec(prec):
        a = f.coeffs
        if all(c == 0 for c in a):
            raise DegenerateSeriesError("cannot approximate the zero series")
        tol = mpf(2) ** (-(prec // 2)) * _norm_proxy(a[: L + M + 1])
        for seed_name, seed in _baker_seeds(f, L, M):
            epoles = _poles_on_E(seed[1], prec)
            if epoles:
                attempts.append((seed_name, f"seed has poles on [-1,1] near {epoles[:3]}"))
                continue
            result = _newton_match(a, seed, L, M, prec, tol, max_steps)
            if result is None:
                attempts.append((seed_name, "Newton did not converge"))
                continue
            p, q, resid, steps = result
            epoles = _poles_on_E(q, prec)
            if epoles:
                attempts.append((seed_name, f"converged solution has poles on [-1,1]: {epoles[:3]}"))
                continue
            p, q = _normalize_q(p, q)
            return RationalApproximant(
                p_coeffs=p, q_coeffs=q, scheme="baker", type_LM=(L, M),
                cond_estimate=float("nan"), precision_bits=prec,
                residual=float(resid / _norm_proxy(a[: L + M + 1])),
                meta={"newton_steps": steps, "seed": seed_name},
            )
    return BakerNonexistence(type_LM=(L, M), attempts=attempts)


def _baker_seeds(f, L, M):
    try:
        fr = frobenius(f, L, M)
        yield "frobenius", (list(fr.p_coeffs), list(fr.q_coeffs))
    except Exception as exc:  # degenerate linear problem: fall through to other seeds
        yield "frobenius", ([mpf(0)], [mpf(1)])
    if L >= 1 and M >= 1:
        try:
            fr = frobenius(f, L - 1, M - 1)
            yield "frobenius(L-1,M-1)", (
                list(fr.p_coeffs) + [mpf(0)],
                list(fr.q_coeffs) + [mpf(0)],
            )
        except Exception:
            pass
    # polynomial projection with unit denominator
    yield "q=1", (list(f.coeffs[: L + 1]), [mpf(1)] + [mpf(0)] * M)


def _newton_match(a, seed, L, M, prec, tol, max_steps):
    n_eq = L + M + 1
    with mp.workprec(prec):
        N = max(4 * (n_eq + 1), 256)
        table = _QuadTable(N, max(n_eq, L, M), prec)
        target = a[:n_eq]
        p = list(seed[0]) + [mpf(0)] * (L + 1 - len(seed[0]))
        q = list(seed[1]) + [mpf(0)] * (M + 1 - len(seed[1]))
        jstar = max(range(M + 1), key=lambda j: abs(q[j]))

        def residual(p_, q_):
            qv = [clenshaw(q_, x) for x in table.x]
            if any(v == 0 for v in qv):
                return None, None, None
            pv = [clenshaw(p_, x) for x in table.x]
            ck = table.coeffs([pv[m] / qv[m] for m in range(N)], n_eq - 1)
            return [ck[k] - target[k] for k in range(n_eq)], qv, pv

        r, qv, pv = residual(p, q)
        if r is None:
            return None
        rnorm = max(abs(t) for t in r)
        steps = 0
        while rnorm > tol and steps < max_steps:
            u = [1 / qv[m] for m in range(N)]
            v = [pv[m] * u[m] * u[m] for m in range(N)]
            J = mp.matrix(n_eq, n_eq)
            c = 0
            for j in range(L + 1):
                col = table.coeffs([table.cos[j][m] * u[m] for m in range(N)], n_eq - 1)
                for rix in range(n_eq):
                    J[rix, c] = col[rix]
                c += 1
            for j in range(M + 1):
                if j == jstar:
                    continue
                col = table.coeffs([-table.cos[j][m] * v[m] for m in range(N)], n_eq - 1)
                for rix in range(n_eq):
                    J[rix, c] = col[rix]
                c += 1
            try:
                delta = mp.lu_solve(J, mp.matrix([[-t] for t in r]))
            except ZeroDivisionError:
                return None
            lam = mpf(1)
            improved = False
            for _ in range(12):
                p_new = [p[j] + lam * delta[j] for j in range(L + 1)]
                q_new = list(q)
                c = L + 1
                for j in range(M + 1):
                    if j == jstar:
                        continue
                    q_new[j] = q[j] + lam * delta[c]
                    c += 1
                r_new, qv_new, pv_new = residual(p_new, q_new)
                if r_new is not None and max(abs(t) for t in r_new) < rnorm:
                    improved = True
                    break
                lam /= 2
            if not improved:
                return None
            p, q, r, qv, pv = p_new, q_new, r_new, qv_new, pv_new
            rnorm = max(abs(t) for t in r)
            steps += 1
        if rnorm > tol:
            return None
        return p, q, rnorm, steps


# ---------------------------------------------------------------------------
# poles
# ---------------------------------------------------------------------------

def _cheb_to_mono(c):
    n = len(c)
    out = [mp.mpf(0)] * n
    out[0] = c[0]
    if n > 1:
        out[1] += c[1]
    tprev = [mp.mpf(1)]
    tcur = [mp.mpf(0), mp.mpf(1)]
    for k in range(2, n):
        tnext = [mp.mpf(0)] * (k + 1)
        for i, t in enumerate(tcur):
            tnext[i + 1] += 2 * t
        for i, t in enumerate(tprev):
            tnext[i] -= t
        for i, t in enumerate(tnext):
            out[i] += c[k] * t
        tprev, tcur = tcur, tnext
    return out


def _q_roots(q, prec, basis="chebyshev"):
    """Roots of the denominator with multiplicities, at working precision."""
    with mp.workprec(prec):
        mono = _cheb_to_mono([mpf(c) for c in q]) if basis == "chebyshev" else [mpf(c) for c in q]
        top = max(abs(c) for c in mono)
        if top == 0:
            return []
        cut = mpf(2) ** (-(prec * 3 // 4)) * top
        while mono and abs(mono[-1]) <= cut:
            mono.pop()
        if len(mono) <= 1:
            return []
        try:
            roots = mp.polyroots(list(reversed(mono)), maxsteps=200, extraprec=prec)
            roots = [complex(r) for r in roots]
        except (mp.libmp.NoConvergence, ZeroDivisionError):
            qd = np.array([float(c) for c in q])
            roots = (
                list(np.polynomial.chebyshev.chebroots(qd))
                if basis == "chebyshev"
                else list(np.roots(qd[::-1]))
            )
            roots = [complex(r) for r in roots]
    return _cluster_roots(roots, prec)


def _cluster_roots(roots, prec):
    tol = max(1e-8, 2.0 ** (-(prec // 4)))
    scale = max([1.0] + [abs(r) for r in roots])
    out = []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        group = [r]
        used[i] = True
        for j in range(i + 1, len(roots)):
            if not used[j] and abs(roots[j] - r) < tol * scale:
                group.append(roots[j])
                used[j] = True
        center = sum(group) / len(group)
        out.append((center, len(group)))
    out.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return out


def poles(r):
    """Poles of the approximant with multiplicities: the roots of its denominator."""
    return _q_roots(r.q_coeffs, r.precision_bits, basis=r.basis)


def pole_list(r):
    """Poles repeated by multiplicity (flat list)."""
    out = []
    for z, m in poles(r):
        out.extend([z] * m)
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def approximant_to_json(r):
    return {
        "scheme": r.scheme,
        "basis": r.basis,
        "L": r.type_LM[0],
        "M": r.type_LM[1],
        "precision_bits": r.precision_bits,
        "cond_estimate": repr(r.cond_estimate),
        "residual": repr(float(r.residual)),
        "p_coeffs": [to_decimal(c, r.precision_bits) for c in r.p_coeffs],
        "q_coeffs": [to_decimal(c, r.precision_bits) for c in r.q_coeffs],
    }


def approximant_from_json(data):
    from .numio import from_decimal

    bits = int(data["precision_bits"])
    return RationalApproximant(
        p_coeffs=[from_decimal(s, bits) for s in data["p_coeffs"]],
        q_coeffs=[from_decimal(s, bits) for s in data["q_coeffs"]],
        scheme=data["scheme"],
        type_LM=(int(data["L"]), int(data["M"])),
        cond_estimate=float(data["cond_estimate"]),
        precision_bits=bits,
        residual=float(data["residual"]),
        basis=data.get("basis", "chebyshev"),
    )
