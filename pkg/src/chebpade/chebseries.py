"""Truncated Chebyshev expansions of a small catalog of real algebraic functions.

Coefficients are stored in the classical normalization, f = sum_k a_k T_k with
T_k(cos t) = cos(k t).  The orthonormal-basis coefficients (weight
(1-x^2)^(-1/2), unit norm) relate by c_0 = sqrt(pi) a_0, c_k = sqrt(pi/2) a_k
for k >= 1; `to_orthonormal`/`from_orthonormal` convert.  All linear and
nonlinear approximant constructions downstream are zero conditions on the
coefficients, hence normalization-invariant.

Everything is computed with mpmath at a caller-chosen bit precision.
"""

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc

from .numio import from_decimal, to_decimal


class InvalidFunctionError(ValueError):
    """The function spec cannot be evaluated where required (cut meets [-1,1], ...)."""


class NearSingularityError(ValueError):
    """Evaluation point is within numerical distance of a cut or branch point."""


class TruncationError(ValueError):
    """A series is too short for the requested operation."""


_SING_MARGIN = 1e-12


# ---------------------------------------------------------------------------
# function catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkovUniform:
    """Cauchy transform of the uniform density on a real segment [c,d] off [-1,1].

    f(z) = int_c^d dt/(t-z) = log((d-z)/(c-z)), real and single-valued off [c,d].
    """

    c: float
    d: float

    def __post_init__(self):
        if not self.c < self.d:
            raise InvalidFunctionError("need c < d")
        if self.c <= 1 and self.d >= -1:
            raise InvalidFunctionError("[c,d] must be disjoint from [-1,1]")

    def branch_points(self):
        return [mpc(self.c), mpc(self.d)]

    def eval_real(self, x):
        return mp.log((mpf(self.d) - x) / (mpf(self.c) - x))

    def eval_complex(self, z, cut=None):
        # principal log((d-z)/(c-z)) has its cut exactly on [c,d]
        c, d = mpf(self.c), mpf(self.d)
        if abs(z - c) < _SING_MARGIN or abs(z - d) < _SING_MARGIN:
            raise NearSingularityError(f"z={z} too close to a branch point of {self}")
        if abs(mp.im(z)) < _SING_MARGIN and c <= mp.re(z) <= d:
            raise NearSingularityError(f"z={z} on the cut [{self.c},{self.d}]")
        return mp.log((d - z) / (c - z))


@dataclass(frozen=True)
class SqrtConjPair:
    """sqrt((z-b)(z-conj(b))), Im b > 0, branch positive on [-1,1].

    Off the segment the branch is single-valued in the complement of any
    circline arc joining b and conj(b) that avoids [-1,1]; the arc is selected
    by the `cut` argument of eval_complex (default: the arc through infinity).
    """

    b: complex

    def __post_init__(self):
        if not complex(self.b).imag > 0:
            raise InvalidFunctionError("need Im b > 0")
        if abs(complex(self.b).imag) < 1e-9:
            raise InvalidFunctionError("branch point on the real axis")

    def branch_points(self):
        b = mpc(self.b)
        return [b, mp.conj(b)]

    def eval_real(self, x):
        # (x-b)(x-conj b) = |x-b|^2 on the real axis
        b = mpc(self.b)
        return mp.sqrt((x - b.real) ** 2 + b.imag**2)

    def eval_complex(self, z, cut=None):
        b = mpc(self.b)
        u = _cut_parameter(self, cut)
        if min(abs(z - b), abs(z - mp.conj(b))) < _SING_MARGIN:
            raise NearSingularityError(f"z={z} too close to a branch point of {self}")
        # Moebius m(z) = (z-b)/(z-conj b) sends the cut arc to a ray from 0;
        # a square root with the branch ray at phi0 = arg m(cut point) is then
        # discontinuous exactly on the arc.
        m = (z - b) / (z - mp.conj(b))
        phi0 = _ray_angle(b, u)
        a = mp.arg(m)
        while a > phi0:
            a -= 2 * mp.pi
        while a <= phi0 - 2 * mp.pi:
            a += 2 * mp.pi
        if phi0 - a < _SING_MARGIN or a - (phi0 - 2 * mp.pi) < _SING_MARGIN:
            raise NearSingularityError(f"z={z} within numerical distance of the cut")
        val = (z - mp.conj(b)) * mp.sqrt(abs(m)) * mp.exp(mpc(0, a / 2))
        # global sign: positive at x = 0
        m0 = (-b) / (-mp.conj(b))
        a0 = mp.arg(m0)
        while a0 > phi0:
            a0 -= 2 * mp.pi
        while a0 <= phi0 - 2 * mp.pi:
            a0 += 2 * mp.pi
        val0 = (-mp.conj(b)) * mp.sqrt(abs(m0)) * mp.exp(mpc(0, a0 / 2))
        return val if mp.re(val0) > 0 else -val


@dataclass(frozen=True)
class CbrtTriple:
    """Real branch of ((z-b)(z-conj b)(z-a))^(1/3) with a real, |a| > 1.

    On [-1,1] this is the real cube root; off the segment the value is the
    straight-path continuation from x = 0, with factor arguments tracked so
    that cut crossings are detected by argument jumps.
    """

    b: complex
    a: float

    def __post_init__(self):
        if not complex(self.b).imag > 0:
            raise InvalidFunctionError("need Im b > 0")
        if abs(self.a) <= 1:
            raise InvalidFunctionError("need the real branch point outside [-1,1]")

    def branch_points(self):
        b = mpc(self.b)
        return [b, mp.conj(b), mpc(self.a)]

    def eval_real(self, x):
        b = mpc(self.b)
        v = (x - mpf(self.a)) * ((x - b.real) ** 2 + b.imag**2)
        r = mp.cbrt(abs(v))
        return r if v >= 0 else -r

    def eval_complex(self, z, cut=None):
        pts = self.branch_points()
        for bp in pts:
            if _dist_point_segment(bp, mpc(0), z) < _SING_MARGIN:
                raise NearSingularityError(f"path from 0 to z={z} passes branch point {bp}")
        args = [mp.arg(-bp) for bp in pts]  # factor arguments at z = 0
        total0 = mp.fsum(args)
        # track each factor's argument along the straight path from 0 to z
        t, cur = mpf(0), mpc(0)
        while t < 1:
            step = 1 - t
            while True:
                nxt = cur + step * (z - cur) / (1 - t) if t < 1 else z
                incs = [mp.arg((nxt - pts[i]) / (cur - pts[i])) for i in range(3)]
                if max(abs(i_) for i_ in incs) < mp.pi / 2 or step < 1e-14:
                    break
                step /= 2
            for i in range(3):
                args[i] += incs[i]
            t, cur = t + step, nxt
        argtot = mp.fsum(args)
        if abs(total0 - 0) > 0.1:  # v(0) < 0: real cube root needs arg(f(0)) = pi
            argtot += 2 * mp.pi
        v = (z - pts[0]) * (z - pts[1]) * (z - pts[2])
        return mp.cbrt(abs(v)) * mp.exp(mpc(0, argtot / 3))


@dataclass(frozen=True)
class Rational:
    """p(z)/q(z) with real monomial coefficients (ascending powers)."""

    p_coeffs: tuple
    q_coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "p_coeffs", tuple(float(c) for c in self.p_coeffs))
        object.__setattr__(self, "q_coeffs", tuple(float(c) for c in self.q_coeffs))
        if not any(c != 0 for c in self.q_coeffs):
            raise InvalidFunctionError("q must not be identically zero")
        for r in self.pole_locations():
            if abs(r.imag) < 1e-9 and -1 - 1e-9 <= r.real <= 1 + 1e-9:
                raise InvalidFunctionError(f"pole {r} on [-1,1]")

    def pole_locations(self):
        import numpy as np

        q = np.trim_zeros(np.asarray(self.q_coeffs, dtype=float), "b")
        if len(q) <= 1:
            return []
        return list(np.roots(q[::-1]))

    def branch_points(self):
        return []

    def eval_real(self, x):
        return _horner(self.p_coeffs, x) / _horner(self.q_coeffs, x)

    def eval_complex(self, z, cut=None):
        qv = _horner(self.q_coeffs, z)
        if abs(qv) == 0:
            raise NearSingularityError(f"z={z} is a pole")
        return _horner(self.p_coeffs, z) / qv


@dataclass(frozen=True)
class FunctionSum:
    """Pointwise sum of catalog functions."""

    parts: tuple

    def __post_init__(self):
        if len(self.parts) == 0:
            raise InvalidFunctionError("empty sum")
        object.__setattr__(self, "parts", tuple(self.parts))

    def branch_points(self):
        out = []
        for p in self.parts:
            out.extend(p.branch_points())
        return out

    def eval_real(self, x):
        return mp.fsum([p.eval_real(x) for p in self.parts])

    def eval_complex(self, z, cut=None):
        return mp.fsum([p.eval_complex(z, cut) for p in self.parts])


def _horner(coeffs, x):
    acc = x * 0
    for c in reversed(coeffs):
        acc = acc * x + mpf(c)
    return acc


def _dist_point_segment(p, a, b):
    ab = b - a
    if abs(ab) == 0:
        return abs(p - a)
    t = mp.re(mp.conj(ab) * (p - a)) / abs(ab) ** 2
    t = min(max(t, mpf(0)), mpf(1))
    return abs(p - (a + t * ab))


def _cut_parameter(spec, cut):
    """Arc parameter u of the cut for a SqrtConjPair; default u = 0 (arc through inf)."""
    if cut is None:
        return mpf(0)
    u = getattr(cut, "u", None)
    bcut = getattr(cut, "b", None)
    if u is None or bcut is None:
        raise InvalidFunctionError(
            "square-root continuation needs a circline-arc cut through its branch points"
        )
    if abs(mpc(bcut) - mpc(spec.b)) > 1e-9:
        raise InvalidFunctionError("cut endpoints do not match the branch points")
    return mpf(u)


def _ray_angle(b, u):
    """arg of (p-b)/(p-conj b) at the real cut point p = 1/u (p = inf for u = 0)."""
    if u == 0:
        return mpf(0)
    p = 1 / mpf(u)
    return mp.arg((p - b) / (p - mp.conj(b)))


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

@dataclass
class ChebSeries:
    """Truncated expansion sum_{k<=trunc_degree} a_k T_k at a fixed bit precision."""

    coeffs: list
    precision_bits: int
    trunc_degree: int = field(default=-1)

    def __post_init__(self):
        if self.trunc_degree < 0:
            self.trunc_degree = len(self.coeffs) - 1
        if len(self.coeffs) != self.trunc_degree + 1:
            raise ValueError("len(coeffs) must equal trunc_degree + 1")
        for c in self.coeffs:
            if not mp.isfinite(c):
                raise ValueError("non-finite coefficient")

    def __len__(self):
        return len(self.coeffs)


def cheb_nodes(n_nodes, prec):
    """Chebyshev-Gauss nodes cos((2m+1)pi/2N) and their angles, high precision."""
    with mp.workprec(prec):
        thetas = [mp.pi * (2 * m + 1) / (2 * n_nodes) for m in range(n_nodes)]
        return [mp.cos(t) for t in thetas], thetas


def cheb_coeffs(spec, degree, precision_bits, n_nodes=None):
    """Chebyshev coefficients of a catalog function by Chebyshev-Gauss quadrature.

    Uses N = max(4*(degree+1), 256) nodes unless overridden.  The quadrature is
    exact on polynomials; for analytic f the coefficient error is the aliasing
    of the tail, |a_k - a_k^N| <= sum_{m>=1} (|a_{2Nm-k}| + |a_{2Nm+k}|), which
    decays like rho(f)^(-(2N-k)) in terms of the largest ellipse of holomorphy.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    N = n_nodes or max(4 * (degree + 1), 256)
    if N < 4 * (degree + 1):
        raise ValueError("need at least 4*(degree+1) quadrature nodes")
    with mp.workprec(precision_bits + 16):
        xs, _ = cheb_nodes(N, precision_bits + 16)
        try:
            vals = [spec.eval_real(x) for x in xs]
        except (NearSingularityError, ZeroDivisionError) as exc:
            raise InvalidFunctionError(f"evaluation failed on a quadrature node: {exc}")
        for v in vals:
            if not mp.isfinite(v):
                raise InvalidFunctionError("non-finite value on a quadrature node")
        coeffs = _cosine_sums(vals, xs, degree, N)
    return ChebSeries(coeffs=coeffs, precision_bits=precision_bits)


def _cosine_sums(vals, xs, degree, N):
    """a_k = (2 - delta_k0)/N * sum_m vals_m cos(k theta_m) via the T_k recurrence."""
    sums = [mp.mpf(0)] * (degree + 1)
    for m in range(N):
        x = xs[m]
        v = vals[m]
        tk_prev, tk = mp.mpf(1), x
        sums[0] += v
        if degree >= 1:
            sums[1] += v * x
        for k in range(2, degree + 1):
            tk_prev, tk = tk, 2 * x * tk - tk_prev
            sums[k] += v * tk
    return [sums[0] / N] + [2 * s / N for s in sums[1:]]


def eval_on_E(series, x):
    """Clenshaw evaluation of the truncated series at x in [-1,1]."""
    if abs(x) > 1 + 1e-15:
        raise ValueError("eval_on_E requires |x| <= 1")
    with mp.workprec(series.precision_bits + 16):
        return clenshaw(series.coeffs, mpf(x))


def clenshaw(coeffs, x):
    """sum_k coeffs[k] T_k(x) for real or complex x (caller sets precision)."""
    if len(coeffs) == 1:
        return coeffs[0] + 0 * x
    b1 = b2 = 0 * x
    for c in reversed(coeffs[1:]):
        b1, b2 = 2 * x * b1 - b2 + c, b1
    return x * b1 - b2 + coeffs[0]


def eval_continuation(spec, z, cut=None, precision_bits=64):
    """Value of the single-valued branch of f off the cut, real on [-1,1]."""
    with mp.workprec(precision_bits + 16):
        return spec.eval_complex(mpc(z), cut)


def series_product_coeff(f_series, q_coeffs, k):
    """Coefficient of T_k in Q*f from the linearization T_i T_j = (T_{i+j} + T_{|i-j|})/2.

    q_coeffs are classical Chebyshev coefficients of Q.  Needs the series of f
    up to index k + deg(Q).
    """
    a = f_series.coeffs
    dq = len(q_coeffs) - 1
    if k < 0:
        raise ValueError("k must be >= 0")
    if k + dq > f_series.trunc_degree:
        raise TruncationError(
            f"series of degree {f_series.trunc_degree} too short: need index {k + dq}"
        )
    with mp.workprec(f_series.precision_bits + 16):
        return product_coeff_from_list(a, q_coeffs, k)


def product_coeff_from_list(a, q_coeffs, k):
    """Same as series_product_coeff on raw lists; caller manages precision.

    For k >= 1 the T_0 coefficient enters the convolution with doubled weight
    (both linearization terms of T_k T_k hit it); k = 0 is its own case.
    """

    def abar(i):
        i = abs(i)
        return 2 * a[0] if i == 0 else a[i]

    if k == 0:
        return q_coeffs[0] * a[0] + mp.fsum(
            [q_coeffs[j] * a[j] for j in range(1, len(q_coeffs))]
        ) / 2
    return mp.fsum(
        [q_coeffs[j] * (abar(k + j) + abar(k - j)) for j in range(len(q_coeffs))]
    ) / 2


def to_orthonormal(series):
    """Classical a_k -> coefficients in the unit-norm weighted Chebyshev basis."""
    with mp.workprec(series.precision_bits + 16):
        out = [mp.sqrt(mp.pi) * series.coeffs[0]]
        out.extend(mp.sqrt(mp.pi / 2) * c for c in series.coeffs[1:])
        return out


def from_orthonormal(coeffs, precision_bits):
    """Inverse of to_orthonormal; returns a ChebSeries in classical normalization."""
    with mp.workprec(precision_bits + 16):
        cl = [coeffs[0] / mp.sqrt(mp.pi)]
        cl.extend(c / mp.sqrt(mp.pi / 2) for c in coeffs[1:])
    return ChebSeries(coeffs=cl, precision_bits=precision_bits)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def series_to_json(series):
    return {
        "normalization": "classical",
        "precision_bits": series.precision_bits,
        "coeffs": [to_decimal(c, series.precision_bits) for c in series.coeffs],
    }


def series_from_json(data):
    if data.get("normalization") != "classical":
        raise ValueError("only classical normalization files are supported")
    bits = int(data["precision_bits"])
    coeffs = [from_decimal(s, bits) for s in data["coeffs"]]
    return ChebSeries(coeffs=coeffs, precision_bits=bits)


def spec_to_json(spec):
    """Serializable description of a catalog function."""
    if isinstance(spec, MarkovUniform):
        return {"kind": "markov_uniform", "c": spec.c, "d": spec.d}
    if isinstance(spec, SqrtConjPair):
        b = complex(spec.b)
        return {"kind": "sqrt_conj_pair", "b_re": b.real, "b_im": b.imag}
    if isinstance(spec, CbrtTriple):
        b = complex(spec.b)
        return {"kind": "cbrt_triple", "b_re": b.real, "b_im": b.imag, "a": spec.a}
    if isinstance(spec, Rational):
        return {"kind": "rational", "p": list(spec.p_coeffs), "q": list(spec.q_coeffs)}
    if isinstance(spec, FunctionSum):
        return {"kind": "sum", "parts": [spec_to_json(p) for p in spec.parts]}
    raise TypeError(f"unknown spec {spec!r}")


def spec_from_json(data):
    kind = data["kind"]
    if kind == "markov_uniform":
        return MarkovUniform(float(data["c"]), float(data["d"]))
    if kind == "sqrt_conj_pair":
        return SqrtConjPair(complex(float(data["b_re"]), float(data["b_im"])))
    if kind == "cbrt_triple":
        return CbrtTriple(complex(float(data["b_re"]), float(data["b_im"])), float(data["a"]))
    if kind == "rational":
        return Rational(tuple(data["p"]), tuple(data["q"]))
    if kind == "sum":
        return FunctionSum(tuple(spec_from_json(p) for p in data["parts"]))
    raise ValueError(f"unknown spec kind {kind!r}")
