"""End-to-end verification of convergence-rate and pole-distribution predictions.

The potential-theoretic prediction: off E and off the relevant compact F,

    |f - f_n|^(1/2n)  ->  exp(-G_F^{lambda(theta)}(z)) < 1,

with theta = 1 for the nonlinear scheme and theta = 3 for the linear one, and
the normalized pole counting measures of the denominators converge weakly to
the balayage of lambda(theta) onto F.  Both statements are limit theorems;
this module measures finite-n surrogates: per-point rate ratios at the largest
computed order, a pole-neighborhood capacity filter standing in for
convergence in capacity, and a Kolmogorov-Smirnov distance along F for the
pole clouds.
"""

from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpc, mpf

from . import chebseries as cs
from . import cpade
from . import equilibrium as eq


@dataclass
class RateReport:
    scheme: str
    theta: float
    n_list: list
    test_points: list
    observed: dict        # (n, point_index) -> float, only where defined
    predicted: list       # per point, exp(-Green potential)
    excluded: list        # (n, point_index, reason)
    exact_regime: list    # (n, point_index) pairs where f - f_n is at noise level
    skipped_n: list       # (n, reason) for nonexistent approximants
    summary: dict         # point_index -> |observed(n_last)/predicted - 1|
    n_last: int = 0


@dataclass
class PoleDistributionReport:
    scheme: str
    theta: float
    n_list: list
    poles: dict                 # n -> list of complex poles (with multiplicity)
    balayage_reference: object  # DiscreteMeasure on F
    distances: dict             # n -> KS distance along F
    spurious: dict              # n -> count of poles farther than the threshold
    far_threshold: float


def default_test_points(F, count=16, radius=1.8, min_dist=0.05):
    """Points on a circle around E, dropping any too close to E or to F."""
    pts = [radius * np.exp(2j * np.pi * k / count) for k in range(count)]
    keep = []
    for z in pts:
        dE = float(eq._dist_to_E(np.array([z]))[0])
        dF = float(np.atleast_1d(F.distance_to(np.array([z])))[0])
        if dE >= min_dist and dF >= min_dist:
            keep.append(complex(z))
    return keep


def build_approximants(series, spec, scheme, n_list):
    """Type (n-1, n) approximants for each n; nonexistence recorded, not raised."""
    out = {}
    for n in n_list:
        if scheme == "frobenius":
            out[n] = cpade.frobenius(series, n - 1, n)
        elif scheme == "baker":
            out[n] = cpade.baker(series, spec, n - 1, n)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return out


def measure_rates(
    spec, scheme, theta, F, lam, n_list, test_points=None, delta_cap=1e-2,
    precision_bits=512, approximants=None, series=None,
):
    """Observed root-errors against the Green-potential prediction.

    observed(n, z) = |f(z) - f_n(z)|^(1/2n); pairs with z within delta_cap of a
    pole of f_n are excluded (the pragmatic reading of convergence in
    capacity); pairs where f - f_n sits at the precision floor are flagged as
    the exact regime and not compared.
    """
    test_points = test_points or default_test_points(F)
    for z in test_points:
        dE = float(eq._dist_to_E(np.array([z]))[0])
        dF = float(np.atleast_1d(F.distance_to(np.array([z])))[0])
        if min(dE, dF) < 0.05 - 1e-12:
            raise ValueError(f"test point {z} within 0.05 of E or F")
    if series is None:
        series = cs.cheb_coeffs(spec, 3 * max(n_list) - 1, precision_bits)
    if approximants is None:
        approximants = build_approximants(series, spec, scheme, n_list)
    pred = np.exp(-eq.green_potential(F, lam, np.array(test_points, dtype=complex)))
    observed, excluded, exact, skipped = {}, [], [], []
    existing = []
    cut = F if isinstance(F, eq.CirclineArc) else None
    with mp.workprec(precision_bits + 16):
        fvals = [spec.eval_complex(mpc(z), cut) for z in test_points]
        floor = mpf(2) ** (-(precision_bits // 2))
        for n in n_list:
            r = approximants[n]
            if isinstance(r, cpade.BakerNonexistence):
                skipped.append((n, "nonexistent: " + "; ".join(s for s, _ in r.attempts)))
                continue
            existing.append(n)
            pls = cpade.pole_list(r)
            for i, z in enumerate(test_points):
                if pls and min(abs(complex(z) - pp) for pp in pls) < delta_cap:
                    excluded.append((n, i, "pole within delta_cap"))
                    continue
                try:
                    err = abs(fvals[i] - r.eval(mpc(z)))
                except ZeroDivisionError:
                    excluded.append((n, i, "evaluation overflow"))
                    continue
                if not mp.isfinite(err):
                    excluded.append((n, i, "evaluation overflow"))
                    continue
                if err <= floor * max(1, abs(fvals[i])):
                    exact.append((n, i))
                    continue
                observed[(n, i)] = float(err ** (mpf(1) / (2 * n)))
    n_last = max(existing) if existing else 0
    summary = {}
    for i in range(len(test_points)):
        if (n_last, i) in observed and pred[i] > 0:
            summary[i] = abs(observed[(n_last, i)] / float(pred[i]) - 1)
    return RateReport(
        scheme=scheme, theta=float(theta), n_list=list(n_list),
        test_points=[complex(z) for z in test_points], observed=observed,
        predicted=[float(p) for p in pred], excluded=excluded, exact_regime=exact,
        skipped_n=skipped, summary=summary, n_last=n_last,
    )


def pole_distribution(
    spec, scheme, theta, F, lam, n_list, approximants=None, series=None,
    precision_bits=512, far_threshold=0.5, ref_panels=256,
):
    """Pole clouds against the balayage of lambda(theta) onto F.

    Poles within far_threshold of F are projected to F's parameter and
    compared with the swept measure through a KS distance of cumulative
    distributions; farther poles count as spurious.
    """
    if series is None:
        series = cs.cheb_coeffs(spec, 3 * max(n_list) - 1, precision_bits)
    if approximants is None:
        approximants = build_approximants(series, spec, scheme, n_list)
    ref = eq.balayage(lam, F, n_panels=ref_panels)
    s_edges = -np.cos(np.arange(ref_panels + 1) * np.pi / ref_panels)
    ref_cdf = np.concatenate([[0.0], np.cumsum(ref.masses)])
    poles, distances, spurious = {}, {}, {}
    for n in n_list:
        r = approximants[n]
        if isinstance(r, cpade.BakerNonexistence):
            continue
        pls = cpade.pole_list(r)
        poles[n] = pls
        dists = np.atleast_1d(F.distance_to(np.array(pls, dtype=complex))) if pls else np.array([])
        near = [p for p, d in zip(pls, dists) if d <= far_threshold]
        spurious[n] = len(pls) - len(near)
        if near:
            s = np.sort(np.atleast_1d(F.param_of(np.array(near, dtype=complex))))
            emp = np.searchsorted(s, s_edges, side="right") / n
            distances[n] = float(np.max(np.abs(emp - ref_cdf)))
        else:
            distances[n] = 1.0
    return PoleDistributionReport(
        scheme=scheme, theta=float(theta), n_list=list(n_list), poles=poles,
        balayage_reference=ref, distances=distances, spurious=spurious,
        far_threshold=far_threshold,
    )


def spearman(xs, ys):
    """Rank correlation with midranks; the trend statistic for KS-vs-n decay."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)

    def ranks(v):
        order = np.argsort(v)
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1)
        for val in np.unique(v):
            m = v == val
            if m.sum() > 1:
                r[m] = r[m].mean()
        return r

    rx, ry = ranks(xs), ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx**2).sum() * (ry**2).sum())
    return float((rx * ry).sum() / denom) if denom > 0 else 0.0


@dataclass
class TheoremASuite:
    c: float
    d: float
    n_list: list
    rate_reports: dict = field(default_factory=dict)   # scheme -> RateReport
    pole_reports: dict = field(default_factory=dict)   # scheme -> PoleDistributionReport
    equilibria: dict = field(default_factory=dict)     # theta -> EquilibriumResult
    filter_fraction: dict = field(default_factory=dict)


_SCHEME_THETA = {"baker": 1.0, "frobenius": 3.0}


def markov_theoremA_suite(
    c, d, n_max, n_list=None, precision_bits=512, n_panels=256,
    test_points=None, delta_cap=1e-2, max_filtered_fraction=0.2,
):
    """Full pipeline for a uniform-density Markov function with F = [c,d].

    Runs both schemes at their respective theta, with the compact fixed to the
    support segment; nonexistent nonlinear approximants are skipped and
    recorded.  Fails loudly when the capacity filter eats more than the
    allowed fraction of (n, point) pairs, which signals spurious-pole
    pathology or precision exhaustion.
    """
    spec = cs.MarkovUniform(c, d)
    F = eq.Segment(c, d)
    if n_list is None:
        n_list = list(range(10, n_max + 1, 2))
    series = cs.cheb_coeffs(spec, 3 * max(n_list) - 1, precision_bits)
    suite = TheoremASuite(c=c, d=d, n_list=list(n_list))
    for scheme, theta in _SCHEME_THETA.items():
        lam = eq.solve_equilibrium(F, theta, n_panels=n_panels)
        suite.equilibria[theta] = lam
        approx = build_approximants(series, spec, scheme, n_list)
        rr = measure_rates(
            spec, scheme, theta, F, lam.measure, n_list, test_points=test_points,
            delta_cap=delta_cap, precision_bits=precision_bits,
            approximants=approx, series=series,
        )
        pr = pole_distribution(
            spec, scheme, theta, F, lam.measure, n_list,
            approximants=approx, series=series, precision_bits=precision_bits,
        )
        suite.rate_reports[scheme] = rr
        suite.pole_reports[scheme] = pr
        n_existing = len(n_list) - len(rr.skipped_n)
        total_pairs = n_existing * len(rr.test_points)
        frac = len(rr.excluded) / total_pairs if total_pairs else 0.0
        suite.filter_fraction[scheme] = frac
        if frac > max_filtered_fraction:
            raise RuntimeError(
                f"capacity filter removed {frac:.0%} of pairs for {scheme} "
                f"(limit {max_filtered_fraction:.0%}): spurious-pole pathology "
                "or precision exhaustion"
            )
    return suite


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def rate_report_to_json(rr):
    return {
        "scheme": rr.scheme,
        "theta": rr.theta,
        "n_list": rr.n_list,
        "n_last": rr.n_last,
        "test_points": [[z.real, z.imag] for z in rr.test_points],
        "predicted": [repr(p) for p in rr.predicted],
        "observed": [[n, i, repr(v)] for (n, i), v in sorted(rr.observed.items())],
        "excluded": [[n, i, reason] for n, i, reason in rr.excluded],
        "exact_regime": [[n, i] for n, i in rr.exact_regime],
        "skipped_n": [[n, reason] for n, reason in rr.skipped_n],
        "summary": {str(i): repr(v) for i, v in sorted(rr.summary.items())},
    }


def rate_report_csv_rows(rr):
    rows = [["n", "point_index", "observed", "predicted", "excluded_flag"]]
    ex = {(n, i) for n, i, _ in rr.excluded}
    for n in rr.n_list:
        for i in range(len(rr.test_points)):
            if (n, i) in rr.observed:
                rows.append([n, i, repr(rr.observed[(n, i)]), repr(rr.predicted[i]), 0])
            elif (n, i) in ex:
                rows.append([n, i, "", repr(rr.predicted[i]), 1])
    return rows


def pole_report_to_json(pr):
    return {
        "scheme": pr.scheme,
        "theta": pr.theta,
        "n_list": pr.n_list,
        "far_threshold": pr.far_threshold,
        "distances": {str(n): repr(v) for n, v in sorted(pr.distances.items())},
        "spurious": {str(n): v for n, v in sorted(pr.spurious.items())},
        "poles": {
            str(n): [[p.real, p.imag] for p in ps] for n, ps in sorted(pr.poles.items())
        },
    }
