"""Automatically generated statistical report: group means with Welch tests,
contingency tables with chi-square, and factorial ANOVA.

The observational unit is the event occurrence; sequence-level attributes are
resolved through each occurrence's owning sequence. Group sizes in this
domain are large enough for the central limit theorem to carry the
distributional assumptions, so no normality diagnostics are run.

The ANOVA reports sequential (Type I) sums of squares in model order: main
effects first and the highest-order interaction last, so the table reads
bottom-up when deciding which terms to retain. p-values are raw; the report
discloses how many tests were run instead of correcting them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, UnknownAttributeError
from .grouping import ClusterAssignment
from .model import (
    CLUSTER_ATTR,
    Dataset,
    KIND_CATEGORICAL,
    KIND_NUMERICAL,
    SelectionSet,
    WEEKDAYS,
    resolve_on,
)
from .special import special_cdf

_RANK_TOL = 1e-9


# ---------------------------------------------------------------------------
# Result containers

@dataclass(frozen=True)
class GroupStat:
    label: str
    n: int
    mean: float | None
    sd: float | None


@dataclass(frozen=True)
class PairwiseTest:
    group_a: str
    group_b: str
    t: float
    df: float
    p: float


@dataclass(frozen=True)
class MeanTestTable:
    response: str
    grouping: str
    groups: tuple[GroupStat, ...]
    tests: tuple[PairwiseTest, ...]
    n: int

    def to_obj(self) -> dict:
        return {
            "response": self.response,
            "grouping": self.grouping,
            "n": self.n,
            "groups": [
                {"label": g.label, "n": g.n, "mean": g.mean, "sd": g.sd}
                for g in self.groups
            ],
            "tests": [
                {"a": t.group_a, "b": t.group_b, "t": t.t, "df": t.df, "p": t.p}
                for t in self.tests
            ],
        }


@dataclass(frozen=True)
class ContingencyResult:
    row_attr: str
    col_attr: str
    row_levels: tuple[str, ...]
    col_levels: tuple[str, ...]
    observed: tuple[tuple[int, ...], ...]
    expected: tuple[tuple[float, ...], ...]
    chi_square: float
    df: int
    p: float
    n: int
    low_expected: bool
    dropped_levels: tuple[str, ...] = ()

    def to_obj(self) -> dict:
        return {
            "row_attr": self.row_attr,
            "col_attr": self.col_attr,
            "row_levels": list(self.row_levels),
            "col_levels": list(self.col_levels),
            "observed": [list(r) for r in self.observed],
            "expected": [list(r) for r in self.expected],
            "chi_square": self.chi_square,
            "df": self.df,
            "p": self.p,
            "n": self.n,
            "low_expected": self.low_expected,
            "dropped_levels": list(self.dropped_levels),
        }


@dataclass(frozen=True)
class AnovaTermRow:
    name: str
    df: int
    ss: float
    ms: float
    f: float
    p: float


@dataclass(frozen=True)
class CoefficientRow:
    name: str
    estimate: float
    se: float
    t: float
    p: float


@dataclass(frozen=True)
class AnovaReport:
    response: str
    factors: tuple[str, ...]
    max_order: int
    n: int
    terms: tuple[AnovaTermRow, ...]
    residual_df: int
    residual_ss: float
    total_ss: float
    coefficients: tuple[CoefficientRow, ...]
    notes: tuple[str, ...] = ()

    def term(self, name: str) -> AnovaTermRow:
        for row in self.terms:
            if row.name == name:
                return row
        raise KeyError(name)

    def to_obj(self) -> dict:
        return {
            "response": self.response,
            "factors": list(self.factors),
            "max_order": self.max_order,
            "n": self.n,
            "terms": [
                {"name": r.name, "df": r.df, "ss": r.ss, "ms": r.ms, "f": r.f, "p": r.p}
                for r in self.terms
            ],
            "residual": {
                "df": self.residual_df,
                "ss": self.residual_ss,
                "ms": (self.residual_ss / self.residual_df) if self.residual_df else 0.0,
            },
            "total_ss": self.total_ss,
            "coefficients": [
                {"name": c.name, "estimate": c.estimate, "se": c.se, "t": c.t, "p": c.p}
                for c in self.coefficients
            ],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Value extraction

def _level_order(values) -> list[str]:
    """Deterministic level ordering: calendar order for weekdays, else sorted."""
    uniq = sorted(set(values))
    if set(uniq) <= set(WEEKDAYS):
        return [d for d in WEEKDAYS if d in uniq]
    return uniq


def _selected_occurrences(dataset: Dataset, selection: SelectionSet | None):
    if selection is None:
        yield from dataset.iter_occurrences()
        return
    wanted = selection.occurrence_ids
    for ev, seq in dataset.iter_occurrences():
        if ev.id in wanted:
            yield ev, seq


def _resolve(dataset, ev, seq, name, clusters: ClusterAssignment | None):
    if name == CLUSTER_ATTR:
        if clusters is None:
            raise InsufficientDataError("no clustering available for Cluster ID")
        return clusters.labels.get(seq.id)
    return resolve_on(dataset, ev, seq, name)


def _check_kind(dataset: Dataset, name: str, kind: str) -> None:
    actual = dataset.schema.kind_of(name) if name != CLUSTER_ATTR else KIND_CATEGORICAL
    if actual != kind:
        raise UnknownAttributeError(f"attribute {name!r} is {actual}, expected {kind}")


# ---------------------------------------------------------------------------
# Mean comparison

def mean_comparison(
    dataset: Dataset,
    selection: SelectionSet | None,
    response: str,
    grouping: str,
    clusters: ClusterAssignment | None = None,
) -> MeanTestTable:
    """Per-group means and SDs with Welch's unequal-variance t-test on every
    pair of groups that has at least two observations."""
    _check_kind(dataset, response, KIND_NUMERICAL)
    _check_kind(dataset, grouping, KIND_CATEGORICAL)
    groups: dict[str, list[float]] = {}
    for ev, seq in _selected_occurrences(dataset, selection):
        y = _resolve(dataset, ev, seq, response, clusters)
        g = _resolve(dataset, ev, seq, grouping, clusters)
        if y is None or g is None:
            continue
        groups.setdefault(str(g), []).append(float(y))

    order = _level_order(groups)
    stats = tuple(
        GroupStat(
            label=g,
            n=len(groups[g]),
            mean=_mean(groups[g]),
            sd=_sd(groups[g]),
        )
        for g in order
    )
    testable = [g for g in order if len(groups[g]) >= 2]
    if len(testable) < 2:
        raise InsufficientDataError(
            f"need two groups with n >= 2 to compare {response!r} by {grouping!r}"
        )
    tests = tuple(
        _welch(a, b, groups[a], groups[b]) for a, b in itertools.combinations(testable, 2)
    )
    n = sum(len(v) for v in groups.values())
    return MeanTestTable(response=response, grouping=grouping, groups=stats, tests=tests, n=n)


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs)


def _sd(xs: list[float]) -> float | None:
    if len(xs) < 2:
        return None
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def _welch(label_a: str, label_b: str, xs: list[float], ys: list[float]) -> PairwiseTest:
    n1, n2 = len(xs), len(ys)
    m1, m2 = _mean(xs), _mean(ys)
    v1 = _sd(xs) ** 2
    v2 = _sd(ys) ** 2
    se2 = v1 / n1 + v2 / n2
    if se2 == 0:
        t = 0.0 if m1 == m2 else math.copysign(math.inf, m1 - m2)
        return PairwiseTest(label_a, label_b, t, float(n1 + n2 - 2), 1.0 if t == 0 else 0.0)
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    return PairwiseTest(label_a, label_b, t, df, special_cdf("t", t, df))


# ---------------------------------------------------------------------------
# Contingency

def contingency(
    dataset: Dataset,
    selection: SelectionSet | None,
    attr_a: str,
    attr_b: str,
    clusters: ClusterAssignment | None = None,
) -> ContingencyResult:
    """Pearson chi-square test of independence on the attr_a x attr_b counts.

    Levels are taken over the whole dataset (so known-but-empty categories
    show up), then zero-marginal rows and columns are dropped with a note.
    Occurrences missing either value are excluded pairwise.
    """
    _check_kind(dataset, attr_a, KIND_CATEGORICAL)
    _check_kind(dataset, attr_b, KIND_CATEGORICAL)
    all_a: set[str] = set()
    all_b: set[str] = set()
    for ev, seq in dataset.iter_occurrences():
        va = _resolve(dataset, ev, seq, attr_a, clusters)
        vb = _resolve(dataset, ev, seq, attr_b, clusters)
        if va is not None:
            all_a.add(str(va))
        if vb is not None:
            all_b.add(str(vb))

    rows = _level_order(all_a)
    cols = _level_order(all_b)
    counts = {(r, c): 0 for r in rows for c in cols}
    n = 0
    for ev, seq in _selected_occurrences(dataset, selection):
        va = _resolve(dataset, ev, seq, attr_a, clusters)
        vb = _resolve(dataset, ev, seq, attr_b, clusters)
        if va is None or vb is None:
            continue
        counts[(str(va), str(vb))] += 1
        n += 1

    dropped = []
    row_totals = {r: sum(counts[(r, c)] for c in cols) for r in rows}
    col_totals = {c: sum(counts[(r, c)] for r in rows) for c in cols}
    kept_rows = [r for r in rows if row_totals[r] > 0]
    kept_cols = [c for c in cols if col_totals[c] > 0]
    dropped += [f"{attr_a}={r}" for r in rows if row_totals[r] == 0]
    dropped += [f"{attr_b}={c}" for c in cols if col_totals[c] == 0]
    if len(kept_rows) < 2 or len(kept_cols) < 2:
        raise InsufficientDataError(
            f"need at least 2 observed levels of {attr_a!r} and {attr_b!r}"
        )

    observed = [[counts[(r, c)] for c in kept_cols] for r in kept_rows]
    chi2 = 0.0
    expected = []
    low = False
    for r in kept_rows:
        exp_row = []
        for c in kept_cols:
            e = row_totals[r] * col_totals[c] / n
            o = counts[(r, c)]
            chi2 += (o - e) ** 2 / e
            low = low or e < 5
            exp_row.append(e)
        expected.append(exp_row)
    df = (len(kept_rows) - 1) * (len(kept_cols) - 1)
    return ContingencyResult(
        row_attr=attr_a,
        col_attr=attr_b,
        row_levels=tuple(kept_rows),
        col_levels=tuple(kept_cols),
        observed=tuple(tuple(r) for r in observed),
        expected=tuple(tuple(r) for r in expected),
        chi_square=chi2,
        df=df,
        p=special_cdf("chisq", chi2, float(df)),
        n=n,
        low_expected=low,
        dropped_levels=tuple(dropped),
    )


# ---------------------------------------------------------------------------
# Factorial ANOVA

def anova(
    dataset: Dataset,
    selection: SelectionSet | None,
    response: str,
    factors: list[str],
    max_order: int = 1,
    clusters: ClusterAssignment | None = None,
) -> AnovaReport:
    """Factorial ANOVA with dummy coding and sequential (Type I) sums of squares.

    Factors are dummy-coded against their first level in deterministic order;
    interaction terms up to ``max_order`` follow the given factor order, so
    the highest-order interaction is the last table row. The fit is QR-based
    (modified Gram-Schmidt); columns made collinear by empty factor-level
    combinations are dropped and reported in the notes.
    """
    _check_kind(dataset, response, KIND_NUMERICAL)
    for f in factors:
        _check_kind(dataset, f, KIND_CATEGORICAL)
    if not factors:
        raise InsufficientDataError("need at least one factor")
    if not 1 <= max_order <= len(factors):
        raise InsufficientDataError(
            f"max_order must be in [1, {len(factors)}], got {max_order}"
        )

    ys: list[float] = []
    fac_vals: list[tuple[str, ...]] = []
    dropped_rows = 0
    for ev, seq in _selected_occurrences(dataset, selection):
        y = _resolve(dataset, ev, seq, response, clusters)
        vals = tuple(_resolve(dataset, ev, seq, f, clusters) for f in factors)
        if y is None or any(v is None for v in vals):
            dropped_rows += 1
            continue
        ys.append(float(y))
        fac_vals.append(tuple(str(v) for v in vals))

    n = len(ys)
    if n == 0:
        raise InsufficientDataError("no complete observations")
    levels = []
    for j, f in enumerate(factors):
        order = _level_order(v[j] for v in fac_vals)
        if len(order) < 2:
            raise InsufficientDataError(f"factor {f!r} has fewer than 2 observed levels")
        levels.append(order)

    # term layout: indices into `factors`, combinations in given order
    term_combos = [
        combo
        for order in range(1, max_order + 1)
        for combo in itertools.combinations(range(len(factors)), order)
    ]
    p_nominal = 1 + sum(
        math.prod(len(levels[j]) - 1 for j in combo) for combo in term_combos
    )
    if n <= p_nominal:
        raise InsufficientDataError(
            f"need more than {p_nominal} observations for this model, have {n}"
        )

    y = np.asarray(ys)
    X = np.empty((n, p_nominal))
    X[:, 0] = 1.0
    # indicator cache per factor/level
    indicators = [
        {lvl: np.fromiter((1.0 if v[j] == lvl else 0.0 for v in fac_vals), float, n)
         for lvl in levels[j][1:]}
        for j in range(len(factors))
    ]
    col_meta: list[tuple[int, str]] = [(-1, "(Intercept)")]
    col = 1
    for ti, combo in enumerate(term_combos):
        for level_choice in itertools.product(*[levels[j][1:] for j in combo]):
            v = np.ones(n)
            for j, lvl in zip(combo, level_choice):
                v = v * indicators[j][lvl]
            X[:, col] = v
            col_meta.append(
                (ti, " × ".join(f"{factors[j]}: {lvl}" for j, lvl in zip(combo, level_choice)))
            )
            col += 1

    fit = _sequential_qr(X, y)
    notes = []
    if dropped_rows:
        notes.append(f"{dropped_rows} observations dropped for missing values")
    dropped_cols = [col_meta[j][1] for j in fit["dropped"]]
    if dropped_cols:
        notes.append(
            "collinear columns dropped (empty factor combinations): "
            + ", ".join(dropped_cols)
        )

    total_ss = float(np.sum((y - y.mean()) ** 2))
    kept = fit["kept"]
    z = fit["z"]
    term_ss = {ti: 0.0 for ti in range(len(term_combos))}
    term_df = {ti: 0 for ti in range(len(term_combos))}
    for pos, j in enumerate(kept):
        ti = col_meta[j][0]
        if ti < 0:
            continue
        term_ss[ti] += float(z[pos] ** 2)
        term_df[ti] += 1
    residual_df = n - len(kept)
    residual_ss = max(0.0, float(y @ y - z @ z))
    ms_res = residual_ss / residual_df if residual_df > 0 else 0.0

    degenerate = total_ss <= _RANK_TOL * max(1.0, float(y @ y))
    if degenerate:
        notes.append("response has zero variance; F statistics reported as 0")

    term_rows = []
    for ti, combo in enumerate(term_combos):
        name = " × ".join(factors[j] for j in combo)
        df_t = term_df[ti]
        ss = term_ss[ti]
        ms = ss / df_t if df_t else 0.0
        if degenerate or ms_res == 0 or df_t == 0:
            f_stat, p = 0.0, 1.0
        else:
            f_stat = ms / ms_res
            p = special_cdf("f", f_stat, (float(df_t), float(residual_df)))
        term_rows.append(AnovaTermRow(name=name, df=df_t, ss=ss, ms=ms, f=f_stat, p=p))

    coef_rows = []
    if residual_df > 0 and not degenerate:
        beta, se = _coefficients(fit, ms_res)
        for pos, j in enumerate(kept):
            name = col_meta[j][1]
            if se[pos] > 0:
                t = float(beta[pos] / se[pos])
                p = special_cdf("t", t, float(residual_df))
            else:
                t, p = 0.0, 1.0
            coef_rows.append(
                CoefficientRow(name=name, estimate=float(beta[pos]), se=float(se[pos]), t=t, p=p)
            )

    return AnovaReport(
        response=response,
        factors=tuple(factors),
        max_order=max_order,
        n=n,
        terms=tuple(term_rows),
        residual_df=residual_df,
        residual_ss=residual_ss,
        total_ss=total_ss,
        coefficients=tuple(coef_rows),
        notes=tuple(notes),
    )


def _sequential_qr(X: np.ndarray, y: np.ndarray) -> dict:
    """Modified Gram-Schmidt QR with collinear-column dropping.

    Returns kept column indices, their orthonormal basis projections of y
    (``z``), and the R factor restricted to kept columns. Column order is
    preserved, which is what makes the sums of squares sequential.
    """
    n, p = X.shape
    Q = np.empty((n, p))
    R = np.zeros((p, p))
    kept: list[int] = []
    dropped: list[int] = []
    k = 0
    for j in range(p):
        v = X[:, j].astype(float).copy()
        norm_orig = np.linalg.norm(v)
        if k:
            r1 = Q[:, :k].T @ v
            v -= Q[:, :k] @ r1
            r2 = Q[:, :k].T @ v  # reorthogonalize once for stability
            v -= Q[:, :k] @ r2
            R[:k, k] += r1 + r2
        norm = np.linalg.norm(v)
        if norm <= _RANK_TOL * max(norm_orig, 1.0):
            R[:k, k] = 0.0
            dropped.append(j)
            continue
        R[k, k] = norm
        Q[:, k] = v / norm
        kept.append(j)
        k += 1
    z = Q[:, :k].T @ y
    return {"kept": kept, "dropped": dropped, "Q": Q[:, :k], "R": R[:k, :k], "z": z}


def _coefficients(fit: dict, ms_res: float):
    R = fit["R"]
    z = fit["z"]
    k = len(fit["kept"])
    beta = np.linalg.solve(R, z) if k else np.empty(0)
    r_inv = np.linalg.solve(R, np.eye(k)) if k else np.empty((0, 0))
    cov_diag = np.sum(r_inv * r_inv, axis=1) * ms_res
    se = np.sqrt(np.maximum(cov_diag, 0.0))
    return beta, se


# ---------------------------------------------------------------------------
# Report assembly

@dataclass(frozen=True)
class ReportConfig:
    continuous: tuple[str, ...] = ("duration",)
    categorical: tuple[str, ...] = ("day_of_week",)
    response: str | None = "duration"
    max_order: int = 1
    alpha: float = 0.05


@dataclass
class StatReport:
    config: ReportConfig
    n_occurrences: int
    mean_tables: list[MeanTestTable] = field(default_factory=list)
    contingency_tables: list[ContingencyResult] = field(default_factory=list)
    anova_reports: list[AnovaReport] = field(default_factory=list)
    flags: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    n_tests: int = 0

    def to_obj(self) -> dict:
        return {
            "config": {
                "continuous": list(self.config.continuous),
                "categorical": list(self.config.categorical),
                "response": self.config.response,
                "max_order": self.config.max_order,
                "alpha": self.config.alpha,
            },
            "n_occurrences": self.n_occurrences,
            "mean_tables": [t.to_obj() for t in self.mean_tables],
            "contingency_tables": [t.to_obj() for t in self.contingency_tables],
            "anova": [a.to_obj() for a in self.anova_reports],
            "flags": list(self.flags),
            "notes": list(self.notes),
            "n_tests": self.n_tests,
        }

    def to_markdown(self) -> str:
        return render_markdown(self)


def generate_report(
    dataset: Dataset,
    selection: SelectionSet | None,
    config: ReportConfig,
    clusters: ClusterAssignment | None = None,
) -> StatReport:
    """Assemble the full report for the configured attributes.

    A failing component becomes a note rather than aborting the report;
    entries with p below alpha are flagged.
    """
    n_occ = sum(1 for _ in _selected_occurrences(dataset, selection))
    if n_occ == 0:
        raise InsufficientDataError("selection contains no occurrences")
    report = StatReport(config=config, n_occurrences=n_occ)

    for response in config.continuous:
        for grouping in config.categorical:
            try:
                table = mean_comparison(dataset, selection, response, grouping, clusters)
            except Exception as exc:  # noqa: BLE001 - reported, not fatal
                report.notes.append(f"mean comparison {response} by {grouping}: {exc}")
                continue
            report.mean_tables.append(table)
            report.n_tests += len(table.tests)
            for test in table.tests:
                if test.p < config.alpha:
                    report.flags.append(
                        {
                            "kind": "mean",
                            "what": f"{response} differs between {grouping}={test.group_a} "
                            f"and {grouping}={test.group_b}",
                            "p": test.p,
                        }
                    )

    for attr_a, attr_b in itertools.combinations(config.categorical, 2):
        try:
            table = contingency(dataset, selection, attr_a, attr_b, clusters)
        except Exception as exc:  # noqa: BLE001
            report.notes.append(f"contingency {attr_a} x {attr_b}: {exc}")
            continue
        report.contingency_tables.append(table)
        report.n_tests += 1
        if table.p < config.alpha:
            report.flags.append(
                {
                    "kind": "contingency",
                    "what": f"{attr_a} is associated with {attr_b}",
                    "p": table.p,
                }
            )

    if config.response is not None and config.categorical:
        try:
            ar = anova(
                dataset,
                selection,
                config.response,
                list(config.categorical),
                max_order=config.max_order,
                clusters=clusters,
            )
            report.anova_reports.append(ar)
            report.n_tests += len(ar.terms)
            for row in ar.terms:
                if row.p < config.alpha:
                    report.flags.append(
                        {"kind": "anova", "what": f"{row.name} affects {config.response}", "p": row.p}
                    )
        except Exception as exc:  # noqa: BLE001
            report.notes.append(f"anova of {config.response}: {exc}")

    return report


def render_markdown(report: StatReport) -> str:
    """Human-readable rendering of a report."""
    out = []
    cfg = report.config
    out.append("# Statistical report")
    out.append("")
    out.append(
        f"Observations: {report.n_occurrences} event occurrences. "
        f"Significance level alpha = {cfg.alpha}. "
        f"{report.n_tests} tests were computed; p-values are raw (uncorrected)."
    )
    out.append(
        "ANOVA tables use sequential sums of squares in model order; read them "
        "bottom-up, keeping lower-order terms whenever a higher-order "
        "interaction involving them is significant."
    )
    for table in report.mean_tables:
        out.append("")
        out.append(f"## Means of {table.response} by {table.grouping} (n={table.n})")
        out.append("")
        out.append("| group | n | mean | sd |")
        out.append("|---|---|---|---|")
        for g in table.groups:
            out.append(
                f"| {g.label} | {g.n} | {_num(g.mean)} | {_num(g.sd)} |"
            )
        out.append("")
        out.append("| A | B | t | df | p |")
        out.append("|---|---|---|---|---|")
        for t in table.tests:
            out.append(
                f"| {t.group_a} | {t.group_b} | {t.t:.4g} | {t.df:.4g} | {_p(t.p, cfg.alpha)} |"
            )
    for table in report.contingency_tables:
        out.append("")
        out.append(
            f"## Contingency: {table.row_attr} x {table.col_attr} "
            f"(n={table.n}, chi2={table.chi_square:.4g}, df={table.df}, p={_p(table.p, cfg.alpha)})"
        )
        out.append("")
        out.append("| " + table.row_attr + " | " + " | ".join(table.col_levels) + " |")
        out.append("|" + "---|" * (len(table.col_levels) + 1))
        for label, row in zip(table.row_levels, table.observed):
            out.append("| " + label + " | " + " | ".join(str(c) for c in row) + " |")
        if table.low_expected:
            out.append("")
            out.append("Note: some expected counts are below 5.")
        if table.dropped_levels:
            out.append(f"Dropped empty levels: {', '.join(table.dropped_levels)}.")
    for ar in report.anova_reports:
        out.append("")
        out.append(
            f"## ANOVA: {ar.response} ~ {' * '.join(ar.factors)} "
            f"(n={ar.n}, interactions up to order {ar.max_order})"
        )
        out.append("")
        out.append("| term | df | sum sq | mean sq | F | p |")
        out.append("|---|---|---|---|---|---|")
        for row in ar.terms:
            out.append(
                f"| {row.name} | {row.df} | {row.ss:.6g} | {row.ms:.6g} "
                f"| {row.f:.4g} | {_p(row.p, cfg.alpha)} |"
            )
        ms_res = ar.residual_ss / ar.residual_df if ar.residual_df else 0.0
        out.append(f"| residual | {ar.residual_df} | {ar.residual_ss:.6g} | {ms_res:.6g} | | |")
        if ar.coefficients:
            out.append("")
            out.append("| coefficient | estimate | se | t | p |")
            out.append("|---|---|---|---|---|")
            for c in ar.coefficients:
                out.append(
                    f"| {c.name} | {c.estimate:.6g} | {c.se:.6g} | {c.t:.4g} | {_p(c.p, cfg.alpha)} |"
                )
        for note in ar.notes:
            out.append(f"Note: {note}.")
    if report.flags:
        out.append("")
        out.append("## Significant findings")
        out.append("")
        for flag in report.flags:
            out.append(f"- {flag['what']} (p = {flag['p']:.3g})")
    if report.notes:
        out.append("")
        out.append("## Notes")
        out.append("")
        for note in report.notes:
            out.append(f"- {note}")
    out.append("")
    return "\n".join(out)


def _num(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def _p(p: float, alpha: float) -> str:
    text = f"{p:.3g}"
    return f"**{text}**" if p < alpha else text
