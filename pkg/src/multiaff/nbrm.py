"""Negative binomial (NB2) citation regression with full inference.

The model is mean mu = exp(x'beta) with variance mu + alpha*mu^2. The
log-likelihood for observation y is

    lnG(y + 1/a) - lnG(1/a) - lnG(y + 1) + y*ln(a*mu) - (y + 1/a)*ln(1 + a*mu)

with a = alpha. Fitting maximizes over (beta, ln alpha) by Newton-Raphson
with analytic gradient and Hessian and a backtracking (Armijo) line search.
Because the responses are integer counts, the gamma-function terms and
their derivatives are evaluated through the exact identities

    lnG(y+t) - lnG(t)   = sum_{k<y} ln(t+k)
    psi(y+t) - psi(t)   = sum_{k<y} 1/(t+k)
    psi'(t) - psi'(y+t) = sum_{k<y} 1/(t+k)^2      (t = 1/alpha)

which stay accurate for arbitrarily small alpha, where the naive
difference of lgamma values loses all precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import digamma, erfc, gammaln, polygamma

from .classify import classify_publication, domestic_flags
from .ingest import Corpus, compute_tc
from .reference import DISCIPLINES, field_of

__all__ = [
    "DESIGN_COLUMNS",
    "RegressionInput",
    "FitResult",
    "VIFReport",
    "EffectTable",
    "DesignError",
    "DesignTooSmall",
    "FitError",
    "build_design",
    "nb2_loglik",
    "nb2_score",
    "nb2_hessian",
    "nb2_fit",
    "wald_stats",
    "percent_change",
    "significance_stars",
    "pseudo_r2",
    "vif",
    "run_table",
]

DESIGN_COLUMNS = ("intercept", "NM_mark", "IM_mark", "N_refs", "N_ins", "N_c", "N_a")

SKIP_MARKER = "skipped"

# Optimizer bounds on ln(alpha); the lower bound is the effective Poisson
# boundary, reached when the data carry no overdispersion.
_THETA_MIN = math.log(1e-8)
_THETA_MAX = math.log(1e3)

# Above this count the exact finite sums are replaced by lgamma/psi
# differences (memory guard; accuracy is then limited but alpha is never
# tiny in that regime for real fits).
_EXACT_SUM_LIMIT = 2_000_000


class DesignError(ValueError):
    """The design matrix cannot support a fit."""


class DesignTooSmall(DesignError):
    """Too few rows or too few positive mark cases; the cell is skippable."""


class FitError(RuntimeError):
    """The optimizer reached a defective candidate optimum."""


@dataclass(frozen=True)
class RegressionInput:
    y: np.ndarray
    x: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        y = np.asarray(self.y)
        x = np.asarray(self.x, dtype=float)
        if y.ndim != 1 or x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DesignError("y must be 1-d and x 2-d with matching row count")
        if len(self.columns) != x.shape[1]:
            raise DesignError("column names must match the design width")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n_obs(self) -> int:
        return int(self.y.shape[0])


@dataclass(frozen=True)
class FitResult:
    columns: tuple[str, ...]
    beta: np.ndarray
    alpha: float
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    stars: tuple[str, ...]
    pct_change: np.ndarray
    loglik: float
    loglik_null: float
    pseudo_r2: float
    converged: bool
    iterations: int
    n_obs: int


@dataclass(frozen=True)
class VIFReport:
    """VIF per non-intercept column; exactly collinear columns are flagged
    in `infinite` instead of being reported as numbers."""

    values: Mapping[str, float]
    infinite: tuple[str, ...] = ()


@dataclass(frozen=True)
class EffectTable:
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    fits: Mapping[tuple[str, str | None], FitResult] = field(default_factory=dict)
    skipped: Mapping[tuple[str, str | None], str] = field(default_factory=dict)


# --- design construction ------------------------------------------------------


def build_design(
    corpus: Corpus,
    discipline: str | None = None,
    country: str | None = None,
    *,
    max_authors: int = 10,
    min_rows: int = 50,
    min_mark_positives: int = 5,
    window: int = 3,
) -> RegressionInput:
    """Assemble the citation-regression design for one corpus cell.

    Rows are the collaborative publications of `discipline` (all disciplines
    when None), restricted to publications listing `country` when given, and
    to publications with at most `max_authors` authors. Marks are the global
    has-NM/has-IM flags, or the country's domestic flags in country mode.

    Raises DesignTooSmall when the cell has fewer than `min_rows` rows or
    either mark has fewer than `min_mark_positives` positive cases.
    """
    ys: list[int] = []
    rows: list[tuple[float, ...]] = []
    for pub in corpus.publications:
        if discipline is not None and pub.discipline != discipline:
            continue
        if len(pub.authors) > max_authors:
            continue
        countries = pub.distinct_countries()
        if country is not None:
            if country not in countries:
                continue
            flags = domestic_flags(pub, country)
            nm, im = flags.p_nm_domestic, flags.p_im_domestic
        else:
            cls = classify_publication(pub)
            nm, im = cls.has_nm, cls.has_im
        ys.append(compute_tc(pub, window))
        rows.append(
            (
                1.0,
                float(nm),
                float(im),
                float(pub.n_refs),
                float(len(pub.distinct_inst_ids())),
                float(len(countries)),
                float(len(pub.authors)),
            )
        )

    n = len(rows)
    if n < min_rows:
        raise DesignTooSmall(f"{n} rows, need at least {min_rows}")
    x = np.array(rows, dtype=float)
    y = np.array(ys, dtype=np.int64)
    for j, name in ((1, "NM_mark"), (2, "IM_mark")):
        positives = int(x[:, j].sum())
        if positives < min_mark_positives:
            raise DesignTooSmall(
                f"{name} has {positives} positive cases, need at least {min_mark_positives}"
            )
    return RegressionInput(y=y, x=x, columns=DESIGN_COLUMNS)


# --- likelihood, score, Hessian -----------------------------------------------


class _CountTerms:
    """Exact evaluation of the count-side gamma sums for integer responses."""

    def __init__(self, y: np.ndarray):
        y = np.asarray(y)
        if y.size and (np.any(y < 0) or not np.issubdtype(y.dtype, np.integer)):
            raise ValueError("responses must be non-negative integers")
        self.n = y.size
        self.max = int(y.max()) if y.size else 0
        self.exact = self.max <= _EXACT_SUM_LIMIT
        if self.exact:
            counts = np.bincount(y, minlength=self.max + 1)
            # exceed[k] = #{i : y_i > k} for k = 0..max-1
            self._exceed = (self.n - np.cumsum(counts)[: self.max]).astype(float)
            self._k = np.arange(self.max, dtype=float)
        else:
            self._y = y.astype(float)

    def s0(self, a: float) -> float:
        """sum_i [lnG(y_i + a) - lnG(a)]"""
        if self.exact:
            return float(self._exceed @ np.log(a + self._k))
        return float(np.sum(gammaln(self._y + a)) - self.n * gammaln(a))

    def s1(self, a: float) -> float:
        """sum_i [psi(y_i + a) - psi(a)]"""
        if self.exact:
            return float(self._exceed @ (1.0 / (a + self._k)))
        return float(np.sum(digamma(self._y + a)) - self.n * digamma(a))

    def s2(self, a: float) -> float:
        """sum_i [psi'(a) - psi'(y_i + a)]  (non-negative)"""
        if self.exact:
            return float(self._exceed @ (1.0 / (a + self._k) ** 2))
        return float(self.n * polygamma(1, a) - np.sum(polygamma(1, self._y + a)))


def _validate_point(beta: np.ndarray, alpha: float, x: np.ndarray) -> np.ndarray:
    eta = x @ beta
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not np.all(np.isfinite(eta)):
        raise ValueError("non-finite linear predictor")
    return eta


def nb2_loglik(beta: Sequence[float], alpha: float, data: RegressionInput) -> float:
    """NB2 log-likelihood at (beta, alpha); finite for all valid inputs."""
    beta = np.asarray(beta, dtype=float)
    terms = _CountTerms(data.y)
    eta = _validate_point(beta, alpha, data.x)
    return _loglik(data.y.astype(float), data.x, terms, beta, math.log(alpha), eta)


def _loglik(
    y: np.ndarray,
    x: np.ndarray,
    terms: _CountTerms,
    beta: np.ndarray,
    theta: float,
    eta: np.ndarray | None = None,
) -> float:
    """Log-likelihood at (beta, theta = ln alpha)."""
    alpha = math.exp(theta)
    a = math.exp(-theta)
    if eta is None:
        eta = x @ beta
    # mu enters only through ln(1 + alpha*mu); evaluate that asymptotically
    # where exp(eta) would overflow so the value stays finite for any finite
    # linear predictor.
    t = theta + eta
    with np.errstate(over="ignore", invalid="ignore"):
        log_u = np.where(
            t <= 50.0,
            np.log1p(alpha * np.exp(eta)),
            t + np.log1p(np.exp(-np.clip(t, 50.0, None))),
        )
        ll = (
            terms.s0(a)
            - float(np.sum(gammaln(y + 1.0)))
            + float(y @ t)
            - float((y + a) @ log_u)
        )
    return ll if np.isfinite(ll) else -math.inf


def _score_hessian(
    y: np.ndarray,
    x: np.ndarray,
    terms: _CountTerms,
    beta: np.ndarray,
    theta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian of the log-likelihood over (beta, theta)."""
    alpha = math.exp(theta)
    a = math.exp(-theta)
    eta = x @ beta
    mu = np.exp(eta)
    u = 1.0 + alpha * mu
    log_u_sum = float(np.sum(np.log1p(alpha * mu)))

    g_beta = x.T @ ((y - mu) / u)
    g_theta = (
        -a * terms.s1(a)
        + a * log_u_sum
        + float(np.sum(y))
        - float(np.sum((alpha * y + 1.0) * mu / u))
    )

    w = mu * (1.0 + alpha * y) / u**2
    h_bb = -(x.T @ (x * w[:, None]))
    h_bt = -(x.T @ (alpha * mu * (y - mu) / u**2))
    h_tt = (
        a * terms.s1(a)
        - a * a * terms.s2(a)
        - a * log_u_sum
        + float(np.sum(mu / u))
        - float(np.sum(alpha * y * mu / u))
        + float(np.sum((alpha * y + 1.0) * alpha * mu**2 / u**2))
    )

    p = x.shape[1]
    grad = np.empty(p + 1)
    grad[:p] = g_beta
    grad[p] = g_theta
    hess = np.empty((p + 1, p + 1))
    hess[:p, :p] = h_bb
    hess[:p, p] = h_bt
    hess[p, :p] = h_bt
    hess[p, p] = h_tt
    return grad, hess


def nb2_score(beta: Sequence[float], alpha: float, data: RegressionInput) -> np.ndarray:
    """Analytic gradient of nb2_loglik over (beta, ln alpha)."""
    beta = np.asarray(beta, dtype=float)
    _validate_point(beta, alpha, data.x)
    terms = _CountTerms(data.y)
    grad, _ = _score_hessian(data.y.astype(float), data.x, terms, beta, math.log(alpha))
    return grad


def nb2_hessian(beta: Sequence[float], alpha: float, data: RegressionInput) -> np.ndarray:
    """Analytic Hessian of nb2_loglik over (beta, ln alpha)."""
    beta = np.asarray(beta, dtype=float)
    _validate_point(beta, alpha, data.x)
    terms = _CountTerms(data.y)
    _, hess = _score_hessian(data.y.astype(float), data.x, terms, beta, math.log(alpha))
    return hess


# --- fitting -------------------------------------------------------------------


def _check_design(x: np.ndarray, columns: Sequence[str]) -> None:
    for j, name in enumerate(columns):
        col = x[:, j]
        if name != "intercept" and np.all(col == col[0]):
            raise DesignError(f"column {name!r} is constant")
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise DesignError("design matrix is rank deficient")


def _poisson_irls(y: np.ndarray, x: np.ndarray, max_iter: int = 50, tol: float = 1e-10) -> np.ndarray:
    """Poisson log-link MLE by iteratively reweighted least squares."""
    mu = y + 0.5
    eta = np.log(mu)
    beta = np.zeros(x.shape[1])
    for _ in range(max_iter):
        z = eta + (y - mu) / mu
        xtw = x.T * mu
        try:
            beta_new = np.linalg.solve(xtw @ x, xtw @ z)
        except np.linalg.LinAlgError:
            beta_new, *_ = np.linalg.lstsq(x * np.sqrt(mu)[:, None], np.sqrt(mu) * z, rcond=None)
        eta = np.clip(x @ beta_new, -50.0, 50.0)
        mu = np.exp(eta)
        if np.max(np.abs(beta_new - beta)) < tol * (1.0 + np.max(np.abs(beta_new))):
            return beta_new
        beta = beta_new
    return beta


def _moment_alpha(y: np.ndarray, mu: np.ndarray) -> float:
    """Method-of-moments dispersion from Poisson residuals, clamped."""
    denom = float(np.sum(mu**2))
    if denom <= 0:
        return 1e-4
    alpha = float(np.sum((y - mu) ** 2 - mu) / denom)
    return min(max(alpha, 1e-4), 10.0)


def _ascent_direction(grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Newton direction with Levenberg damping when -H is not PD."""
    a = -hess
    lam = 0.0
    eye = np.eye(len(grad))
    for _ in range(60):
        try:
            np.linalg.cholesky(a + lam * eye)
        except np.linalg.LinAlgError:
            lam = 1e-8 if lam == 0.0 else lam * 10.0
            continue
        d = np.linalg.solve(a + lam * eye, grad)
        if grad @ d > 0:
            return d
        lam = 1e-8 if lam == 0.0 else lam * 10.0
    return grad  # steepest ascent as a last resort


def _grad_converged(grad: np.ndarray, theta: float, ll: float, tol_grad: float) -> bool:
    g = grad.copy()
    # At a theta bound, an outward-pointing dispersion gradient is inactive.
    if theta <= _THETA_MIN + 1e-12 and g[-1] < 0:
        g[-1] = 0.0
    if theta >= _THETA_MAX - 1e-12 and g[-1] > 0:
        g[-1] = 0.0
    return float(np.max(np.abs(g))) < tol_grad * max(1.0, abs(ll))


def _maximize(
    y: np.ndarray,
    x: np.ndarray,
    terms: _CountTerms,
    beta0: np.ndarray,
    theta0: float,
    max_iter: int,
    tol_ll: float,
    tol_grad: float,
) -> tuple[np.ndarray, float, float, int, bool]:
    """Newton-Raphson with backtracking; returns (beta, theta, ll, iters, ok)."""
    p = x.shape[1]
    beta = beta0.copy()
    theta = min(max(theta0, _THETA_MIN), _THETA_MAX)
    ll = _loglik(y, x, terms, beta, theta)
    converged_at: int | None = None
    iterations = 0

    for it in range(1, max_iter + 1):
        iterations = it
        grad, hess = _score_hessian(y, x, terms, beta, theta)
        d = _ascent_direction(grad, hess)
        slope = float(grad @ d)

        step = 1.0
        beta_new, theta_new, ll_new = beta, theta, ll
        improved = False
        while step >= 2.0**-60:
            cand_beta = beta + step * d[:p]
            cand_theta = min(max(theta + step * d[p], _THETA_MIN), _THETA_MAX)
            cand_ll = _loglik(y, x, terms, cand_beta, cand_theta)
            if cand_ll >= ll + 1e-4 * step * slope and np.isfinite(cand_ll):
                beta_new, theta_new, ll_new = cand_beta, cand_theta, cand_ll
                improved = True
                break
            step *= 0.5

        if not improved:
            # No ascent left along the Newton direction.
            return beta, theta, ll, iterations, _grad_converged(grad, theta, ll, tol_grad)

        delta = abs(ll_new - ll)
        beta, theta, ll = beta_new, theta_new, ll_new
        if delta < tol_ll * max(1.0, abs(ll)):
            grad, _ = _score_hessian(y, x, terms, beta, theta)
            if _grad_converged(grad, theta, ll, tol_grad):
                if converged_at is None:
                    converged_at = it
                # Two polish iterations sharpen the optimum to machine
                # precision, keeping it invariant under column rescaling.
                if it >= converged_at + 2:
                    return beta, theta, ll, iterations, True
            else:
                converged_at = None
        else:
            converged_at = None

    grad, _ = _score_hessian(y, x, terms, beta, theta)
    return beta, theta, ll, iterations, _grad_converged(grad, theta, ll, tol_grad)


def significance_stars(p_value: float) -> str:
    """Star marker for a p-value: * <0.05, ** <0.01, *** <0.001."""
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


def percent_change(beta_k: float) -> float:
    """Expected percent change in the response for a unit covariate increase."""
    return 100.0 * math.expm1(beta_k)


def nb2_fit(
    data: RegressionInput,
    *,
    max_iter: int = 100,
    tol_ll: float = 1e-10,
    tol_grad: float = 1e-6,
) -> FitResult:
    """Maximum-likelihood NB2 fit with Wald inference and McFadden pseudo-R2.

    Standard errors come from the beta block of the inverse observed
    information over (beta, ln alpha). The null model is an intercept-only
    NB2 fit on the same rows. Non-convergence is flagged on the result, not
    raised; a singular or indefinite Hessian at the candidate optimum raises
    FitError.
    """
    y_int = np.asarray(data.y)
    if np.any(y_int < 0):
        raise ValueError("responses must be non-negative")
    _check_design(data.x, data.columns)
    terms = _CountTerms(y_int)
    y = y_int.astype(float)
    x = data.x

    beta0 = _poisson_irls(y, x)
    mu0 = np.exp(np.clip(x @ beta0, -50.0, 50.0))
    theta0 = math.log(_moment_alpha(y, mu0))

    beta, theta, ll, iterations, converged = _maximize(
        y, x, terms, beta0, theta0, max_iter, tol_ll, tol_grad
    )

    se = _standard_errors(y, x, terms, beta, theta) if converged else np.full(len(beta), np.nan)

    if converged:
        # Intercept-only null fit on the same rows, for McFadden pseudo-R2.
        ones = np.ones((len(y), 1))
        nb0 = _poisson_irls(y, ones)
        mu_null = np.exp(np.clip(ones @ nb0, -50.0, 50.0))
        theta_null = math.log(_moment_alpha(y, mu_null))
        _, _, ll_null, _, null_ok = _maximize(
            y, ones, terms, nb0, theta_null, max_iter, tol_ll, tol_grad
        )
        if not null_ok:
            raise FitError("intercept-only null fit did not converge")
    else:
        ll_null = float("nan")

    with np.errstate(invalid="ignore", divide="ignore"):
        z = beta / se
    p = erfc(np.abs(z) / math.sqrt(2.0))
    stars = tuple(significance_stars(float(pk)) for pk in p)
    r2 = 1.0 - ll / ll_null if ll_null != 0 else float("nan")

    return FitResult(
        columns=tuple(data.columns),
        beta=beta,
        alpha=math.exp(theta),
        se=se,
        z=z,
        p=p,
        stars=stars,
        pct_change=100.0 * np.expm1(beta),
        loglik=ll,
        loglik_null=ll_null,
        pseudo_r2=r2,
        converged=converged,
        iterations=iterations,
        n_obs=len(y),
    )


def _standard_errors(
    y: np.ndarray, x: np.ndarray, terms: _CountTerms, beta: np.ndarray, theta: float
) -> np.ndarray:
    """sqrt of the beta-block diagonal of the inverse observed information."""
    p = x.shape[1]
    _, hess = _score_hessian(y, x, terms, beta, theta)
    at_bound = theta <= _THETA_MIN + 1e-12 or theta >= _THETA_MAX - 1e-12
    info = -hess[:p, :p] if at_bound else -hess
    try:
        np.linalg.cholesky(info)
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular or indefinite Hessian at the candidate optimum") from exc
    diag = np.diag(cov)[:p]
    if np.any(diag <= 0):
        raise FitError("singular or indefinite Hessian at the candidate optimum")
    return np.sqrt(diag)


def wald_stats(fit: FitResult) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Wald z statistics, two-sided normal p-values, and significance stars."""
    if not fit.converged:
        raise FitError("Wald statistics require a converged fit")
    z = fit.beta / fit.se
    p = erfc(np.abs(z) / math.sqrt(2.0))
    return z, p, tuple(significance_stars(float(pk)) for pk in p)


def pseudo_r2(fit: FitResult) -> float:
    """McFadden pseudo-R2 against the intercept-only null."""
    if fit.loglik_null == 0:
        raise ValueError("null log-likelihood is zero")
    return 1.0 - fit.loglik / fit.loglik_null


# --- diagnostics ----------------------------------------------------------------


def vif(data: RegressionInput) -> VIFReport:
    """Variance inflation factors for the non-intercept design columns.

    VIF_j = 1/(1 - R2_j) from the OLS of column j on the remaining
    non-intercept columns plus an intercept. Exact collinearity is reported
    in `infinite` as a flagged condition, not as a number.
    """
    names = [c for c in data.columns if c != "intercept"]
    if len(names) < 2:
        raise DesignError("VIF needs at least two non-intercept columns")
    idx = [j for j, c in enumerate(data.columns) if c != "intercept"]
    x = data.x
    values: dict[str, float] = {}
    infinite: list[str] = []
    for j, name in zip(idx, names):
        target = x[:, j]
        sst = float(np.sum((target - target.mean()) ** 2))
        if sst == 0:
            raise DesignError(f"column {name!r} is constant")
        others = [k for k in idx if k != j]
        design = np.column_stack([np.ones(len(target)), x[:, others]])
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        sse = float(np.sum((target - design @ coef) ** 2))
        if sse <= sst * 1e-12:
            infinite.append(name)
        else:
            values[name] = sst / sse
    return VIFReport(values=values, infinite=tuple(infinite))


# --- batch tables ----------------------------------------------------------------


def _format_effect(fit: FitResult, column: str) -> str:
    k = fit.columns.index(column)
    return f"{fit.pct_change[k]:.1f}{fit.stars[k]}"


def run_table(
    corpus: Corpus,
    disciplines: Sequence[str] = DISCIPLINES,
    countries: Sequence[str] | None = None,
    *,
    max_authors: int = 10,
    min_rows: int = 50,
    min_mark_positives: int = 5,
    window: int = 3,
    max_iter: int = 100,
) -> EffectTable:
    """Percent-change effect table over discipline (x country) cells.

    Global mode emits one row per discipline with every covariate effect and
    the pseudo-R2 column; country mode emits per-country NM/IM effect pairs.
    Cells whose design fails the size thresholds, whose fit errors out, or
    whose fit does not converge carry an explicit skip marker.
    """
    fits: dict[tuple[str, str | None], FitResult] = {}
    skipped: dict[tuple[str, str | None], str] = {}

    def cell_fit(disc: str, country: str | None) -> FitResult | None:
        key = (disc, country)
        try:
            design = build_design(
                corpus,
                disc,
                country,
                max_authors=max_authors,
                min_rows=min_rows,
                min_mark_positives=min_mark_positives,
                window=window,
            )
            fit = nb2_fit(design, max_iter=max_iter)
        except (DesignError, FitError, ValueError) as exc:
            skipped[key] = str(exc)
            return None
        if not fit.converged:
            skipped[key] = "did not converge"
            return None
        fits[key] = fit
        return fit

    rows: list[tuple[str, ...]] = []
    if countries is None:
        header = ("field", "discipline") + DESIGN_COLUMNS[1:] + ("R-Squared",)
        for disc in disciplines:
            fit = cell_fit(disc, None)
            if fit is None:
                cells = (SKIP_MARKER,) * (len(DESIGN_COLUMNS) - 1) + (SKIP_MARKER,)
            else:
                cells = tuple(_format_effect(fit, c) for c in DESIGN_COLUMNS[1:]) + (
                    f"{fit.pseudo_r2:.2f}",
                )
            rows.append((field_of(disc), disc) + cells)
    else:
        header = ("discipline",) + tuple(
            f"{c}_{mark}" for c in countries for mark in ("NM_mark", "IM_mark")
        )
        for disc in disciplines:
            cells = []
            for country in countries:
                fit = cell_fit(disc, country)
                if fit is None:
                    cells += [SKIP_MARKER, SKIP_MARKER]
                else:
                    cells += [_format_effect(fit, "NM_mark"), _format_effect(fit, "IM_mark")]
            rows.append((disc,) + tuple(cells))

    return EffectTable(header=header, rows=tuple(rows), fits=fits, skipped=skipped)
