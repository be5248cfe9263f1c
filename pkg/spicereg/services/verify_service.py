"""
Brute-force oracles and checks of the distribution-free divergence bounds.

The l0-optimal predictor w_star minimizes the empirical risk over all
supports of size <= k; eps_star = max_j |eps^T phi~_j| with eps the
residuals of w_star. Both the LASSO and the SPICE predictor are compared
against it through the divergence (1/n) ||Phi (w - w_star)||^2.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, List, Optional, Tuple
import logging
import math

import numpy as np
from scipy import linalg

from spicereg.config import get_settings
from spicereg.errors import DataError, OracleGuardError
from spicereg.models import (
    BoundReport,
    BoundSuiteReport,
    FeatureKind,
    FeatureMapConfig,
    InflationReport,
    MeanKind,
    SpiceConfig,
)
from spicereg.services.baseline_service import lasso_cd_gram, lasso_fit, universal_lasso_theta
from spicereg.services.feature_service import FeatureMap
from spicereg.services.spice_service import SpiceModel

logger = logging.getLogger(__name__)

MAX_ORACLE_COLUMNS = 16
MAX_ORACLE_SPARSITY = 3
BOUND_SLACK = 1e-9


@dataclass
class SparseOracleResult:
    """Best support of size <= k and the quantities derived from it"""
    support: Tuple[int, ...]
    w_star: np.ndarray
    r_star: float
    eps_star: float
    residuals: np.ndarray = field(repr=False)


def _risk(X: np.ndarray, y: np.ndarray, support: Tuple[int, ...]) -> Tuple[float, np.ndarray]:
    w = np.zeros(X.shape[1])
    if support:
        cols = list(support)
        # Pivoted QR; rank-deficient supports get the minimum-norm solution.
        coef, _, _, _ = linalg.lstsq(X[:, cols], y, lapack_driver="gelsy", check_finite=False)
        w[cols] = coef
    r = y - X @ w
    return float(r @ r) / X.shape[0], w


def best_subset(X: np.ndarray, y: np.ndarray, k: int,
                supports: Optional[Iterable[Tuple[int, ...]]] = None) -> SparseOracleResult:
    """
    Exhaustive l0-constrained least squares.

    Near-ties (relative 1e-12) go to the smaller support, then to the
    lexicographically smallest one.

    Args:
        X: n x p design, p <= 16
        y: targets
        k: maximum support size, k <= 3
        supports: enumeration order override (any order gives the same result)

    Returns:
        SparseOracleResult with 0-based support indices
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DataError(f"design {X.shape} and targets {y.shape} do not match")
    n, p = X.shape
    if p > MAX_ORACLE_COLUMNS or not 0 <= k <= MAX_ORACLE_SPARSITY:
        raise OracleGuardError(
            f"best-subset oracle limited to p <= {MAX_ORACLE_COLUMNS}, k <= {MAX_ORACLE_SPARSITY}; got p={p}, k={k}"
        )
    if supports is None:
        supports = (s for size in range(min(k, p) + 1) for s in combinations(range(p), size))

    best_support: Optional[Tuple[int, ...]] = None
    best_risk = math.inf
    best_w = np.zeros(p)
    for support in supports:
        support = tuple(sorted(support))
        risk, w = _risk(X, y, support)
        tie = 1e-12 * max(1.0, abs(best_risk)) if math.isfinite(best_risk) else 0.0
        if best_support is None or risk < best_risk - tie or (
            abs(risk - best_risk) <= tie and (len(support), support) < (len(best_support), best_support)
        ):
            best_support, best_risk, best_w = support, risk, w

    residuals = y - X @ best_w
    eps_star = float(np.max(np.abs(X.T @ residuals))) if p else 0.0
    return SparseOracleResult(support=best_support, w_star=best_w, r_star=best_risk,
                              eps_star=eps_star, residuals=residuals)


def divergence(X: np.ndarray, w_a: np.ndarray, w_b: np.ndarray) -> float:
    """(1/n) ||X (w_a - w_b)||^2"""
    X = np.asarray(X, dtype=float)
    diff = np.asarray(w_a, dtype=float) - np.asarray(w_b, dtype=float)
    if diff.shape != (X.shape[1],):
        raise DataError(f"weights of shape {diff.shape} do not match {X.shape[1]} columns")
    fitted = X @ diff
    return float(fitted @ fitted) / X.shape[0]


def _premise_slack(X: np.ndarray, y: np.ndarray) -> float:
    # Round-off level of eps_star; lets the noiseless case count as eps_star = 0.
    return 1e-9 * max(1.0, float(np.linalg.norm(y)) * float(np.max(np.linalg.norm(X, axis=0))))


def lasso_premise(X: np.ndarray, y: np.ndarray, theta: float, oracle: SparseOracleResult) -> bool:
    """theta >= 2 eps_star / n"""
    return bool(theta >= 2.0 * (oracle.eps_star - _premise_slack(X, y)) / X.shape[0])


def spice_premise(X: np.ndarray, y: np.ndarray, oracle: SparseOracleResult) -> bool:
    """||phi~_j|| sqrt(R_star) >= eps_star for every column j"""
    # Multiplied form, so R_star = 0 needs no division.
    norms = np.linalg.norm(X, axis=0)
    return bool(np.all(norms * math.sqrt(oracle.r_star) >= oracle.eps_star - _premise_slack(X, y)))


def check_lasso_bound(X: np.ndarray, y: np.ndarray, k: int, theta: float,
                      oracle: Optional[SparseOracleResult] = None) -> BoundReport:
    """
    If theta >= 2 eps_star / n, the LASSO divergence is at most 2 theta ||w_star||_1.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    oracle = oracle or best_subset(X, y, k)
    premise = lasso_premise(X, y, theta, oracle)

    w_hat = lasso_fit(X, y, theta, u=0, tol=1e-12, max_cycles=200000)
    measured = divergence(X, w_hat, oracle.w_star)
    bound = 2.0 * theta * float(np.abs(oracle.w_star).sum())
    passed = (not premise) or measured <= bound + BOUND_SLACK
    if not passed:
        logger.warning(f"LASSO bound violated: divergence {measured:.6g} > {bound:.6g}")
    return BoundReport(check="lasso", premise_holds=premise, bound=bound, measured=measured,
                       passed=passed, eps_star=oracle.eps_star, r_star=oracle.r_star,
                       support=list(oracle.support), theta=theta)


def converged_spice(X: np.ndarray, y: np.ndarray, config: Optional[SpiceConfig] = None,
                    tol: Optional[float] = None) -> SpiceModel:
    """SPICE on raw regressors (u = 0) run to convergence on the full batch"""
    X = np.asarray(X, dtype=float)
    feature_map = FeatureMap(FeatureMapConfig(kind=FeatureKind.LINEAR, mean_kind=MeanKind.NONE, d=X.shape[1]))
    model = SpiceModel(feature_map, config)
    model.stats.ingest_batch(X, y)
    model.fit_to_convergence(tol=tol)
    return model


def check_spice_bound(X: np.ndarray, y: np.ndarray, k: int,
                      oracle: Optional[SparseOracleResult] = None) -> BoundReport:
    """
    With u = 0 and ||phi~_j|| sqrt(R_star) >= eps_star for all j, the SPICE
    divergence is at most (2/n) g^2 + 4 sqrt(R_star / n) g, where
    g = sum_j ||phi~_j|| |w_star_j| / sqrt(n).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    oracle = oracle or best_subset(X, y, k)
    norms = np.linalg.norm(X, axis=0)
    premise = spice_premise(X, y, oracle)

    model = converged_spice(X, y, tol=1e-10)
    measured = divergence(X, model.weights, oracle.w_star)
    g = float(norms @ np.abs(oracle.w_star)) / math.sqrt(n)
    bound = 2.0 * g * g / n + 4.0 * math.sqrt(oracle.r_star / n) * g
    passed = (not premise) or measured <= bound + BOUND_SLACK
    if not passed:
        logger.warning(f"SPICE bound violated: divergence {measured:.6g} > {bound:.6g}")
    return BoundReport(check="spice", premise_holds=premise, bound=bound, measured=measured,
                       passed=passed, eps_star=oracle.eps_star, r_star=oracle.r_star,
                       support=list(oracle.support))


def reference_spice(Phi: np.ndarray, y: np.ndarray, u: int = 0, scale: float = 1.0,
                    tol: float = 1e-12, max_iter: int = 10000) -> np.ndarray:
    """
    Offline SPICE minimizer by alternating over (sigma, w).

    Uses sqrt(R) = min_sigma R / (2 sigma) + sigma / 2: for fixed sigma the
    w-step is a weighted LASSO with lambda_j = 2 sigma s ||phi~_j|| / n on j >= u,
    for fixed w the sigma-step is sigma = sqrt(R(w)). Shares no code with the
    closed-form coordinate solver.
    """
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = Phi.shape
    gamma = Phi.T @ Phi
    rho = Phi.T @ y
    weights = np.sqrt(np.clip(np.diag(gamma), 0.0, None)) * scale / n
    weights[:u] = 0.0

    w = np.zeros(p)
    for iteration in range(1, max_iter + 1):
        r = y - Phi @ w
        sigma = math.sqrt(float(r @ r) / n)
        if sigma == 0.0:
            break
        w_new, _ = lasso_cd_gram(gamma, rho, n, 2.0 * sigma * weights, w_init=w, tol=tol,
                                 max_cycles=get_settings().LASSO_MAX_CYCLES * 10)
        change = float(np.max(np.abs(w_new - w))) if p else 0.0
        w = w_new
        if change < tol:
            logger.debug(f"reference SPICE converged after {iteration} alternations")
            break
    return w


def gaussian_inflation_event_rate(n: int, p: int, delta: float = 4.0, trials: int = 10000,
                                  seed: int = 0, sigma: float = 1.0) -> InflationReport:
    """
    Frequency of sigma sqrt(2 ln p + delta) >= max_j |eps^T phi~_j| / sqrt(n)
    for Gaussian eps and columns normalized to ||phi~_j||^2 = n.
    Guaranteed to be at least 1 - 2 exp(-delta / 2).
    """
    if n < 1 or p < 1 or trials < 1:
        raise DataError("n, p and trials must be positive")
    rng = np.random.default_rng(seed)
    threshold = sigma * math.sqrt(2.0 * math.log(p) + delta)
    hits = 0
    chunk = 1000
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        Phi = rng.standard_normal((m, n, p))
        Phi *= math.sqrt(n) / np.linalg.norm(Phi, axis=1, keepdims=True)
        eps = sigma * rng.standard_normal((m, n))
        corr = np.abs(np.einsum("tn,tnp->tp", eps, Phi)).max(axis=1) / math.sqrt(n)
        hits += int(np.count_nonzero(corr <= threshold))

    rate = hits / trials
    guaranteed = 1.0 - 2.0 * math.exp(-delta / 2.0)
    return InflationReport(n=n, p=p, delta=delta, trials=trials, event_rate=rate,
                           guaranteed_rate=guaranteed, passed=rate >= guaranteed)


def random_instance(seed: int, n: int, p: int, k: int, noise: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian design, k-sparse Gaussian weights, Gaussian noise of the given scale"""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    w = np.zeros(p)
    support = rng.choice(p, size=min(k, p), replace=False)
    w[support] = rng.standard_normal(support.size) * 2.0
    y = X @ w + noise * rng.standard_normal(n)
    return X, y


def run_bound_suite(seeds: Iterable[int], n: int = 40, p: int = 8, k: int = 2,
                    noiseless_seeds: int = 5, inflation_trials: Optional[int] = None,
                    min_premises: int = 0, max_draws: int = 100_000,
                    keep_reports: bool = False) -> BoundSuiteReport:
    """
    Run both bound checks over random instances.

    LASSO uses theta = 2 * sqrt(R_star) * sqrt((2 ln p + 4) / n), which meets
    the premise for most instances; SPICE uses the unscaled weights, whose
    premise holds on fewer than one instance in ten at the default sizes.

    Args:
        seeds: instances that run both checks unconditionally
        min_premises: after `seeds`, keep drawing instances (seeds continue
            past the largest one) until each check has run on at least this
            many instances with its premise satisfied; a drawn instance only
            runs the checks whose premise holds and whose quota is still open
        max_draws: cap on the extra instances drawn for the quota
        keep_reports: attach every individual BoundReport to the result
    """
    seeds = list(seeds)
    reports: List[BoundReport] = []
    failures: List[BoundReport] = []
    premises = {"lasso": 0, "spice": 0}
    violations = {"lasso": 0, "spice": 0}

    def record(report: BoundReport) -> None:
        premises[report.check] += report.premise_holds
        violations[report.check] += not report.passed
        if keep_reports:
            reports.append(report)
        if not report.passed:
            failures.append(report)

    def lasso_theta(oracle: SparseOracleResult) -> float:
        return 2.0 * universal_lasso_theta(math.sqrt(oracle.r_star), n, p, 4.0)

    for seed in seeds:
        X, y = random_instance(seed, n, p, k)
        oracle = best_subset(X, y, k)
        record(check_lasso_bound(X, y, k, lasso_theta(oracle), oracle))
        record(check_spice_bound(X, y, k, oracle))

    extra = 0
    next_seed = max(seeds, default=-1) + 1
    while min(premises.values()) < min_premises:
        if extra >= max_draws:
            logger.warning(
                f"Premise quota of {min_premises} not reached after {max_draws} extra instances: "
                f"LASSO {premises['lasso']}, SPICE {premises['spice']}"
            )
            break
        X, y = random_instance(next_seed + extra, n, p, k)
        extra += 1
        oracle = best_subset(X, y, k)
        theta = lasso_theta(oracle)
        if premises["lasso"] < min_premises and lasso_premise(X, y, theta, oracle):
            record(check_lasso_bound(X, y, k, theta, oracle))
        if premises["spice"] < min_premises and spice_premise(X, y, oracle):
            record(check_spice_bound(X, y, k, oracle))

    noiseless_passed = True
    for seed in range(noiseless_seeds):
        X, y = random_instance(10**6 + seed, n, p, k, noise=0.0)
        oracle = best_subset(X, y, k)
        for report in (check_lasso_bound(X, y, k, 0.01, oracle), check_spice_bound(X, y, k, oracle)):
            if keep_reports:
                reports.append(report)
            if not (report.premise_holds and report.passed):
                noiseless_passed = False
                failures.append(report)

    inflation = gaussian_inflation_event_rate(n, p, trials=inflation_trials) if inflation_trials else None
    logger.info(
        f"Bound suite over {len(seeds) + extra} instances: LASSO {violations['lasso']}/{premises['lasso']}, "
        f"SPICE {violations['spice']}/{premises['spice']} violations/premises"
    )
    return BoundSuiteReport(instances=len(seeds), extra_instances=extra, n=n, p=p, k=k,
                            lasso_premise_count=premises["lasso"], lasso_violations=violations["lasso"],
                            spice_premise_count=premises["spice"], spice_violations=violations["spice"],
                            noiseless_passed=noiseless_passed, inflation=inflation, failures=failures,
                            reports=reports)
