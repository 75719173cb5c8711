"""Eigenvalue branches over the coupling, exceptional points, phase transitions.

A sweep solves ``H(lam)`` on a uniform grid, follows the lowest ``k``
levels by eigenvector overlap (optimal assignment on ``|<v_prev|v_next>|``)
and labels every branch by its parent product state at ``lam = 0``.

Two branches form a coalescing pair once they appear as complex-conjugate
partners.  For such a pair the reality predicate ("the two levels are a
conjugate pair") is sampled on the grid and every change of its value is
bisected down to an exceptional point.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigensolver import DEFAULT_REALITY_EPS, RealityPartition, classify_reality, eig_general
from .errors import BrokenConjugacyError, InvalidArgumentError, InvalidBracketError
from .problem import BasisConfig, GridConfig, Problem
from .symmetry import basis_irrep, state_irrep

log = logging.getLogger(__name__)

__all__ = [
    "METHODS",
    "SweepConfig",
    "LabeledLevel",
    "Branch",
    "ExceptionalPoint",
    "TransitionCount",
    "PairReport",
    "SweepResult",
    "run_sweep",
    "find_exceptional_point",
    "count_phase_transitions",
    "matrix_family_predicate",
    "PairPredicate",
]

METHODS = ("basis_dm", "pseudospectral")
AMBIGUITY = 1e-3


@dataclass(frozen=True)
class SweepConfig:
    lambda_start: float = 0.0
    lambda_end: float = 6.0
    steps: int = 201
    tracked_levels: int = 8
    method: str = "basis_dm"
    reality_eps: float = DEFAULT_REALITY_EPS
    ep_tol: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        for name in ("lambda_start", "lambda_end", "reality_eps", "ep_tol"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.lambda_start < 0:
            raise InvalidArgumentError("lambda_start must be non-negative")
        if not self.lambda_start < self.lambda_end:
            raise InvalidArgumentError(
                f"need lambda_start < lambda_end, got [{self.lambda_start}, {self.lambda_end}]"
            )
        if not isinstance(self.steps, int) or self.steps < 2:
            raise InvalidArgumentError(f"steps must be an integer >= 2, got {self.steps!r}")
        if not isinstance(self.tracked_levels, int) or self.tracked_levels < 1:
            raise InvalidArgumentError("tracked_levels must be a positive integer")
        if self.method not in METHODS:
            raise InvalidArgumentError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.reality_eps > 0 and self.ep_tol > 0):
            raise InvalidArgumentError("reality_eps and ep_tol must be positive")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise InvalidArgumentError("workers must be a positive integer")

    @property
    def lambdas(self):
        return np.linspace(self.lambda_start, self.lambda_end, self.steps)

    @property
    def step(self):
        return (self.lambda_end - self.lambda_start) / (self.steps - 1)

    def default_discretization(self):
        return BasisConfig(24) if self.method == "basis_dm" else GridConfig(5.0, 40)


@dataclass
class LabeledLevel:
    lam: float
    value: complex
    residual: float
    ci: object
    d2h: object
    overlap: float = math.nan
    partner: int = None
    ambiguous: bool = False


@dataclass
class Branch:
    id: int
    parent: tuple
    levels: list = field(default_factory=list)

    @property
    def ancestry_ci(self):
        return str(basis_irrep(self.parent, "Ci"))

    @property
    def ancestry_d2h(self):
        return str(basis_irrep(self.parent, "D2h"))

    @property
    def lambdas(self):
        return np.array([lv.lam for lv in self.levels])

    @property
    def values(self):
        return np.array([lv.value for lv in self.levels])

    @property
    def overlaps(self):
        return np.array([lv.overlap for lv in self.levels])


@dataclass
class ExceptionalPoint:
    lambda_low: float
    lambda_high: float
    branch_ids: tuple
    gap_at_bracket: float
    direction: str = "real->complex"
    widths: list = field(default_factory=list)

    @property
    def width(self):
        return self.lambda_high - self.lambda_low

    @property
    def estimate(self):
        return 0.5 * (self.lambda_low + self.lambda_high)


@dataclass
class TransitionCount:
    count: int
    exceptional_points: list
    states: np.ndarray


@dataclass
class PairReport:
    branch_ids: tuple
    parents: tuple
    transitions: TransitionCount

    @property
    def count(self):
        return self.transitions.count


@dataclass
class SweepResult:
    config: SweepConfig
    params: object
    meta: dict
    lambdas: np.ndarray
    branches: list
    pairs: list
    warnings: list
    continuity_constant: float
    tracking_faults: list

    @property
    def faults(self):
        """Fatal problems: tracking faults and spectra without conjugate closure."""
        broken = [w for w in self.warnings if w["kind"] == "broken-conjugacy"]
        return self.tracking_faults + broken

    @property
    def exceptional_points(self):
        return [ep for pair in self.pairs for ep in pair.transitions.exceptional_points]

    def near_ep(self, index, window=2):
        """True when grid point ``index`` lies within ``window`` steps of an EP."""
        lam = self.lambdas[index]
        reach = window * self.config.step
        return any(
            ep.lambda_low - reach <= lam <= ep.lambda_high + reach for ep in self.exceptional_points
        )

    def overlap_violations(self, threshold=0.9, window=2):
        """Grid points where a branch overlap drops below ``threshold`` away from EPs."""
        out = []
        for br in self.branches:
            for j, lv in enumerate(br.levels[1:], start=1):
                if lv.overlap < threshold and not self.near_ep(j, window):
                    out.append((br.id, j, lv.overlap))
        return out


# --- exceptional points and transition counting -----------------------------


def _evaluate(predicate, lam):
    if hasattr(predicate, "evaluate"):
        return predicate.evaluate(lam)
    return bool(predicate(lam)), math.nan


def find_exceptional_point(predicate, lambda_low, lambda_high, tol, branch_ids=None):
    """Bisect a change of the reality predicate down to a bracket of width ``tol``.

    ``predicate(lam)`` is True when the pair is complex conjugate.  The two
    ends must disagree; the bracket keeps that property and halves every
    iteration.  The widths of all brackets are kept in ``widths``.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    lo, hi = float(lambda_low), float(lambda_high)
    if not lo < hi:
        raise InvalidArgumentError("need lambda_low < lambda_high")
    left, gap_lo = _evaluate(predicate, lo)
    right, gap_hi = _evaluate(predicate, hi)
    if left == right:
        state = "complex" if left else "real"
        raise InvalidBracketError(f"pair is {state} at both ends of [{lo}, {hi}]")
    gaps = [g for g in (gap_lo, gap_hi) if not math.isnan(g)]
    widths = [hi - lo]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        state, gap = _evaluate(predicate, mid)
        if not math.isnan(gap):
            gaps.append(gap)
        if state == left:
            lo = mid
        else:
            hi = mid
        widths.append(hi - lo)
    return ExceptionalPoint(
        lambda_low=lo,
        lambda_high=hi,
        branch_ids=tuple(branch_ids) if branch_ids is not None else (),
        gap_at_bracket=min(gaps) if gaps else math.nan,
        direction="real->complex" if right else "complex->real",
        widths=widths,
    )


def count_phase_transitions(predicate, lambda_start, lambda_end, steps, tol, branch_ids=None):
    """Number of changes of the reality predicate on a uniform grid, each bisected."""
    if not isinstance(steps, int) or steps < 2:
        raise InvalidArgumentError("steps must be an integer >= 2")
    if not lambda_start < lambda_end:
        raise InvalidArgumentError("need lambda_start < lambda_end")
    grid = np.linspace(lambda_start, lambda_end, steps)
    states = np.array([_evaluate(predicate, lam)[0] for lam in grid])
    eps = []
    for j in np.flatnonzero(states[1:] != states[:-1]):
        eps.append(find_exceptional_point(predicate, grid[j], grid[j + 1], tol, branch_ids))
    return TransitionCount(len(eps), eps, states)


def matrix_family_predicate(family, eps=DEFAULT_REALITY_EPS):
    """Predicate "the spectrum of ``family(lam)`` contains a conjugate pair"."""

    def predicate(lam):
        spec = eig_general(np.asarray(family(lam)), vectors=False)
        return bool(classify_reality(spec, eps).pairs)

    return predicate


class PairPredicate:
    """Reality predicate of one tracked pair of branches.

    On sweep grid points the answer comes from the tracking data.  Off the
    grid ``H(lam)`` is solved and the two branches are located by overlap
    with their eigenvectors at the nearest grid point.
    """

    def __init__(self, problem, lambdas, vectors, states, gaps, branch_ids, count, eps):
        self.problem = problem
        self.lambdas = lambdas
        self.vectors = vectors  # (steps, dim, 2)
        self.cache = {float(l): (bool(s), float(g)) for l, s, g in zip(lambdas, states, gaps)}
        self.branch_ids = branch_ids
        self.count = count
        self.eps = eps

    def evaluate(self, lam):
        lam = float(lam)
        if lam in self.cache:
            return self.cache[lam]
        ref = self.vectors[int(np.argmin(np.abs(self.lambdas - lam)))]
        spec = self.problem.spectrum(lam, count=self.count)
        overlaps = np.abs(ref.conj().T @ spec.eigenvectors)
        rows, cols = linear_sum_assignment(-overlaps)
        a, b = (int(c) for c in cols[np.argsort(rows)])
        part = classify_reality(spec, self.eps)
        result = (part.partner(a) == b, float(abs(spec.eigenvalues[a] - spec.eigenvalues[b])))
        self.cache[lam] = result
        return result

    def __call__(self, lam):
        return self.evaluate(lam)[0]


# --- the sweep ---------------------------------------------------------------


def _solve_all(problem, lambdas, count, workers):
    solve = lambda lam: problem.spectrum(lam, count=count)  # noqa: E731
    if workers == 1:
        for lam in lambdas:
            yield solve(lam)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(solve, lambdas)


def _label(problem, v):
    return state_irrep(v, problem, "Ci"), state_irrep(v, problem, "D2h")


def run_sweep(cfg, params, discretization=None, problem=None):
    """Track the lowest ``cfg.tracked_levels`` branches over ``cfg.lambdas``."""
    if discretization is None:
        discretization = cfg.default_discretization()
    expected = "basis_dm" if isinstance(discretization, BasisConfig) else "pseudospectral"
    if expected != cfg.method:
        raise InvalidArgumentError(f"method {cfg.method!r} does not match {discretization!r}")
    if problem is None:
        problem = Problem.build(params, discretization)
    k = cfg.tracked_levels
    if k > problem.dim:
        raise InvalidArgumentError(f"cannot track {k} levels in dimension {problem.dim}")
    count = min(problem.dim, k + max(4, k // 2))
    lambdas = cfg.lambdas

    # parents from the separable problem at lam = 0
    ground = problem.spectrum(0.0, count=k)
    parents, _ = problem.parents(ground.eigenvectors[:, :k])
    branches = [Branch(i, tuple(p)) for i, p in enumerate(parents)]
    prev = ground.eigenvectors[:, :k]

    warnings = []
    tracked = np.empty((len(lambdas), problem.dim, k), dtype=complex)
    partner_of = np.full((len(lambdas), k), -1)
    for j, (lam, spec) in enumerate(zip(lambdas, _solve_all(problem, lambdas, count, cfg.workers))):
        overlaps = np.abs(prev.conj().T @ spec.eigenvectors)
        rows, cols = linear_sum_assignment(-overlaps)
        cols = cols[np.argsort(rows)]
        try:
            part = classify_reality(spec, cfg.reality_eps)
        except BrokenConjugacyError as exc:
            warnings.append({"kind": "broken-conjugacy", "lambda": float(lam), "message": str(exc)})
            part = RealityPartition(tuple(range(len(spec.eigenvalues))), ())
        owner = {int(c): i for i, c in enumerate(cols)}
        for i, c in enumerate(cols):
            row = np.sort(overlaps[i])[::-1]
            ambiguous = False
            if len(row) > 1 and row[0] - row[1] < AMBIGUITY:
                rival = int(np.argsort(overlaps[i])[::-1][1 if np.argmax(overlaps[i]) == c else 0])
                scale = max(1.0, abs(spec.eigenvalues[c]))
                # conjugate partners overlap a real-side vector equally; that tie is expected
                distinct = abs(spec.eigenvalues[c] - spec.eigenvalues[rival]) > 1e-6 * scale
                if distinct and part.partner(int(c)) != rival:
                    ambiguous = True
                    warnings.append(
                        {"kind": "ambiguous-match", "branch": i, "lambda": float(lam),
                         "margin": float(row[0] - row[1])}
                    )
            p = part.partner(int(c))
            if p is not None:
                if p in owner:
                    partner_of[j, i] = owner[p]
                else:
                    warnings.append({"kind": "untracked-partner", "branch": i, "lambda": float(lam)})
            v = spec.eigenvectors[:, c]
            ci, d2h = _label(problem, v)
            branches[i].levels.append(
                LabeledLevel(
                    lam=float(lam),
                    value=complex(spec.eigenvalues[c]),
                    residual=float(spec.residuals[c]),
                    ci=ci,
                    d2h=d2h,
                    overlap=float(overlaps[i, c]),
                    partner=None if partner_of[j, i] < 0 else int(partner_of[j, i]),
                    ambiguous=ambiguous,
                )
            )
        prev = spec.eigenvectors[:, cols]
        tracked[j] = prev

    # coalescing pairs and their transitions
    pair_ids = sorted(
        {tuple(sorted((i, int(p)))) for j in range(len(lambdas)) for i, p in enumerate(partner_of[j]) if p >= 0}
    )
    pairs = []
    for a, b in pair_ids:
        states = partner_of[:, a] == b
        gaps = np.abs(branches[a].values - branches[b].values)
        pred = PairPredicate(
            problem, lambdas, tracked[:, :, [a, b]], states, gaps, (a, b), count, cfg.reality_eps
        )
        tc = count_phase_transitions(pred, cfg.lambda_start, cfg.lambda_end, cfg.steps, cfg.ep_tol, (a, b))
        pairs.append(PairReport((a, b), (branches[a].parent, branches[b].parent), tc))

    result = SweepResult(
        config=cfg,
        params=params,
        meta=dict(problem.meta),
        lambdas=lambdas,
        branches=branches,
        pairs=pairs,
        warnings=warnings,
        continuity_constant=math.nan,
        tracking_faults=[],
    )
    _continuity(result)
    return result


def _continuity(result):
    """Estimate the real-part slope bound and flag jumps far above it."""
    dl = result.config.step
    slopes = np.array([np.abs(np.diff(br.values.real)) / dl for br in result.branches])
    if slopes.size == 0:
        return
    c = float(np.percentile(slopes, 95))
    result.continuity_constant = c
    limit = 10 * max(c, 1e-12)
    for br, row in zip(result.branches, slopes):
        for j in np.flatnonzero(row > limit):
            if not result.near_ep(j + 1):
                result.tracking_faults.append(
                    {"branch": br.id, "lambda": float(result.lambdas[j + 1]), "slope": float(row[j])}
                )
