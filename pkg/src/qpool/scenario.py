"""End-to-end pooling scenarios, reports, and seeded verification sweeps.

A scenario is a joint state plus one POVM per party. Running it conditions
the shared system on every outcome combination, pools the per-party
posteriors, and compares the pool against the jointly conditioned state.
Audits (probability totals, marginal consistency) are computed from the
unnormalized conditioned operators so that skipped low-probability outcomes
still participate.

Sweeps derive per-trial seeds as splitmix64(master XOR index), so a trial's
data never depends on how many workers ran it; parallel results are
value-identical to sequential ones.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compat import bfm_compatible, state_in_intersection
from .errors import ContractViolation
from .linalg import DEFAULT_TOL, trace_distance
from .measure import Povm, conditioned_operator, random_povm
from .pooling import PooledState, pool_n
from .states import (
    DensityOperator,
    MultipartiteState,
    _as_rng,
    choi_state,
    haar_random_pure,
    haar_random_unitary,
    is_maximal_rank_pure,
    orthogonal_product_mixture,
    random_density,
    shared_state,
)

SKIP_TOL = 1e-6

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 scramble step; maps any 64-bit value to a seed."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def trial_seed(master: int, index: int) -> int:
    """Per-trial seed: splitmix64 of the master seed XOR the trial index."""
    return splitmix64((int(master) & _MASK64) ^ int(index))


@dataclass(frozen=True, eq=False)
class Scenario:
    """A joint state, one POVM per party, and which outcomes to evaluate."""

    state: MultipartiteState
    povms: tuple[Povm, ...]
    outcome_selection: str | tuple[int, ...] = "all"
    label: str = ""
    seed: int | None = None
    state_class: str = "other"  # provenance: "i", "ii", or "other"

    def __post_init__(self):
        povms = tuple(self.povms)
        if len(povms) != self.state.n_parties:
            raise ContractViolation(
                f"need {self.state.n_parties} POVMs, got {len(povms)}"
            )
        for i, povm in enumerate(povms):
            if povm.dim != self.state.party_dims[i]:
                raise ContractViolation(
                    f"POVM {i} dim {povm.dim} != party dim {self.state.party_dims[i]}"
                )
        sel = self.outcome_selection
        if sel != "all":
            sel = tuple(int(a) for a in sel)
            if len(sel) != len(povms):
                raise ContractViolation(
                    f"outcome tuple needs {len(povms)} entries, got {len(sel)}"
                )
            for i, a in enumerate(sel):
                if not 0 <= a < povms[i].n_outcomes:
                    raise ContractViolation(f"outcome {a} out of range for party {i}")
        if self.state_class not in ("i", "ii", "other"):
            raise ContractViolation(f"unknown state_class {self.state_class!r}")
        object.__setattr__(self, "povms", povms)
        object.__setattr__(self, "outcome_selection", sel)


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    """Everything computed for one evaluated outcome combination."""

    outcomes: tuple[int, ...]
    probability: float
    posteriors: tuple[DensityOperator, ...]
    joint_posterior: DensityOperator
    pooled: PooledState
    distance: float
    parties_compatible: bool
    joint_in_intersection: bool


@dataclass(frozen=True, eq=False)
class PoolingReport:
    """Per-outcome records plus scenario-level aggregates and audits."""

    label: str
    dims: tuple[int, ...]
    state_class: str
    rank_condition: bool
    skip_tol: float
    tol: float
    records: tuple[OutcomeRecord, ...]
    skipped: tuple[tuple[tuple[int, ...], float], ...]
    probability_total: float
    max_distance: float
    mean_distance: float
    max_marginal_defect: float | None


def run_scenario(
    scenario: Scenario,
    skip_tol: float = SKIP_TOL,
    tol: float = DEFAULT_TOL,
) -> PoolingReport:
    """Condition, pool, and audit every selected outcome combination."""
    w = scenario.state
    povms = scenario.povms
    prior = shared_state(w)
    n_parties = w.n_parties

    # Unnormalized per-party conditioned operators, reused across tuples.
    party_ops = []
    for i in range(n_parties):
        ops = [
            conditioned_operator(w, {i: povms[i].effects[a]})
            for a in range(povms[i].n_outcomes)
        ]
        party_ops.append(ops)

    if scenario.outcome_selection == "all":
        tuples = list(itertools.product(*(range(p.n_outcomes) for p in povms)))
    else:
        tuples = [scenario.outcome_selection]

    records = []
    skipped = []
    prob_total = 0.0
    joint_ops = {}
    for t in tuples:
        g, p = conditioned_operator(
            w, {i: povms[i].effects[a] for i, a in enumerate(t)}
        )
        joint_ops[t] = g
        prob_total += p
        if p <= skip_tol:
            skipped.append((t, p))
            continue
        posteriors = tuple(
            DensityOperator(party_ops[i][a][0] / party_ops[i][a][1])
            for i, a in enumerate(t)
        )
        joint_post = DensityOperator(g / p)
        pooled = pool_n(posteriors, prior, tol)
        dist = trace_distance(pooled.matrix, joint_post.matrix)
        compat = all(
            bfm_compatible(posteriors[i], posteriors[j], tol)
            for i in range(n_parties)
            for j in range(i + 1, n_parties)
        )
        inside = all(
            state_in_intersection(joint_post, posteriors[i], posteriors[j], tol)
            for i in range(n_parties)
            for j in range(i + 1, n_parties)
        )
        records.append(
            OutcomeRecord(t, p, posteriors, joint_post, pooled, dist, compat, inside)
        )

    marginal_defect = None
    if scenario.outcome_selection == "all":
        marginal_defect = 0.0
        for i in range(n_parties):
            for a in range(povms[i].n_outcomes):
                acc = sum(joint_ops[t] for t in tuples if t[i] == a)
                defect = float(np.abs(acc - party_ops[i][a][0]).max())
                marginal_defect = max(marginal_defect, defect)

    dists = [r.distance for r in records]
    return PoolingReport(
        label=scenario.label,
        dims=w.dims,
        state_class=scenario.state_class,
        rank_condition=is_maximal_rank_pure(w, tol),
        skip_tol=skip_tol,
        tol=tol,
        records=tuple(records),
        skipped=tuple(skipped),
        probability_total=prob_total,
        max_distance=max(dists) if dists else 0.0,
        mean_distance=float(np.mean(dists)) if dists else 0.0,
        max_marginal_defect=marginal_defect,
    )


def random_choi_parts(party_dims: Sequence[int], seed=None):
    """Random full-rank shared state and isometry for the pure family.

    Eigenvalues are squared Gaussians floored at 0.01 and renormalized, so
    the shared rank is numerically unambiguous.
    """
    rng = _as_rng(seed)
    d = int(np.prod(party_dims))
    lam = rng.standard_normal(d) ** 2
    lam = np.maximum(lam / lam.sum(), 0.01)
    lam = lam / lam.sum()
    basis = haar_random_unitary(d, rng)
    rho = DensityOperator((basis * lam) @ basis.conj().T)
    u = haar_random_unitary(d, rng)
    return rho, u


def random_choi_scenario_n(
    party_dims: Sequence[int], outcome_counts: Sequence[int], seed=None
) -> Scenario:
    """Random scenario from the pure maximal-rank family, any party count."""
    rng = _as_rng(seed)
    party_dims = tuple(int(d) for d in party_dims)
    rho, u = random_choi_parts(party_dims, rng)
    state = choi_state(rho, party_dims, u)
    povms = tuple(
        random_povm(d, int(n), rng) for d, n in zip(party_dims, outcome_counts)
    )
    label = f"choi dims={party_dims} outcomes={tuple(outcome_counts)}"
    return Scenario(
        state,
        povms,
        "all",
        label,
        seed if isinstance(seed, int) else None,
        state_class="i",
    )


def random_choi_scenario(
    d_a: int, d_b: int, outcomes_a: int, outcomes_b: int, seed=None
) -> Scenario:
    """Two-party restriction of random_choi_scenario_n."""
    return random_choi_scenario_n((d_a, d_b), (outcomes_a, outcomes_b), seed)


def random_orthogonal_mixture_scenario(
    d_a: int,
    d_b: int,
    outcomes_a: int,
    outcomes_b: int,
    seed=None,
    n_blocks: int | None = None,
    block_dims: Sequence[int] | None = None,
) -> Scenario:
    """Random orthogonal-product-mixture scenario with block-diagonal prior."""
    rng = _as_rng(seed)
    if n_blocks is None:
        n_blocks = int(rng.integers(2, 4))
    if block_dims is None:
        block_dims = [int(rng.integers(1, 3)) for _ in range(n_blocks)]
    else:
        block_dims = [int(b) for b in block_dims]
        n_blocks = len(block_dims)
    if n_blocks < 2:
        raise ContractViolation("mixture scenarios need at least two blocks")
    d_s = sum(block_dims)
    weights = rng.standard_normal(n_blocks) ** 2
    weights = np.maximum(weights / weights.sum(), 0.05)
    weights = weights / weights.sum()
    states_a = [random_density(d_a, rng) for _ in range(n_blocks)]
    states_b = [random_density(d_b, rng) for _ in range(n_blocks)]
    states_shared = []
    offset = 0
    for bd in block_dims:
        block = random_density(bd, rng)
        m = np.zeros((d_s, d_s), dtype=np.complex128)
        m[offset : offset + bd, offset : offset + bd] = block.matrix
        states_shared.append(DensityOperator(m))
        offset += bd
    state = orthogonal_product_mixture(weights, states_a, states_b, states_shared)
    povms = (random_povm(d_a, outcomes_a, rng), random_povm(d_b, outcomes_b, rng))
    label = f"mixture dims=({d_a},{d_b},{d_s}) blocks={tuple(block_dims)}"
    return Scenario(
        state,
        povms,
        "all",
        label,
        seed if isinstance(seed, int) else None,
        state_class="ii",
    )


def random_rank_deficient_scenario(d_a: int, d_b: int, d_s: int, seed=None) -> Scenario:
    """Random pure scenario that violates the rank condition (d_s < d_a*d_b)."""
    if d_s >= d_a * d_b:
        raise ContractViolation(
            f"shared dim {d_s} must be below the party product {d_a * d_b}"
        )
    rng = _as_rng(seed)
    state = haar_random_pure((d_a, d_b, d_s), rng)
    povms = (random_povm(d_a, 2, rng), random_povm(d_b, 2, rng))
    label = f"rank-deficient dims=({d_a},{d_b},{d_s})"
    return Scenario(
        state,
        povms,
        "all",
        label,
        seed if isinstance(seed, int) else None,
        state_class="other",
    )


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a verification sweep; category is 'i', 'ii', or 'none'."""

    category: str
    trials: int
    seed: int = 0
    jobs: int = 1
    tol: float = DEFAULT_TOL
    skip_tol: float = SKIP_TOL
    party_dims: tuple[int, ...] | None = None
    shared_dim: int | None = None
    outcome_range: tuple[int, int] = (2, 4)
    distance_tol: float = 1e-8
    commutator_tol: float = 1e-9
    marginal_tol: float = 1e-9
    probability_tol: float = 1e-10
    failure_threshold: float = 0.01
    min_failure_fraction: float = 0.95

    def __post_init__(self):
        if self.category not in ("i", "ii", "none"):
            raise ContractViolation(f"unknown sweep category {self.category!r}")
        if self.trials < 1:
            raise ContractViolation("sweep needs at least one trial")
        if self.jobs < 1:
            raise ContractViolation("jobs must be at least 1")
        if self.party_dims is not None:
            dims = tuple(int(d) for d in self.party_dims)
            if len(dims) != 2 or any(d < 2 for d in dims):
                raise ContractViolation(f"party_dims must be two ints >= 2: {dims}")
            object.__setattr__(self, "party_dims", dims)
        if self.shared_dim is not None and self.category != "none":
            raise ContractViolation("shared_dim only applies to category 'none'")


@dataclass(frozen=True, eq=False)
class SweepTrial:
    """Summary of one sweep trial (full per-outcome data stays internal)."""

    index: int
    seed: int
    label: str
    dims: tuple[int, ...]
    outcome_counts: tuple[int, ...]
    n_evaluated: int
    n_skipped: int
    max_distance: float
    mean_distance: float
    probability_total: float
    marginal_defect: float
    all_compatible: bool
    max_commutator: float | None
    max_hermiticity_defect: float
    rank_condition: bool
    disagrees: bool


@dataclass(frozen=True, eq=False)
class SweepReport:
    """Aggregated sweep outcome; `passed` is the category's verification predicate."""

    config: SweepConfig
    trials: tuple[SweepTrial, ...]
    max_distance: float
    mean_distance: float
    n_disagreeing: int
    fraction_disagreeing: float
    max_commutator: float | None
    max_marginal_defect: float
    max_probability_defect: float
    all_compatible: bool
    passed: bool
    wall_time_s: float


def _commutator_defect(report: PoolingReport, prior: DensityOperator) -> float:
    worst = 0.0
    for rec in report.records:
        mats = [p.matrix for p in rec.posteriors] + [prior.matrix]
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                worst = max(worst, float(np.abs(comm).max()))
    return worst


def _run_trial(config: SweepConfig, index: int) -> SweepTrial:
    seed = trial_seed(config.seed, index)
    rng = np.random.default_rng(seed)
    lo, hi = config.outcome_range
    if config.category == "none":
        dims = config.party_dims or (2, 2)
        d_s = config.shared_dim or 2
        scenario = random_rank_deficient_scenario(dims[0], dims[1], d_s, rng)
    else:
        dims = config.party_dims or (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        n_a = int(rng.integers(lo, hi + 1))
        n_b = int(rng.integers(lo, hi + 1))
        if config.category == "i":
            scenario = random_choi_scenario(dims[0], dims[1], n_a, n_b, rng)
        else:
            scenario = random_orthogonal_mixture_scenario(dims[0], dims[1], n_a, n_b, rng)
    report = run_scenario(scenario, config.skip_tol, config.tol)
    max_comm = None
    if config.category == "ii":
        max_comm = _commutator_defect(report, shared_state(scenario.state))
    return SweepTrial(
        index=index,
        seed=seed,
        label=scenario.label,
        dims=scenario.state.dims,
        outcome_counts=tuple(p.n_outcomes for p in scenario.povms),
        n_evaluated=len(report.records),
        n_skipped=len(report.skipped),
        max_distance=report.max_distance,
        mean_distance=report.mean_distance,
        probability_total=report.probability_total,
        marginal_defect=report.max_marginal_defect or 0.0,
        all_compatible=all(
            r.parties_compatible and r.joint_in_intersection for r in report.records
        ),
        max_commutator=max_comm,
        max_hermiticity_defect=max(
            (r.pooled.hermiticity_defect for r in report.records), default=0.0
        ),
        rank_condition=report.rank_condition,
        disagrees=report.max_distance > config.failure_threshold,
    )


def verification_sweep(config: SweepConfig) -> SweepReport:
    """Run seeded trials (optionally in parallel) and test the predicate."""
    start = time.perf_counter()
    indices = range(config.trials)
    if config.jobs == 1:
        trials = [_run_trial(config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            trials = list(pool.map(lambda i: _run_trial(config, i), indices))
    wall = time.perf_counter() - start

    max_distance = max(t.max_distance for t in trials)
    n_disagree = sum(t.disagrees for t in trials)
    fraction = n_disagree / len(trials)
    comms = [t.max_commutator for t in trials if t.max_commutator is not None]
    max_comm = max(comms) if comms else None
    max_marginal = max(t.marginal_defect for t in trials)
    max_prob_defect = max(abs(t.probability_total - 1.0) for t in trials)
    all_compat = all(t.all_compatible for t in trials)

    if config.category == "none":
        passed = fraction >= config.min_failure_fraction
    else:
        passed = (
            max_distance < config.distance_tol
            and max_marginal < config.marginal_tol
            and max_prob_defect < config.probability_tol
            and all_compat
            and (config.category != "ii" or (max_comm or 0.0) < config.commutator_tol)
        )
    return SweepReport(
        config=config,
        trials=tuple(trials),
        max_distance=max_distance,
        mean_distance=float(np.mean([t.max_distance for t in trials])),
        n_disagreeing=n_disagree,
        fraction_disagreeing=fraction,
        max_commutator=max_comm,
        max_marginal_defect=max_marginal,
        max_probability_defect=max_prob_defect,
        all_compatible=all_compat,
        passed=passed,
        wall_time_s=wall,
    )
