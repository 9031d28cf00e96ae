"""
Monte Carlo harness - estimates entanglement and Bell-violation fractions
over random state ensembles, sharded over independent seeded streams
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
from concurrent.futures import ThreadPoolExecutor, as_completed
import logging
import math

import numpy as np

from ensembles.state_ensembles import build_ensemble
from entanglement.bell import (
    CANONICAL_SETTINGS,
    CHSH_BOUND,
    COORDINATE_TRIAD,
    RUS_BOUND,
    SQRT2,
    SettingsPair,
    Triad,
    bell_family4,
    bell_family36,
    expectations_batch,
    family_matrices,
)
from entanglement.errors import ConfigInvalid, LabelMismatch
from entanglement.qstate import ENTANGLEMENT_TOL, negativity_batch
from entanglement.rng import SeededRng, validate_seed
from entanglement.sampling import DEFAULT_SEPARABLE_TERMS

logger = logging.getLogger(__name__)

STATISTICS = (
    'entangled',
    'chsh-any-of-4',
    'rus-any-of-4',
    'chsh-any-of-36',
    'rus-any-of-36',
    'negativity-bound-slack',
)
SLACK_STATISTIC = 'negativity-bound-slack'
# alternative labels accepted on input; results always carry the canonical label
STATISTIC_ALIASES = {
    'bound13-slack-min': SLACK_STATISTIC,
}

# Frozen: changing it changes every sampled stream layout.
CHUNK_SIZE = 4096
SLACK_TOL = 1e-9
Z_95 = 1.96


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One Monte Carlo experiment

    ensemble: 'mixed', 'pure-haar' or 'separable' (with separable_terms mixture terms)
    statistics: labels from STATISTICS to report
    settings: fixed pair for the 4-operator family
    triads: fixed triads (A, B) for the 36-operator family
    """
    ensemble: str = 'mixed'
    statistics: Tuple[str, ...] = STATISTICS
    samples: int = 1
    seed: int = 0
    shards: int = 1
    separable_terms: int = DEFAULT_SEPARABLE_TERMS
    settings: SettingsPair = CANONICAL_SETTINGS
    triads: Tuple[Triad, Triad] = (COORDINATE_TRIAD, COORDINATE_TRIAD)

    def __post_init__(self):
        resolved = tuple(dict.fromkeys(resolve_statistic(s) for s in self.statistics))
        object.__setattr__(self, "statistics", resolved)

    def validate(self):
        """
        Check preconditions

        Raises:
            ConfigInvalid: with a one-line description of the first problem found
        """
        if self.samples < 1:
            raise ConfigInvalid("samples must be ≥ 1")
        if self.shards < 1:
            raise ConfigInvalid("shards must be ≥ 1")
        if self.shards > self.samples:
            raise ConfigInvalid("shards must not exceed samples")
        if self.separable_terms < 1:
            raise ConfigInvalid("separable terms must be ≥ 1")
        if not self.statistics:
            raise ConfigInvalid("at least one statistic is required")
        unknown = [s for s in self.statistics if s not in STATISTICS]
        if unknown:
            raise ConfigInvalid(f"unknown statistic: {unknown[0]}")
        validate_seed(self.seed)
        build_ensemble(self.ensemble, self.separable_terms)

    @property
    def ensemble_label(self) -> str:
        if self.ensemble == 'separable':
            return f"separable({self.separable_terms})"
        return self.ensemble

    @property
    def settings_label(self) -> str:
        """Compact text form of the fixed settings, used as part of the storage key"""
        def fmt(pair):
            return ";".join(
                ",".join(f"{c:.17g}" for c in (d.x, d.y, d.z)) for d in (pair.d1, pair.d2)
            )

        def fmt_triad(t):
            return ";".join(",".join(f"{c:.17g}" for c in (d.x, d.y, d.z)) for d in (t.d1, t.d2, t.d3))

        return (
            f"A[{fmt(self.settings.a)}]B[{fmt(self.settings.b)}]"
            f"TA[{fmt_triad(self.triads[0])}]TB[{fmt_triad(self.triads[1])}]"
        )


def resolve_statistic(name: str) -> str:
    """Map an accepted alias to its canonical statistic label; other names pass through"""
    return STATISTIC_ALIASES.get(name, name)


def wilson_ci(hits: int, trials: int, z: float = Z_95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial fraction

    Args:
        hits: Number of successes
        trials: Number of trials (at least 1)
        z: Normal quantile (1.96 for 95%)

    Returns:
        (lo, hi) clipped to [0, 1]

    Raises:
        ConfigInvalid: if trials < 1 or hits outside [0, trials]
    """
    if trials < 1:
        raise ConfigInvalid("trials must be ≥ 1")
    if not 0 <= hits <= trials:
        raise ConfigInvalid("hits must lie in [0, trials]")
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    lo = max(0.0, min(center - half, p))
    hi = min(1.0, max(center + half, p))
    return lo, hi


@dataclass(frozen=True)
class TallyResult:
    """Count, fraction and 95% Wilson interval for one statistic"""
    statistic: str
    ensemble: str
    hits: int
    trials: int
    fraction: float
    stderr: float
    ci95: Tuple[float, float]
    seed: int
    min_value: Optional[float] = None

    @classmethod
    def from_counts(
        cls,
        statistic: str,
        ensemble: str,
        hits: int,
        trials: int,
        seed: int,
        min_value: Optional[float] = None
    ) -> 'TallyResult':
        if trials == 0:
            return cls(statistic, ensemble, 0, 0, 0.0, 0.0, (0.0, 1.0), seed, min_value)
        fraction = hits / trials
        stderr = math.sqrt(fraction * (1.0 - fraction) / trials)
        return cls(
            statistic=statistic,
            ensemble=ensemble,
            hits=int(hits),
            trials=int(trials),
            fraction=fraction,
            stderr=stderr,
            ci95=wilson_ci(hits, trials),
            seed=int(seed),
            min_value=None if min_value is None else float(min_value),
        )

    @classmethod
    def empty(cls, statistic: str, ensemble: str, seed: int = 0) -> 'TallyResult':
        return cls.from_counts(statistic, ensemble, 0, 0, seed)

    def to_dict(self) -> Dict:
        """Convert to an ordered dictionary (field order is part of the output schema)"""
        return {
            'statistic': self.statistic,
            'ensemble': self.ensemble,
            'hits': self.hits,
            'trials': self.trials,
            'fraction': self.fraction,
            'stderr': self.stderr,
            'ci95': [self.ci95[0], self.ci95[1]],
            'seed': self.seed,
            'min_value': self.min_value,
        }


def merge(a: TallyResult, b: TallyResult) -> TallyResult:
    """
    Combine tallies from disjoint streams; associative and commutative

    Raises:
        LabelMismatch: if statistic or ensemble labels differ
    """
    if a.statistic != b.statistic or a.ensemble != b.ensemble:
        raise LabelMismatch(
            f"Cannot merge {a.statistic}/{a.ensemble} with {b.statistic}/{b.ensemble}"
        )
    if b.trials == 0:
        seed = a.seed
    elif a.trials == 0:
        seed = b.seed
    else:
        seed = min(a.seed, b.seed)
    minima = [m for m in (a.min_value, b.min_value) if m is not None]
    return TallyResult.from_counts(
        a.statistic,
        a.ensemble,
        a.hits + b.hits,
        a.trials + b.trials,
        seed,
        min(minima) if minima else None,
    )


def shard_sizes(samples: int, shards: int) -> List[int]:
    """Per-shard sample counts differing by at most one, larger shards first"""
    base, extra = divmod(samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def evaluate_chunk(
    states: np.ndarray,
    family4: np.ndarray,
    family36: np.ndarray
) -> Dict[str, np.ndarray]:
    """
    Evaluate every per-state predicate for a chunk of states in one pass

    Args:
        states: (n, 4, 4) density matrices
        family4: (4, 4, 4) operator matrices at the fixed pair settings
        family36: (36, 4, 4) operator matrices at the fixed triads

    Returns:
        Boolean arrays per fraction statistic plus the per-state slack of
        |<B>| <= sqrt2 (1 + N) under SLACK_STATISTIC
    """
    neg = negativity_batch(states)
    max4 = np.max(np.abs(expectations_batch(family4, states)), axis=-1)
    max36 = np.max(np.abs(expectations_batch(family36, states)), axis=-1)
    return {
        'entangled': neg > ENTANGLEMENT_TOL,
        'chsh-any-of-4': max4 > CHSH_BOUND,
        'rus-any-of-4': max4 > RUS_BOUND,
        'chsh-any-of-36': max36 > CHSH_BOUND,
        'rus-any-of-36': max36 > RUS_BOUND,
        SLACK_STATISTIC: SQRT2 * (1.0 + neg) - np.maximum(max4, max36),
    }


@dataclass
class _ShardCounts:
    trials: int = 0
    hits: Dict[str, int] = field(default_factory=lambda: {s: 0 for s in STATISTICS})
    min_slack: float = math.inf


class ExperimentRunner:
    """
    Orchestrates sharded sampling and tallying for one ExperimentConfig
    """

    def __init__(self, config: ExperimentConfig, workers: int = 1):
        """
        Initialize runner

        Args:
            config: Experiment configuration (validated here)
            workers: Thread count; has no effect on the results
        """
        config.validate()
        if workers < 1:
            raise ConfigInvalid("workers must be ≥ 1")
        self.config = config
        self.workers = workers
        self.ensemble = build_ensemble(config.ensemble, config.separable_terms)
        self._family4 = family_matrices(bell_family4(config.settings))
        self._family36 = family_matrices(bell_family36(*config.triads))

    def run_shard(self, shard_index: int) -> Dict[str, TallyResult]:
        """
        Sample and tally one shard on stream split(seed, shard_index)

        Args:
            shard_index: Index in [0, shards)

        Returns:
            Dictionary mapping statistic label to the shard's TallyResult
        """
        sizes = shard_sizes(self.config.samples, self.config.shards)
        if not 0 <= shard_index < len(sizes):
            raise ConfigInvalid(f"shard index {shard_index} out of range")
        rng = SeededRng.split(self.config.seed, shard_index)
        counts = _ShardCounts()

        remaining = sizes[shard_index]
        while remaining > 0:
            n = min(CHUNK_SIZE, remaining)
            states = self.ensemble.draw(rng, n)
            evaluated = evaluate_chunk(states, self._family4, self._family36)
            self._check_chunk(evaluated, shard_index)

            counts.trials += n
            for statistic in STATISTICS:
                if statistic == SLACK_STATISTIC:
                    slack = evaluated[statistic]
                    counts.hits[statistic] += int(np.count_nonzero(slack < -SLACK_TOL))
                    counts.min_slack = min(counts.min_slack, float(np.min(slack)))
                else:
                    counts.hits[statistic] += int(np.count_nonzero(evaluated[statistic]))
            remaining -= n

        logger.info(f"[shard {shard_index}] Tallied {counts.trials} states")
        return {
            statistic: TallyResult.from_counts(
                statistic,
                self.config.ensemble_label,
                counts.hits[statistic],
                counts.trials,
                self.config.seed,
                counts.min_slack if statistic == SLACK_STATISTIC else None,
            )
            for statistic in self.config.statistics
        }

    @staticmethod
    def _check_chunk(evaluated: Dict[str, np.ndarray], shard_index: int):
        """Log states where a Bell violation is not backed by entanglement"""
        for statistic in ('chsh-any-of-4', 'chsh-any-of-36'):
            orphans = np.count_nonzero(evaluated[statistic] & ~evaluated['entangled'])
            if orphans:
                logger.warning(
                    f"[shard {shard_index}] {orphans} state(s) count for {statistic} "
                    f"without positive negativity"
                )

    def run(self) -> List[TallyResult]:
        """
        Run all shards and fold their tallies in shard-index order

        Returns:
            One TallyResult per requested statistic, in request order
        """
        config = self.config
        logger.info(
            f"Running {config.samples} samples of {config.ensemble_label} "
            f"over {config.shards} shard(s) with {self.workers} worker(s), seed {config.seed}"
        )

        shard_results: Dict[int, Dict[str, TallyResult]] = {}
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            future_to_shard = {
                executor.submit(self.run_shard, index): index
                for index in range(config.shards)
            }
            for future in as_completed(future_to_shard):
                index = future_to_shard[future]
                try:
                    shard_results[index] = future.result()
                except Exception as e:
                    logger.error(f"[shard {index}] Failed: {e}", exc_info=True)
                    raise

        results = []
        for statistic in config.statistics:
            total = TallyResult.empty(statistic, config.ensemble_label, config.seed)
            for index in range(config.shards):
                total = merge(total, shard_results[index][statistic])
            results.append(total)

        for result in results:
            logger.info(
                f"{result.statistic}: {result.hits}/{result.trials} = {result.fraction:.6g} "
                f"(95% CI {result.ci95[0]:.6g}..{result.ci95[1]:.6g})"
            )
        return results

    def save_results(self, db_manager, results: List[TallyResult]) -> int:
        """
        Upsert results into the tally_results table

        Args:
            db_manager: Initialized DatabaseManager
            results: Output of run()

        Returns:
            Number of rows written
        """
        if not results:
            logger.info("No tally results to save")
            return 0

        rows = [
            {
                'ensemble': r.ensemble,
                'statistic': r.statistic,
                'seed': str(r.seed),
                'shards': self.config.shards,
                'samples': self.config.samples,
                'settings_label': self.config.settings_label,
                'hits': r.hits,
                'trials': r.trials,
                'fraction': r.fraction,
                'stderr': r.stderr,
                'ci95_lo': r.ci95[0],
                'ci95_hi': r.ci95[1],
                'min_value': r.min_value,
            }
            for r in results
        ]
        saved = db_manager.upsert_tallies(rows)
        logger.info(f"Saved {saved} tally result(s)")
        return saved


def run(config: ExperimentConfig, workers: int = 1) -> List[TallyResult]:
    """
    Estimate the configured statistics

    Deterministic for fixed (seed, shards) whatever the worker count.

    Raises:
        ConfigInvalid: for an invalid configuration
    """
    return ExperimentRunner(config, workers).run()
