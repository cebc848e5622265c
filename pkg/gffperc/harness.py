from __future__ import annotations

import csv
import io
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import settings
from .exceptions import InvariantViolation
from .gff import BCKind, BoundaryCondition, sample_with_boundary
from .lattice import build_lattice
from .limits import crossing_limit
from .metric import sample_edge_states
from .percolation import CrossingMode, closed_pivotal_exists, crossing, negative_vertical_crossing

logger = logging.getLogger(__name__)

# ----------------------------
# Events
# ----------------------------


class EventKind(Enum):
    DISCRETE_ALT = "discrete_alt"
    DISCRETE_ZERO = "discrete_zero"
    METRIC_ALT = "metric_alt"
    METRIC_ZERO = "metric_zero"
    CLOSED_PIVOTAL = "closed_pivotal"
    GAP = "gap"

    @classmethod
    def parse(cls, name: str) -> "EventKind":
        key = name.strip().lower()
        if key == "discrete_minus_metric_gap":
            key = "gap"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown event {name!r}") from None

    @property
    def crossing_mode(self) -> Optional[CrossingMode]:
        try:
            return CrossingMode(self.value)
        except ValueError:
            return None

    @property
    def needs_edges(self) -> bool:
        return self in (EventKind.METRIC_ALT, EventKind.METRIC_ZERO, EventKind.CLOSED_PIVOTAL, EventKind.GAP)


# The frame row at height 0 satisfies phi >= 0, so the alternating events
# become trivial under the zero and plus_zero conditions.
BC_EVENTS: Dict[BCKind, Tuple[EventKind, ...]] = {
    BCKind.ZERO: (EventKind.DISCRETE_ZERO, EventKind.METRIC_ZERO),
    BCKind.ALTERNATING: tuple(EventKind),
    BCKind.PLUS_ZERO: (EventKind.METRIC_ALT,),
}

# (event, bc) pairs whose crossing probability tends to crossing_limit(L)
LIMIT_PAIRS = frozenset({(EventKind.DISCRETE_ALT, BCKind.ALTERNATING), (EventKind.METRIC_ALT, BCKind.PLUS_ZERO)})


# ----------------------------
# Config
# ----------------------------


@dataclass(slots=True)
class ExperimentConfig:
    L: float = 1.0
    lam: float = 1.0
    bc: BCKind = BCKind.ALTERNATING
    events: Tuple[EventKind, ...] = (EventKind.DISCRETE_ALT,)
    deltas: Tuple[float, ...] = (1 / 16,)
    samples: int = 1000
    seed: int = settings.DEFAULT_SEED
    workers: int = settings.WORKERS
    out: Optional[Path] = None
    timing: bool = False
    lambda_symbol: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.bc, BCKind):
            raise TypeError("bc must be a BCKind")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError("L must be positive and finite")
        if self.bc is not BCKind.ZERO and not self.lam > 0:
            raise ValueError("lambda must be > 0")
        if not self.events:
            raise ValueError("at least one event is required")
        allowed = BC_EVENTS[self.bc]
        rejected = [event.value for event in self.events if event not in allowed]
        if rejected:
            raise ValueError(
                f"{', '.join(rejected)} not defined under bc={self.bc.value}; "
                f"choose from {', '.join(event.value for event in allowed)}"
            )
        if not self.deltas:
            raise ValueError("delta list is empty")
        for delta in self.deltas:
            build_lattice(self.L, delta)
        if not isinstance(self.samples, int) or self.samples < settings.MIN_SAMPLES:
            raise ValueError(f"samples must be an int >= {settings.MIN_SAMPLES}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ValueError("workers must be an int >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative int")

    @property
    def boundary_condition(self) -> BoundaryCondition:
        if self.bc is BCKind.ZERO:
            return BoundaryCondition.zero()
        return BoundaryCondition(self.bc, float(self.lam))

    @property
    def lambda_label(self) -> str:
        if self.bc is BCKind.ZERO:
            return "0"
        if self.lambda_symbol:
            return f"{self.lambda_symbol}={self.lam:.12g}"
        return f"{self.lam:.12g}"

    def conformal_limit(self, event: EventKind) -> Optional[float]:
        """crossing_limit(L) when `event` under this bc has it as delta -> 0 limit."""
        if (event, self.bc) in LIMIT_PAIRS:
            return crossing_limit(self.L)
        return None


_CONFIG_KEYS = ("L", "lambda", "lambda0", "bc", "modes", "deltas", "samples", "seed", "workers", "out", "timing")

# LAMBDA0, 2*LAMBDA0, 1/2 * lambda0
_LAMBDA_SYMBOL = re.compile(r"^(?:(?P<factor>[^*]+?)\s*\*\s*)?LAMBDA0$", re.IGNORECASE)


def _parse_number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def _parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_text(text: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def config_from_mapping(values: Mapping[str, object]) -> ExperimentConfig:
    """Build a config from string (file) or typed (CLI) values; None means unset."""
    raw = {k: v for k, v in values.items() if v is not None}
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    kwargs: Dict[str, object] = {}
    if "L" in raw:
        kwargs["L"] = _parse_number(str(raw["L"]))

    lambda0 = _parse_number(str(raw["lambda0"])) if "lambda0" in raw else settings.LAMBDA0
    if "lambda" in raw:
        text = str(raw["lambda"]).strip()
        symbol = _LAMBDA_SYMBOL.match(text)
        if symbol is None:
            kwargs["lam"] = _parse_number(text)
        elif symbol["factor"] is None:
            kwargs["lam"] = lambda0
            kwargs["lambda_symbol"] = "LAMBDA0"
        else:
            factor = symbol["factor"].strip()
            kwargs["lam"] = _parse_number(factor) * lambda0
            kwargs["lambda_symbol"] = f"{factor}*LAMBDA0"

    if "bc" in raw:
        kwargs["bc"] = BCKind(str(raw["bc"]).strip().lower())
        if kwargs["bc"] is BCKind.ZERO:
            kwargs.setdefault("lam", 0.0)
        kwargs["events"] = BC_EVENTS[kwargs["bc"]][:1]
    if "modes" in raw:
        items = raw["modes"] if isinstance(raw["modes"], (list, tuple)) else str(raw["modes"]).split(",")
        kwargs["events"] = tuple(EventKind.parse(str(m)) for m in items if str(m).strip())
    if "deltas" in raw:
        items = raw["deltas"] if isinstance(raw["deltas"], (list, tuple)) else str(raw["deltas"]).split(",")
        kwargs["deltas"] = tuple(_parse_number(str(d)) for d in items if str(d).strip())
    for key in ("samples", "seed", "workers"):
        if key in raw:
            kwargs[key] = int(str(raw[key]).strip())
    if "out" in raw:
        kwargs["out"] = Path(str(raw["out"]).strip())
    if "timing" in raw:
        kwargs["timing"] = raw["timing"] if isinstance(raw["timing"], bool) else _parse_bool(str(raw["timing"]))
    return ExperimentConfig(**kwargs)


def read_config(path, overrides: Optional[Mapping[str, object]] = None) -> ExperimentConfig:
    values: Dict[str, object] = dict(parse_config_text(Path(path).read_text(encoding="utf-8")))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(values)


# ----------------------------
# Estimates
# ----------------------------


def wilson_interval(successes: int, n: int, z: float = settings.WILSON_Z) -> Tuple[float, float]:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 <= successes <= n):
        raise ValueError("successes must lie in [0, n]")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, min(p, center - half)), min(1.0, max(p, center + half))


@dataclass(slots=True, frozen=True)
class Estimate:
    p_hat: float
    n: int
    ci_low: float
    ci_high: float
    seed: int
    seconds: float

    @classmethod
    def from_counts(cls, successes: int, n: int, seed: int, seconds: float) -> "Estimate":
        low, high = wilson_interval(successes, n)
        return cls(p_hat=successes / n, n=n, ci_low=low, ci_high=high, seed=seed, seconds=seconds)


@dataclass(slots=True)
class ReplicaCounters:
    boundary_opens: int = 0
    inclusion_checks: int = 0


def _delta_key(delta: float) -> int:
    return int(round(delta * 1e9))


def replica_rng(seed: int, delta: float, replica: int) -> np.random.Generator:
    # every event at the same (seed, delta, replica) sees the same field sample
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_delta_key(delta), replica)))


def _run_block(
    L: float,
    bc: BoundaryCondition,
    event: EventKind,
    delta: float,
    seed: int,
    start: int,
    stop: int,
) -> Tuple[np.ndarray, ReplicaCounters]:
    lat = build_lattice(L, delta)
    boundary_edges = lat.boundary_incident_edges()
    outcomes = np.zeros(stop - start, dtype=np.int8)
    counters = ReplicaCounters()

    for i, replica in enumerate(range(start, stop)):
        rng = replica_rng(seed, delta, replica)
        field = sample_with_boundary(lat, bc, rng)
        edges = sample_edge_states(lat, field, rng) if event.needs_edges else None
        if edges is not None:
            opens = int(np.count_nonzero(edges.open & boundary_edges))
            counters.boundary_opens += opens
            if bc.kind is BCKind.ZERO and opens:
                raise InvariantViolation(f"replica {replica}: {opens} boundary edges open under zero bc")

        if event is EventKind.GAP:
            discrete = crossing(lat, field, CrossingMode.DISCRETE_ALT)
            metric = crossing(lat, edges, CrossingMode.METRIC_ALT)
            if metric and not discrete:
                raise InvariantViolation(f"replica {replica}: metric crossing without discrete crossing")
            counters.inclusion_checks += 1
            outcomes[i] = int(discrete) - int(metric)
        elif event is EventKind.CLOSED_PIVOTAL:
            outcomes[i] = closed_pivotal_exists(lat, edges)[0]
        elif event.crossing_mode.is_metric:
            hit = crossing(lat, edges, event.crossing_mode)
            if hit and event is EventKind.METRIC_ALT:
                if not crossing(lat, field, CrossingMode.DISCRETE_ALT):
                    raise InvariantViolation(f"replica {replica}: metric crossing without discrete crossing")
                counters.inclusion_checks += 1
            outcomes[i] = hit
        else:
            hit = crossing(lat, field, event.crossing_mode)
            if hit and event is EventKind.DISCRETE_ALT and negative_vertical_crossing(lat, field):
                raise InvariantViolation(f"replica {replica}: positive and negative crossings coexist")
            outcomes[i] = hit
    return outcomes, counters


def _blocks(n: int, workers: int) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(n / (4 * workers)))
    return [(start, min(n, start + size)) for start in range(0, n, size)]


def estimate_event(config: ExperimentConfig, event: EventKind, delta: Optional[float] = None) -> Estimate:
    if not isinstance(event, EventKind):
        raise TypeError("event must be an EventKind")
    delta = config.deltas[0] if delta is None else float(delta)
    bc = config.boundary_condition
    blocks = _blocks(config.samples, config.workers)
    args = [(config.L, bc, event, delta, config.seed, start, stop) for start, stop in blocks]

    started = time.perf_counter()
    if config.workers == 1:
        results = [_run_block(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_block, *a) for a in args]
            results = [f.result() for f in futures]
    seconds = time.perf_counter() - started
    for (start, stop), (block, _) in zip(blocks, results):
        logger.debug("%s delta=%.6g replicas [%d, %d): %d hits", event.value, delta, start, stop, int(block.sum()))

    outcomes = np.concatenate([r[0] for r in results])
    boundary_opens = sum(r[1].boundary_opens for r in results)
    inclusion_checks = sum(r[1].inclusion_checks for r in results)
    successes = int(np.count_nonzero(outcomes == 1))
    estimate = Estimate.from_counts(successes, outcomes.size, config.seed, seconds)

    logger.info(
        "%s delta=%.6g L=%g lambda=%s bc=%s: p=%.4f ci=[%.4f, %.4f] n=%d %.1fs",
        event.value,
        delta,
        config.L,
        config.lambda_label,
        config.bc.value,
        estimate.p_hat,
        estimate.ci_low,
        estimate.ci_high,
        estimate.n,
        seconds,
    )
    if event.needs_edges:
        logger.info(
            "%s delta=%.6g: boundary-incident open edges=%d, inclusion checks=%d, violations=0",
            event.value,
            delta,
            boundary_opens,
            inclusion_checks,
        )
    return estimate


# ----------------------------
# Sweeps
# ----------------------------

CSV_COLUMNS = ("L", "lambda", "bc", "event", "delta", "n", "p_hat", "ci_low", "ci_high", "seed", "seconds")


@dataclass(slots=True, frozen=True)
class SweepRow:
    L: float
    lam: str
    bc: str
    event: str
    delta: Optional[float]
    estimate: Optional[Estimate] = None
    value: Optional[float] = None

    def as_csv(self, timing: bool) -> List[str]:
        def num(x: Optional[float]) -> str:
            return "" if x is None else f"{x:.12g}"

        est = self.estimate
        if est is None:
            return [num(self.L), self.lam, self.bc, self.event, "", "", num(self.value), "", "", "", ""]
        return [
            num(self.L),
            self.lam,
            self.bc,
            self.event,
            num(self.delta),
            str(est.n),
            num(est.p_hat),
            num(est.ci_low),
            num(est.ci_high),
            str(est.seed),
            f"{est.seconds:.3f}" if timing else "",
        ]


def loglog_slope(deltas: Sequence[float], p_hats: Sequence[float]) -> float:
    """Slope of log p against log log(1/delta), over the positive estimates."""
    pairs = [(math.log(math.log(1 / d)), math.log(p)) for d, p in zip(deltas, p_hats) if p > 0 and d < 1 / math.e]
    if len(pairs) < 2:
        return float("nan")
    x, y = zip(*pairs)
    return float(np.polyfit(x, y, 1)[0])


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def nonincreasing(values: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _flag(ok: bool) -> float:
    return 1.0 if ok else 0.0


def summarize(
    event: EventKind,
    deltas: Sequence[float],
    estimates: Sequence[Estimate],
    limit: Optional[float] = None,
) -> List[Tuple[str, float]]:
    """Trend diagnostics of one event's estimates, ordered from coarse to fine delta.

    Every event gets the log-log slope and a strict-decrease flag. The rest
    depend on the event: flags are 1.0 or 0.0.
    """
    p_hats = [est.p_hat for est in estimates]
    rows = [
        ("loglog_slope", loglog_slope(deltas, p_hats)),
        ("monotone", _flag(strictly_decreasing(p_hats))),
    ]
    if event is EventKind.GAP:
        rows.append(("ci_low_positive", _flag(all(est.ci_low > 0 for est in estimates))))
    if event is EventKind.DISCRETE_ZERO:
        low, high = settings.DISCRETE_ZERO_BAND
        rows.append(("within_band", _flag(all(low <= p <= high for p in p_hats))))
    if event in (EventKind.METRIC_ZERO, EventKind.CLOSED_PIVOTAL):
        rows.append(("nonincreasing", _flag(nonincreasing(p_hats))))
        rows.append(("separated", _flag(estimates[-1].ci_high < estimates[0].ci_low)))
    if limit is not None:
        distances = [abs(p - limit) for p in p_hats]
        rows.append(("limit", limit))
        rows.append(("limit_distance_nonincreasing", _flag(nonincreasing(distances))))
        rows.append(("limit_within_tolerance", _flag(distances[-1] <= settings.LIMIT_TOLERANCE)))
    return rows


@dataclass(slots=True)
class SweepResult:
    config: ExperimentConfig
    rows: List[SweepRow] = field(default_factory=list)

    def estimates(self, event: EventKind) -> List[Tuple[float, Estimate]]:
        return [(r.delta, r.estimate) for r in self.rows if r.event == event.value and r.estimate is not None]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.as_csv(self.config.timing))
        return buffer.getvalue()


def sweep(config: ExperimentConfig) -> SweepResult:
    if len(config.deltas) < 3:
        raise ValueError("a sweep needs at least 3 delta values")
    deltas = sorted(config.deltas, reverse=True)
    result = SweepResult(config=config)
    common = dict(L=config.L, lam=config.lambda_label, bc=config.bc.value)

    for event in config.events:
        for delta in deltas:
            estimate = estimate_event(config, event, delta)
            result.rows.append(SweepRow(event=event.value, delta=delta, estimate=estimate, **common))

    for event in config.events:
        estimates = [est for _, est in result.estimates(event)]
        summary = summarize(event, deltas, estimates, config.conformal_limit(event))
        for name, value in summary:
            result.rows.append(SweepRow(event=f"summary:{event.value}:{name}", delta=None, value=value, **common))
        logger.info("%s: %s", event.value, ", ".join(f"{name}={value:.4g}" for name, value in summary))

    if config.out is not None:
        # written only once every row exists
        Path(config.out).write_text(result.to_csv(), encoding="utf-8", newline="")
    return result
