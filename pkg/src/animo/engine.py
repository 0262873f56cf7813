"""Heart-rate to animo-state transformation.

Everything in here is a pure function of its arguments: calibration,
exponential smoothing, arousal normalization/banding, catalog selection,
and the state-change notification gate. Randomness (animo and color
draws) comes in through an explicit random.Random so callers own
determinism. No I/O except the catalog/CSV loaders at the bottom.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from random import Random
from statistics import fmean
from typing import Final, Iterable

from .errors import (
    CalibrationDegenerate,
    CatalogInvalid,
    EmptyBand,
    EmptyTask,
    ImplausibleSample,
)

# Physiological plausibility gate (exclusive bounds).
BPM_FLOOR: Final = 20.0
BPM_CEIL: Final = 250.0

# Equal-thirds band thresholds over the normalized arousal value.
T_LOW: Final = 1.0 / 3.0
T_HIGH: Final = 2.0 / 3.0

DEFAULT_ALPHA: Final = 0.3          # EMA weight for the newest sample
DEFAULT_NOTIFY_GAP: Final = 600.0   # min seconds between state-change buzzes


class Band(str, Enum):
    LOW = "low"
    MID = "mid"
    HIGH = "high"


class Shape(str, Enum):
    CIRCLE = "circle"
    DIAMOND = "diamond"


class Color(str, Enum):
    YELLOW = "yellow"
    RED = "red"
    WHITE = "white"
    BLUE = "blue"
    GREEN = "green"


class Category(str, Enum):
    """Catalog metadata only; runtime selection never keys on this."""

    QUADRANT_PV_HA = "quadrant_pv_ha"
    QUADRANT_PV_LA = "quadrant_pv_la"
    QUADRANT_NV_HA = "quadrant_nv_ha"
    QUADRANT_NV_LA = "quadrant_nv_la"
    ENERGY_AMBIGUOUS = "energy_ambiguous"
    NEUTRAL = "neutral"


# Color palette per band. High energy draws yellow/red, low draws
# blue/green, in-between is always white.
BAND_COLORS: Final[dict[Band, tuple[Color, ...]]] = {
    Band.HIGH: (Color.YELLOW, Color.RED),
    Band.MID: (Color.WHITE,),
    Band.LOW: (Color.BLUE, Color.GREEN),
}

QUADRANT_CATEGORIES: Final = (
    Category.QUADRANT_PV_HA,
    Category.QUADRANT_PV_LA,
    Category.QUADRANT_NV_HA,
    Category.QUADRANT_NV_LA,
)


def check_bpm(bpm: float) -> float:
    if not (BPM_FLOOR < bpm < BPM_CEIL) or not math.isfinite(bpm):
        raise ImplausibleSample(f"bpm {bpm!r} outside ({BPM_FLOOR}, {BPM_CEIL})")
    return float(bpm)


@dataclass(frozen=True, slots=True)
class HeartRateSample:
    user_id: str
    timestamp: int
    bpm: float

    def __post_init__(self) -> None:
        check_bpm(self.bpm)


@dataclass(frozen=True, slots=True)
class Baselines:
    """Per-user anchors: calm-task mean (low) and stress-task mean (high)."""

    user_id: str
    low_bpm: float
    high_bpm: float

    def __post_init__(self) -> None:
        check_bpm(self.low_bpm)
        check_bpm(self.high_bpm)
        if self.high_bpm <= self.low_bpm:
            raise CalibrationDegenerate(
                f"high {self.high_bpm} <= low {self.low_bpm}; re-run calibration tasks"
            )


@dataclass(frozen=True, slots=True)
class ArousalLevel:
    value: float  # in [0, 1]
    band: Band


@dataclass(frozen=True, slots=True)
class AnimoSpec:
    animo_id: str
    motion_name: str
    energy_band: Band
    category_tag: Category


@dataclass(frozen=True, slots=True)
class AnimoState:
    shape: Shape
    animo_id: str
    color: Color
    band: Band
    computed_at: float


def calibrate_baselines(
    calm: list[HeartRateSample], stress: list[HeartRateSample]
) -> Baselines:
    """Average each task's readings into the user's low/high anchors.

    Raises EmptyTask if either recording is empty and
    CalibrationDegenerate if the stress mean does not exceed the calm
    mean (the signal that the tasks need re-running).
    """
    if not calm:
        raise EmptyTask("calm task produced no samples")
    if not stress:
        raise EmptyTask("stress task produced no samples")
    user_id = calm[0].user_id
    low = fmean(s.bpm for s in calm)
    high = fmean(s.bpm for s in stress)
    return Baselines(user_id=user_id, low_bpm=low, high_bpm=high)


def smooth_heart_rate(
    previous: float | None, sample: HeartRateSample, alpha: float = DEFAULT_ALPHA
) -> float:
    """Exponential moving average; the first sample seeds the state."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if previous is None:
        return sample.bpm
    return alpha * sample.bpm + (1.0 - alpha) * previous


def band_of(value: float, t_low: float = T_LOW, t_high: float = T_HIGH) -> Band:
    if value < t_low:
        return Band.LOW
    if value > t_high:
        return Band.HIGH
    return Band.MID


def compute_arousal(
    bpm: float,
    baselines: Baselines,
    t_low: float = T_LOW,
    t_high: float = T_HIGH,
) -> ArousalLevel:
    """Normalize bpm linearly between the calibrated anchors, clamped to [0, 1].

    Total for any finite bpm; values outside the anchors saturate rather
    than error.
    """
    if math.isnan(bpm):
        raise ImplausibleSample("bpm is NaN")
    span = baselines.high_bpm - baselines.low_bpm
    value = (bpm - baselines.low_bpm) / span
    value = min(1.0, max(0.0, value))
    return ArousalLevel(value=value, band=band_of(value, t_low, t_high))


def select_animo(
    arousal: ArousalLevel,
    shape: Shape,
    catalog: Iterable[AnimoSpec],
    rng: Random,
    computed_at: float,
) -> AnimoState:
    """Draw an animo for the band, plus a semi-random band-legal color.

    Animo first, then color, both uniform — fixed draw order so a seeded
    rng reproduces the same state.
    """
    matching = [spec for spec in catalog if spec.energy_band == arousal.band]
    if not matching:
        raise EmptyBand(f"catalog has no entry for band {arousal.band.value!r}")
    spec = matching[rng.randrange(len(matching))]
    palette = BAND_COLORS[arousal.band]
    color = palette[rng.randrange(len(palette))]
    return AnimoState(
        shape=shape,
        animo_id=spec.animo_id,
        color=color,
        band=arousal.band,
        computed_at=computed_at,
    )


def detect_state_change(
    prev: AnimoState,
    next_state: AnimoState,
    last_notify: float | None,
    now: float,
    min_gap: float = DEFAULT_NOTIFY_GAP,
) -> bool:
    """Should the watch buzz for this state transition?

    True only on a band change, debounced so no two notifications land
    closer than min_gap seconds.
    """
    if now < prev.computed_at:
        raise ValueError("now precedes the previous state's computed_at")
    if prev.band == next_state.band:
        return False
    return last_notify is None or now - last_notify >= min_gap


def state_violation(
    state: AnimoState, by_id: dict[str, AnimoSpec] | None = None
) -> str | None:
    """Reason this state breaks an invariant, or None if it is legal.

    Catalog consistency (animo_id's band matches) is only checked when a
    catalog index is supplied; wire-level checks pass by_id=None.
    """
    if state.color not in BAND_COLORS[state.band]:
        return f"color {state.color.value!r} illegal for band {state.band.value!r}"
    if by_id is not None:
        spec = by_id.get(state.animo_id)
        if spec is None:
            return f"unknown animo_id {state.animo_id!r}"
        if spec.energy_band != state.band:
            return (
                f"animo {state.animo_id!r} is {spec.energy_band.value!r}-band, "
                f"state claims {state.band.value!r}"
            )
    return None


# --- catalog --------------------------------------------------------------

def validate_catalog(specs: list[AnimoSpec]) -> tuple[AnimoSpec, ...]:
    """Enforce the 18-entry catalog structure: 4 quadrant triples, 2
    energy-ambiguous, 4 neutral, every band represented, unique ids."""
    if len(specs) != 18:
        raise CatalogInvalid(f"expected 18 entries, got {len(specs)}")
    ids = [s.animo_id for s in specs]
    if len(set(ids)) != len(ids):
        raise CatalogInvalid("duplicate animo_id")
    by_cat: dict[Category, int] = {}
    for s in specs:
        by_cat[s.category_tag] = by_cat.get(s.category_tag, 0) + 1
    for cat in QUADRANT_CATEGORIES:
        if by_cat.get(cat, 0) != 3:
            raise CatalogInvalid(f"need 3 entries tagged {cat.value}, got {by_cat.get(cat, 0)}")
    if by_cat.get(Category.ENERGY_AMBIGUOUS, 0) != 2:
        raise CatalogInvalid("need exactly 2 energy-ambiguous entries")
    if by_cat.get(Category.NEUTRAL, 0) != 4:
        raise CatalogInvalid("need exactly 4 neutral entries")
    bands = {s.energy_band for s in specs}
    missing = set(Band) - bands
    if missing:
        raise CatalogInvalid(f"no entry for band(s): {sorted(b.value for b in missing)}")
    return tuple(specs)


def parse_catalog(lines: Iterable[str]) -> tuple[AnimoSpec, ...]:
    specs = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            specs.append(
                AnimoSpec(
                    animo_id=rec["id"],
                    motion_name=rec["motion_name"],
                    energy_band=Band(rec["energy_band"]),
                    category_tag=Category(rec["category_tag"]),
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise CatalogInvalid(f"catalog line {lineno}: {exc}") from exc
    return validate_catalog(specs)


def load_catalog(path: str) -> tuple[AnimoSpec, ...]:
    with open(path, encoding="utf-8") as fh:
        return parse_catalog(fh)


def default_catalog() -> tuple[AnimoSpec, ...]:
    """The catalog shipped with the package."""
    text = resources.files("animo").joinpath("data/catalog.jsonl").read_text("utf-8")
    return parse_catalog(text.splitlines())


def catalog_index(catalog: Iterable[AnimoSpec]) -> dict[str, AnimoSpec]:
    return {spec.animo_id: spec for spec in catalog}


# --- heart-rate CSV ingestion ----------------------------------------------

CSV_HEADER: Final = ("user_id", "timestamp", "bpm")


def load_samples_csv(path: str) -> list[HeartRateSample]:
    """Read `user_id,timestamp,bpm` rows, enforcing the per-user
    strictly-increasing timestamp invariant and the plausibility gate."""
    samples: list[HeartRateSample] = []
    last_ts: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: bad row {row!r}")
            user_id, ts_s, bpm_s = row
            ts = int(ts_s)
            prev = last_ts.get(user_id)
            if prev is not None and ts <= prev:
                raise ValueError(
                    f"{path}: timestamps for {user_id!r} not strictly increasing at {ts}"
                )
            last_ts[user_id] = ts
            samples.append(HeartRateSample(user_id=user_id, timestamp=ts, bpm=float(bpm_s)))
    return samples
