"""Synthetic heart-rate traces and dyad behavior driving the relay.

Two halves:

* trace synthesis — per-user bpm series (resting + circadian sine +
  calm/stress episodes + Gaussian noise, clipped to the plausibility
  gate), pushed through the batch kernels (EMA -> normalize -> band)
  to get each user's band timeline and debounced state-change times;

* a behavior event loop on a virtual clock — sends as a Poisson process
  restricted to active hours, per-delivery read decisions, per-read
  reply decisions — driving an in-process RelayCore through the same
  operations real clients use.

Everything is deterministic given the seed: same seed, byte-identical
event log.

Rate calibration: the model's knobs are target *observed* rates, the
ones the analytics module measures back out of the log. Two corrections
make the measurements land on the targets instead of systematically
above them. First, replies are sends, so the base Poisson rate is
thinned by the expected reply-chain mass to keep total sends per user
per day at the configured value. Second, the reply matcher credits any
send by the reader inside the reply window, including coincidental
ones, so the scheduled-reply probability is solved from
p_sched + (1 - p_sched) * p_coincident = reply_prob.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields as dataclass_fields, replace
from datetime import datetime, timezone
from heapq import heappop, heappush
from random import Random

import numpy as np

from . import _kernels as kernels
from .engine import (
    BPM_CEIL,
    BPM_FLOOR,
    DEFAULT_ALPHA,
    DEFAULT_NOTIFY_GAP,
    T_HIGH,
    T_LOW,
    AnimoSpec,
    ArousalLevel,
    Band,
    Baselines,
    HeartRateSample,
    Shape,
    calibrate_baselines,
    default_catalog,
    select_animo,
)
from .errors import ExpiredMessage, InvalidModel
from .eventlog import Event, EventLog
from .protocol import Envelope, Kind
from .relay import DEFAULT_REPLY_WINDOW_SECS, DEFAULT_TTL_SECS, RelayCore

# Monday 2024-01-01 00:00:00 UTC; a 14-day run covers exactly 10 work
# days and 4 weekend days.
DEFAULT_START_TS = 1_704_067_200.0

_BAND_BY_CODE = (Band.LOW, Band.MID, Band.HIGH)


@dataclass(frozen=True, slots=True)
class HrProfile:
    """Generator parameters for one user's synthetic heart-rate stream."""

    resting_bpm: float = 65.0
    circadian_amplitude_bpm: float = 5.0
    # (start offset secs from trace start, duration secs, delta bpm)
    episodes: tuple[tuple[float, float, float], ...] = ()
    noise_std_bpm: float = 3.0


@dataclass(frozen=True, slots=True)
class BehaviorModel:
    """Target observed rates plus the hours users are awake to the app."""

    sends_per_user_per_day: float = 5.0
    read_prob: float = 0.41
    reply_prob: float = 0.43
    loss: float = 0.056
    active_hours: frozenset[int] = frozenset(range(9, 19))
    weekend_hours: frozenset[int] = frozenset(range(10, 17))

    def validate(self) -> None:
        if self.sends_per_user_per_day < 0:
            raise InvalidModel("sends_per_user_per_day must be >= 0")
        for name in ("read_prob", "reply_prob", "loss"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidModel(f"{name} must be in [0, 1], got {v}")
        if not self.active_hours:
            raise InvalidModel("active_hours must be non-empty")
        for hours, name in ((self.active_hours, "active_hours"),
                            (self.weekend_hours, "weekend_hours")):
            if not set(hours) <= set(range(24)):
                raise InvalidModel(f"{name} must be a subset of 0..23")

    @classmethod
    def from_dict(cls, raw: dict[str, object]) -> "BehaviorModel":
        """Build from config-file fields; hour sets may arrive as lists."""
        known = {f.name for f in dataclass_fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InvalidModel(f"unknown behavior-model keys: {sorted(unknown)}")
        kwargs = dict(raw)
        for key in ("active_hours", "weekend_hours"):
            if key in kwargs:
                try:
                    kwargs[key] = frozenset(int(h) for h in kwargs[key])  # type: ignore[union-attr]
                except (TypeError, ValueError) as exc:
                    raise InvalidModel(f"{key} must be a list of hours: {exc}") from exc
        try:
            model = cls(**kwargs)  # type: ignore[arg-type]
        except TypeError as exc:
            raise InvalidModel(str(exc)) from exc
        model.validate()
        return model


def synth_bpm(
    profile: HrProfile, n: int, dt: float, t0: float, rng: np.random.Generator
) -> np.ndarray:
    """Raw bpm series on a regular grid, clipped to the plausibility gate."""
    t = t0 + dt * np.arange(n, dtype=np.float64)
    tod = np.mod(t, 86400.0)
    bpm = profile.resting_bpm + profile.circadian_amplitude_bpm * np.sin(
        2.0 * np.pi * (tod - 6.0 * 3600.0) / 86400.0
    )
    for start, duration, delta in profile.episodes:
        # episode offsets are relative to the trace start
        lo = max(0, int(math.ceil(start / dt)))
        hi = min(n, int(math.ceil((start + duration) / dt)))
        if hi > lo:
            bpm[lo:hi] += delta
    if profile.noise_std_bpm > 0:
        bpm = bpm + rng.normal(0.0, profile.noise_std_bpm, n)
    return np.clip(bpm, BPM_FLOOR + 0.5, BPM_CEIL - 0.5)


def gen_hr_trace(
    profile: HrProfile,
    duration: float,
    hz: float = 1.0,
    seed: int = 0,
    user_id: str = "user",
    start_ts: int = 0,
) -> list[HeartRateSample]:
    """Synthesize a timestamped sample list for one user.

    Sample period is max(1, round(1/hz)) whole seconds so timestamps
    stay integral and strictly increasing.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    dt = max(1, round(1.0 / hz))
    n = int(duration // dt)
    rng = np.random.Generator(np.random.PCG64(seed))
    bpm = synth_bpm(profile, n, float(dt), float(start_ts), rng)
    return [
        HeartRateSample(user_id=user_id, timestamp=start_ts + i * dt, bpm=float(bpm[i]))
        for i in range(n)
    ]


def default_profiles(n_users: int, days: int, rng: np.random.Generator) -> list[HrProfile]:
    """Plausible varied profiles: daily stress/calm episodes in waking hours."""
    profiles = []
    for _ in range(n_users):
        episodes: list[tuple[float, float, float]] = []
        for day in range(days):
            for _ in range(rng.poisson(1.5)):
                start = day * 86400.0 + rng.uniform(7 * 3600.0, 21 * 3600.0)
                duration = rng.uniform(600.0, 2400.0)
                delta = rng.uniform(18.0, 35.0) if rng.random() < 0.7 else -rng.uniform(8.0, 15.0)
                episodes.append((start, duration, delta))
        profiles.append(
            HrProfile(
                resting_bpm=float(rng.uniform(58.0, 75.0)),
                circadian_amplitude_bpm=float(rng.uniform(3.0, 8.0)),
                episodes=tuple(sorted(episodes)),
                noise_std_bpm=float(rng.uniform(1.5, 4.0)),
            )
        )
    return profiles


def _calibrate_user(
    profile: HrProfile, user_id: str, rng: np.random.Generator
) -> Baselines:
    """Run the onboarding procedure against the synthetic sensor: a calm
    minute and a stressed minute, averaged into the user's anchors."""
    calm_bpm = np.clip(
        profile.resting_bpm + rng.normal(0.0, profile.noise_std_bpm, 60),
        BPM_FLOOR + 0.5, BPM_CEIL - 0.5,
    )
    stress_bpm = np.clip(
        profile.resting_bpm + 30.0 + rng.normal(0.0, profile.noise_std_bpm, 60),
        BPM_FLOOR + 0.5, BPM_CEIL - 0.5,
    )
    calm = [HeartRateSample(user_id, i, float(b)) for i, b in enumerate(calm_bpm)]
    stress = [HeartRateSample(user_id, i, float(b)) for i, b in enumerate(stress_bpm)]
    return calibrate_baselines(calm, stress)


def _poisson(rng: Random, lam: float) -> int:
    # Knuth's product method; fine for the small per-hour rates used here
    if lam <= 0.0:
        return 0
    threshold = math.exp(-lam)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1


def _hours_for(ts: float, model: BehaviorModel) -> frozenset[int]:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return model.active_hours if dt.weekday() < 5 else model.weekend_hours


def _reply_calibration(model: BehaviorModel, start_ts: float, days: int) -> tuple[float, float]:
    """(p_sched, base_rate_per_day): see the module docstring."""
    rate = model.sends_per_user_per_day
    if rate <= 0:
        return (model.reply_prob, 0.0)
    # coincidence probability: some unrelated send lands in the window
    p_parts = []
    for day in range(days):
        hours = _hours_for(start_ts + day * 86400.0, model)
        if not hours:
            continue
        lam = rate / (len(hours) * 3600.0) * DEFAULT_REPLY_WINDOW_SECS
        p_parts.append(1.0 - math.exp(-lam))
    p_coinc = sum(p_parts) / len(p_parts) if p_parts else 0.0
    p_sched = (model.reply_prob - p_coinc) / (1.0 - p_coinc) if p_coinc < 1.0 else 0.0
    p_sched = min(1.0, max(0.0, p_sched))
    q = (1.0 - model.loss) * model.read_prob * p_sched
    base_rate = rate * (1.0 - q)
    return (p_sched, base_rate)


@dataclass(slots=True)
class _SimUser:
    user_id: str
    shape: Shape
    model: BehaviorModel
    p_sched: float
    base_rate: float
    behavior_rng: Random
    select_rng: Random
    values: np.ndarray = field(default=None)  # type: ignore[assignment]
    bands: np.ndarray = field(default=None)  # type: ignore[assignment]

    def arousal_at(self, idx: int) -> ArousalLevel:
        return ArousalLevel(
            value=float(self.values[idx]), band=_BAND_BY_CODE[int(self.bands[idx])]
        )


# event-loop entry codes; ties broken by insertion order
_EV_SEND, _EV_READ, _EV_SWEEP, _EV_STATE = 0, 1, 2, 3


def simulate_dyads(
    n_dyads: int,
    days: int,
    model: BehaviorModel | None = None,
    profiles: list[HrProfile] | None = None,
    seed: int = 0,
    *,
    log_path: str | None = None,
    catalog: tuple[AnimoSpec, ...] | None = None,
    overrides: dict[int, dict[str, object]] | None = None,
    start_ts: float = DEFAULT_START_TS,
    hz: float = 0.1,
    ttl_secs: float = DEFAULT_TTL_SECS,
    reply_window_secs: float = DEFAULT_REPLY_WINDOW_SECS,
    alpha: float = DEFAULT_ALPHA,
    t_low: float = T_LOW,
    t_high: float = T_HIGH,
    notify_gap: float = DEFAULT_NOTIFY_GAP,
) -> list[Event]:
    """Run n_dyads for `days` and return the event log (also written to
    log_path, replacing any existing file)."""
    model = model if model is not None else BehaviorModel()
    model.validate()
    if n_dyads <= 0 or days < 0:
        raise InvalidModel("n_dyads must be > 0 and days >= 0")
    if not 0.0 < hz <= 1.0:
        raise InvalidModel("hz must be in (0, 1]")
    catalog = catalog if catalog is not None else default_catalog()
    n_users = 2 * n_dyads

    master = Random(seed)
    loss_rng = Random(master.getrandbits(64))
    user_seeds = [
        (master.getrandbits(64), master.getrandbits(64), master.getrandbits(64))
        for _ in range(n_users)
    ]

    dyad_models: list[BehaviorModel] = []
    for d in range(n_dyads):
        m = model
        if overrides and d in overrides:
            m = replace(model, **overrides[d])  # type: ignore[arg-type]
            m.validate()
        dyad_models.append(m)

    if log_path is not None and os.path.exists(log_path):
        os.remove(log_path)
    log = EventLog(log_path)
    relay = RelayCore(
        catalog, event_log=log, ttl_secs=ttl_secs, loss=model.loss, rng=loss_rng
    )

    users: list[_SimUser] = []
    for i in range(n_users):
        m = dyad_models[i // 2]
        p_sched, base_rate = _reply_calibration(m, start_ts, days)
        trace_seed, behavior_seed, select_seed = user_seeds[i]
        users.append(
            _SimUser(
                user_id=f"u{i + 1:03d}",
                shape=Shape.CIRCLE if i % 2 == 0 else Shape.DIAMOND,
                model=m,
                p_sched=p_sched,
                base_rate=base_rate,
                behavior_rng=Random(behavior_seed),
                select_rng=Random(select_seed),
            )
        )
    by_id = {u.user_id: u for u in users}

    # --- band timelines -------------------------------------------------
    duration = days * 86400.0
    dt = max(1, round(1.0 / hz))
    n_samples = max(1, int(duration // dt)) if days > 0 else 1
    ts_grid = start_ts + float(dt) * np.arange(n_samples, dtype=np.float64)
    if profiles is not None and len(profiles) != n_users:
        raise InvalidModel(f"need {n_users} profiles, got {len(profiles)}")
    notify_times: list[np.ndarray] = []
    for i, user in enumerate(users):
        trace_rng = np.random.Generator(np.random.PCG64(user_seeds[i][0]))
        profile = profiles[i] if profiles is not None else default_profiles(1, days, trace_rng)[0]
        baselines = _calibrate_user(profile, user.user_id, trace_rng)
        bpm = synth_bpm(profile, n_samples, float(dt), start_ts, trace_rng)
        smoothed = kernels.ema_filter(bpm, alpha)
        user.values = kernels.arousal_values(smoothed, baselines.low_bpm, baselines.high_bpm)
        user.bands = kernels.band_codes(user.values, t_low, t_high)
        notify_times.append(ts_grid[kernels.notify_points(user.bands, ts_grid, notify_gap)])

    def grid_idx(t: float) -> int:
        return min(n_samples - 1, max(0, int((t - start_ts) // dt)))

    # --- pairing ---------------------------------------------------------
    for d in range(n_dyads):
        relay.pair_users(users[2 * d].user_id, users[2 * d + 1].user_id, now=start_ts)

    # --- schedule --------------------------------------------------------
    heap: list[tuple[float, int, int, tuple]] = []
    tie = 0

    def push(t: float, code: int, data: tuple) -> None:
        nonlocal tie
        heappush(heap, (t, tie, code, data))
        tie += 1

    for user in users:
        rng = user.behavior_rng
        for day in range(days):
            day_start = start_ts + day * 86400.0
            hours = _hours_for(day_start, user.model)
            if not hours or user.base_rate <= 0:
                continue
            lam = user.base_rate / len(hours)
            for hour in sorted(hours):
                for _ in range(_poisson(rng, lam)):
                    push(day_start + hour * 3600.0 + 3600.0 * rng.random(), _EV_SEND, (user.user_id,))
    for user, times in zip(users, notify_times):
        for t in times.tolist():
            push(t, _EV_STATE, (user.user_id,))

    # deliveries land here synchronously from inside relay.send_animo
    def on_envelope(receiver_id: str, env: Envelope) -> None:
        if env.kind is not Kind.ANIMO_DELIVERED:
            return
        user = by_id[receiver_id]
        rng = user.behavior_rng
        if rng.random() < user.model.read_prob:
            lag = ttl_secs * (1.0 - rng.random())  # in (0, ttl]
            push(env.ts + lag, _EV_READ, (receiver_id, env.msg_id))
        push(env.ts + ttl_secs + 0.5, _EV_SWEEP, ())

    for user in users:
        relay.attach_session(
            user.user_id, (lambda env, uid=user.user_id: on_envelope(uid, env))
        )

    # --- run ---------------------------------------------------------------
    while heap:
        t, _, code, data = heappop(heap)
        if code == _EV_SEND:
            user = by_id[data[0]]
            idx = grid_idx(t)
            state = select_animo(
                user.arousal_at(idx), user.shape, catalog, user.select_rng, computed_at=t
            )
            relay.send_animo(user.user_id, state, now=t)
        elif code == _EV_READ:
            user = by_id[data[0]]
            try:
                relay.mark_read(user.user_id, data[1], now=t)
            except ExpiredMessage:
                continue  # float-edge read exactly on the boundary; let it lapse
            rng = user.behavior_rng
            if rng.random() < user.p_sched:
                reply_t = t + reply_window_secs * (1.0 - rng.random())
                if datetime.fromtimestamp(reply_t, tz=timezone.utc).hour in _hours_for(
                    reply_t, user.model
                ):
                    push(reply_t, _EV_SEND, (user.user_id,))
        elif code == _EV_SWEEP:
            relay.expire_sweep(t)
        else:  # _EV_STATE
            relay.record_state_change(data[0], now=t)

    log.close()
    return log.events


def band_timeline_summary(events: list[Event]) -> dict[str, int]:
    """Small debugging aid: event-kind counts for a finished run."""
    counts: dict[str, int] = {}
    for ev in events:
        counts[ev.kind.value] = counts.get(ev.kind.value, 0) + 1
    return counts


__all__ = [
    "BehaviorModel",
    "HrProfile",
    "DEFAULT_START_TS",
    "default_profiles",
    "gen_hr_trace",
    "simulate_dyads",
    "synth_bpm",
    "band_timeline_summary",
]
