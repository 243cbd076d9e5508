"""Synthetic uplink instances: pilots, sporadic activity, channels, noise.

A base station with ``M`` antennas observes ``Y = A X + E`` over ``L`` pilot
symbols, where row ``n`` of the device state matrix ``X`` is the scaled
channel of device ``n`` if it transmitted and zero otherwise.  Everything is
generated from named, seedable substreams so Monte-Carlo trials can run in
parallel without sharing generator state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator derived from a base seed and integer keys."""
    return np.random.default_rng([int(seed)] + [int(k) for k in keys])


def crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """Standard circular complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass
class SystemConfig:
    """Dimensions and physical constants of one uplink scenario.

    Exactly one of ``activity_prob`` (independent Bernoulli activity) or
    ``fixed_active`` (uniformly random subset of that size) must be set.
    Powers are in dBm, the noise power spectral density in dBm/Hz, and the
    large-scale path loss in dB.
    """

    n_devices: int
    n_antennas: int
    pilot_len: int
    activity_prob: Optional[float] = None
    fixed_active: Optional[int] = None
    pilot_power_dbm: float = 20.0
    noise_psd_dbm_hz: float = -160.0
    bandwidth_hz: float = 1e6
    pathloss_db: float = -123.0
    seed: int = 0

    def __post_init__(self):
        if self.n_devices < 1 or self.n_antennas < 1 or self.pilot_len < 1:
            raise ValueError("n_devices, n_antennas, pilot_len must be >= 1")
        if (self.activity_prob is None) == (self.fixed_active is None):
            raise ValueError("set exactly one of activity_prob or fixed_active")
        if self.activity_prob is not None and not 0.0 < self.activity_prob < 1.0:
            raise ValueError("activity_prob must lie in (0, 1)")
        if self.fixed_active is not None and not 1 <= self.fixed_active <= self.n_devices:
            raise ValueError("fixed_active must lie in [1, n_devices]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def noise_var(self) -> float:
        """Noise variance per received sample in watts."""
        return dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz

    @property
    def pathloss(self) -> float:
        return db_to_linear(self.pathloss_db)

    @property
    def pilot_power_w(self) -> float:
        return dbm_to_watts(self.pilot_power_dbm)

    @property
    def transmit_energy(self) -> float:
        """Per-device transmit energy over the pilot block (L * p)."""
        return self.pilot_len * self.pilot_power_w


@dataclass
class ActivityPattern:
    indicators: np.ndarray          # binary, length N
    active_set: np.ndarray          # sorted indices of active devices
    k: int

    def __post_init__(self):
        assert self.k == len(self.active_set) == int(self.indicators.sum())


@dataclass
class Instance:
    """One realized uplink snapshot, Y = A X + E."""

    A: np.ndarray                   # L x N pilots, unit-norm columns
    X: np.ndarray                   # N x M device state matrix
    Y: np.ndarray                   # L x M received signal
    noise_var: float
    energies: np.ndarray            # length N, varsigma_n = L * p_n
    activity: ActivityPattern
    channels: np.ndarray            # N x M, row n = sqrt(pathloss) * h_tilde_n
    config: Optional[SystemConfig] = None


def generate_pilots(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. complex Gaussian pilot matrix with unit-norm columns."""
    A = crandn(rng, cfg.pilot_len, cfg.n_devices)
    return A / np.linalg.norm(A, axis=0, keepdims=True)


def generate_activity(cfg: SystemConfig, rng: np.random.Generator) -> ActivityPattern:
    """Draw the device activity pattern in Bernoulli or fixed-size mode."""
    n = cfg.n_devices
    if cfg.activity_prob is not None:
        indicators = (rng.random(n) < cfg.activity_prob).astype(np.int8)
        active = np.flatnonzero(indicators)
    else:
        active = np.sort(rng.choice(n, size=cfg.fixed_active, replace=False))
        indicators = np.zeros(n, dtype=np.int8)
        indicators[active] = 1
    return ActivityPattern(indicators, active, int(indicators.sum()))


def generate_channels(cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh-faded channel rows, large-scale loss times CN(0, I)."""
    h = crandn(rng, cfg.n_devices, cfg.n_antennas)
    return np.sqrt(cfg.pathloss) * h


def synthesize(
    cfg: SystemConfig,
    A: np.ndarray,
    activity: ActivityPattern,
    H: np.ndarray,
    rng: np.random.Generator,
) -> Instance:
    """Assemble the received signal from pilots, activity, channels and noise."""
    n, m = cfg.n_devices, cfg.n_antennas
    if A.shape != (cfg.pilot_len, n) or H.shape != (n, m):
        raise ValueError("inconsistent shapes")
    energies = np.full(n, cfg.transmit_energy)
    X = np.zeros((n, m), dtype=complex)
    act = activity.active_set
    X[act] = np.sqrt(energies[act])[:, None] * H[act]
    sigma2 = cfg.noise_var
    Y = A @ X
    if sigma2 > 0:
        Y = Y + np.sqrt(sigma2) * crandn(rng, cfg.pilot_len, m)
    return Instance(A, X, Y, sigma2, energies, activity, H, cfg)


def make_instance(cfg: SystemConfig, rng: Optional[np.random.Generator] = None) -> Instance:
    """Generate a full instance from the config seed (or a supplied stream)."""
    rng = substream(cfg.seed) if rng is None else rng
    A = generate_pilots(cfg, rng)
    activity = generate_activity(cfg, rng)
    H = generate_channels(cfg, rng)
    return synthesize(cfg, A, activity, H, rng)


def save_instance(path: str, inst: Instance) -> None:
    """Dump an instance as an .npz container with a JSON metadata header."""
    meta = {
        "shapes": {"A": list(inst.A.shape), "X": list(inst.X.shape), "Y": list(inst.Y.shape)},
        "noise_var": inst.noise_var,
        "config": asdict(inst.config) if inst.config is not None else None,
    }
    np.savez(
        path,
        A=inst.A,
        X=inst.X,
        Y=inst.Y,
        channels=inst.channels,
        indicators=inst.activity.indicators,
        energies=inst.energies,
        meta=json.dumps(meta),
    )


def load_instance(path: str) -> Instance:
    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    indicators = data["indicators"]
    active = np.flatnonzero(indicators)
    activity = ActivityPattern(indicators, active, int(indicators.sum()))
    cfg = SystemConfig(**meta["config"]) if meta.get("config") else None
    return Instance(
        data["A"], data["X"], data["Y"], float(meta["noise_var"]),
        data["energies"], activity, data["channels"], cfg,
    )
