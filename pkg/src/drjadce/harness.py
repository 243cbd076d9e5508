"""Seeded Monte-Carlo sweeps over the experiment axes, written as CSV.

One row per (sweep value, trial, algorithm).  Per-trial instances derive from
``hash(seed, sweep_index, trial)`` so trials are reproducible and independent
regardless of execution order; algorithm-internal randomness (only the
optional random initializer uses any) derives from
``hash(seed, sweep_index, trial, algorithm_id)``.  Rows are sorted before the
final write, so parallel runs produce identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import pipeline
from .pipeline import problem_scale
from .rank_estimation import DEFAULT_BETA, cm_curve, default_u, regularized_covariance
from .linalg import hermitian_eig
from .scenario import Instance, SystemConfig, make_instance, substream

CSV_COLUMNS = [
    "experiment", "sweep_param", "sweep_value", "trial", "seed", "algo",
    "N", "M", "L", "K_true", "eps", "p_dbm", "rank_true", "rank_est",
    "aer", "missed", "false_alarms", "nmse_db", "f_final", "grad_norm",
    "outer_iters", "runtime_ms", "status",
]

SWEEP_PARAMS = (
    "pilot_len", "n_antennas", "power_dbm", "activity_prob", "n_devices",
    "rank_override",
)

ALGO_IDS = {"dr_jadce": 0, "l21": 1, "somp": 2, "oracle_mmse": 3, "rank_cm": 4}


@dataclass
class ExperimentSpec:
    base: SystemConfig
    sweep_param: str
    sweep_values: list
    algorithms: list
    trials: int
    seed: int
    out_path: str = ""
    name: str = "experiment"
    mode: str = "recover"           # "recover" or "rank"
    jobs: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if not self.sweep_values:
            raise ValueError("sweep_values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep_param {self.sweep_param!r}")
        if self.mode not in ("recover", "rank"):
            raise ValueError("mode must be 'recover' or 'rank'")
        unknown = set(self.algorithms) - set(ALGO_IDS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        d = json.loads(text)
        d["base"] = SystemConfig(**d["base"])
        return cls(**d)


def _config_for(spec: ExperimentSpec, value):
    """Apply one sweep value to the base config; rank_override passes through."""
    base = spec.base
    if spec.sweep_param == "pilot_len":
        return replace(base, pilot_len=int(value)), None
    if spec.sweep_param == "n_antennas":
        return replace(base, n_antennas=int(value)), None
    if spec.sweep_param == "power_dbm":
        return replace(base, pilot_power_dbm=float(value)), None
    if spec.sweep_param == "n_devices":
        return replace(base, n_devices=int(value)), None
    if spec.sweep_param == "activity_prob":
        return replace(base, activity_prob=float(value), fixed_active=None), None
    return base, int(value)         # rank_override


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".12g")
    return str(x)


def _rank_true(inst: Instance) -> int:
    return min(inst.activity.k, inst.X.shape[1])


def _rank_row_fields(inst: Instance) -> tuple[int, float]:
    """Estimated rank of the noise-normalized instance (no recovery)."""
    Yn = inst.Y / problem_scale(inst.Y, inst.noise_var)
    eig = hermitian_eig(regularized_covariance(Yn, DEFAULT_BETA), check=False)
    L, M = inst.Y.shape
    cm = cm_curve(eig.eigenvalues, default_u(M, L), M)
    return int(np.argmax(cm)) + 1, float(np.max(cm))


def run_trial(spec: ExperimentSpec, sweep_index: int, trial: int) -> list[dict]:
    """All CSV rows for one (sweep value, trial) cell."""
    value = spec.sweep_values[sweep_index]
    cfg, rank_override = _config_for(spec, value)
    inst = make_instance(cfg, rng=substream(spec.seed, sweep_index, trial))
    common = {
        "experiment": spec.name,
        "sweep_param": spec.sweep_param,
        "sweep_value": value,
        "trial": trial,
        "seed": spec.seed,
        "N": cfg.n_devices,
        "M": cfg.n_antennas,
        "L": cfg.pilot_len,
        "K_true": inst.activity.k,
        "eps": cfg.activity_prob,
        "p_dbm": cfg.pilot_power_dbm,
        "rank_true": _rank_true(inst),
    }
    rows = []
    if spec.mode == "rank":
        row = dict(common, algo="rank_cm", status="ok")
        try:
            row["rank_est"], _ = _rank_row_fields(inst)
        except Exception as exc:            # record, never abort the sweep
            row["status"] = f"error:{type(exc).__name__}"
        rows.append(row)
        return rows

    for algo in spec.algorithms:
        row = dict(common, algo=algo, status="ok")
        try:
            if algo == "dr_jadce":
                res = pipeline.run_dr_jadce(
                    inst, rank_override=rank_override,
                    rng=substream(spec.seed, sweep_index, trial, ALGO_IDS[algo]),
                )
                row["rank_est"] = res.r_used
                row["f_final"] = res.f_final
                row["grad_norm"] = res.grad_norm
                row["outer_iters"] = res.outer_iters
                if not res.converged:
                    row["status"] = "nonconverged"
            elif algo == "l21":
                res = pipeline.run_l21(inst)
                row["f_final"] = res.f_final
                row["outer_iters"] = res.outer_iters
                if not res.converged:
                    row["status"] = "nonconverged"
            elif algo == "somp":
                res = pipeline.run_somp(inst)
            elif algo == "oracle_mmse":
                res = pipeline.run_oracle_mmse(inst)
            else:
                raise ValueError(f"algorithm {algo!r} is not runnable in recover mode")
            row["aer"] = res.aer
            row["missed"] = res.missed
            row["false_alarms"] = res.false_alarms
            row["nmse_db"] = res.nmse_db
            row["runtime_ms"] = res.runtime_ms if spec.record_timing else 0.0
        except Exception as exc:
            row["status"] = f"error:{type(exc).__name__}"
        rows.append(row)
    return rows


def _task(args):
    spec_json, si, trial = args
    return run_trial(ExperimentSpec.from_json(spec_json), si, trial)


def run_experiment(spec: ExperimentSpec) -> str:
    """Execute the sweep and write the CSV; returns the output path."""
    tasks = [(si, t) for si in range(len(spec.sweep_values)) for t in range(spec.trials)]
    if spec.jobs > 1:
        payload = [(spec.to_json(), si, t) for si, t in tasks]
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            groups = list(pool.map(_task, payload, chunksize=4))
    else:
        groups = [run_trial(spec, si, t) for si, t in tasks]
    rows = [r for g in groups for r in g]
    rows.sort(key=lambda r: (spec.sweep_values.index(r["sweep_value"]),
                             r["trial"], ALGO_IDS[r["algo"]]))
    try:
        with open(spec.out_path, "w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row.get(c)) for c in CSV_COLUMNS) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {spec.out_path!r}: {exc}") from exc
    return spec.out_path


# ---------------------------------------------------------------------------
# presets

# Noise floor used by the rank-estimation experiments.  The general scenario
# default (-160 dBm/Hz) leaves the weakest signal eigenvalues below the
# spiked-covariance detectability threshold at the quoted transmit powers, so
# exact rank recovery there is impossible for any spectrum-based rule; at the
# thermal floor the success-versus-power transition lands where the reference
# results place it.
RANK_NOISE_PSD = -174.0


def _desk_or(desk: bool, a, b):
    return a if desk else b


def get_preset(name: str, desk: bool = False, trials: Optional[int] = None,
               seed: int = 1234) -> ExperimentSpec:
    """Named experiment presets; ``desk=True`` shrinks them to CI scale."""
    t = trials
    if name == "fig3_rank":
        base = SystemConfig(
            n_devices=_desk_or(desk, 120, 300), n_antennas=_desk_or(desk, 128, 256),
            pilot_len=_desk_or(desk, 40, 90), fixed_active=_desk_or(desk, 12, 30),
            pilot_power_dbm=1.0, noise_psd_dbm_hz=RANK_NOISE_PSD, seed=seed,
        )
        values = _desk_or(desk, [-12, -6, 0, 6, 10], [-3, -2, -1, 0, 1, 2, 3])
        return ExperimentSpec(base, "power_dbm", values, ["rank_cm"],
                              t or 100, seed, name=name, mode="rank")
    if name == "fig5_aer_vs_L":
        base = SystemConfig(
            n_devices=_desk_or(desk, 100, 400), n_antennas=_desk_or(desk, 32, 64),
            pilot_len=40, activity_prob=0.1, pilot_power_dbm=20.0, seed=seed,
        )
        values = _desk_or(desk, [25, 30, 35, 40], [25, 30, 35, 40, 45, 50])
        return ExperimentSpec(base, "pilot_len", values,
                              ["dr_jadce", "l21", "somp"], t or _desk_or(desk, 50, 100),
                              seed, name=name)
    if name == "fig6_aer_vs_M":
        base = SystemConfig(
            n_devices=_desk_or(desk, 100, 400), n_antennas=64,
            pilot_len=_desk_or(desk, 30, 45), activity_prob=0.1,
            pilot_power_dbm=15.0, seed=seed,
        )
        values = _desk_or(desk, [8, 16, 32, 64], [16, 32, 64, 128])
        return ExperimentSpec(base, "n_antennas", values,
                              ["dr_jadce", "l21", "somp"], t or _desk_or(desk, 50, 100),
                              seed, name=name)
    if name == "fig7_aer_vs_p":
        base = SystemConfig(
            n_devices=_desk_or(desk, 100, 400), n_antennas=_desk_or(desk, 32, 64),
            pilot_len=_desk_or(desk, 30, 45), activity_prob=0.1,
            pilot_power_dbm=15.0, seed=seed,
        )
        values = _desk_or(desk, [0, 5, 10, 15, 20], [0, 3, 6, 9, 12, 15])
        return ExperimentSpec(base, "power_dbm", values,
                              ["dr_jadce", "l21", "somp"], t or _desk_or(desk, 50, 100),
                              seed, name=name)
    if name == "fig8_aer_vs_N":
        base = SystemConfig(
            n_devices=200, n_antennas=_desk_or(desk, 32, 128),
            pilot_len=_desk_or(desk, 30, 105), fixed_active=_desk_or(desk, 10, 100),
            pilot_power_dbm=15.0, seed=seed,
        )
        values = _desk_or(desk, [50, 100, 200, 400], [200, 400, 600, 800, 1000, 1200])
        return ExperimentSpec(base, "n_devices", values,
                              ["dr_jadce", "l21", "somp"], t or _desk_or(desk, 50, 100),
                              seed, name=name)
    if name == "fig9_nmse_vs_L":
        base = SystemConfig(
            n_devices=_desk_or(desk, 100, 400), n_antennas=_desk_or(desk, 32, 128),
            pilot_len=40, activity_prob=0.1, pilot_power_dbm=_desk_or(desk, 20.0, 15.0),
            seed=seed,
        )
        values = _desk_or(desk, [25, 30, 35, 40], [45, 60, 75, 90])
        return ExperimentSpec(base, "pilot_len", values,
                              ["dr_jadce", "l21", "somp", "oracle_mmse"],
                              t or _desk_or(desk, 50, 100), seed, name=name)
    if name == "nmse_vs_eps":
        base = SystemConfig(
            n_devices=_desk_or(desk, 100, 400), n_antennas=_desk_or(desk, 32, 128),
            pilot_len=_desk_or(desk, 40, 90), activity_prob=0.1,
            pilot_power_dbm=20.0, seed=seed,
        )
        values = [0.05, 0.1, 0.15, 0.2]
        return ExperimentSpec(base, "activity_prob", values,
                              ["dr_jadce", "l21", "somp", "oracle_mmse"],
                              t or _desk_or(desk, 50, 100), seed, name=name)
    raise ValueError(f"unknown preset {name!r}")


PRESET_NAMES = [
    "fig3_rank", "fig5_aer_vs_L", "fig6_aer_vs_M", "fig7_aer_vs_p",
    "fig8_aer_vs_N", "fig9_nmse_vs_L", "nmse_vs_eps",
]
