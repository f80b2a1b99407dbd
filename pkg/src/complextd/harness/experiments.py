"""Experiment runners: checkered grid world, wavy ring world, custom models."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from ..agents import (
    LinearValueFunction,
    Policy,
    TabularActionValueFunction,
    TabularValueFunction,
    Transition,
    bank_update,
    state_value_from_action_values,
)
from ..core import frequency_grid, make_frequency_bank
from ..environments import CheckeredGridWorld, ExplicitModel, WavyRingWorld, export_model
from ..errors import SingularSystemError
from ..features import TileCoder
from ..io import write_csv
from ..oracle import closed_form_values
from ..spectral import Spectrum, reconstruct, reconstruction_sum, write_sequence
from .config import ConfigError, ExperimentConfig

log = logging.getLogger(__name__)


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Counter-based stream for one run; independent of how many runs there are."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(run,))))


@dataclass
class RunArtifacts:
    config: ExperimentConfig
    spectrum: Spectrum                       # elementwise mean of run spectra
    run_values: np.ndarray                   # (runs, frequencies) complex
    magnitude_mean: np.ndarray
    magnitude_stderr: np.ndarray
    reconstruction: Optional[np.ndarray] = None
    oracle: Optional[np.ndarray] = None
    oracle_status: list = field(default_factory=list)
    cutoffs: int = 0
    durations: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    @property
    def omegas(self) -> np.ndarray:
        return self.spectrum.omegas


def _summarise(config, run_values) -> tuple:
    omegas = np.array([d.omega for d in frequency_grid(config.frequencies, config.amplitude)])
    mean = run_values.mean(axis=0)
    mags = np.abs(run_values)
    stderr = mags.std(axis=0, ddof=1) / np.sqrt(len(mags)) if len(mags) > 1 else np.zeros(mags.shape[1])
    return Spectrum(omegas, mean), mags.mean(axis=0), stderr


def checkered_env(config) -> CheckeredGridWorld:
    return CheckeredGridWorld(parity=config.parity, bump_reward=config.bump_reward)


def learn_checkered_run(config, env, policy, run) -> tuple:
    """One run of Expected Sarsa on a fresh bank; returns (start-state values, cutoffs)."""
    rng = run_rng(config.seed, run)
    factory = partial(TabularActionValueFunction, env.state_count, env.n_actions,
                      step_size=config.step_size, terminal=env.terminal)
    bank = make_frequency_bank(config.frequencies, config.amplitude, factory)
    cutoffs = 0
    for _ in range(config.episodes):
        s = env.start_state
        for _t in range(config.max_episode_steps):
            a = policy.sample(s, rng)
            s2, r, done = env.transition(s, a)
            bank_update(bank, Transition(s, a, r, s2, done), policy)
            s = s2
            if done:
                break
        else:
            cutoffs += 1
    return state_value_from_action_values(bank.values, env.start_state, policy), cutoffs


def run_checkered(config: ExperimentConfig, output_dir=None, plot=False) -> RunArtifacts:
    config = _require(config, "checkered")
    env = checkered_env(config)
    policy = Policy.uniform(env.state_count, env.n_actions)
    t0 = time.perf_counter()
    values, cutoffs = [], 0
    for run in range(config.runs):
        v, c = learn_checkered_run(config, env, policy, run)
        values.append(v)
        cutoffs += c
    if cutoffs:
        log.warning("%d episodes hit the %d-step cutoff", cutoffs, config.max_episode_steps)
    run_values = np.array(values)
    spectrum, mag_mean, mag_se = _summarise(config, run_values)
    recon = reconstruct(spectrum, config.reconstruction_length)
    art = RunArtifacts(config, spectrum, run_values, mag_mean, mag_se, reconstruction=recon, cutoffs=cutoffs,
                       durations={"learning_seconds": time.perf_counter() - t0})
    _emit(art, output_dir, plot)
    return art


def wavy_coder(config) -> TileCoder:
    return TileCoder(WavyRingWorld.size, num_tilings=6, tile_span=1 / 3, offset_shift=config.tile_offset_shift)


def learn_wavy_run(config, env, coder) -> np.ndarray:
    alpha = config.step_size / coder.num_tilings
    bank = make_frequency_bank(config.frequencies, config.amplitude,
                               partial(LinearValueFunction, coder.total_features, alpha))
    X = coder.matrix()
    s = env.start_state
    for _ in range(config.steps):
        s2, r, done = env.transition(s, 0)
        bank_update(bank, Transition(s, 0, r, s2, done, X[s], X[s2]))
        s = s2
    return bank.values.value(X[env.start_state])


def run_wavy(config: ExperimentConfig, output_dir=None, plot=False) -> RunArtifacts:
    config = _require(config, "wavy")
    env = WavyRingWorld()
    coder = wavy_coder(config)
    t0 = time.perf_counter()
    run_values = np.array([learn_wavy_run(config, env, coder) for _ in range(config.runs)])
    spectrum, mag_mean, mag_se = _summarise(config, run_values)
    art = RunArtifacts(config, spectrum, run_values, mag_mean, mag_se,
                       durations={"learning_seconds": time.perf_counter() - t0})
    _emit(art, output_dir, plot)
    return art


def run_custom(config: ExperimentConfig, output_dir=None, plot=False) -> RunArtifacts:
    """Tabular TD bank on a model loaded from ``config.model_file``."""
    config = _require(config, "custom")
    model = ExplicitModel.from_csv(config.model_file)
    env = model.as_mdp(config.start_state)
    policy = Policy.uniform(env.state_count, 1)
    t0 = time.perf_counter()
    values, cutoffs = [], 0
    for run in range(config.runs):
        rng = run_rng(config.seed, run)
        bank = make_frequency_bank(config.frequencies, config.amplitude,
                                   partial(TabularValueFunction, env.state_count, config.step_size,
                                           env.terminal))
        if env.episodic:
            for _ in range(config.episodes):
                s = config.start_state
                for _t in range(config.max_episode_steps):
                    s2, r, done = env.transition(s, 0, rng)
                    bank_update(bank, Transition(s, 0, r, s2, done))
                    s = s2
                    if done:
                        break
                else:
                    cutoffs += 1
        else:
            s = config.start_state
            for _ in range(config.steps):
                s2, r, done = env.transition(s, 0, rng)
                bank_update(bank, Transition(s, 0, r, s2, done))
                s = s2
        values.append(bank.values[config.start_state].copy())
    run_values = np.array(values)
    spectrum, mag_mean, mag_se = _summarise(config, run_values)
    art = RunArtifacts(config, spectrum, run_values, mag_mean, mag_se, cutoffs=cutoffs,
                       durations={"learning_seconds": time.perf_counter() - t0})
    _emit(art, output_dir, plot)
    return art


RUNNERS = {"checkered": run_checkered, "wavy": run_wavy, "custom": run_custom}


def experiment_model(config) -> tuple:
    """``(ExplicitModel, start_state)`` the learned spectrum should be compared with."""
    if config.experiment == "checkered":
        env = checkered_env(config)
        return export_model(env, Policy.uniform(env.state_count, env.n_actions)), env.start_state
    if config.experiment == "wavy":
        env = WavyRingWorld()
        return export_model(env, Policy.uniform(env.state_count, 1)), env.start_state
    return ExplicitModel.from_csv(config.model_file), config.start_state


def oracle_spectrum(config, model, start) -> tuple:
    """Closed-form start-state value per grid frequency; NaN where the solve fails."""
    values, status = [], []
    for d in frequency_grid(config.frequencies, config.amplitude):
        try:
            values.append(closed_form_values(model, d).v[start])
            status.append("ok")
        except SingularSystemError as exc:
            values.append(complex(np.nan, np.nan))
            status.append(f"singular: {exc}")
    return np.array(values), status


def oracle_compare(config: ExperimentConfig, output_dir=None, plot=False) -> RunArtifacts:
    config = config.validate()
    art = RUNNERS[config.experiment](config, output_dir=None)
    t0 = time.perf_counter()
    model, start = experiment_model(config)
    art.oracle, art.oracle_status = oracle_spectrum(config, model, start)
    art.durations["oracle_seconds"] = time.perf_counter() - t0
    failed = sum(s != "ok" for s in art.oracle_status)
    if failed:
        log.warning("closed-form solve failed at %d of %d frequencies", failed, len(art.oracle_status))
    _emit(art, output_dir, plot)
    return art


def _require(config, experiment):
    config = config.validate()
    if config.experiment != experiment:
        raise ConfigError([("experiment", f"expected {experiment!r}, got {config.experiment!r}")])
    return config


def _emit(art: RunArtifacts, output_dir, plot):
    if output_dir is None:
        return
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = art.config
    files = {}

    files["config"] = out / "config.txt"
    cfg.save(files["config"])

    files["spectrum"] = out / "spectrum.csv"
    art.spectrum.to_csv(files["spectrum"], {"magnitude_mean": art.magnitude_mean,
                                            "magnitude_stderr": art.magnitude_stderr})
    runs_dir = out / "runs"
    runs_dir.mkdir(exist_ok=True)
    for i, row in enumerate(art.run_values):
        Spectrum(art.omegas, row).to_csv(runs_dir / f"spectrum_run{i:03d}.csv")
    files["runs"] = runs_dir

    if art.reconstruction is not None:
        files["reconstruction"] = out / "reconstruction.csv"
        write_sequence(files["reconstruction"], art.reconstruction)

    if art.oracle is not None:
        files["oracle"] = out / "oracle_comparison.csv"
        rows = []
        for w, lv, ov, st in zip(art.omegas, art.spectrum.values, art.oracle, art.oracle_status):
            rows.append([float(w), float(lv.real), float(lv.imag), float(abs(lv)),
                         float(ov.real), float(ov.imag), float(abs(ov)), float(abs(lv - ov)), st.split(":")[0]])
        write_csv(files["oracle"], ["omega", "learned_real", "learned_imaginary", "learned_magnitude",
                                    "oracle_real", "oracle_imaginary", "oracle_magnitude", "abs_error",
                                    "status"], rows)

    files["manifest"] = out / "manifest.txt"
    lines = [f"experiment = {cfg.experiment}", f"seed = {cfg.seed}", f"runs = {cfg.runs}",
             f"episode_cutoffs = {art.cutoffs}"]
    if art.reconstruction is not None:
        lines.append(f"reconstruction_sum = {reconstruction_sum(art.reconstruction)!r}")
    lines += [f"{k} = {v:.3f}" for k, v in sorted(art.durations.items())]
    lines += [f"file.{k} = {Path(v).name}" for k, v in files.items() if k != "manifest"]
    lines += ["", "[config]", cfg.to_text()]
    files["manifest"].write_text("\n".join(lines))

    if plot:
        from .plots import plot_artifacts
        files.update(plot_artifacts(art, out))
    art.files = {k: str(v) for k, v in files.items()}
