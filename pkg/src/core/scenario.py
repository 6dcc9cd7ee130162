"""
Cenários: repetições independentes de uma sequência de quadros, com adaptação entre
quadros, e varredura do comprimento do quadro.
"""
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np

from src.core.adaptation import (
    AdaptationMethod,
    OverrunEvent,
    SchedulerState,
    apply_overruns,
    apply_wcec_decrease,
)
from src.core.logger import get_logger, log_execution, scenario_span
from src.core.metrics import MetricsAccumulator, MetricsSeries, merge_all
from src.core.model import TaskSet
from src.core.overrun_policy import KillPolicyKind, percentile_kappa
from src.core.simulator import SimConfig, run_frame
from src.core.workload import WorkloadModel, effective_boundary, generate_workload

logger = get_logger(__name__)

DEFAULT_REPETITIONS = 300

INCREMENTAL_METHODS = (AdaptationMethod.SCHED_CONDITION, AdaptationMethod.HORIZONTAL_SHIFT)


@dataclass(frozen=True)
class SweepRow:
    deadline: float
    energy: float
    kill_rate: float
    fairness_all: float
    fairness_killed: float

    @classmethod
    def from_series(cls, deadline: float, series: MetricsSeries) -> "SweepRow":
        return cls(deadline, series.energy, series.kill_rate, series.fairness_all, series.fairness_killed)


def repetition_seeds(seed: int, reps: int) -> List[np.random.SeedSequence]:
    """Sementes filhas independentes, uma por repetição."""
    return np.random.SeedSequence(seed).spawn(reps)


def calibrate_kappas(ts: TaskSet, demands: np.ndarray, epsilons: Sequence[float]) -> TaskSet:
    """κ_i(ε_i) empírico a partir das demandas observadas (linhas = quadros)."""
    if demands.shape[0] == 0:
        raise ValueError("Nenhum quadro para calibrar kappa")
    for task, eps in zip(ts.tasks, epsilons):
        kappa = percentile_kappa(demands[:, task.index - 1], eps, task.wcec)
        ts = ts.with_task(task.index, kappa=kappa)
    return ts


def _with_wcecs(ts: TaskSet, wcecs: Sequence[int]) -> TaskSet:
    for task, w in zip(ts.tasks, wcecs):
        changes = {"wcec": int(w), "kappa": None}
        if task.global_wcec is not None and task.global_wcec < w:
            changes["global_wcec"] = int(w)
        ts = ts.with_task(task.index, **changes)
    return ts


def _initial_state(config: SimConfig, ts: TaskSet, calibration_rows: np.ndarray) -> SchedulerState:
    policy = config.kill_policy
    if policy.kind == KillPolicyKind.PERCENTILE:
        ts = calibrate_kappas(ts, calibration_rows, policy.epsilon)
    return SchedulerState.initial(ts, config.menu, policy)


def _decrease_candidates(
    windows: List[Deque[int]], demands: np.ndarray, state: SchedulerState, idle: int, events: Sequence[OverrunEvent]
) -> List[OverrunEvent]:
    overrun = {ev.task_index for ev in events}
    out = []
    for task, window, r in zip(state.taskset.tasks, windows, demands):
        if task.index in overrun or r >= task.wcec:
            window.clear()
            continue
        window.append(int(r))
        if len(window) == idle:
            out.append(OverrunEvent.decrease(task.index, max(window), task.wcec))
            window.clear()
    return out


def repetition_streams(seed_seq: np.random.SeedSequence) -> Tuple[np.random.Generator, np.random.Generator]:
    """Geradores independentes para a carga e para a política de uma repetição."""
    workload_seq, policy_seq = seed_seq.spawn(2)
    return np.random.default_rng(workload_seq), np.random.default_rng(policy_seq)


def sample_workload(workload: WorkloadModel, seed: int, rep: int = 0) -> np.ndarray:
    """Matriz de demandas usada pela repetição `rep` de um cenário com semente `seed`."""
    workload_rng, _ = repetition_streams(repetition_seeds(seed, rep + 1)[rep])
    return generate_workload(workload, workload_rng)


def simulate_repetition(
    config: SimConfig, workload: WorkloadModel, seed_seq: np.random.SeedSequence
) -> MetricsAccumulator:
    """Uma repetição completa; a semente gera um fluxo para a carga e outro para a política."""
    workload_rng, policy_rng = repetition_streams(seed_seq)
    demands = generate_workload(workload, workload_rng)
    frames, n = demands.shape
    boundary = effective_boundary(workload)
    acc = MetricsAccumulator(n, frames)

    state = _initial_state(config, config.taskset, demands[:boundary] if boundary > 0 else demands)
    idle = config.wcec_decrease_idle_frames
    windows = [deque(maxlen=idle) for _ in range(n)] if idle else []

    for frame in range(frames):
        if config.adaptation == AdaptationMethod.CLAIRVOYANT and frame == boundary:
            ts2 = _with_wcecs(state.taskset, workload.phase_wcecs(2))
            state = _initial_state(config, ts2, demands[boundary:])
        result = run_frame(state, demands[frame], config, policy_rng)
        acc.add_frame(frame, result)
        if config.adaptation not in INCREMENTAL_METHODS:
            continue
        if result.events:
            state = apply_overruns(state, result.events, config.kill_policy, config.menu, config.adaptation)
        if idle:
            for ev in _decrease_candidates(windows, demands[frame], state, idle, result.events):
                state = apply_wcec_decrease(state, ev, config.kill_policy, config.menu)
    acc.end_repetition()
    return acc


def _simulate_packed(args: Tuple[SimConfig, WorkloadModel, np.random.SeedSequence]) -> MetricsAccumulator:
    return simulate_repetition(*args)


def _scenario_metadata(config, workload, reps=DEFAULT_REPETITIONS, seed=0, workers=1):
    return {"deadline": config.deadline, "reps": reps, "seed": seed, "workers": workers}


@log_execution
@scenario_span(name="Run Scenario", capture=_scenario_metadata)
def run_scenario(
    config: SimConfig,
    workload: WorkloadModel,
    reps: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    workers: int = 1,
) -> MetricsSeries:
    """
    Executa `reps` repetições com sementes independentes e agrega as métricas.

    As repetições são juntadas na ordem de índice, então o resultado não depende
    de `workers`.
    """
    if reps < 1:
        raise ValueError(f"reps deve ser >= 1: {reps}")
    if workload.n_tasks != config.taskset.N:
        raise ValueError(f"Carga com {workload.n_tasks} tarefas para um TaskSet de {config.taskset.N}")
    if not config.taskset.is_feasible(config.menu):
        logger.warning(
            f"TaskSet acima da capacidade: Σw/f_M = {config.taskset.worst_case_load(config.menu):.6g} "
            f"> D = {config.deadline:.6g}"
        )
    logger.info(f"INÍCIO - run_scenario | D={config.deadline:g} reps={reps} seed={seed} workers={workers}")
    jobs = [(config, workload, s) for s in repetition_seeds(seed, reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_packed, jobs))
    else:
        parts = [_simulate_packed(job) for job in jobs]
    series = merge_all(parts).finalize()
    if series.deadline_misses:
        logger.error(f"FALHA - run_scenario | {series.deadline_misses} prazos perdidos")
    logger.info(f"SUCESSO - run_scenario | kill_rate={series.kill_rate:.4g} energy={series.energy:.6g}")
    return series


@log_execution
def sweep_frame_length(
    config: SimConfig,
    deadlines: Sequence[float],
    workload: WorkloadModel,
    reps: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    workers: int = 1,
) -> List[SweepRow]:
    """
    Um run_scenario por D com as mesmas sementes; linhas na ordem de entrada.

    Raises:
        ValueError: lista vazia ("sweep vazio") ou D <= 0.
    """
    if not deadlines:
        raise ValueError("Sweep vazio: nenhuma duração de quadro")
    if any(not (math.isfinite(d) and d > 0) for d in deadlines):
        raise ValueError(f"Durações de quadro devem ser positivas: {list(deadlines)}")
    rows = []
    for D in deadlines:
        series = run_scenario(config.with_deadline(D), workload, reps=reps, seed=seed, workers=workers)
        rows.append(SweepRow.from_series(float(D), series))
    return rows


def phase_two_window(workload: WorkloadModel) -> Optional[Tuple[int, int]]:
    """Quadros [fronteira, fim) da segunda fase, ou None sem fronteira."""
    boundary = effective_boundary(workload)
    if boundary >= workload.frames:
        return None
    return boundary, workload.frames
