"""
Orquestrador de experimentos: arquivo de experimento -> simulações -> arquivos de saída.
"""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from src.core.adaptation import SchedulerState
from src.core.config import (
    ExperimentFile,
    build_sim_config,
    build_workload,
    experiment_variants,
    load_experiment,
)
from src.core.feasibility import DangerZones, SchedulabilityReport, check_schedulability
from src.core.logger import get_logger, log_execution, trace
from src.core.metrics import MetricsSeries
from src.core.model import TaskSet
from src.core.overrun_policy import KillPolicyKind, KillTimes
from src.core.scenario import SweepRow, calibrate_kappas, run_scenario, sample_workload, sweep_frame_length
from src.core.utils.env import get_int_env
from src.core.workload import TwoPhaseNormal, effective_boundary, write_trace

logger = get_logger(__name__)

SUMMARY_HEADER = ["kill_rate", "energy", "fairness_all", "fairness_killed"]
PER_FRAME_HEADER = ["frame", "energy", "kill_rate"]
LAXITY_HEADER = ["task", "laxity_all", "laxity_killed"]
SWEEP_HEADER = ["deadline", "energy", "kill_rate", "fairness_all", "fairness_killed"]
PIVOT_METRICS = ["energy", "kill_rate", "fairness_all", "fairness_killed"]


def fmt(value: Union[int, float]) -> str:
    """Formato numérico estável das saídas ('nan' para indefinido)."""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    logger.info(f"Arquivo escrito: {path}")
    return path


@dataclass(frozen=True)
class ValidationReport:
    """Resultado de `validate`: zonas de perigo, z̃ e escalonabilidade da referência."""

    taskset: TaskSet
    zones: DangerZones
    kill_times: KillTimes
    feasible: bool
    load: float
    schedulability: SchedulabilityReport


class ExperimentOrchestrator:
    """Executa os comandos de um arquivo de experimento; flags sobrescrevem seed, saída e repetições."""

    def __init__(
        self,
        experiment: ExperimentFile,
        seed: Optional[int] = None,
        out_dir: Optional[Union[str, Path]] = None,
        reps: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        self.experiment = experiment
        self.seed = experiment.seed if seed is None else seed
        self.reps = experiment.repetitions if reps is None else reps
        self.out_dir = Path(out_dir) if out_dir is not None else experiment.resolve_path(experiment.output_dir)
        self.workers = get_int_env("DVS_WORKERS", 1, workers)
        if self.seed < 0 or self.reps < 1:
            raise ValueError(f"seed deve ser >= 0 e reps >= 1: seed={self.seed} reps={self.reps}")
        self.workload = build_workload(experiment)

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides) -> "ExperimentOrchestrator":
        return cls(load_experiment(path), **overrides)

    @log_execution
    @trace(workflow_name="Experiment Run")
    def run(self) -> MetricsSeries:
        """run_scenario com a configuração base; escreve summary, per_frame e laxity."""
        config = build_sim_config(self.experiment, self.workload)
        series = run_scenario(config, self.workload, reps=self.reps, seed=self.seed, workers=self.workers)
        write_csv(self.out_dir / "summary.csv", SUMMARY_HEADER,
                  [[series.kill_rate, series.energy, series.fairness_all, series.fairness_killed]])
        write_csv(self.out_dir / "per_frame.csv", PER_FRAME_HEADER,
                  [[k, e, r] for k, (e, r) in enumerate(zip(series.energy_per_frame, series.kill_rate_per_frame))])
        write_csv(self.out_dir / "laxity.csv", LAXITY_HEADER,
                  [[k, a, b] for k, (a, b) in enumerate(zip(series.laxity_all, series.laxity_killed), start=1)])
        return series

    @log_execution
    @trace(workflow_name="Experiment Sweep")
    def sweep(self, deadlines: Optional[Sequence[float]] = None) -> Dict[str, List[SweepRow]]:
        """Varre D para cada variante; escreve sweep_<variante>.csv e os pivôs sweep_<métrica>.csv."""
        if deadlines is None:
            deadlines = [] if self.experiment.sweep is None else self.experiment.sweep.deadlines
        if not deadlines:
            raise ValueError("Sweep vazio: defina sweep.deadlines no experimento")
        results: Dict[str, List[SweepRow]] = {}
        for name, config in experiment_variants(self.experiment, self.workload):
            logger.info(f"INÍCIO - sweep | variante {name}, {len(deadlines)} pontos")
            rows = sweep_frame_length(config, deadlines, self.workload, reps=self.reps, seed=self.seed,
                                      workers=self.workers)
            results[name] = rows
            write_csv(self.out_dir / f"sweep_{name}.csv", SWEEP_HEADER,
                      [[r.deadline, r.energy, r.kill_rate, r.fairness_all, r.fairness_killed] for r in rows])
        names = list(results)
        for metric in PIVOT_METRICS:
            pivot = [[d] + [getattr(results[n][k], metric) for n in names] for k, d in enumerate(deadlines)]
            write_csv(self.out_dir / f"sweep_{metric}.csv", ["deadline"] + names, pivot)
        return results

    @log_execution
    def generate_workload(self, output: Union[str, Path]) -> Path:
        """Materializa a carga da repetição 0 como trace CSV."""
        if not isinstance(self.workload, TwoPhaseNormal):
            raise ValueError("gen-workload exige workload.kind two_phase_normal")
        demands = sample_workload(self.workload, self.seed, 0)
        output = Path(output)
        write_trace(output, demands, effective_boundary(self.workload))
        logger.info(f"SUCESSO - gen-workload | {demands.shape[0]} quadros em {output}")
        return output

    def validate(self) -> ValidationReport:
        """Zonas de perigo, z̃ e escalonabilidade das funções de referência, sem simular."""
        config = build_sim_config(self.experiment, self.workload)
        ts, menu = config.taskset, config.menu
        if config.kill_policy.kind == KillPolicyKind.PERCENTILE:
            demands = sample_workload(self.workload, self.seed, 0)
            boundary = effective_boundary(self.workload)
            ts = calibrate_kappas(ts, demands[:boundary] if boundary > 0 else demands, config.kill_policy.epsilon)
        feasible = ts.is_feasible(menu)
        load = ts.worst_case_load(menu)
        if not feasible:
            logger.warning(f"TaskSet não escalonável: Σw/f_M = {load:.6g} > D = {ts.deadline:.6g}")
        state = SchedulerState.initial(ts, menu, config.kill_policy)
        return ValidationReport(
            taskset=ts,
            zones=state.zones,
            kill_times=state.kill_times,
            feasible=feasible,
            load=load,
            schedulability=check_schedulability(state.schedules, ts, menu),
        )
