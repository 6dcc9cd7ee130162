"""
Arquivo de experimento: modelos Pydantic validados a partir de YAML e conversão para
os tipos do simulador.
"""
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PrivateAttr, model_validator

from src.core.adaptation import AdaptationMethod
from src.core.logger import get_logger
from src.core.model import FrequencyMenu, TaskSet
from src.core.overrun_policy import KappaTransform, KillPolicy, KillPolicyKind
from src.core.resume_engine import (
    BoostMode,
    EscalationStrategy,
    ResumeOrder,
    ResumePolicy,
    ResumeRounds,
    ResumeSpeed,
    ResumeTiming,
)
from src.core.simulator import SimConfig
from src.core.workload import PhaseSpec, TwoPhaseNormal, WorkloadModel, read_trace

logger = get_logger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

Unit = Annotated[float, Field(ge=0.0, le=1.0)]

RESERVED_VARIANT_NAMES = frozenset({"energy", "kill_rate", "fairness_all", "fairness_killed"})


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TaskEntry(StrictModel):
    """Dados opcionais por tarefa; sem `wcec` usa o WCEC da primeira fase da carga."""

    wcec: Optional[int] = Field(None, ge=1)
    global_wcec: Optional[int] = Field(None, ge=1)
    overrun_factor: Optional[float] = Field(None, ge=0.0)

    @model_validator(mode="after")
    def _global_not_below_wcec(self) -> "TaskEntry":
        if self.wcec is not None and self.global_wcec is not None and self.global_wcec < self.wcec:
            raise ValueError(f"global_wcec ({self.global_wcec}) menor que wcec ({self.wcec})")
        return self


class KillPolicyEntry(StrictModel):
    kind: KillPolicyKind
    delta: Optional[Union[Unit, List[Unit]]] = None
    epsilon: Optional[Union[Unit, List[Unit]]] = None
    window: Optional[int] = Field(None, ge=1)
    kappa_transform: KappaTransform = KappaTransform.STRETCH

    @model_validator(mode="after")
    def _required_parameters(self) -> "KillPolicyEntry":
        if self.kind == KillPolicyKind.HYBRID and self.delta is None:
            raise ValueError("kill_policy.delta é obrigatório para kind hybrid")
        if self.kind == KillPolicyKind.PERCENTILE and self.epsilon is None:
            raise ValueError("kill_policy.epsilon é obrigatório para kind percentile")
        return self

    def vector_lengths(self) -> List[Tuple[str, int]]:
        return [(name, len(v)) for name, v in (("delta", self.delta), ("epsilon", self.epsilon)) if isinstance(v, list)]

    def to_policy(self, n: int) -> KillPolicy:
        if self.kind == KillPolicyKind.AT_DANGER_ZONE:
            return KillPolicy.at_danger_zone()
        if self.kind == KillPolicyKind.AT_DEADLINE:
            return KillPolicy.at_deadline()
        if self.kind == KillPolicyKind.HYBRID:
            return KillPolicy.hybrid(self.delta, n)
        return KillPolicy.percentile(self.epsilon, n, self.window, self.kappa_transform)


class ResumeEntry(StrictModel):
    timing: ResumeTiming = ResumeTiming.AT_END_OF_FRAME
    order: ResumeOrder = ResumeOrder.BY_INDEX
    speed: ResumeSpeed = ResumeSpeed.MAX_FREQUENCY
    rounds: ResumeRounds = ResumeRounds.RUN_TO_COMPLETION
    boost: BoostMode = BoostMode.NONE
    escalation: EscalationStrategy = EscalationStrategy.NONE

    def to_policy(self) -> ResumePolicy:
        return ResumePolicy(**self.model_dump())


class PhaseEntry(StrictModel):
    means: List[Annotated[float, Field(ge=1.0)]] = Field(min_length=1)
    stddevs: List[Annotated[float, Field(ge=0.0)]] = Field(min_length=1)
    frames: int = Field(ge=0)
    wcecs: Optional[List[Annotated[int, Field(ge=1)]]] = None

    @model_validator(mode="after")
    def _same_lengths(self) -> "PhaseEntry":
        if len(self.means) != len(self.stddevs):
            raise ValueError(f"means ({len(self.means)}) e stddevs ({len(self.stddevs)}) com tamanhos diferentes")
        if self.wcecs is not None and len(self.wcecs) != len(self.means):
            raise ValueError(f"wcecs ({len(self.wcecs)}) e means ({len(self.means)}) com tamanhos diferentes")
        return self

    def to_phase(self) -> PhaseSpec:
        return PhaseSpec(tuple(self.means), tuple(self.stddevs), self.frames,
                         None if self.wcecs is None else tuple(self.wcecs))


class TwoPhaseNormalEntry(StrictModel):
    kind: Literal["two_phase_normal"]
    phase1: PhaseEntry
    phase2: PhaseEntry

    @model_validator(mode="after")
    def _same_tasks(self) -> "TwoPhaseNormalEntry":
        if len(self.phase1.means) != len(self.phase2.means):
            raise ValueError("phase1 e phase2 devem ter o mesmo número de tarefas")
        if self.phase1.frames + self.phase2.frames == 0:
            raise ValueError("A carga precisa de pelo menos um quadro")
        return self


class TraceEntry(StrictModel):
    kind: Literal["trace"]
    path: str


WorkloadEntry = Annotated[Union[TwoPhaseNormalEntry, TraceEntry], Field(discriminator="kind")]


class SweepEntry(StrictModel):
    deadlines: List[PositiveFloat]


class WcecDecreaseEntry(StrictModel):
    idle_frames: int = Field(ge=1)


class VariantEntry(StrictModel):
    """Sobrescreve política de morte, retomada (null desativa) ou adaptação."""

    name: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    kill_policy: Optional[KillPolicyEntry] = None
    resume: Optional[ResumeEntry] = None
    adaptation: Optional[AdaptationMethod] = None

    @model_validator(mode="after")
    def _name_not_a_metric(self) -> "VariantEntry":
        # sweep_<métrica>.csv e sweep_<variante>.csv dividem o mesmo diretório
        if self.name in RESERVED_VARIANT_NAMES:
            raise ValueError(f"variants.name reservado: {self.name}")
        return self


def _check_resume(resume: Optional[ResumeEntry], tasks: Optional[List[TaskEntry]], n: Optional[int], where: str) -> None:
    if resume is None:
        return
    needs_alpha = resume.speed == ResumeSpeed.ALPHA_BOUND
    needs_bound = resume.speed == ResumeSpeed.GLOBAL_WCEC_BOUND or resume.order == ResumeOrder.SHORTEST_REMAINING_FIRST
    if not (needs_alpha or needs_bound):
        return
    entries = tasks or []
    if n is not None and len(entries) < n:
        raise ValueError(f"{where}: {resume.speed.value}/{resume.order.value} exige tasks com limites para todas as tarefas")
    for k, task in enumerate(entries, start=1):
        if needs_alpha and task.overrun_factor is None:
            raise ValueError(f"{where}.speed alpha_bound exige tasks[{k}].overrun_factor")
        if needs_bound and task.global_wcec is None and task.overrun_factor is None:
            raise ValueError(f"{where}: exige tasks[{k}].global_wcec ou overrun_factor")


class ExperimentFile(StrictModel):
    """Documento completo de um experimento."""

    name: str = "experiment"
    seed: int = Field(0, ge=0)
    repetitions: int = Field(300, ge=1)
    output_dir: str = "results"
    frequencies: List[PositiveFloat] = Field(min_length=1)
    deadline: PositiveFloat
    tasks: Optional[List[TaskEntry]] = None
    kill_policy: KillPolicyEntry
    resume: Optional[ResumeEntry] = None
    adaptation: AdaptationMethod = AdaptationMethod.NONE
    wcec_decrease: Optional[WcecDecreaseEntry] = None
    workload: WorkloadEntry
    sweep: Optional[SweepEntry] = None
    variants: List[VariantEntry] = Field(default_factory=list)

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @model_validator(mode="after")
    def _cross_fields(self) -> "ExperimentFile":
        if any(b <= a for a, b in zip(self.frequencies, self.frequencies[1:])):
            raise ValueError(f"frequencies deve ser estritamente crescente: {self.frequencies}")
        n = self.task_count
        if self.tasks is not None and n is not None and len(self.tasks) != n:
            raise ValueError(f"tasks tem {len(self.tasks)} entradas, a carga tem {n} tarefas")
        if n is None and self.tasks is not None:
            n = len(self.tasks)
        policies = [("kill_policy", self.kill_policy)] + [
            (f"variants[{v.name}].kill_policy", v.kill_policy) for v in self.variants if v.kill_policy is not None
        ]
        for where, policy in policies:
            for name, length in policy.vector_lengths():
                if n is not None and length != n:
                    raise ValueError(f"{where}.{name}: esperados {n} valores, recebidos {length}")
        _check_resume(self.resume, self.tasks, n, "resume")
        for v in self.variants:
            _check_resume(v.resume, self.tasks, n, f"variants[{v.name}].resume")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ValueError(f"variants com nomes repetidos: {names}")
        return self

    @property
    def task_count(self) -> Optional[int]:
        """N conhecido sem ler arquivos (None para traces sem `tasks`)."""
        if isinstance(self.workload, TwoPhaseNormalEntry):
            return len(self.workload.phase1.means)
        return None if self.tasks is None else len(self.tasks)

    def resolve_path(self, path: Union[str, Path]) -> Path:
        """Caminhos relativos são resolvidos a partir do diretório do arquivo de experimento."""
        path = Path(path)
        return path if path.is_absolute() else self._base_dir / path

    def with_base_dir(self, base_dir: Path) -> "ExperimentFile":
        self._base_dir = Path(base_dir)
        return self


def load_experiment(path: Union[str, Path]) -> ExperimentFile:
    """
    Lê e valida um arquivo de experimento YAML.

    Raises:
        OSError: arquivo inexistente ou ilegível.
        ValueError: YAML inválido ou documento que não é um mapeamento.
        pydantic.ValidationError: campos inválidos.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"YAML inválido em {path}: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"{path}: o experimento deve ser um mapeamento YAML")
    experiment = ExperimentFile.model_validate(data).with_base_dir(path.resolve().parent)
    logger.info(f"Experimento carregado: {experiment.name} ({path})")
    return experiment


def build_workload(experiment: ExperimentFile) -> WorkloadModel:
    """Modelo de carga; traces são lidos do disco (OSError / TraceFormatError)."""
    entry = experiment.workload
    if isinstance(entry, TwoPhaseNormalEntry):
        return TwoPhaseNormal(entry.phase1.to_phase(), entry.phase2.to_phase())
    workload = read_trace(experiment.resolve_path(entry.path))
    if experiment.tasks is not None and len(experiment.tasks) != workload.n_tasks:
        raise ValueError(f"tasks tem {len(experiment.tasks)} entradas, o trace tem {workload.n_tasks} tarefas")
    n = workload.n_tasks
    for name, length in experiment.kill_policy.vector_lengths():
        if length != n:
            raise ValueError(f"kill_policy.{name}: esperados {n} valores, recebidos {length}")
    return workload


def build_taskset(experiment: ExperimentFile, workload: WorkloadModel) -> TaskSet:
    """TaskSet inicial: WCECs explícitos das tasks, senão os da primeira fase da carga."""
    wcecs = list(workload.phase_wcecs(1))
    entries = experiment.tasks or [TaskEntry() for _ in wcecs]
    for k, entry in enumerate(entries):
        if entry.wcec is not None:
            wcecs[k] = entry.wcec
    return TaskSet.from_wcecs(
        wcecs,
        experiment.deadline,
        global_wcec=[e.global_wcec if e.global_wcec is None else max(e.global_wcec, w) for e, w in zip(entries, wcecs)],
        overrun_factor=[e.overrun_factor for e in entries],
    )


def build_sim_config(
    experiment: ExperimentFile, workload: WorkloadModel, variant: Optional[VariantEntry] = None
) -> SimConfig:
    """SimConfig do experimento, com as sobrescritas da variante."""
    ts = build_taskset(experiment, workload)
    kill_entry, resume_entry, adaptation = experiment.kill_policy, experiment.resume, experiment.adaptation
    if variant is not None:
        kill_entry = variant.kill_policy or kill_entry
        if "resume" in variant.model_fields_set:
            resume_entry = variant.resume
        adaptation = variant.adaptation or adaptation
    return SimConfig(
        taskset=ts,
        menu=FrequencyMenu(tuple(experiment.frequencies)),
        kill_policy=kill_entry.to_policy(ts.N),
        resume=None if resume_entry is None else resume_entry.to_policy(),
        adaptation=adaptation,
        wcec_decrease_idle_frames=None if experiment.wcec_decrease is None else experiment.wcec_decrease.idle_frames,
    )


def experiment_variants(experiment: ExperimentFile, workload: WorkloadModel) -> List[Tuple[str, SimConfig]]:
    """(nome, SimConfig) por variante; sem variantes, uma única chamada `default`."""
    if not experiment.variants:
        return [("default", build_sim_config(experiment, workload))]
    return [(v.name, build_sim_config(experiment, workload, v)) for v in experiment.variants]
