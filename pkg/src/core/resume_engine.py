"""
Mecanismo de preempção: suspensão, instante e frequência de retomada, ordem da fila,
retomada em grupo, rodadas justas e aceleração durante o overrun.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.logger import get_logger
from src.core.model import (
    FrequencyMenu,
    TaskSet,
    TaskSpec,
    ceil_to_frequency,
    eval_schedule,
    normalize_schedule,
)

logger = get_logger(__name__)


class ResumeTiming(str, Enum):
    AT_END_OF_FRAME = "end_of_frame"
    AT_FIRST_SLACK = "first_slack"


class ResumeOrder(str, Enum):
    BY_INDEX = "by_index"
    RANDOM = "random"
    SHORTEST_REMAINING_FIRST = "shortest_remaining_first"


class ResumeSpeed(str, Enum):
    MAX_FREQUENCY = "max_frequency"
    GLOBAL_WCEC_BOUND = "global_wcec_bound"
    ALPHA_BOUND = "alpha_bound"
    CURRENT_SPEED = "current_speed"


class ResumeRounds(str, Enum):
    RUN_TO_COMPLETION = "run_to_completion"
    FAIR_ROUNDS = "fair_rounds"


class BoostMode(str, Enum):
    """Aceleração das tarefas regulares enquanto há tarefas suspensas."""
    NONE = "none"
    NEXT_STEP = "next_step"
    PER_SUSPENDED = "per_suspended"
    MAX = "max"


class EscalationStrategy(str, Enum):
    """Aceleração de uma tarefa a partir do instante em que ultrapassa w_i."""
    NONE = "none"
    MAX_FREQUENCY = "max_frequency"
    LAXITY_SCALED = "laxity_scaled"


@dataclass(frozen=True)
class SuspendedJob:
    """Job suspenso: ciclos já consumidos (c_i), instante e frequência da suspensão."""

    task_index: int
    cycles_done: float
    suspended_at: float
    frequency: float

    def __post_init__(self) -> None:
        if self.cycles_done < 0:
            raise ValueError(f"T{self.task_index}: cycles_done negativo: {self.cycles_done}")


@dataclass(frozen=True)
class ResumePolicy:
    """Estratégia completa de retomada."""

    timing: ResumeTiming = ResumeTiming.AT_END_OF_FRAME
    order: ResumeOrder = ResumeOrder.BY_INDEX
    speed: ResumeSpeed = ResumeSpeed.MAX_FREQUENCY
    rounds: ResumeRounds = ResumeRounds.RUN_TO_COMPLETION
    boost: BoostMode = BoostMode.NONE
    escalation: EscalationStrategy = EscalationStrategy.NONE

    def validate(self, ts: TaskSet) -> None:
        """Verifica que as tarefas têm os dados exigidos pela estratégia."""
        if self.speed == ResumeSpeed.ALPHA_BOUND:
            missing = [t.index for t in ts.tasks if t.overrun_factor is None]
            if missing:
                raise ValueError(f"speed alpha_bound exige overrun_factor nas tarefas {missing}")
        if self.speed == ResumeSpeed.GLOBAL_WCEC_BOUND or self.order == ResumeOrder.SHORTEST_REMAINING_FIRST:
            missing = [t.index for t in ts.tasks if t.remaining_bound() is None]
            if missing:
                raise ValueError(
                    f"{self.speed.value}/{self.order.value} exige global_wcec ou "
                    f"overrun_factor nas tarefas {missing}"
                )


def _job_bound(task: TaskSpec, speed: ResumeSpeed) -> Optional[float]:
    if speed == ResumeSpeed.ALPHA_BOUND:
        if task.overrun_factor is None:
            return None
        return task.wcec * (1.0 + task.overrun_factor)
    if speed == ResumeSpeed.GLOBAL_WCEC_BOUND:
        return task.remaining_bound()
    return None


def resume_frequency(
    job: SuspendedJob, now: float, ts: TaskSet, menu: FrequencyMenu, mode: ResumeSpeed
) -> float:
    """
    Frequência de retomada de um único job.

    GLOBAL_WCEC_BOUND: ⌈(W_i - c_i)/(D - t)⌉_F; ALPHA_BOUND: ⌈(w_i(1+α) - c_i)/(D - t)⌉_F;
    MAX_FREQUENCY: f_M; CURRENT_SPEED: a frequência no momento da suspensão.
    Numerador negativo (limite já ultrapassado) ou limite desconhecido usam f_M.

    Raises:
        ValueError: se now >= D ("sem tempo restante").
    """
    D = ts.deadline
    if now >= D:
        raise ValueError(f"Sem tempo restante: t = {now} >= D = {D}")
    if mode == ResumeSpeed.MAX_FREQUENCY:
        return menu.f_max
    if mode == ResumeSpeed.CURRENT_SPEED:
        return job.frequency
    bound = _job_bound(ts.task(job.task_index), mode)
    if bound is None:
        logger.debug(f"T{job.task_index}: sem limite para {mode.value}, retomando em f_M")
        return menu.f_max
    deficit = bound - job.cycles_done
    if deficit < 0:
        return menu.f_max
    return ceil_to_frequency(deficit / (D - now), menu)


def group_resume_frequency(
    R: Sequence[SuspendedJob],
    now: float,
    ts: TaskSet,
    menu: FrequencyMenu,
    mode: ResumeSpeed = ResumeSpeed.GLOBAL_WCEC_BOUND,
) -> float:
    """
    ⌈Σ_{i∈R} (W_i - c_i) / (D - t)⌉_F, recalculada antes de cada retomada.

    Raises:
        ValueError: R vazio, W_i ausente ou now >= D.
    """
    if not R:
        raise ValueError("Fila de retomada vazia")
    D = ts.deadline
    if now >= D:
        raise ValueError(f"Sem tempo restante: t = {now} >= D = {D}")
    deficits = []
    for job in R:
        bound = _job_bound(ts.task(job.task_index), mode)
        if bound is None:
            raise ValueError(f"T{job.task_index}: limite global ausente para {mode.value}")
        deficits.append(bound - job.cycles_done)
    if any(d < 0 for d in deficits):
        return menu.f_max
    return ceil_to_frequency(math.fsum(deficits) / (D - now), menu)


def order_resume_queue(
    R: Sequence[SuspendedJob],
    order: ResumeOrder,
    rng: Optional[np.random.Generator] = None,
    ts: Optional[TaskSet] = None,
) -> List[SuspendedJob]:
    """
    Ordena a fila R: por índice, embaralhamento semeado, ou menor restante (W_i - c_i) primeiro.

    Raises:
        ValueError: SHORTEST_REMAINING_FIRST sem W_i (nem α) ou RANDOM sem gerador.
    """
    jobs = list(R)
    if order == ResumeOrder.BY_INDEX:
        return sorted(jobs, key=lambda j: j.task_index)
    if order == ResumeOrder.RANDOM:
        if rng is None:
            raise ValueError("Ordem random exige um gerador semeado")
        return [jobs[k] for k in rng.permutation(len(jobs))]
    if ts is None:
        raise ValueError("shortest_remaining_first exige o TaskSet")

    def remaining(job: SuspendedJob) -> Tuple[float, int]:
        bound = ts.task(job.task_index).remaining_bound()
        if bound is None:
            raise ValueError(f"T{job.task_index}: shortest_remaining_first sem W_i")
        return bound - job.cycles_done, job.task_index

    return sorted(jobs, key=remaining)


def allocate_fair_rounds(
    R: Sequence[SuspendedJob], slack_start: float, deadline: float
) -> List[Tuple[int, float]]:
    """Orçamentos da primeira rodada: (D - t') / |R| para cada job."""
    if not R:
        raise ValueError("Fila de retomada vazia")
    if slack_start >= deadline:
        raise ValueError(f"Sem tempo restante: t' = {slack_start} >= D = {deadline}")
    budget = (deadline - slack_start) / len(R)
    return [(job.task_index, budget) for job in R]


# execute(job, now, budget) -> (tempo usado, terminou?, job atualizado)
ExecuteFn = Callable[[SuspendedJob, float, float], Tuple[float, bool, SuspendedJob]]


@dataclass
class FairRoundsOutcome:
    slices: List[Tuple[int, float, float]] = field(default_factory=list)  # (tarefa, início, duração)
    preemptions: int = 0
    rounds: int = 0
    finished: List[int] = field(default_factory=list)
    unfinished: List[SuspendedJob] = field(default_factory=list)
    unused: float = 0.0


def run_fair_rounds(
    R: Sequence[SuspendedJob],
    slack_start: float,
    deadline: float,
    execute: ExecuteFn,
    eps: float = 1e-12,
) -> FairRoundsOutcome:
    """
    Rodadas justas: cada rodada divide o tempo restante igualmente entre os jobs vivos.

    Um job que esgota o orçamento é re-suspenso; se algum job terminou antes do
    orçamento, uma nova rodada redistribui a sobra entre os sobreviventes. O total
    de preempções não passa de r (r - 1) / 2 para r = |R|.
    """
    outcome = FairRoundsOutcome()
    live = list(R)
    now = slack_start
    tol = eps * max(1.0, abs(deadline))
    while live and deadline - now > tol:
        outcome.rounds += 1
        budget = (deadline - now) / len(live)
        survivors: List[SuspendedJob] = []
        early = False
        for job in live:
            used, finished, updated = execute(job, now, budget)
            used = min(used, budget)
            outcome.slices.append((job.task_index, now, used))
            now += used
            if finished:
                outcome.finished.append(job.task_index)
                early = early or used < budget - tol
            else:
                survivors.append(updated)
        live = survivors
        if not early:
            break
        if live and deadline - now > tol:
            outcome.preemptions += len(live)
    outcome.unfinished = live
    outcome.unused = deadline - now
    return outcome


def boost_other_frequency(scheduled: float, n_suspended: int, menu: FrequencyMenu) -> float:
    """Frequência `n_suspended` posições acima da escolhida por S, saturando em f_M."""
    if n_suspended <= 0:
        return scheduled
    return menu.step_up(scheduled, n_suspended)


def boosted_frequency(mode: BoostMode, scheduled: float, n_suspended: int, menu: FrequencyMenu) -> float:
    if n_suspended <= 0 or mode == BoostMode.NONE:
        return scheduled
    if mode == BoostMode.NEXT_STEP:
        return boost_other_frequency(scheduled, 1, menu)
    if mode == BoostMode.PER_SUSPENDED:
        return boost_other_frequency(scheduled, n_suspended, menu)
    return menu.f_max


def escalation_profile(
    current: float,
    overrun_start: float,
    limit: float,
    menu: FrequencyMenu,
    strategy: EscalationStrategy,
) -> List[Tuple[float, float]]:
    """
    Perfil de frequência (t, f) a partir do instante de overrun.

    LAXITY_SCALED segue ⌈current (1 + e / L)⌉_F, com e o tempo decorrido desde o
    overrun e L = limit - overrun_start, começa no degrau seguinte a `current` e
    chega a f_M quando a folga se esgota.
    """
    if strategy == EscalationStrategy.NONE:
        return [(overrun_start, current)]
    laxity = limit - overrun_start
    if strategy == EscalationStrategy.MAX_FREQUENCY or laxity <= 0:
        return [(overrun_start, menu.f_max)]
    first = menu.step_up(current, 1)
    points = [(overrun_start, first)]
    for m in range(menu.position(first) + 1, menu.M):
        t = overrun_start + laxity * (menu.freqs[m - 1] / current - 1.0)
        if t >= limit:
            break
        points.append((t, menu.freqs[m]))
    if points[-1][1] < menu.f_max:
        points.append((limit, menu.f_max))
    return points


def intra_task_escalation(
    cycles_done: float,
    wcec: int,
    current: float,
    overrun_start: float,
    limit: float,
    now: float,
    menu: FrequencyMenu,
    strategy: EscalationStrategy,
) -> float:
    """Frequência em `now` de uma tarefa que ultrapassou w_i em `overrun_start`."""
    if cycles_done < wcec:
        return current
    profile = escalation_profile(current, overrun_start, limit, menu, strategy)
    if now < overrun_start:
        return current
    shifted = [(t - overrun_start, f) for t, f in profile]
    return eval_schedule(normalize_schedule(shifted), now - overrun_start)
