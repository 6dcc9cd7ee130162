"""
Motor de quadro: executa T_1..T_N em ordem, aplica a política de morte/suspensão e a
retomada, e devolve um FrameResult com segmentos (início, duração, frequência).

Convenções de tempo: TIME_EPS = 1e-9 · D. Um job que termina a menos de TIME_EPS do
seu instante limite conta como terminado; uma tarefa que começa a menos de TIME_EPS
da sua zona de perigo executa em f_M.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.adaptation import AdaptationMethod, OverrunEvent, SchedulerState
from src.core.logger import get_logger
from src.core.metrics import energy_of
from src.core.model import FrequencyMenu, TaskSet, eval_schedule
from src.core.overrun_policy import KillPolicy, KillPolicyKind
from src.core.resume_engine import (
    EscalationStrategy,
    ResumePolicy,
    ResumeRounds,
    ResumeSpeed,
    ResumeTiming,
    SuspendedJob,
    boosted_frequency,
    escalation_profile,
    group_resume_frequency,
    order_resume_queue,
    resume_frequency,
    run_fair_rounds,
)

logger = get_logger(__name__)

TIME_EPS_REL = 1e-9

# Folga ao converter ciclos executados (reais) em WCEC observado
CYCLE_FLOOR_EPS = 1e-6


class JobStatus(str, Enum):
    FINISHED = "finished"
    KILLED = "killed"
    DROPPED = "dropped"


@dataclass(frozen=True)
class Segment:
    start: float
    duration: float
    frequency: float
    cycles: float

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def energy(self) -> float:
        return energy_of(self.cycles, self.frequency)


@dataclass(frozen=True)
class TaskRecord:
    """Resultado de um job: r_k pedidos, e_k executados, estado final e segmentos."""

    task_index: int
    requested: int
    executed: float
    status: JobStatus
    suspended: bool
    segments: Tuple[Segment, ...]

    @property
    def finished(self) -> bool:
        return self.status == JobStatus.FINISHED

    @property
    def killed(self) -> bool:
        return self.status == JobStatus.KILLED

    @property
    def dropped(self) -> bool:
        return self.status == JobStatus.DROPPED

    @property
    def lost(self) -> bool:
        """Morto ou descartado: conta para a taxa de morte."""
        return self.status != JobStatus.FINISHED

    @property
    def energy(self) -> float:
        return math.fsum(s.energy for s in self.segments)

    @property
    def frequencies(self) -> Tuple[float, ...]:
        return tuple(s.frequency for s in self.segments)


@dataclass(frozen=True)
class FrameResult:
    records: Tuple[TaskRecord, ...]
    events: Tuple[OverrunEvent, ...]
    preemptions: int
    deadline_miss: bool

    @property
    def energy(self) -> float:
        return math.fsum(r.energy for r in self.records)

    @property
    def kills(self) -> int:
        return sum(1 for r in self.records if r.lost)


@dataclass(frozen=True)
class SimConfig:
    """
    Configuração de simulação.

    Attributes:
        taskset: TaskSet modelo (WCECs iniciais e prazo D = comprimento do quadro)
        menu: menu de frequências
        kill_policy: regra de z̃
        resume: política de retomada; None desativa a preempção
        adaptation: método de adaptação entre quadros
        wcec_decrease_idle_frames: quadros abaixo do WCEC antes de reduzi-lo (None desativa)
    """

    taskset: TaskSet
    menu: FrequencyMenu
    kill_policy: KillPolicy
    resume: Optional[ResumePolicy] = None
    adaptation: AdaptationMethod = AdaptationMethod.NONE
    wcec_decrease_idle_frames: Optional[int] = None

    def __post_init__(self) -> None:
        n = self.taskset.N
        policy = self.kill_policy
        for name, values in (("delta", policy.delta), ("epsilon", policy.epsilon)):
            if values is not None and len(values) != n:
                raise ValueError(f"kill_policy.{name}: esperados {n} valores, recebidos {len(values)}")
        if self.resume is not None:
            self.resume.validate(self.taskset)
        if self.wcec_decrease_idle_frames is not None and self.wcec_decrease_idle_frames < 1:
            raise ValueError(f"wcec_decrease_idle_frames deve ser >= 1: {self.wcec_decrease_idle_frames}")

    @property
    def deadline(self) -> float:
        return self.taskset.deadline

    def with_deadline(self, deadline: float) -> "SimConfig":
        return replace(self, taskset=self.taskset.with_deadline(deadline))

    def with_taskset(self, taskset: TaskSet) -> "SimConfig":
        return replace(self, taskset=taskset)


@dataclass
class _Job:
    index: int
    requested: int
    done: float = 0.0
    status: JobStatus = JobStatus.KILLED
    suspended: bool = False
    last_freq: float = 0.0
    segments: List[Segment] = field(default_factory=list)

    def record(self) -> TaskRecord:
        executed = min(self.done, float(self.requested))
        return TaskRecord(self.index, self.requested, executed, self.status, self.suspended, tuple(self.segments))


def _run_pieces(job: _Job, pieces: Sequence[Tuple[float, float]], end: float, eps: float) -> Tuple[float, bool]:
    """
    Executa o job sobre um perfil (t, f) em degraus até terminar ou chegar a `end`.

    Retorna (instante final, terminou?).
    """
    now = pieces[0][0]
    for p, (t0, f) in enumerate(pieces):
        now = max(now, t0)
        stop = min(pieces[p + 1][0], end) if p + 1 < len(pieces) else end
        if stop <= now:
            continue
        remaining = job.requested - job.done
        need = remaining / f
        last = stop >= end
        if now + need <= stop or (last and now + need <= end + eps):
            job.segments.append(Segment(now, need, f, remaining))
            job.done = float(job.requested)
            job.last_freq = f
            return now + need, True
        duration = stop - now
        job.segments.append(Segment(now, duration, f, duration * f))
        job.done += duration * f
        job.last_freq = f
        now = stop
    return max(now, end), False


class _FrameRun:
    """Estado mutável de um quadro em execução."""

    def __init__(self, state: SchedulerState, demands: Sequence[int], config: SimConfig,
                 rng: Optional[np.random.Generator]):
        self.state = state
        self.ts: TaskSet = state.taskset
        self.menu: FrequencyMenu = config.menu
        self.policy: Optional[ResumePolicy] = config.resume
        self.kill_policy: KillPolicy = config.kill_policy
        # sem gerador, a ordem random usa uma semente fixa
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.D = self.ts.deadline
        self.eps = TIME_EPS_REL * self.D
        if len(demands) != self.ts.N:
            raise ValueError(f"Esperadas {self.ts.N} demandas, recebidas {len(demands)}")
        self.jobs = [_Job(k + 1, int(r)) for k, r in enumerate(demands)]
        self.suspended: List[SuspendedJob] = []
        self.preemptions = 0

    def _start_frequency(self, k: int, t: float) -> float:
        if t >= self.state.zones.z[k] - self.eps:
            f = self.menu.f_max
        else:
            f = eval_schedule(self.state.schedules[k], t)
        if self.policy is not None and self.suspended:
            f = boosted_frequency(self.policy.boost, f, len(self.suspended), self.menu)
        return f

    def _resume_speed(self, sj: SuspendedJob, group: Sequence[SuspendedJob], now: float) -> float:
        speed = self.policy.speed
        if speed == ResumeSpeed.GLOBAL_WCEC_BOUND and len(group) > 1:
            f = group_resume_frequency(group, now, self.ts, self.menu)
        else:
            f = resume_frequency(sj, now, self.ts, self.menu, speed)
        logger.debug(f"Retomada T{sj.task_index} em t = {now:.6g}: f = {f:g} ({speed.value}, |R| = {len(group)})")
        return f

    def _resume_window(self, start: float, end: float) -> float:
        """Retoma jobs suspensos em [start, end); devolve o instante em que o processador fica livre."""
        queue = order_resume_queue(self.suspended, self.policy.order, self.rng, self.ts)
        if self.policy.rounds == ResumeRounds.FAIR_ROUNDS:
            def execute(sj: SuspendedJob, now: float, budget: float):
                job = self.jobs[sj.task_index - 1]
                f = self._resume_speed(sj, [sj], now)
                finish, finished = _run_pieces(job, [(now, f)], now + budget, self.eps)
                return finish - now, finished, replace(sj, cycles_done=job.done, frequency=f)

            outcome = run_fair_rounds(queue, start, end, execute, eps=TIME_EPS_REL)
            for index in outcome.finished:
                self.jobs[index - 1].status = JobStatus.FINISHED
            self.preemptions += outcome.preemptions
            self.suspended = list(outcome.unfinished)
            return end - outcome.unused

        now = start
        remaining: List[SuspendedJob] = []
        for pos, sj in enumerate(queue):
            if now >= end - self.eps:
                remaining.append(sj)
                continue
            f = self._resume_speed(sj, queue[pos:], now)
            job = self.jobs[sj.task_index - 1]
            now, finished = _run_pieces(job, [(now, f)], end, self.eps)
            if finished:
                job.status = JobStatus.FINISHED
            else:
                remaining.append(replace(sj, cycles_done=job.done, suspended_at=now, frequency=f))
        self.suspended = remaining
        return now

    def _overrun_pieces(self, k: int, job: _Job, t: float, f: float, limit: float) -> List[Tuple[float, float]]:
        """
        Perfil (t, f) do job T_{k+1} que começa em t com frequência f.

        Sem overrun o perfil é constante. Com escalonamento intra-tarefa, o trecho
        após w_i segue o perfil de escalação. Com morte no prazo, um job em overrun
        que ainda roda em z_i passa para f_M nesse instante.
        """
        pieces = [(t, f)]
        wcec = self.ts.tasks[k].wcec
        if job.requested <= wcec:
            return pieces
        overrun_start = t + wcec / f
        if self.policy is not None and self.policy.escalation != EscalationStrategy.NONE and overrun_start < limit:
            pieces += escalation_profile(f, overrun_start, limit, self.menu, self.policy.escalation)
        if self.kill_policy.kind == KillPolicyKind.AT_DEADLINE and f < self.menu.f_max:
            switch_at = max(overrun_start, self.state.zones.z[k])
            if switch_at < limit:
                pieces = [p for p in pieces if p[0] < switch_at] + [(switch_at, self.menu.f_max)]
        return pieces

    def run(self) -> FrameResult:
        kt, zones = self.state.kill_times, self.state.zones
        t = 0.0
        for k, job in enumerate(self.jobs):
            limit = kt.limit(k)
            if t >= min(limit, self.D) - self.eps:
                job.status = JobStatus.DROPPED
                continue
            f = self._start_frequency(k, t)
            pieces = self._overrun_pieces(k, job, t, f, limit)
            t, finished = _run_pieces(job, pieces, limit, self.eps)
            if finished:
                job.status = JobStatus.FINISHED
                if self.suspended and self.policy.timing == ResumeTiming.AT_FIRST_SLACK:
                    window_end = zones.z[k + 1]
                    if t < window_end - self.eps:
                        t = self._resume_window(t, window_end)
            elif self.policy is None:
                job.status = JobStatus.KILLED
            else:
                job.suspended = True
                self.preemptions += 1
                self.suspended.append(SuspendedJob(job.index, job.done, t, job.last_freq))

        if self.suspended and t < self.D - self.eps:
            t = self._resume_window(t, self.D)
        for sj in self.suspended:
            self.jobs[sj.task_index - 1].status = JobStatus.KILLED
        return self._result()

    def _result(self) -> FrameResult:
        records = tuple(job.record() for job in self.jobs)
        events = []
        for task, rec in zip(self.ts.tasks, records):
            if rec.finished and rec.requested > task.wcec:
                events.append(OverrunEvent(task.index, rec.requested, task.wcec, False))
            elif rec.killed:
                observed = int(math.floor(rec.executed + CYCLE_FLOOR_EPS))
                if observed > task.wcec:
                    events.append(OverrunEvent(task.index, observed, task.wcec, True))
        miss = any(s.end > self.D + self.eps for rec in records for s in rec.segments)
        if miss:
            logger.error(f"Prazo perdido no quadro (D = {self.D})")
        return FrameResult(records, tuple(events), self.preemptions, miss)


def run_frame(
    state: SchedulerState,
    demands: Sequence[int],
    config: SimConfig,
    rng: Optional[np.random.Generator] = None,
) -> FrameResult:
    """
    Executa um quadro com as funções, zonas e z̃ de `state`.

    Uma tarefa que começa em t usa S_i(t) (f_M dentro da zona de perigo); ainda em
    execução em z̃_{i+1} é morta (sem preempção) ou suspensa; tarefas que não podem
    começar antes do limite são descartadas. Anomalias viram registros, nunca exceções.
    """
    return _FrameRun(state, demands, config, rng).run()
