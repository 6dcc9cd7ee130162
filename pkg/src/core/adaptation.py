"""
Adaptação rápida das funções de escalonamento e dos instantes de morte quando um
WCEC muda, sem reconstruir as funções do zero.

Métodos para um aumento w_j -> c_j:
    - condição de escalonabilidade: S'_i = max{S_i, ⌈c_j / (z_{i+1} - t)⌉_F} para i <= j;
    - deslocamento horizontal: S'_i(t) = S_i(t + (c_j - w_j)/f_M) para i < j e a
      condição acima para i = j.
Para i > j as funções não mudam.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.feasibility import (
    DangerZones,
    bound_schedule_points,
    build_baseline_schedules,
    danger_zones,
)
from src.core.logger import get_logger
from src.core.model import (
    FrequencyMenu,
    ScheduleFunction,
    TaskSet,
    ceil_to_frequency,
    eval_schedule,
    normalize_schedule,
)
from src.core.overrun_policy import (
    KappaTransform,
    KillPolicy,
    KillPolicyKind,
    KillTimes,
    kill_times,
)

logger = get_logger(__name__)


class AdaptationMethod(str, Enum):
    NONE = "none"
    SCHED_CONDITION = "sched_condition"
    HORIZONTAL_SHIFT = "horizontal_shift"
    CLAIRVOYANT = "clairvoyant"


@dataclass(frozen=True)
class OverrunEvent:
    """
    Mudança observada de WCEC da tarefa j (1-based).

    Para aumentos c_j >= w_j; para diminuições c_j <= w_j. `killed` indica que o job
    foi morto após c_j ciclos e o máximo real pode ser maior.
    """

    task_index: int
    observed_cycles: int
    old_wcec: int
    killed: bool = False

    @classmethod
    def increase(cls, task_index: int, observed_cycles: int, old_wcec: int, killed: bool = False) -> "OverrunEvent":
        if observed_cycles < old_wcec:
            raise ValueError(f"T{task_index}: não é um aumento ({observed_cycles} < {old_wcec})")
        return cls(task_index, int(observed_cycles), int(old_wcec), killed)

    @classmethod
    def decrease(cls, task_index: int, observed_cycles: int, old_wcec: int) -> "OverrunEvent":
        if observed_cycles > old_wcec:
            raise ValueError(f"T{task_index}: não é uma diminuição ({observed_cycles} > {old_wcec})")
        if observed_cycles < 1:
            raise ValueError(f"T{task_index}: novo WCEC deve ser >= 1: {observed_cycles}")
        return cls(task_index, int(observed_cycles), int(old_wcec), False)

    @property
    def extra_cycles(self) -> int:
        """c_j - w_j (negativo numa diminuição)."""
        return self.observed_cycles - self.old_wcec


@dataclass
class OperationCounter:
    """Contadores de trabalho das adaptações (pontos tocados e chamadas de ⌈·⌉_F)."""

    breakpoints_touched: int = 0
    ceil_calls: int = 0


def _require_increase(S: Sequence[ScheduleFunction], ev: OverrunEvent) -> None:
    if ev.observed_cycles < ev.old_wcec:
        raise ValueError(f"T{ev.task_index}: não é um aumento ({ev.observed_cycles} < {ev.old_wcec})")
    if not 1 <= ev.task_index <= len(S):
        raise ValueError(f"Índice de tarefa fora de 1..{len(S)}: {ev.task_index}")


def _raise_to_bound(
    S: ScheduleFunction,
    cycles: float,
    horizon: float,
    menu: FrequencyMenu,
    counter: Optional[OperationCounter],
) -> ScheduleFunction:
    """max{S(t), ⌈cycles / (horizon - t)⌉_F} como função em degraus normalizada."""
    bound = normalize_schedule(bound_schedule_points(cycles, horizon, menu))
    times = sorted(set(S.times) | set(bound.times))
    points = [(t, max(eval_schedule(S, t), eval_schedule(bound, t))) for t in times]
    if counter is not None:
        counter.ceil_calls += 1
        counter.breakpoints_touched += len(times)
    return normalize_schedule(points, menu)


def adapt_schedulability_condition(
    S: Sequence[ScheduleFunction],
    ev: OverrunEvent,
    zones: DangerZones,
    menu: FrequencyMenu,
    counter: Optional[OperationCounter] = None,
) -> List[ScheduleFunction]:
    """
    S'_i(t) = max{S_i(t), ⌈c_j / (z_{i+1} - t)⌉_F} para i <= j; S'_i = S_i para i > j.

    Os degraus lentos são elevados e, onde o degrau anterior viola o limite, um
    ponto é criado em z_{i+1} - c_j / f, para cada frequência intermediária do menu.

    Raises:
        ValueError: c_j < w_j ("não é um aumento").
    """
    _require_increase(S, ev)
    result = list(S)
    if ev.extra_cycles == 0:
        return result
    for k in range(ev.task_index):
        result[k] = _raise_to_bound(S[k], ev.observed_cycles, zones.z[k + 1], menu, counter)
    return result


def _shift_left(S: ScheduleFunction, amount: float, menu: FrequencyMenu) -> ScheduleFunction:
    shifted = [(max(0.0, t - amount), f) for t, f in S.points]
    at_zero = [f for t, f in shifted if t == 0.0]
    rest = [(t, f) for t, f in shifted if t > 0.0]
    return normalize_schedule([(0.0, max(at_zero))] + rest, menu)


def adapt_horizontal_shift(
    S: Sequence[ScheduleFunction],
    ev: OverrunEvent,
    zones: DangerZones,
    menu: FrequencyMenu,
    counter: Optional[OperationCounter] = None,
) -> List[ScheduleFunction]:
    """
    S'_i(t) = S_i(t + (c_j - w_j)/f_M) para i < j; condição de escalonabilidade para i = j.

    Pontos deslocados para tempos negativos ficam em 0 e, entre os que colidem em 0,
    sobrevive a maior frequência.
    """
    _require_increase(S, ev)
    result = list(S)
    if ev.extra_cycles == 0:
        return result
    amount = ev.extra_cycles / menu.f_max
    j = ev.task_index - 1
    for k in range(j):
        result[k] = _shift_left(S[k], amount, menu)
        if counter is not None:
            counter.breakpoints_touched += len(S[k])
    result[j] = _raise_to_bound(S[j], ev.observed_cycles, zones.z[j + 1], menu, counter)
    return result


def adapt_wcec_decrease(
    S: Sequence[ScheduleFunction],
    ev: OverrunEvent,
    zones: DangerZones,
    menu: FrequencyMenu,
) -> List[ScheduleFunction]:
    """
    Diminuição w_j -> c_j: deslocamento à direita de (w_j - c_j)/f_M para i < j (o
    primeiro ponto fica em 0) e S'_j(t) = ⌈S_j(t) c_j / w_j⌉_F.

    Raises:
        ValueError: c_j > w_j.
    """
    if ev.observed_cycles > ev.old_wcec:
        raise ValueError(f"T{ev.task_index}: não é uma diminuição ({ev.observed_cycles} > {ev.old_wcec})")
    result = list(S)
    if ev.extra_cycles == 0:
        return result
    amount = -ev.extra_cycles / menu.f_max
    j = ev.task_index - 1
    for k in range(j):
        (t0, f0), rest = S[k].points[0], S[k].points[1:]
        result[k] = normalize_schedule([(t0, f0)] + [(t + amount, f) for t, f in rest], menu)
    ratio = ev.observed_cycles / ev.old_wcec
    result[j] = normalize_schedule(
        [(t, ceil_to_frequency(f * ratio, menu)) for t, f in S[j].points], menu
    )
    return result


def shift_danger_zones(zones: DangerZones, ev: OverrunEvent, menu: FrequencyMenu) -> DangerZones:
    """z'_i = z_i - (c_j - w_j)/f_M para i <= j; demais inalterados."""
    amount = ev.extra_cycles / menu.f_max
    z = [zi - amount if i < ev.task_index else zi for i, zi in enumerate(zones.z)]
    return DangerZones(tuple(z))


def transform_kappa(kappa: float, ev: OverrunEvent, transform: KappaTransform) -> float:
    """κ'_j por esticamento (κ c/w) ou deslocamento (κ + c - w), limitado a [1, c_j]."""
    if transform == KappaTransform.STRETCH:
        new = kappa * ev.observed_cycles / ev.old_wcec
    else:
        new = kappa + ev.extra_cycles
    return min(max(new, 1.0), float(ev.observed_cycles))


def adapt_kill_times(
    kt: KillTimes,
    policy: KillPolicy,
    ev: OverrunEvent,
    ts: TaskSet,
    menu: FrequencyMenu,
) -> KillTimes:
    """
    Atualização fechada de z̃ para i <= j (ts é o TaskSet anterior ao evento).

    Vale para aumentos e diminuições (c_j - w_j com sinal).
    Híbrida (inclui zona de perigo e D): z̃'_i = z̃_i - (1 - δ_i)(c_j - w_j)/f_M.
    Percentil: z̃'_i = z̃_i - (κ'_j - κ_j)/f_M se j <= m_i^K, senão z̃_i - (c_j - w_j)/f_M,
    com m_i^K = min{i + K - 1, N} e κ'_j dado por transform_kappa; no esticamento sem
    saturação o primeiro termo é (κ_j/f_M)(c_j/w_j - 1). z̃_{N+1} continua D.
    """
    n, j = ts.N, ev.task_index
    amount = ev.extra_cycles / menu.f_max
    z = list(kt.ztilde)
    if policy.kind == KillPolicyKind.PERCENTILE:
        kappa_j = ts.task(j).kappa
        if kappa_j is None:
            raise ValueError(f"Dados percentis ausentes (kappa) para T{j}")
        kappa_shift = (transform_kappa(kappa_j, ev, policy.kappa_transform) - kappa_j) / menu.f_max
        window = n if policy.window is None else policy.window
        for i in range(1, j + 1):
            if j <= min(i + window - 1, n):
                z[i - 1] -= kappa_shift
            else:
                z[i - 1] -= amount
    else:
        deltas = policy.deltas(n)
        for i in range(1, j + 1):
            z[i - 1] -= (1.0 - deltas[i - 1]) * amount
    z[n] = ts.deadline
    return KillTimes(tuple(z))


@dataclass(frozen=True)
class SchedulerState:
    """Estado entre quadros: TaskSet atual, S_i, zonas de perigo e z̃."""

    taskset: TaskSet
    schedules: Tuple[ScheduleFunction, ...]
    zones: DangerZones
    kill_times: KillTimes

    @classmethod
    def initial(cls, ts: TaskSet, menu: FrequencyMenu, policy: KillPolicy) -> "SchedulerState":
        """Estado com funções de referência construídas para os WCECs de ts."""
        zones = danger_zones(ts, menu)
        return cls(
            ts,
            tuple(build_baseline_schedules(ts, menu)),
            zones,
            kill_times(policy, ts, zones, menu),
        )


def apply_overruns(
    state: SchedulerState,
    events: Sequence[OverrunEvent],
    policy: KillPolicy,
    menu: FrequencyMenu,
    method: AdaptationMethod = AdaptationMethod.HORIZONTAL_SHIFT,
    counter: Optional[OperationCounter] = None,
) -> SchedulerState:
    """
    Aplica sucessivamente, em ordem crescente de tarefa, a adaptação de um evento,
    recalculando as zonas entre eventos; w_j <- max{c_j, w_j}.

    Raises:
        ValueError: tarefa repetida na lista de eventos ou método sem adaptação.
    """
    seen: Dict[int, OverrunEvent] = {}
    for ev in events:
        if ev.task_index in seen:
            raise ValueError(f"Evento duplicado para T{ev.task_index}")
        seen[ev.task_index] = ev
    if not seen:
        return state
    if method == AdaptationMethod.SCHED_CONDITION:
        adapt = adapt_schedulability_condition
    elif method == AdaptationMethod.HORIZONTAL_SHIFT:
        adapt = adapt_horizontal_shift
    else:
        raise ValueError(f"Método {method.value} não adapta incrementalmente")

    ts, schedules, zones, kt = state.taskset, list(state.schedules), state.zones, state.kill_times
    for j in sorted(seen):
        task = ts.task(j)
        observed = seen[j].observed_cycles
        if observed <= task.wcec:
            continue
        ev = OverrunEvent.increase(j, observed, task.wcec, seen[j].killed)
        if ev.killed:
            logger.info(
                f"T{j} morto após {observed} ciclos: WCEC provisório {observed}, "
                "convergência esperada nos próximos quadros"
            )
        schedules = adapt(schedules, ev, zones, menu, counter)
        kt = adapt_kill_times(kt, policy, ev, ts, menu)
        changes = {"wcec": observed}
        if task.kappa is not None:
            changes["kappa"] = transform_kappa(task.kappa, ev, policy.kappa_transform)
        if task.global_wcec is not None and task.global_wcec < observed:
            changes["global_wcec"] = observed
        ts = ts.with_task(j, **changes)
        zones = danger_zones(ts, menu)
    return SchedulerState(ts, tuple(schedules), zones, kt)


def apply_wcec_decrease(
    state: SchedulerState,
    ev: OverrunEvent,
    policy: KillPolicy,
    menu: FrequencyMenu,
) -> SchedulerState:
    """Diminuição de WCEC de uma tarefa; S_i e z̃ seguem as mesmas formas fechadas do aumento."""
    ts = state.taskset
    task = ts.task(ev.task_index)
    ev = OverrunEvent.decrease(ev.task_index, ev.observed_cycles, task.wcec)
    if ev.extra_cycles == 0:
        return state
    schedules = adapt_wcec_decrease(state.schedules, ev, state.zones, menu)
    kt = adapt_kill_times(state.kill_times, policy, ev, ts, menu)
    changes = {"wcec": ev.observed_cycles}
    if task.kappa is not None:
        changes["kappa"] = transform_kappa(task.kappa, ev, policy.kappa_transform)
    ts = ts.with_task(ev.task_index, **changes)
    zones = danger_zones(ts, menu)
    return SchedulerState(ts, tuple(schedules), zones, kt)
