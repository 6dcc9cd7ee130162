"""
Zonas de perigo, condição necessária e suficiente de escalonabilidade e construção
de funções de escalonamento de referência.

Índices: internamente as listas são 0-based; `DangerZones.z[k]` é z_{k+1} da
notação 1-based e `z[N]` é D.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from src.core.model import (
    FREQ_TOL,
    FrequencyMenu,
    ScheduleFunction,
    TaskSet,
    ceil_to_frequency,
    normalize_schedule,
)


@dataclass(frozen=True)
class DangerZones:
    """z_1..z_N e z_{N+1} = D; começar T_i depois de z_i não garante mais o prazo."""

    z: Tuple[float, ...]

    @property
    def deadline(self) -> float:
        return self.z[-1]

    def start(self, index: int) -> float:
        """z_i para índice 1-based (i = N + 1 devolve D)."""
        return self.z[index - 1]


def danger_zones_from(wcecs: Sequence[float], deadline: float, f_max: float) -> DangerZones:
    """z_i = D - (1/f_M) Σ_{k>=i} w_k, calculado por somas exatas (fsum)."""
    n = len(wcecs)
    z = [deadline - math.fsum(wcecs[k:]) / f_max for k in range(n)]
    z.append(float(deadline))
    return DangerZones(tuple(z))


def danger_zones(ts: TaskSet, menu: FrequencyMenu) -> DangerZones:
    return danger_zones_from(ts.wcecs, ts.deadline, menu.f_max)


@dataclass(frozen=True)
class Violation:
    """Primeiro ponto (tarefa, instante) em que S_i(t) < w_i / (z_{i+1} - t)."""

    task_index: int
    t: float
    frequency: float
    required: float


@dataclass(frozen=True)
class SchedulabilityReport:
    ok: bool
    violation: Optional[Violation] = None

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "escalonável"
        v = self.violation
        return (
            f"T{v.task_index}: S({v.t:.6g}) = {v.frequency:.6g} < "
            f"w/(z-t) = {v.required:.6g}"
        )


def check_schedulability(
    S: Sequence[ScheduleFunction], ts: TaskSet, menu: FrequencyMenu
) -> SchedulabilityReport:
    """
    Verifica, para todo i e todo t em [0, z_i), S_i(t) >= w_i / (z_{i+1} - t).

    A checagem é fechada por degrau: em [a, b) ∩ [0, z_i) o lado direito atinge o
    supremo em min(b, z_i), então basta comparar a frequência do degrau com
    w_i / (z_{i+1} - min(b, z_i)).

    Raises:
        ValueError: se o número de funções difere de N.
    """
    if len(S) != ts.N:
        raise ValueError(f"Esperadas {ts.N} funções de escalonamento, recebidas {len(S)}")
    zones = danger_zones(ts, menu)
    for k, (task, Sk) in enumerate(zip(ts.tasks, S)):
        z_k, horizon = zones.z[k], zones.z[k + 1]
        times = Sk.times
        for p, (a, f) in enumerate(Sk.points):
            if a >= z_k:
                break
            b = times[p + 1] if p + 1 < len(times) else math.inf
            end = min(b, z_k)
            required = task.wcec / (horizon - end)
            if f < required * (1 - FREQ_TOL):
                return SchedulabilityReport(False, Violation(task.index, end, f, required))
    return SchedulabilityReport(True)


def bound_schedule_points(
    cycles: float, horizon: float, menu: FrequencyMenu
) -> List[Tuple[float, float]]:
    """
    Pontos exatos de t -> ⌈cycles / (horizon - t)⌉_F, com f_M a partir de horizon - cycles/f_M.

    O degrau de f_m começa em horizon - cycles / f_{m-1}; o instante exato de troca
    já usa a frequência maior.
    """
    if horizon <= 0 or cycles / horizon > menu.f_max * (1 + FREQ_TOL):
        return [(0.0, menu.f_max)]
    start = ceil_to_frequency(cycles / horizon, menu)
    m0 = menu.position(start)
    points = [(0.0, start)]
    for m in range(m0 + 1, menu.M):
        t = horizon - cycles / menu.freqs[m - 1]
        points.append((max(t, 0.0), menu.freqs[m]))
    return points


def build_baseline_schedules(ts: TaskSet, menu: FrequencyMenu) -> List[ScheduleFunction]:
    """
    Funções de referência justas para a viabilidade: a menor frequência que satisfaz
    a condição de escalonabilidade em cada t, e f_M dentro da zona de perigo.
    """
    zones = danger_zones(ts, menu)
    schedules = []
    for k, task in enumerate(ts.tasks):
        points = bound_schedule_points(task.wcec, zones.z[k + 1], menu)
        schedules.append(normalize_schedule(points, menu))
    return schedules
