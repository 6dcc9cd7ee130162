"""
Tipos fundamentais do modelo: menu de frequências, tarefas, quadro e funções de
escalonamento em degraus S_i(t).

Convenções:
    - tempo e frequência são float; ciclos são inteiros (ou reais após execução parcial);
    - os degraus são fechados à esquerda e abertos à direita: [t_k, t_{k+1});
    - o último degrau se estende ao infinito.
"""
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

# Tolerância relativa para comparações de frequência
FREQ_TOL = 1e-9

Point = Tuple[float, float]


@dataclass(frozen=True)
class FrequencyMenu:
    """Conjunto discreto de frequências f_1 < ... < f_M (ciclos por unidade de tempo)."""

    freqs: Tuple[float, ...]

    def __post_init__(self) -> None:
        freqs = tuple(float(f) for f in self.freqs)
        object.__setattr__(self, "freqs", freqs)
        if not freqs:
            raise ValueError("Menu de frequências vazio")
        if any(not math.isfinite(f) or f <= 0 for f in freqs):
            raise ValueError(f"Frequências devem ser positivas e finitas: {freqs}")
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError(f"Frequências devem ser estritamente crescentes: {freqs}")

    @property
    def M(self) -> int:
        return len(self.freqs)

    @property
    def f_min(self) -> float:
        return self.freqs[0]

    @property
    def f_max(self) -> float:
        return self.freqs[-1]

    def __contains__(self, f: object) -> bool:
        return isinstance(f, (int, float)) and self.position(float(f)) is not None

    def position(self, f: float) -> Optional[int]:
        """Índice (0-based) de f no menu, ou None se f não pertence ao menu."""
        k = bisect_left(self.freqs, f * (1 - FREQ_TOL))
        if k < self.M and abs(self.freqs[k] - f) <= FREQ_TOL * self.freqs[k]:
            return k
        return None

    def step_up(self, f: float, steps: int = 1) -> float:
        """Frequência `steps` posições acima de f no menu, saturando em f_M."""
        k = self.position(f)
        if k is None:
            raise ValueError(f"Frequência {f} não pertence ao menu {self.freqs}")
        return self.freqs[min(k + max(steps, 0), self.M - 1)]


def ceil_to_frequency(x: float, menu: FrequencyMenu) -> float:
    """
    ⌈x⌉_F: menor frequência do menu maior ou igual a x, ou f_M se x > f_M.

    Valores até FREQ_TOL (relativo) acima de uma frequência do menu são
    arredondados para ela: ⌈f_k (1 + 1e-10)⌉_F = f_k. O resultado satisfaz
    ⌈x⌉_F >= x (1 - FREQ_TOL), não ⌈x⌉_F >= x. Para x <= 0 retorna f_1.
    """
    if x <= 0:
        return menu.f_min
    k = bisect_left(menu.freqs, x * (1 - FREQ_TOL))
    if k >= menu.M:
        return menu.f_max
    return menu.freqs[k]


@dataclass(frozen=True)
class TaskSpec:
    """
    Tarefa T_i executada uma vez por quadro.

    Attributes:
        index: posição 1..N na ordem de execução
        wcec: w_i, pior caso de ciclos conhecido
        global_wcec: W_i >= w_i, limite global opcional
        overrun_factor: α >= 0, a tarefa nunca passa de w_i (1 + α)
        kappa: κ_i(ε) em ciclos, 0 < κ_i <= w_i
    """

    index: int
    wcec: int
    global_wcec: Optional[int] = None
    overrun_factor: Optional[float] = None
    kappa: Optional[float] = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"Índice de tarefa deve ser >= 1: {self.index}")
        if self.wcec < 1:
            raise ValueError(f"T{self.index}: wcec deve ser >= 1, recebido {self.wcec}")
        if self.global_wcec is not None and self.global_wcec < self.wcec:
            raise ValueError(
                f"T{self.index}: global_wcec ({self.global_wcec}) menor que wcec ({self.wcec})"
            )
        if self.overrun_factor is not None and self.overrun_factor < 0:
            raise ValueError(f"T{self.index}: overrun_factor negativo: {self.overrun_factor}")
        if self.kappa is not None and not 0 < self.kappa <= self.wcec * (1 + FREQ_TOL):
            raise ValueError(f"T{self.index}: kappa fora de (0, wcec]: {self.kappa}")

    def remaining_bound(self) -> Optional[float]:
        """Limite superior do total de ciclos: W_i, senão w_i (1 + α), senão None."""
        if self.global_wcec is not None:
            return float(self.global_wcec)
        if self.overrun_factor is not None:
            return self.wcec * (1.0 + self.overrun_factor)
        return None


@dataclass(frozen=True)
class TaskSet:
    """Tarefas T_1..T_N em ordem de execução, com prazo e período comum D (o quadro)."""

    tasks: Tuple[TaskSpec, ...]
    deadline: float

    def __post_init__(self) -> None:
        tasks = tuple(self.tasks)
        object.__setattr__(self, "tasks", tasks)
        if not tasks:
            raise ValueError("TaskSet sem tarefas")
        if not (math.isfinite(self.deadline) and self.deadline > 0):
            raise ValueError(f"Prazo D deve ser positivo: {self.deadline}")
        indices = [t.index for t in tasks]
        if indices != list(range(1, len(tasks) + 1)):
            raise ValueError(f"Índices devem ser contíguos 1..N: {indices}")

    @classmethod
    def from_wcecs(cls, wcecs: Iterable[int], deadline: float, **per_task: Sequence) -> "TaskSet":
        """Constrói um TaskSet a partir dos WCECs; listas opcionais por tarefa em per_task."""
        wcecs = list(wcecs)
        tasks = []
        for k, w in enumerate(wcecs):
            extra = {name: values[k] for name, values in per_task.items() if values is not None}
            tasks.append(TaskSpec(index=k + 1, wcec=int(w), **extra))
        return cls(tuple(tasks), float(deadline))

    @property
    def N(self) -> int:
        return len(self.tasks)

    @property
    def wcecs(self) -> Tuple[int, ...]:
        return tuple(t.wcec for t in self.tasks)

    def task(self, index: int) -> TaskSpec:
        """Tarefa pelo índice 1-based."""
        if not 1 <= index <= self.N:
            raise ValueError(f"Índice de tarefa fora de 1..{self.N}: {index}")
        return self.tasks[index - 1]

    def worst_case_load(self, menu: FrequencyMenu) -> float:
        """Σ w_i / f_M, tempo necessário no pior caso à frequência máxima."""
        return math.fsum(self.wcecs) / menu.f_max

    def is_feasible(self, menu: FrequencyMenu) -> bool:
        return self.worst_case_load(menu) <= self.deadline * (1 + FREQ_TOL)

    def require_feasible(self, menu: FrequencyMenu) -> None:
        """Invariante Σ w_i / f_M <= D."""
        if not self.is_feasible(menu):
            raise ValueError(
                f"TaskSet não escalonável: Σw/f_M = {self.worst_case_load(menu):.6g} > D = {self.deadline:.6g}"
            )

    def with_task(self, index: int, **changes) -> "TaskSet":
        tasks = list(self.tasks)
        tasks[index - 1] = replace(tasks[index - 1], **changes)
        return replace(self, tasks=tuple(tasks))

    def with_deadline(self, deadline: float) -> "TaskSet":
        return replace(self, deadline=float(deadline))


@dataclass(frozen=True)
class ScheduleFunction:
    """
    Função de escalonamento S_i(t) em degraus, armazenada como pontos (t, f) ordenados.

    O valor em [points[k].t, points[k+1].t) é points[k].f. Instâncias são sempre
    normalizadas: primeiro ponto em t = 0, tempos estritamente crescentes e sem
    degraus adjacentes de mesma frequência.
    """

    points: Tuple[Point, ...]
    _times: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        points = tuple((float(t), float(f)) for t, f in self.points)
        object.__setattr__(self, "points", points)
        if not points:
            raise ValueError("Escalonamento vazio")
        if points[0][0] != 0.0:
            raise ValueError(f"Primeiro ponto deve estar em t = 0: {points[0]}")
        for (t0, f0), (t1, f1) in zip(points, points[1:]):
            if t1 <= t0:
                raise ValueError(f"Tempos devem ser estritamente crescentes: {t0} >= {t1}")
            if f0 == f1:
                raise ValueError(f"Degraus adjacentes com mesma frequência em t = {t1}")
        object.__setattr__(self, "_times", tuple(t for t, _ in points))

    def __len__(self) -> int:
        return len(self.points)

    def __call__(self, t: float) -> float:
        return eval_schedule(self, t)

    @property
    def times(self) -> Tuple[float, ...]:
        return self._times

    @property
    def freqs(self) -> Tuple[float, ...]:
        return tuple(f for _, f in self.points)

    def validate(self, menu: FrequencyMenu) -> None:
        """Verifica que toda frequência pertence ao menu e que |S| <= M."""
        for t, f in self.points:
            if f not in menu:
                raise ValueError(f"Frequência {f} (t = {t}) fora do menu {menu.freqs}")
        if len(self.points) > menu.M:
            raise ValueError(f"|S| = {len(self.points)} excede M = {menu.M}")

    @classmethod
    def constant(cls, f: float) -> "ScheduleFunction":
        return cls(((0.0, f),))


def eval_schedule(S: ScheduleFunction, t: float) -> float:
    """S(t) = S[k].f com k = max{j | S[j].t <= t}, por busca binária."""
    k = bisect_right(S.times, t) - 1
    return S.points[max(k, 0)][1]


def normalize_schedule(
    points: Sequence[Point], menu: Optional[FrequencyMenu] = None
) -> ScheduleFunction:
    """
    Normaliza uma lista de pontos (t, f) ordenada por t.

    Tempos duplicados mantêm o último ponto inserido e degraus adjacentes com a
    mesma frequência são fundidos. Com `menu`, valida pertinência e |S| <= M.

    Raises:
        ValueError: lista vazia ("escalonamento vazio") ou invariantes violados.
    """
    if not points:
        raise ValueError("Escalonamento vazio")
    # sort estável: entre tempos iguais a ordem de inserção é preservada
    ordered = sorted(((float(t), float(f)) for t, f in points), key=lambda p: p[0])
    dedup: List[Point] = []
    for t, f in ordered:
        if dedup and dedup[-1][0] == t:
            dedup[-1] = (t, f)
        else:
            dedup.append((t, f))
    merged: List[Point] = []
    for t, f in dedup:
        if merged and merged[-1][1] == f:
            continue
        merged.append((t, f))
    S = ScheduleFunction(tuple(merged))
    if menu is not None:
        S.validate(menu)
    return S
