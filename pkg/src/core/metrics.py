"""
Métricas: energia, taxa de morte, laxidade 𝓛_i = média de e_k/r_k e justiça
min 𝓛 / max 𝓛.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np


class FairnessVariant(str, Enum):
    ALL_INSTANCES = "all"
    KILLED_ONLY = "killed"


def energy_of(cycles: float, f: float) -> float:
    """Energia de `cycles` ciclos a frequência f: cycles · f² (ocioso não consome)."""
    if cycles < 0:
        raise ValueError(f"Ciclos negativos: {cycles}")
    return cycles * f * f


def fairness_of(laxities: Sequence[float]) -> float:
    """min/max sobre os 𝓛_i definidos; NaN quando nenhum está definido."""
    defined = [v for v in laxities if not math.isnan(v)]
    if not defined:
        return math.nan
    top = max(defined)
    if top <= 0:
        return 1.0
    return min(defined) / top


@dataclass(frozen=True)
class MetricsSeries:
    """Métricas agregadas sobre todas as repetições de um cenário."""

    repetitions: int
    energy: float                                # média por repetição do total
    energy_per_frame: Tuple[float, ...]          # média por repetição
    jobs_per_frame: Tuple[int, ...]              # soma nas repetições
    killed_per_frame: Tuple[int, ...]
    laxity_all: Tuple[float, ...]
    laxity_killed: Tuple[float, ...]
    deadline_misses: int = 0

    @property
    def jobs(self) -> int:
        return sum(self.jobs_per_frame)

    @property
    def killed(self) -> int:
        return sum(self.killed_per_frame)

    @property
    def kill_rate(self) -> float:
        return self.killed / self.jobs if self.jobs else 0.0

    @property
    def kill_rate_per_frame(self) -> Tuple[float, ...]:
        return tuple(k / j if j else 0.0 for k, j in zip(self.killed_per_frame, self.jobs_per_frame))

    def kill_rate_window(self, start: int, stop: int) -> float:
        """Taxa de morte nos quadros [start, stop)."""
        jobs = sum(self.jobs_per_frame[start:stop])
        return sum(self.killed_per_frame[start:stop]) / jobs if jobs else 0.0

    @property
    def fairness_all(self) -> float:
        return fairness(self, FairnessVariant.ALL_INSTANCES)

    @property
    def fairness_killed(self) -> float:
        return fairness(self, FairnessVariant.KILLED_ONLY)


def fairness(metrics: MetricsSeries, variant: FairnessVariant) -> float:
    """Justiça sobre todas as instâncias ou só as mortas; NaN quando indefinida."""
    if variant == FairnessVariant.ALL_INSTANCES:
        return fairness_of(metrics.laxity_all)
    return fairness_of(metrics.laxity_killed)


@dataclass
class MetricsAccumulator:
    """Acumula quadros de uma ou mais repetições; `merge` preserva a ordem de soma."""

    n_tasks: int
    frames: int
    repetitions: int = 0
    energy_total: float = 0.0
    energy_frames: np.ndarray = field(default=None)
    jobs_frames: np.ndarray = field(default=None)
    killed_frames: np.ndarray = field(default=None)
    ratio_all: np.ndarray = field(default=None)
    count_all: np.ndarray = field(default=None)
    ratio_killed: np.ndarray = field(default=None)
    count_killed: np.ndarray = field(default=None)
    deadline_misses: int = 0

    def __post_init__(self) -> None:
        if self.energy_frames is None:
            self.energy_frames = np.zeros(self.frames)
            self.jobs_frames = np.zeros(self.frames, dtype=np.int64)
            self.killed_frames = np.zeros(self.frames, dtype=np.int64)
            self.ratio_all = np.zeros(self.n_tasks)
            self.count_all = np.zeros(self.n_tasks, dtype=np.int64)
            self.ratio_killed = np.zeros(self.n_tasks)
            self.count_killed = np.zeros(self.n_tasks, dtype=np.int64)

    def add_frame(self, frame: int, result) -> None:
        """Registra um FrameResult do quadro `frame`."""
        energy = result.energy
        self.energy_total += energy
        self.energy_frames[frame] += energy
        self.deadline_misses += int(result.deadline_miss)
        for rec in result.records:
            k = rec.task_index - 1
            ratio = rec.executed / rec.requested
            self.jobs_frames[frame] += 1
            self.ratio_all[k] += ratio
            self.count_all[k] += 1
            if rec.lost:
                self.killed_frames[frame] += 1
                self.ratio_killed[k] += ratio
                self.count_killed[k] += 1

    def end_repetition(self) -> None:
        self.repetitions += 1

    def merge(self, other: "MetricsAccumulator") -> None:
        if (other.n_tasks, other.frames) != (self.n_tasks, self.frames):
            raise ValueError("Acumuladores com dimensões diferentes")
        self.repetitions += other.repetitions
        self.energy_total += other.energy_total
        self.deadline_misses += other.deadline_misses
        for name in ("energy_frames", "jobs_frames", "killed_frames", "ratio_all",
                     "count_all", "ratio_killed", "count_killed"):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def finalize(self) -> MetricsSeries:
        reps = max(self.repetitions, 1)

        def laxity(sums: np.ndarray, counts: np.ndarray) -> Tuple[float, ...]:
            return tuple(float(s / c) if c else math.nan for s, c in zip(sums, counts))

        return MetricsSeries(
            repetitions=self.repetitions,
            energy=self.energy_total / reps,
            energy_per_frame=tuple(float(e) / reps for e in self.energy_frames),
            jobs_per_frame=tuple(int(j) for j in self.jobs_frames),
            killed_per_frame=tuple(int(k) for k in self.killed_frames),
            laxity_all=laxity(self.ratio_all, self.count_all),
            laxity_killed=laxity(self.ratio_killed, self.count_killed),
            deadline_misses=self.deadline_misses,
        )


def merge_all(parts: List[MetricsAccumulator]) -> MetricsAccumulator:
    """Junta acumuladores na ordem da lista."""
    if not parts:
        raise ValueError("Nenhuma repetição para agregar")
    total = MetricsAccumulator(parts[0].n_tasks, parts[0].frames)
    for part in parts:
        total.merge(part)
    return total
