"""
Modelos de carga: duas fases com ciclos normalmente distribuídos ou matriz de trace
lida de CSV.

Formato do trace: linhas de comentário começam com `#` (`# phase_boundary: k` marca
o primeiro quadro da segunda fase), cabeçalho `task_1,...,task_N` e uma linha de
inteiros >= 1 por quadro.
"""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.core.logger import get_logger

logger = get_logger(__name__)

PHASE_BOUNDARY_TAG = "phase_boundary"

# Tentativas de re-sorteio antes de recortar os valores restantes
MAX_REDRAWS = 1000


class TraceFormatError(ValueError):
    """Erro de formato no trace, com o número de linha (1-based)."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"linha {line}: {message}")


@dataclass(frozen=True)
class PhaseSpec:
    """Parâmetros de uma fase: média e desvio por tarefa, quadros e WCEC opcional."""

    means: Tuple[float, ...]
    stddevs: Tuple[float, ...]
    frames: int
    wcecs: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "stddevs", tuple(float(s) for s in self.stddevs))
        if len(self.means) != len(self.stddevs):
            raise ValueError(f"means ({len(self.means)}) e stddevs ({len(self.stddevs)}) com tamanhos diferentes")
        if self.frames < 0:
            raise ValueError(f"frames negativo: {self.frames}")
        if any(m < 1 for m in self.means) or any(s < 0 for s in self.stddevs):
            raise ValueError("means deve ser >= 1 e stddevs >= 0")
        if self.wcecs is not None:
            object.__setattr__(self, "wcecs", tuple(int(w) for w in self.wcecs))
            if len(self.wcecs) != len(self.means) or any(w < 1 for w in self.wcecs):
                raise ValueError(f"wcecs inválido para a fase: {self.wcecs}")

    def phase_wcecs(self) -> Tuple[int, ...]:
        """WCEC da fase: o valor informado, senão ⌈média + 3σ⌉."""
        if self.wcecs is not None:
            return self.wcecs
        return tuple(max(1, math.ceil(m + 3.0 * s)) for m, s in zip(self.means, self.stddevs))


@dataclass(frozen=True)
class TwoPhaseNormal:
    phase1: PhaseSpec
    phase2: PhaseSpec

    def __post_init__(self) -> None:
        if len(self.phase1.means) != len(self.phase2.means):
            raise ValueError("As duas fases devem ter o mesmo número de tarefas")

    @property
    def n_tasks(self) -> int:
        return len(self.phase1.means)

    @property
    def frames(self) -> int:
        return self.phase1.frames + self.phase2.frames

    @property
    def phase_boundary(self) -> int:
        return self.phase1.frames

    def phase_wcecs(self, phase: int) -> Tuple[int, ...]:
        return (self.phase1 if phase == 1 else self.phase2).phase_wcecs()


@dataclass(frozen=True)
class TraceWorkload:
    """Matriz quadro x tarefa de ciclos; `phase_boundary` None significa fase única."""

    demands: np.ndarray = field(compare=False)
    phase_boundary: Optional[int] = None

    def __post_init__(self) -> None:
        demands = np.asarray(self.demands, dtype=np.int64)
        if demands.ndim != 2 or demands.shape[0] == 0 or demands.shape[1] == 0:
            raise ValueError(f"Trace deve ser uma matriz não vazia, shape {demands.shape}")
        if (demands < 1).any():
            raise ValueError("Trace com ciclos < 1")
        if self.phase_boundary is not None and not 0 <= self.phase_boundary <= demands.shape[0]:
            raise ValueError(f"phase_boundary fora de 0..{demands.shape[0]}: {self.phase_boundary}")
        object.__setattr__(self, "demands", demands)

    @property
    def n_tasks(self) -> int:
        return int(self.demands.shape[1])

    @property
    def frames(self) -> int:
        return int(self.demands.shape[0])

    def phase_wcecs(self, phase: int) -> Tuple[int, ...]:
        """Máximo observado por tarefa na fase (a matriz inteira sem fronteira)."""
        boundary = self.frames if self.phase_boundary is None else self.phase_boundary
        rows = self.demands[:boundary] if phase == 1 else self.demands[boundary:]
        if rows.shape[0] == 0:
            rows = self.demands
        return tuple(int(v) for v in rows.max(axis=0))


WorkloadModel = Union[TwoPhaseNormal, TraceWorkload]


def effective_boundary(model: WorkloadModel) -> int:
    """Primeiro quadro da segunda fase (frames quando há uma única fase)."""
    return model.frames if model.phase_boundary is None else model.phase_boundary


def _draw_phase(phase: PhaseSpec, rng: np.random.Generator) -> np.ndarray:
    n = len(phase.means)
    means = np.asarray(phase.means)
    sds = np.asarray(phase.stddevs)
    upper = np.asarray(phase.phase_wcecs(), dtype=float)
    out = np.rint(rng.normal(means, sds, size=(phase.frames, n)))
    for _ in range(MAX_REDRAWS):
        bad = (out < 1) | (out > upper)
        if not bad.any():
            break
        rows, cols = np.nonzero(bad)
        out[rows, cols] = np.rint(rng.normal(means[cols], sds[cols]))
    else:
        logger.warning("Re-sorteio não convergiu; valores restantes recortados ao intervalo [1, WCEC]")
    return np.clip(out, 1, upper).astype(np.int64)


def generate_workload(
    model: WorkloadModel, rng: Union[np.random.Generator, int, None] = None
) -> np.ndarray:
    """
    Matriz de demandas (quadros x tarefas, int64).

    TwoPhaseNormal sorteia normais truncadas em [1, WCEC da fase] por re-sorteio;
    TraceWorkload devolve a matriz lida. Determinístico para a mesma semente.
    """
    if isinstance(model, TraceWorkload):
        return model.demands.copy()
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return np.vstack([_draw_phase(model.phase1, rng), _draw_phase(model.phase2, rng)])


def read_trace(path: Union[str, Path]) -> TraceWorkload:
    """
    Lê um trace CSV.

    Raises:
        TraceFormatError: cabeçalho ausente ou inválido, linha com número errado de
            colunas ou valor não inteiro / menor que 1.
        OSError: arquivo inexistente ou ilegível.
    """
    boundary: Optional[int] = None
    header: Optional[list] = None
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            first = row[0].strip()
            if first.startswith("#"):
                text = ",".join(row).lstrip("#").strip()
                if text.startswith(PHASE_BOUNDARY_TAG):
                    try:
                        boundary = int(text.split(":", 1)[1])
                    except (IndexError, ValueError):
                        raise TraceFormatError(line_no, f"phase_boundary inválido: {text!r}")
                continue
            cells = [cell.strip() for cell in row]
            if header is None:
                expected = [f"task_{k}" for k in range(1, len(cells) + 1)]
                if cells != expected:
                    raise TraceFormatError(line_no, f"cabeçalho esperado {','.join(expected)}, recebido {','.join(cells)}")
                header = cells
                continue
            if len(cells) != len(header):
                raise TraceFormatError(line_no, f"esperadas {len(header)} colunas, recebidas {len(cells)}")
            try:
                values = [int(cell) for cell in cells]
            except ValueError:
                raise TraceFormatError(line_no, f"valor não inteiro em {cells}")
            if any(v < 1 for v in values):
                raise TraceFormatError(line_no, f"ciclos devem ser >= 1: {values}")
            rows.append(values)
    if header is None:
        raise TraceFormatError(1, "cabeçalho task_1,...,task_N ausente")
    if not rows:
        raise TraceFormatError(1, "trace sem quadros")
    if boundary is not None and not 0 <= boundary <= len(rows):
        raise TraceFormatError(1, f"phase_boundary fora de 0..{len(rows)}: {boundary}")
    logger.info(f"Trace lido: {path} ({len(rows)} quadros, {len(header)} tarefas)")
    return TraceWorkload(np.asarray(rows, dtype=np.int64), boundary)


def write_trace(
    path: Union[str, Path], demands: Sequence[Sequence[int]], phase_boundary: Optional[int] = None
) -> None:
    """Escreve a matriz no formato de trace."""
    matrix = np.asarray(demands, dtype=np.int64)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        if phase_boundary is not None:
            f.write(f"# {PHASE_BOUNDARY_TAG}: {phase_boundary}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([f"task_{k}" for k in range(1, matrix.shape[1] + 1)])
        writer.writerows(matrix.tolist())
