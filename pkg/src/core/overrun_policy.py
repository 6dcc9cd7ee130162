"""
Políticas de tratamento de overrun: instantes z̃ de morte/suspensão e limiares
percentis κ_i(ε).

`KillTimes.ztilde[k]` é z̃_{k+1} (1-based); a tarefa de posição k (0-based) ainda em
execução é morta ou suspensa em `ztilde[k + 1]`.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.core.feasibility import DangerZones
from src.core.logger import get_logger
from src.core.model import FrequencyMenu, TaskSet

logger = get_logger(__name__)


class KillPolicyKind(str, Enum):
    """Famílias de política de morte."""
    AT_DANGER_ZONE = "at_danger_zone"
    AT_DEADLINE = "at_deadline"
    HYBRID = "hybrid"
    PERCENTILE = "percentile"


class KappaTransform(str, Enum):
    """Transformação de κ_j quando w_j cresce para c_j."""
    STRETCH = "stretch"  # κ'_j = κ_j c_j / w_j
    SHIFT = "shift"      # κ'_j = κ_j + (c_j - w_j)


def _broadcast(values: Union[float, Sequence[float], None], n: int, name: str) -> Optional[Tuple[float, ...]]:
    if values is None:
        return None
    if isinstance(values, (int, float)):
        return tuple(float(values) for _ in range(n))
    values = tuple(float(v) for v in values)
    if len(values) != n:
        raise ValueError(f"{name}: esperados {n} valores, recebidos {len(values)}")
    return values


@dataclass(frozen=True)
class KillPolicy:
    """
    Regra que define z̃.

    Attributes:
        kind: família da política
        delta: δ_i por tarefa (HYBRID), em [0, 1]
        epsilon: ε_i por tarefa (PERCENTILE), em [0, 1]
        window: K >= 1 tarefas usando κ; None = ilimitado
        kappa_transform: heurística de atualização de κ na adaptação
    """

    kind: KillPolicyKind
    delta: Optional[Tuple[float, ...]] = None
    epsilon: Optional[Tuple[float, ...]] = None
    window: Optional[int] = None
    kappa_transform: KappaTransform = KappaTransform.STRETCH

    def __post_init__(self) -> None:
        if self.kind == KillPolicyKind.HYBRID and self.delta is None:
            raise ValueError("Política hybrid exige delta")
        if self.kind == KillPolicyKind.PERCENTILE and self.epsilon is None:
            raise ValueError("Política percentile exige epsilon")
        for name, values in (("delta", self.delta), ("epsilon", self.epsilon)):
            if values is not None and any(not 0.0 <= v <= 1.0 for v in values):
                raise ValueError(f"{name} deve estar em [0, 1]: {values}")
        if self.window is not None and self.window < 1:
            raise ValueError(f"window deve ser >= 1: {self.window}")

    @classmethod
    def at_danger_zone(cls) -> "KillPolicy":
        return cls(KillPolicyKind.AT_DANGER_ZONE)

    @classmethod
    def at_deadline(cls) -> "KillPolicy":
        return cls(KillPolicyKind.AT_DEADLINE)

    @classmethod
    def hybrid(cls, delta: Union[float, Sequence[float]], n: int) -> "KillPolicy":
        return cls(KillPolicyKind.HYBRID, delta=_broadcast(delta, n, "delta"))

    @classmethod
    def percentile(
        cls,
        epsilon: Union[float, Sequence[float]],
        n: int,
        window: Optional[int] = None,
        kappa_transform: KappaTransform = KappaTransform.STRETCH,
    ) -> "KillPolicy":
        return cls(
            KillPolicyKind.PERCENTILE,
            epsilon=_broadcast(epsilon, n, "epsilon"),
            window=window,
            kappa_transform=kappa_transform,
        )

    def deltas(self, n: int) -> Tuple[float, ...]:
        """δ efetivo por tarefa; AT_DANGER_ZONE é δ = 0 e AT_DEADLINE é δ = 1."""
        if self.kind == KillPolicyKind.AT_DANGER_ZONE:
            return (0.0,) * n
        if self.kind == KillPolicyKind.AT_DEADLINE:
            return (1.0,) * n
        if self.kind == KillPolicyKind.HYBRID:
            if len(self.delta) != n:
                raise ValueError(f"delta: esperados {n} valores, recebidos {len(self.delta)}")
            return self.delta
        raise ValueError("Política percentile não possui delta")


@dataclass(frozen=True)
class KillTimes:
    """z̃_1..z̃_{N+1}; z̃_{N+1} = D."""

    ztilde: Tuple[float, ...]

    def limit(self, position: int) -> float:
        """Instante de morte/suspensão da tarefa de posição 0-based `position`."""
        return self.ztilde[position + 1]


def kill_times(
    policy: KillPolicy, ts: TaskSet, zones: DangerZones, menu: FrequencyMenu
) -> KillTimes:
    """
    Calcula z̃ para a política.

    AT_DANGER_ZONE: z̃_i = z_i; AT_DEADLINE: z̃_i = D; HYBRID: z̃_i = z_i + (D - z_i) δ_i;
    PERCENTILE com janela K:
        z̃_{i+1} = D - (1/f_M) (Σ_{j=i+1}^{min(i+K,N)} κ_j + Σ_{j=i+K+1}^{N} w_j).

    Raises:
        ValueError: PERCENTILE sem κ em alguma tarefa ("dados percentis ausentes").
    """
    n, D = ts.N, ts.deadline
    if policy.kind == KillPolicyKind.PERCENTILE:
        kappas = [t.kappa for t in ts.tasks]
        if any(k is None for k in kappas):
            missing = [t.index for t in ts.tasks if t.kappa is None]
            raise ValueError(f"Dados percentis ausentes (kappa) para tarefas {missing}")
        window = n if policy.window is None else policy.window
        ztilde = []
        for i in range(n + 1):
            # z̃_{i+1}: κ para j em (i, min(i+K, N)], w para j > i+K (1-based)
            upper = min(i + window, n)
            ztilde.append(
                D - math.fsum(kappas[i:upper] + [float(w) for w in ts.wcecs[upper:]]) / menu.f_max
            )
    else:
        deltas = policy.deltas(n)
        ztilde = [z + (D - z) * d for z, d in zip(zones.z[:n], deltas)]
        ztilde.append(D)
    ztilde[n] = float(D)
    if any(b < a for a, b in zip(ztilde, ztilde[1:])):
        logger.warning(f"z̃ não monótono para {policy.kind.value}: {ztilde}")
    return KillTimes(tuple(ztilde))


def percentile_kappa(samples: Sequence[float], epsilon: float, wcec: int) -> float:
    """
    κ(ε) empírico: menor candidato K (1, amostras observadas e o WCEC) com
    P[c < K] >= 1 - ε, limitado a [1, wcec].

    Raises:
        ValueError: amostras vazias ou ε fora de [0, 1].
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon deve estar em [0, 1]: {epsilon}")
    data = np.sort(np.asarray(samples, dtype=float))
    if data.size == 0:
        raise ValueError("Amostras vazias para o cálculo de kappa")
    candidates = np.unique(np.concatenate(([1.0], data, [float(wcec)])))
    below = np.searchsorted(data, candidates, side="left")
    target = (1.0 - epsilon) * data.size - 1e-9
    ok = np.nonzero(below >= target)[0]
    kappa = float(candidates[ok[0]]) if ok.size else float(wcec)
    return min(max(kappa, 1.0), float(wcec))
