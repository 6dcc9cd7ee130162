"""
Utilitários para gerenciamento de variáveis de ambiente.
"""
import os
from typing import Optional


def get_env_var(name: str, default: Optional[str] = None, args_value: Optional[str] = None) -> Optional[str]:
    """
    Obtém uma variável de ambiente, priorizando args sobre os.environ.

    Args:
        name: Nome da variável.
        default: Valor padrão se a variável não existir.
        args_value: Valor passado via argumentos de linha de comando.

    Returns:
        Valor da variável ou None se não encontrada.
    """
    # Prioriza valor passado via args
    if args_value is not None:
        return args_value

    return os.environ.get(name, default)


def get_int_env(name: str, default: int, args_value: Optional[int] = None) -> int:
    """
    Lê uma variável inteira positiva do ambiente.

    Raises:
        ValueError: Se o valor não for um inteiro positivo.
    """
    raw = get_env_var(name, str(default), None if args_value is None else str(args_value))
    try:
        value = int(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ValueError(f"Variável {name} deve ser inteira, recebido: {raw!r}")
    if value < 1:
        raise ValueError(f"Variável {name} deve ser >= 1, recebido: {value}")
    return value
