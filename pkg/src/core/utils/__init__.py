"""
Utils package - Utilitários do simulador
"""
from src.core.utils.env import get_env_var, get_int_env

__all__ = ["get_env_var", "get_int_env"]
