"""
DVS Frame Sched - Escalonamento DVS por quadros com WCEC variável e simulador de eventos discretos
"""

__version__ = "0.1.0"
