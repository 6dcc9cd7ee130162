"""
Core package - Modelo, políticas, adaptação e simulação
"""
