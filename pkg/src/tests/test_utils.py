"""
Testes dos utilitários de ambiente e do tracing.
"""
import logging

import pytest

from src.core.logger import BASE_LOGGER_NAME, TraceConfig, TraceProcessor, command_span, trace
from src.core.utils import get_env_var, get_int_env


class CollectingProcessor(TraceProcessor):
    def __init__(self):
        self.traces = []

    def process_trace(self, trace):
        self.traces.append(trace)


@pytest.fixture
def collector(monkeypatch):
    """Substitui a configuração de tracing do logger base por um coletor em memória."""
    processor = CollectingProcessor()
    base = logging.getLogger(BASE_LOGGER_NAME)
    monkeypatch.setattr(base, "trace_config", TraceConfig(trace_processors=[processor]), raising=False)
    return processor


def test_get_env_var_prefers_args(monkeypatch):
    """Testa se o valor dos argumentos tem prioridade sobre o ambiente."""
    monkeypatch.setenv("DVS_WORKERS", "3")
    assert get_env_var("DVS_WORKERS") == "3"
    assert get_env_var("DVS_WORKERS", args_value="5") == "5"
    assert get_env_var("DVS_MISSING_VAR", default="x") == "x"


def test_get_int_env(monkeypatch):
    """Testa a leitura de inteiros positivos do ambiente."""
    monkeypatch.delenv("DVS_WORKERS", raising=False)
    assert get_int_env("DVS_WORKERS", 1) == 1
    monkeypatch.setenv("DVS_WORKERS", "4")
    assert get_int_env("DVS_WORKERS", 1) == 4
    assert get_int_env("DVS_WORKERS", 1, 2) == 2


@pytest.mark.parametrize("raw, message", [("dois", "inteira"), ("0", ">= 1"), ("-3", ">= 1")])
def test_get_int_env_invalid(monkeypatch, raw, message):
    """Testa se valores não inteiros ou não positivos são rejeitados."""
    monkeypatch.setenv("DVS_WORKERS", raw)
    with pytest.raises(ValueError, match=message):
        get_int_env("DVS_WORKERS", 1)


def test_trace_records_spans(collector):
    """Testa se um trace agrupa os spans abertos dentro dele."""
    # Setup
    @command_span(name="inner")
    def inner(x):
        return x * 2

    @trace(workflow_name="Teste")
    def outer():
        return inner(2) + inner(3)

    # Execução
    assert outer() == 10

    # Verificações
    assert len(collector.traces) == 1
    recorded = collector.traces[0]
    assert recorded.workflow_name == "Teste"
    assert [s.name for s in recorded.spans] == ["inner", "inner"]
    assert all(s.span_type == "command" for s in recorded.spans)
    assert recorded.end_time is not None


def test_trace_records_error(collector):
    """Testa se o erro de um fluxo é registrado no trace e propagado."""
    @trace(workflow_name="Falha")
    def failing():
        raise ValueError("boom")

    with pytest.raises(ValueError, match="boom"):
        failing()
    assert collector.traces[0].metadata["error"] == "boom"


def test_span_outside_trace_is_noop(collector):
    """Testa se spans fora de um trace apenas executam a função."""
    @command_span(name="solo")
    def solo():
        return "ok"

    assert solo() == "ok"
    assert collector.traces == []
