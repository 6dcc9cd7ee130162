# src/core/logger.py
import os
import sys
import json
import logging
import logging.handlers
import reprlib
import time
import uuid
from contextvars import ContextVar
from dataclasses import dataclass, field
from functools import wraps
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from rich.console import Console
from rich.logging import RichHandler

# Diretório base do projeto
BASE_DIR = Path(__file__).resolve().parent.parent.parent
LOG_DIR = os.path.join(BASE_DIR, 'logs')

BASE_LOGGER_NAME = 'dvs_frame_sched'

# Configuração de níveis de log
LOG_LEVEL_MAP = {
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
    'CRITICAL': logging.CRITICAL
}

# Nível de log padrão - pode ser sobrescrito via variável de ambiente
DEFAULT_LOG_LEVEL = 'INFO'
LOG_LEVEL = os.environ.get('LOG_LEVEL', DEFAULT_LOG_LEVEL).upper()
NUMERIC_LOG_LEVEL = LOG_LEVEL_MAP.get(LOG_LEVEL, logging.INFO)

_short_repr = reprlib.Repr()
_short_repr.maxstring = 60
_short_repr.maxother = 60
_short_repr.maxlist = 6


def setup_logging(
    name: str = BASE_LOGGER_NAME,
    level: Union[str, int] = NUMERIC_LOG_LEVEL,
    log_file: Optional[str] = None,
    enable_rich: bool = True,
    file_max_mb: int = 10,
    backup_count: int = 7,
    trace_config: Optional['TraceConfig'] = None
) -> logging.Logger:
    """
    Configura o sistema de logging unificado com suporte a Rich

    Args:
        name: Nome do logger
        level: Nível de log (int ou string)
        log_file: Caminho para arquivo de log, relativo a LOG_DIR
        enable_rich: Habilita saída formatada com Rich
        file_max_mb: Tamanho máximo do arquivo em MB
        backup_count: Número de arquivos de backup
        trace_config: Configuração do sistema de tracing

    Returns:
        Logger configurado
    """
    if isinstance(level, str):
        level = LOG_LEVEL_MAP.get(level.upper(), logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Remover handlers existentes
    if logger.handlers:
        logger.handlers.clear()

    # Console handler com Rich apenas em terminais interativos
    if enable_rich and sys.stderr.isatty():
        console = Console(color_system="auto", stderr=True)
        rich_handler = RichHandler(
            console=console,
            show_time=True,
            show_path=True,
            markup=False,
            rich_tracebacks=True,
            tracebacks_show_locals=False
        )
        rich_handler.setLevel(level)
        logger.addHandler(rich_handler)

    # File handler com rotação
    if log_file:
        log_path = Path(LOG_DIR) / log_file
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            filename=log_path,
            maxBytes=file_max_mb * 1024 * 1024,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        file_handler.setFormatter(file_formatter)
        file_handler.setLevel(level)
        logger.addHandler(file_handler)

    if name == BASE_LOGGER_NAME:
        if trace_config is None:
            trace_config = TraceConfig(
                tracing_disabled=os.environ.get("DVS_DISABLE_TRACING", "0") == "1",
                trace_processors=[FileTraceProcessor()]
            )
        logger.trace_config = trace_config  # type: ignore[attr-defined]
    return logger


def log_execution(func=None, level=logging.INFO):
    """Decorador para logar início, duração e falhas de operações de alto nível"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger = logging.getLogger(BASE_LOGGER_NAME)
            logger.log(
                level,
                f"Iniciando {func.__qualname__} - Args: "
                f"{[_short_repr.repr(a) for a in args]}, Kwargs: {list(kwargs)}"
            )
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
                elapsed = time.perf_counter() - start_time
                logger.log(level, f"Concluído {func.__qualname__} em {elapsed:.3f}s")
                return result
            except Exception:
                elapsed = time.perf_counter() - start_time
                logger.error(f"Erro em {func.__qualname__} após {elapsed:.3f}s", exc_info=True)
                raise
        return wrapper
    return decorator(func) if func else decorator


def get_logger(name: str = BASE_LOGGER_NAME, **kwargs: Any) -> logging.Logger:
    """Obtém um logger configurado; módulos do pacote viram filhos do logger base"""
    if name == BASE_LOGGER_NAME:
        return setup_logging(name, **kwargs)
    return logging.getLogger(BASE_LOGGER_NAME).getChild(name)


# Context variables para tracing
current_trace: ContextVar[Optional['Trace']] = ContextVar('current_trace', default=None)
current_span: ContextVar[Optional['Span']] = ContextVar('current_span', default=None)


@dataclass
class Span:
    """Representa uma operação temporal dentro de um trace"""
    trace_id: str
    span_id: str = field(default_factory=lambda: f"span_{uuid.uuid4().hex}")
    parent_id: Optional[str] = None
    span_type: str = "custom"
    name: Optional[str] = None
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    span_data: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None


@dataclass
class TraceConfig:
    """Configuração para controle do tracing"""
    tracing_disabled: bool = False
    trace_processors: List['TraceProcessor'] = field(default_factory=list)


@dataclass
class Trace:
    """Representa uma execução completa de experimento"""
    trace_id: str = field(default_factory=lambda: f"trace_{uuid.uuid4().hex}")
    workflow_name: str = "Experiment"
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    spans: List[Span] = field(default_factory=list)
    disabled: bool = False


class TraceProcessor:
    """Interface para processamento de traces"""
    def process_trace(self, trace: Trace) -> None:
        raise NotImplementedError


class FileTraceProcessor(TraceProcessor):
    """Armazena traces em arquivo JSON lines"""
    def __init__(self, file_path: str = "traces.jsonl"):
        self.file_path = Path(LOG_DIR) / file_path

    def process_trace(self, trace: Trace) -> None:
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.file_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(trace.__dict__, default=lambda o: o.__dict__) + "\n")


def _trace_config() -> TraceConfig:
    base = logging.getLogger(BASE_LOGGER_NAME)
    config = getattr(base, "trace_config", None)
    return config if config is not None else TraceConfig(tracing_disabled=True)


def trace(
    workflow_name: str = "Experiment",
    disabled: Optional[bool] = None,
    metadata: Optional[Dict] = None
):
    """Decorador que abre um trace em torno de um fluxo completo"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            config = _trace_config()
            if config.tracing_disabled or disabled or current_trace.get() is not None:
                return func(*args, **kwargs)

            new_trace = Trace(workflow_name=workflow_name, metadata=dict(metadata or {}))
            token = current_trace.set(new_trace)
            try:
                return func(*args, **kwargs)
            except Exception as e:
                new_trace.metadata['error'] = str(e)
                raise
            finally:
                new_trace.end_time = time.time()
                for processor in config.trace_processors:
                    processor.process_trace(new_trace)
                current_trace.reset(token)

        return wrapper
    return decorator


def span(span_type: str = "custom", name: Optional[str] = None, capture=None):
    """Decorador para criação de spans; `capture` extrai metadados dos argumentos"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            current_t = current_trace.get()
            current_s = current_span.get()

            if not current_t or current_t.disabled:
                return func(*args, **kwargs)

            new_span = Span(
                trace_id=current_t.trace_id,
                parent_id=current_s.span_id if current_s else None,
                span_type=span_type,
                name=name or func.__name__,
                span_data={
                    'function': func.__name__,
                    'module': func.__module__,
                    'data': capture(*args, **kwargs) if capture else None
                }
            )

            token = current_span.set(new_span)
            try:
                return func(*args, **kwargs)
            except Exception as e:
                new_span.error = str(e)
                raise
            finally:
                new_span.end_time = time.time()
                current_t.spans.append(new_span)
                current_span.reset(token)

        return wrapper
    return decorator


# Span types específicos
def scenario_span(name: str = "Scenario Run", capture=None):
    return span(span_type="scenario", name=name, capture=capture)


def command_span(name: str = "CLI Command"):
    return span(span_type="command", name=name)


# Logger global padrão
logger = setup_logging()
