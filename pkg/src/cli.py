"""
CLI do simulador: run, sweep, gen-workload e validate.
"""
import sys
from pathlib import Path
from typing import NoReturn, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from src.app import ExperimentOrchestrator
from src.core.logger import command_span, get_logger, trace
from src.core.workload import TraceFormatError

logger = get_logger(__name__)

app = typer.Typer(help="Simulador de escalonamento DVS baseado em quadros.", no_args_is_help=True)
console = Console()

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

SeedOption = typer.Option(None, "--seed", min=0, help="Semente (sobrescreve o arquivo)")
OutOption = typer.Option(None, "--out", help="Diretório de saída (sobrescreve o arquivo)")
RepsOption = typer.Option(None, "--reps", min=1, help="Número de repetições (sobrescreve o arquivo)")
QuietOption = typer.Option(False, "--quiet", "-q", help="Não imprime o resumo")


def get_orchestrator(
    experiment: Path, seed: Optional[int] = None, out: Optional[Path] = None, reps: Optional[int] = None
) -> ExperimentOrchestrator:
    """Retorna um orquestrador para o arquivo de experimento."""
    return ExperimentOrchestrator.from_file(experiment, seed=seed, out_dir=out, reps=reps)


def _fail(command: str, error: Exception) -> NoReturn:
    """
    Registra o erro, imprime a mensagem e sai com o código correspondente.

    Erros de configuração (ValidationError, ValueError, TraceFormatError) saem com 1 e
    erros de E/S com 2; qualquer outra exceção é relançada.
    """
    if isinstance(error, ValidationError):
        logger.error(f"FALHA - {command} | Erro de validação: {error.error_count()} campo(s)")
        console.print(f"[red]Configuração inválida ({error.error_count()} erro(s)):[/red]")
        for item in error.errors():
            field = ".".join(str(part) for part in item["loc"]) or "<documento>"
            console.print(f"  {escape(field)}: {escape(item['msg'])}")
        sys.exit(EXIT_VALIDATION)
    if isinstance(error, (TraceFormatError, ValueError)):
        logger.error(f"FALHA - {command} | Erro: {error}")
        console.print(f"[red]Erro:[/red] {escape(str(error))}")
        sys.exit(EXIT_VALIDATION)
    if not isinstance(error, OSError):
        logger.error(f"FALHA - {command} | Erro inesperado: {error!r}")
        raise error
    logger.error(f"FALHA - {command} | Erro de E/S: {error}")
    console.print(f"[red]Erro de E/S:[/red] {escape(str(error))}")
    sys.exit(EXIT_IO)


def _format(value: float) -> str:
    return format(value, ".6g")


@app.command()
@trace(workflow_name="CLI Run")
@command_span(name="run")
def run(
    experiment: Path = typer.Argument(..., help="Arquivo de experimento YAML"),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    reps: Optional[int] = RepsOption,
    quiet: bool = QuietOption,
):
    """Executa o cenário configurado e escreve summary.csv, per_frame.csv e laxity.csv."""
    try:
        logger.info(f"INÍCIO - run | {experiment}")
        orchestrator = get_orchestrator(experiment, seed, out, reps)
        series = orchestrator.run()
        if not quiet:
            console.print(
                f"kill_rate={_format(series.kill_rate)} energy={_format(series.energy)} "
                f"fairness_all={_format(series.fairness_all)} fairness_killed={_format(series.fairness_killed)}"
            )
        logger.info(f"SUCESSO - run | saída em {orchestrator.out_dir}")
    except Exception as e:
        _fail("run", e)


@app.command()
@trace(workflow_name="CLI Sweep")
@command_span(name="sweep")
def sweep(
    experiment: Path = typer.Argument(..., help="Arquivo de experimento YAML"),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    reps: Optional[int] = RepsOption,
    quiet: bool = QuietOption,
):
    """Varre o comprimento do quadro para cada variante e escreve as tabelas sweep_*.csv."""
    try:
        logger.info(f"INÍCIO - sweep | {experiment}")
        orchestrator = get_orchestrator(experiment, seed, out, reps)
        results = orchestrator.sweep()
        if not quiet:
            for name, rows in results.items():
                console.print(f"{name}: {len(rows)} pontos")
        logger.info(f"SUCESSO - sweep | saída em {orchestrator.out_dir}")
    except Exception as e:
        _fail("sweep", e)


@app.command("gen-workload")
def gen_workload(
    experiment: Path = typer.Argument(..., help="Arquivo de experimento com carga two_phase_normal"),
    output: Path = typer.Argument(..., help="Trace CSV de saída"),
    seed: Optional[int] = SeedOption,
    quiet: bool = QuietOption,
):
    """Materializa a carga sintética (repetição 0) como trace CSV."""
    try:
        path = get_orchestrator(experiment, seed).generate_workload(output)
        if not quiet:
            console.print(f"Trace escrito em {path}")
    except Exception as e:
        _fail("gen-workload", e)


@app.command()
def validate(
    experiment: Path = typer.Argument(..., help="Arquivo de experimento YAML"),
    seed: Optional[int] = SeedOption,
):
    """Verifica a escalonabilidade e imprime zonas de perigo e instantes de morte, sem simular."""
    try:
        report = get_orchestrator(experiment, seed).validate()
    except Exception as e:
        _fail("validate", e)

    ts = report.taskset
    if not report.feasible:
        console.print(
            f"[yellow]Aviso:[/yellow] TaskSet não escalonável: Σw/f_M = {_format(report.load)} > D = {_format(ts.deadline)}"
        )
    table = Table(title=f"D = {_format(ts.deadline)}")
    table.add_column("i", justify="right")
    table.add_column("w_i", justify="right")
    table.add_column("z_i", justify="right")
    table.add_column("z̃_i", justify="right")
    for i in range(1, ts.N + 2):
        wcec = str(ts.task(i).wcec) if i <= ts.N else "-"
        table.add_row(str(i), wcec, _format(report.zones.start(i)), _format(report.kill_times.ztilde[i - 1]))
    console.print(table)
    status = "[green]escalonável[/green]" if report.schedulability else f"[red]{report.schedulability.describe()}[/red]"
    console.print(f"Funções de referência: {status}")


if __name__ == "__main__":
    app()
