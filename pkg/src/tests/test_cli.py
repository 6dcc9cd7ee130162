"""
Testes para o módulo CLI.
"""
import re
from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from src.cli import app

# Setup
runner = CliRunner()


def write_experiment(path: Path, **overrides) -> Path:
    """Escreve um experimento pequeno de duas tarefas; `overrides` substitui chaves de topo."""
    experiment = {
        "name": "cli_test",
        "seed": 7,
        "repetitions": 2,
        "output_dir": "results",
        "frequencies": [1, 2],
        "deadline": 200,
        "kill_policy": {"kind": "hybrid", "delta": 0.2},
        "adaptation": "horizontal_shift",
        "workload": {
            "kind": "two_phase_normal",
            "phase1": {"means": [100, 60], "stddevs": [10, 6], "frames": 10},
            "phase2": {"means": [120, 60], "stddevs": [10, 6], "frames": 5},
        },
    }
    experiment.update(overrides)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(experiment, sort_keys=False), encoding="utf-8")
    return path


@pytest.fixture
def experiment(tmp_path):
    """Arquivo de experimento válido em tmp_path."""
    return write_experiment(tmp_path / "exp.yaml")


def test_run_writes_outputs(experiment, tmp_path):
    """Testa se run escreve os três CSVs e imprime o resumo."""
    # Execução
    result = runner.invoke(app, ["run", str(experiment), "--out", str(tmp_path / "out")])

    # Verificações
    assert result.exit_code == 0
    assert "kill_rate=" in result.stdout
    assert "fairness_killed=" in result.stdout
    out = tmp_path / "out"
    summary = (out / "summary.csv").read_text(encoding="utf-8").splitlines()
    assert summary[0] == "kill_rate,energy,fairness_all,fairness_killed"
    assert len(summary) == 2
    per_frame = (out / "per_frame.csv").read_text(encoding="utf-8").splitlines()
    assert per_frame[0] == "frame,energy,kill_rate"
    assert len(per_frame) == 16
    laxity = (out / "laxity.csv").read_text(encoding="utf-8").splitlines()
    assert laxity[0] == "task,laxity_all,laxity_killed"
    assert len(laxity) == 3


def test_run_is_reproducible(experiment, tmp_path):
    """Testa se duas execuções com a mesma semente geram arquivos idênticos."""
    # Execução
    first = runner.invoke(app, ["run", str(experiment), "--out", str(tmp_path / "a"), "--quiet"])
    second = runner.invoke(app, ["run", str(experiment), "--out", str(tmp_path / "b"), "--quiet"])

    # Verificações
    assert first.exit_code == 0 and second.exit_code == 0
    assert first.stdout == ""
    for name in ("summary.csv", "per_frame.csv", "laxity.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_output_dir_relative_to_experiment(experiment, tmp_path):
    """Testa se output_dir do arquivo é resolvido a partir do diretório do experimento."""
    result = runner.invoke(app, ["run", str(experiment), "--reps", "1", "--quiet"])

    assert result.exit_code == 0
    assert (tmp_path / "results" / "summary.csv").exists()


def test_run_invalid_delta(tmp_path):
    """Testa se δ fora de [0, 1] é rejeitado com código 1 e o campo no erro."""
    # Setup
    path = write_experiment(tmp_path / "bad.yaml", kill_policy={"kind": "hybrid", "delta": 1.5})

    # Execução
    result = runner.invoke(app, ["run", str(path)])

    # Verificações
    assert result.exit_code == 1
    assert "Configuração inválida" in result.stdout
    assert "kill_policy.delta" in result.stdout
    assert not (tmp_path / "results").exists()


def test_run_unknown_field(tmp_path):
    """Testa se chaves desconhecidas são rejeitadas."""
    path = write_experiment(tmp_path / "bad.yaml", deadlnie=100)

    result = runner.invoke(app, ["run", str(path)])

    assert result.exit_code == 1
    assert "deadlnie" in result.stdout


def test_run_missing_trace(tmp_path):
    """Testa se um trace inexistente gera erro de E/S (código 2)."""
    # Setup
    path = write_experiment(tmp_path / "exp.yaml", workload={"kind": "trace", "path": "missing.csv"})

    # Execução
    result = runner.invoke(app, ["run", str(path)])

    # Verificações
    assert result.exit_code == 2
    assert "Erro de E/S" in result.stdout


def test_run_missing_experiment(tmp_path):
    """Testa se um arquivo de experimento inexistente gera código 2."""
    result = runner.invoke(app, ["run", str(tmp_path / "nope.yaml")])

    assert result.exit_code == 2


def test_run_malformed_trace(tmp_path):
    """Testa se um trace malformado gera código 1 com a linha do erro."""
    # Setup
    (tmp_path / "trace.csv").write_text("task_1,task_2\n10,x\n", encoding="utf-8")
    path = write_experiment(tmp_path / "exp.yaml", workload={"kind": "trace", "path": "trace.csv"})

    # Execução
    result = runner.invoke(app, ["run", str(path)])

    # Verificações
    assert result.exit_code == 1
    assert "linha 2" in result.stdout


def test_run_with_mock_orchestrator(mocker, tmp_path):
    """Testa se as flags sobrescrevem semente, saída e repetições."""
    # Setup
    series = mocker.Mock(kill_rate=0.25, energy=1234.5, fairness_all=0.5, fairness_killed=float("nan"))
    mock_get = mocker.patch("src.cli.get_orchestrator")
    mock_get.return_value.run.return_value = series
    mock_get.return_value.out_dir = tmp_path

    # Execução
    result = runner.invoke(app, ["run", "exp.yaml", "--seed", "3", "--out", str(tmp_path), "--reps", "4"])

    # Verificações
    assert result.exit_code == 0
    mock_get.assert_called_once_with(Path("exp.yaml"), 3, tmp_path, 4)
    mock_get.return_value.run.assert_called_once()
    assert "kill_rate=0.25 energy=1234.5 fairness_all=0.5 fairness_killed=nan" in result.stdout


@pytest.mark.parametrize("error, code", [
    (ValueError("delta fora de [0, 1]"), 1),
    (PermissionError("sem permissão"), 2),
])
def test_run_error_exit_codes(mocker, error, code):
    """Testa o código de saída de erros de configuração e de E/S."""
    mocker.patch("src.cli.get_orchestrator", side_effect=error)

    result = runner.invoke(app, ["run", "exp.yaml"])

    assert result.exit_code == code
    assert str(error) in result.stdout


@pytest.mark.parametrize("error", [KeyError("deadline"), TypeError("argumento inesperado")])
def test_run_unexpected_error_is_raised(mocker, error):
    """Testa se erros de programação são relançados em vez de virar erro de configuração."""
    mocker.patch("src.cli.get_orchestrator", side_effect=error)

    result = runner.invoke(app, ["run", "exp.yaml"])

    assert isinstance(result.exception, type(error))
    assert result.exception.args == error.args
    assert "Erro:" not in result.stdout


def test_sweep_writes_one_row_per_deadline(tmp_path):
    """Testa se sweep escreve uma linha por D, na ordem da entrada, e os pivôs."""
    # Setup
    path = write_experiment(tmp_path / "exp.yaml", sweep={"deadlines": [300, 160, 200]})

    # Execução
    result = runner.invoke(app, ["sweep", str(path), "--out", str(tmp_path / "out")])

    # Verificações
    assert result.exit_code == 0
    assert "default: 3 pontos" in result.stdout
    lines = (tmp_path / "out" / "sweep_default.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "deadline,energy,kill_rate,fairness_all,fairness_killed"
    assert len(lines) == 4
    assert [line.split(",")[0] for line in lines[1:]] == ["300", "160", "200"]
    for metric in ("energy", "kill_rate", "fairness_all", "fairness_killed"):
        pivot = (tmp_path / "out" / f"sweep_{metric}.csv").read_text(encoding="utf-8").splitlines()
        assert pivot[0] == "deadline,default"
        assert len(pivot) == 4


def test_sweep_row_independent_of_order(tmp_path):
    """Testa se a linha de cada D não depende da ordem da varredura."""
    # Setup
    forward = write_experiment(tmp_path / "f.yaml", sweep={"deadlines": [160, 240]})
    backward = write_experiment(tmp_path / "b.yaml", sweep={"deadlines": [240, 160]})

    # Execução
    runner.invoke(app, ["sweep", str(forward), "--out", str(tmp_path / "f"), "--quiet"])
    runner.invoke(app, ["sweep", str(backward), "--out", str(tmp_path / "b"), "--quiet"])

    # Verificações
    rows_f = (tmp_path / "f" / "sweep_default.csv").read_text(encoding="utf-8").splitlines()[1:]
    rows_b = (tmp_path / "b" / "sweep_default.csv").read_text(encoding="utf-8").splitlines()[1:]
    assert len(rows_f) == 2
    assert rows_f == rows_b[::-1]


def test_sweep_with_variants(tmp_path):
    """Testa se cada variante gera seu arquivo e uma coluna nos pivôs."""
    # Setup
    variants = [
        {"name": "delta_0", "kill_policy": {"kind": "hybrid", "delta": 0.0}},
        {"name": "at_deadline", "kill_policy": {"kind": "at_deadline"}},
    ]
    path = write_experiment(tmp_path / "exp.yaml", sweep={"deadlines": [200]}, variants=variants)

    # Execução
    result = runner.invoke(app, ["sweep", str(path), "--out", str(tmp_path / "out"), "--reps", "1"])

    # Verificações
    assert result.exit_code == 0
    assert (tmp_path / "out" / "sweep_delta_0.csv").exists()
    assert (tmp_path / "out" / "sweep_at_deadline.csv").exists()
    pivot = (tmp_path / "out" / "sweep_energy.csv").read_text(encoding="utf-8").splitlines()
    assert pivot[0] == "deadline,delta_0,at_deadline"


def test_sweep_reserved_variant_name(tmp_path):
    """Testa se nomes de variante que colidem com os pivôs são rejeitados."""
    path = write_experiment(tmp_path / "exp.yaml", sweep={"deadlines": [200]},
                            variants=[{"name": "energy", "adaptation": "none"}])

    result = runner.invoke(app, ["sweep", str(path)])

    assert result.exit_code == 1
    assert "reservado" in result.stdout


def test_sweep_empty(experiment):
    """Testa se sweep sem deadlines falha com código 1."""
    result = runner.invoke(app, ["sweep", str(experiment)])

    assert result.exit_code == 1
    assert "Sweep vazio" in result.stdout


def test_gen_workload_then_trace_run_matches(tmp_path):
    """Testa se o trace gerado reproduz a execução sintética de uma repetição."""
    # Setup
    tasks = [{"wcec": 130}, {"wcec": 78}]
    synthetic = write_experiment(tmp_path / "synthetic.yaml", repetitions=1, tasks=tasks)
    from_trace = write_experiment(
        tmp_path / "from_trace.yaml", repetitions=1, tasks=tasks, workload={"kind": "trace", "path": "trace.csv"}
    )

    # Execução
    generated = runner.invoke(app, ["gen-workload", str(synthetic), str(tmp_path / "trace.csv")])
    first = runner.invoke(app, ["run", str(synthetic), "--out", str(tmp_path / "s"), "--quiet"])
    second = runner.invoke(app, ["run", str(from_trace), "--out", str(tmp_path / "t"), "--quiet"])

    # Verificações
    assert generated.exit_code == 0
    assert "Trace escrito em" in generated.stdout
    lines = (tmp_path / "trace.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# phase_boundary: 10"
    assert lines[1] == "task_1,task_2"
    assert len(lines) == 17
    assert first.exit_code == 0 and second.exit_code == 0
    for name in ("summary.csv", "per_frame.csv", "laxity.csv"):
        assert (tmp_path / "s" / name).read_bytes() == (tmp_path / "t" / name).read_bytes()


def test_gen_workload_requires_synthetic(tmp_path):
    """Testa se gen-workload recusa cargas vindas de trace."""
    (tmp_path / "trace.csv").write_text("task_1,task_2\n10,20\n", encoding="utf-8")
    path = write_experiment(tmp_path / "exp.yaml", workload={"kind": "trace", "path": "trace.csv"})

    result = runner.invoke(app, ["gen-workload", str(path), str(tmp_path / "out.csv")])

    assert result.exit_code == 1
    assert "two_phase_normal" in result.stdout


def test_validate_feasible(experiment):
    """Testa se validate imprime a tabela e a escalonabilidade da referência."""
    # Execução
    result = runner.invoke(app, ["validate", str(experiment)])

    # Verificações
    assert result.exit_code == 0
    assert "Aviso" not in result.stdout
    assert "D = 200" in result.stdout
    assert "Funções de referência: escalonável" in result.stdout


def test_validate_warns_when_infeasible(tmp_path):
    """Testa se validate avisa quando Σw/f_M > D e mantém z̃_{N+1} = D."""
    # Setup
    workload = {
        "kind": "two_phase_normal",
        "phase1": {"means": [100, 100], "stddevs": [0, 0], "frames": 5},
        "phase2": {"means": [100, 100], "stddevs": [0, 0], "frames": 0},
    }
    path = write_experiment(tmp_path / "exp.yaml", deadline=50, workload=workload,
                            kill_policy={"kind": "at_danger_zone"})

    # Execução
    result = runner.invoke(app, ["validate", str(path)])

    # Verificações
    assert result.exit_code == 0
    assert "TaskSet não escalonável" in result.stdout
    assert "Σw/f_M = 100 > D = 50" in result.stdout
    rows = [re.findall(r"[-\w.]+", line) for line in result.stdout.splitlines()]
    assert ["3", "-", "50", "50"] in rows


def test_no_args_shows_help():
    """Testa se a CLI sem argumentos mostra a ajuda."""
    result = runner.invoke(app, [])

    assert "run" in result.stdout
    assert "sweep" in result.stdout
    assert "validate" in result.stdout
