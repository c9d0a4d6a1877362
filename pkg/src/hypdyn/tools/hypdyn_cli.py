# hypdyn/tools/hypdyn_cli.py
"""
Пакетный интерфейс: трассы, классификация, построение модели Бляшке, слоения, сводный отчёт.

Коды выхода: 0: результат получен или проверки пройдены; 2: ошибка ввода;
3: неопределённый результат или нарушенное предусловие; 4: провал проверок инвариантов.
"""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Set

import typer
from pydantic import ValidationError
from rich.logging import RichHandler

from hypdyn.classify.annuli import absorbing_annuli
from hypdyn.classify.foliation import foliation_extract
from hypdyn.classify.table import CONNECTIVITY_NOTE, SixTypeVerdict, main_type
from hypdyn.config.settings import BlaschkeSettings, StoreConfig, Tolerances, TraceSettings, effective_settings
from hypdyn.errors import (
    ConfigurationError,
    DomainError,
    MarginExhausted,
    NumericalBreakdown,
    PreconditionError,
    TowerSpecError,
)
from hypdyn.schemas.report import ExperimentConfig, RegionTable, Report
from hypdyn.schemas.run import ExperimentRunCreate
from hypdyn.schemas.tower import load_tower, shipped_towers
from hypdyn.services.experiment_service import ExperimentService
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import OrbitTrace, iterate_trace, tower_validate
from hypdyn.utils import report_writer, svg_plot
from hypdyn.utils.console_printer import err_console, print_error, print_key_value_pairs, print_message, print_table_data

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3
EXIT_INVARIANT = 4

_EXTRA_ARGS = {"allow_extra_args": True, "ignore_unknown_options": True}

app = typer.Typer(add_completion=False, help="Динамика на башнях гиперболических поверхностей")
blaschke_app = typer.Typer(add_completion=False, help="Модельная башня произведений Бляшке степени 2")
app.add_typer(blaschke_app, name="blaschke")


# ---------------------------------------------------------------------------
#  Общие опции и разбор
# ---------------------------------------------------------------------------

TowerOption = typer.Option(..., "--tower", help="JSON-описание башни")
HorizonOption = typer.Option(None, "--horizon", min=0, help="Горизонт (по умолчанию из файла башни)")
OutOption = typer.Option(Path("hypdyn_out"), "--out", help="Каталог результатов")
EmitOption = typer.Option("json", "--emit", help="Список форматов через запятую: csv,json,svg")
RecordOption = typer.Option(False, "--record", help="Записать запуск в хранилище")


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False, rich_tracebacks=True)],
        force=True,
    )


@app.callback()
def main(
    log_level: str = typer.Option(
        os.getenv("HYPDYN_LOG_LEVEL", "WARNING"), "--log-level", help="DEBUG, INFO, WARNING, ERROR"
    ),
):
    """Динамика на башнях гиперболических поверхностей."""
    if log_level.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
        raise typer.BadParameter(f"unknown log level {log_level!r}", param_hint="--log-level")
    _configure_logging(log_level)


def _fail(message: str, code: int) -> typer.Exit:
    print_error(message)
    return typer.Exit(code=code)


def tolerance_overrides(args: List[str]) -> Dict[str, float]:
    """Разбирает дополнительные аргументы вида --tol-KEY X (или --tol-KEY=X)."""
    overrides: Dict[str, float] = {}
    it = iter(args)
    for arg in it:
        if not arg.startswith("--tol-"):
            raise typer.BadParameter(f"unexpected argument {arg!r}")
        key, _, value = arg[len("--tol-"):].partition("=")
        if not value:
            value = next(it, "")
        try:
            overrides[key.replace("-", "_")] = float(value)
        except ValueError:
            raise typer.BadParameter(f"--tol-{key} expects a number, got {value!r}")
    return overrides


def _emit_set(emit: str) -> Set[str]:
    return {part.strip() for part in emit.split(",") if part.strip()}


def _experiment(ctx: typer.Context, command: str, **fields: Any) -> ExperimentConfig:
    try:
        return ExperimentConfig(command=command, tolerances=tolerance_overrides(ctx.args), **fields)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "config"
        raise _fail(f"invalid options ({loc}): {first['msg']}", EXIT_USAGE)
    except ConfigurationError as e:
        raise _fail(f"invalid configuration: {e}", EXIT_USAGE)


def _load(config: ExperimentConfig) -> TowerSpec:
    try:
        tower = load_tower(config.tower)
    except FileNotFoundError as e:
        raise _fail(str(e), EXIT_USAGE)
    except TowerSpecError as e:
        raise _fail(f"invalid tower spec: {e}", EXIT_USAGE)
    except MarginExhausted as e:
        raise _fail(f"model build stopped at level {e.level}: {e}", EXIT_INCONCLUSIVE)
    except ConfigurationError as e:
        raise _fail(f"invalid tower spec: {e}", EXIT_USAGE)
    if config.horizon is not None:
        tower = tower.with_horizon(config.horizon)
    return tower


def _settings(config: ExperimentConfig, tower: TowerSpec) -> tuple[Tolerances, TraceSettings]:
    try:
        return config.effective_tolerances(), TraceSettings(horizon=tower.horizon)
    except ConfigurationError as e:
        raise _fail(f"invalid configuration: {e}", EXIT_USAGE)


def _report(config: ExperimentConfig, tower_name: Optional[str], tol: Tolerances, settings: TraceSettings,
            result: Dict[str, Any], exit_code: int, **extra: Any) -> Report:
    eff = effective_settings(tol, settings)
    eff.update(extra)
    return Report(command=config.command, tower=tower_name, settings=eff,
                  result=report_writer.to_jsonable(result), exit_code=exit_code)


def _record(enabled: bool, config: ExperimentConfig, report: Report,
            verdict: Optional[SixTypeVerdict] = None, horizon: Optional[int] = None) -> None:
    store = StoreConfig.from_env()
    if not (enabled or store.enabled):
        return
    run = ExperimentRunCreate(
        command=config.command,
        tower_name=report.tower,
        spec_hash=report_writer.spec_hash(config.tower) if config.tower and config.tower.is_file() else None,
        horizon=horizon,
        row=verdict.row if verdict else None,
        infinitesimal=verdict.infinitesimal.type if verdict else None,
        thinness=verdict.thinness.verdict if verdict else None,
        modality=verdict.modality.aggregate if verdict else None,
        exit_code=report.exit_code,
        report=report_writer.to_jsonable(report.as_dict()),
    )
    saved = ExperimentService(store).record_run(run)
    if saved:
        print_message(f"Run recorded with id {saved.id}", style="dim")


def _validated(tower: TowerSpec, settings: TraceSettings) -> None:
    try:
        report = tower_validate(tower, settings)
    except DomainError as e:
        raise _fail(f"tower {tower.name!r}: {e}", EXIT_USAGE)
    if not report.valid:
        first = report.first_failure
        raise _fail(f"tower {tower.name!r} invalid at level {first.level} ({first.check}): {first.detail}",
                    EXIT_USAGE)


def _trace(tower: TowerSpec, settings: TraceSettings, eps: Optional[float] = None) -> OrbitTrace:
    try:
        return iterate_trace(tower, settings, collar_eps=eps)
    except (DomainError, NumericalBreakdown) as e:
        raise _fail(f"trace of {tower.name!r} failed: {e}", EXIT_USAGE)


def _trace_result(trace: OrbitTrace) -> Dict[str, Any]:
    return {
        "levels": trace.levels,
        "truncated_at": trace.truncated_at,
        "reason": trace.reason,
        "lambda": trace.lam,
        "delta": trace.delta,
        "distances": trace.distances.T,
        "distance_upper": None if trace.brackets is None else trace.brackets[:, :, 1].T,
    }


# ---------------------------------------------------------------------------
#  Команды
# ---------------------------------------------------------------------------

@app.command(context_settings=_EXTRA_ARGS)
def trace(
    ctx: typer.Context,
    tower: Path = TowerOption,
    horizon: Optional[int] = HorizonOption,
    out: Path = OutOption,
    emit: str = typer.Option("csv,json", "--emit", help="Список форматов через запятую: csv,json,svg"),
    record: bool = RecordOption,
):
    """
    Трасса башни: подъём орбиты, λ_n, δ_n и расстояния отслеживаемых пар (CSV + JSON).
    """
    config = _experiment(ctx, "trace", tower=tower, horizon=horizon, out=out, emit=_emit_set(emit))
    spec = _load(config)
    tol, settings = _settings(config, spec)
    _validated(spec, settings)
    result = _trace(spec, settings)
    stem = config.out / f"{spec.name or 'tower'}_trace"
    if "csv" in config.emit:
        report_writer.write_csv(stem.with_suffix(".csv"), result.csv_header(), result.csv_rows())
    report = _report(config, spec.name, tol, settings, _trace_result(result), EXIT_OK)
    if "json" in config.emit:
        report_writer.write_json(stem.with_suffix(".json"), report.as_dict())
    if "svg" in config.emit:
        svg_plot.plot_trace(result, stem.with_suffix(".svg"))
    print_key_value_pairs(f"Trace {spec.name}", {
        "levels": result.levels,
        "truncated": result.reason or "no",
        "final delta": float(result.delta[-1]),
    })
    _record(record, config, report, horizon=spec.horizon)


@app.command(context_settings=_EXTRA_ARGS)
def classify(
    ctx: typer.Context,
    tower: Path = TowerOption,
    horizon: Optional[int] = HorizonOption,
    eps: Optional[float] = typer.Option(None, "--eps", help="Порог для поглощающих колец"),
    samples: Optional[int] = typer.Option(None, "--samples", min=0, help="Число случайных пар для модальности"),
    out: Path = OutOption,
    emit: str = EmitOption,
    record: bool = RecordOption,
):
    """
    Строка таблицы шести типов: инфинитезимальный тип, тонкость, модальность, расхождения.
    """
    config = _experiment(ctx, "classify", tower=tower, horizon=horizon, eps=eps, out=out, emit=_emit_set(emit))
    spec = _load(config)
    tol, settings = _settings(config, spec)
    _validated(spec, settings)
    try:
        verdict = main_type(spec, tol, settings, samples)
    except (DomainError, NumericalBreakdown) as e:
        raise _fail(f"classification of {spec.name!r} failed: {e}", EXIT_USAGE)
    result = verdict.as_dict()
    if config.eps is not None:
        try:
            result["absorbing_annuli"] = absorbing_annuli(spec, config.eps, tol, settings).as_dict()
        except PreconditionError as e:
            result["absorbing_annuli"] = {"skipped": e.reason}
    code = EXIT_OK if verdict.conclusive else EXIT_INCONCLUSIVE
    report = _report(config, spec.name, tol, settings, result, code)
    stem = config.out / f"{spec.name or 'tower'}_classify"
    if "json" in config.emit:
        report_writer.write_json(stem.with_suffix(".json"), report.as_dict())
    if "svg" in config.emit:
        svg_plot.plot_trace(_trace(spec.with_points(pairs=[]), settings), stem.with_suffix(".svg"))
    print_key_value_pairs(f"Classification of {spec.name}", {
        "row": verdict.row,
        "infinitesimal": verdict.infinitesimal.type,
        "thinness": verdict.thinness.verdict,
        "modality": verdict.modality.aggregate,
        "labels": ", ".join(verdict.modality.labels) or "none",
    })
    for issue in verdict.discrepancies:
        print_message(f"discrepancy: {issue}", style="yellow")
    _record(record, config, report, verdict, spec.horizon)
    raise typer.Exit(code=code)


@blaschke_app.command("build", context_settings=_EXTRA_ARGS)
def blaschke_build(
    ctx: typer.Context,
    levels: int = typer.Option(6, "--levels", min=0, help="Последний строящийся уровень"),
    targets: int = typer.Option(200, "--targets", min=1, help="Случайных точек на уровень для степени накрытия"),
    out: Path = OutOption,
    emit: str = EmitOption,
    record: bool = RecordOption,
):
    """
    Построить уровни 0..levels модели Бляшке и проверить инварианты построения.
    """
    from hypdyn.blaschke.model import build_model_tower, local_isometry_bracket, translate_tower, \
        verify_model_invariants

    config = _experiment(ctx, "blaschke", levels=levels, out=out, emit=_emit_set(emit))
    tol = config.effective_tolerances()
    trace_settings = TraceSettings.from_env()
    blaschke_settings = BlaschkeSettings.from_env()
    try:
        state = build_model_tower(levels, blaschke_settings)
        stopped = None
    except ConfigurationError as e:
        raise _fail(f"invalid levels: {e}", EXIT_USAGE)
    except MarginExhausted as e:
        state, stopped = e.state, e
        print_error(f"model build stopped at level {e.level}: {e}")

    table = RegionTable.model_validate(state.as_dict())
    result: Dict[str, Any] = {"built": state.built, "stopped": state.stopped,
                              "levels": [p.as_dict() for p in state.levels]}
    if stopped is not None:
        code = EXIT_INCONCLUSIVE
    else:
        verification = verify_model_invariants(state, targets, trace_settings.seed)
        result["invariants"] = verification.as_dict()
        result["isometry_brackets"] = [
            {"level": n, "truncation": h, "lo": br.lo, "hi": br.hi, "contains_one": br.contains(1.0)}
            for n in range(state.built + 1)
            for h in range(n, state.built + 1)
            for br in [local_isometry_bracket(state, n, 0j, h)]
        ]
        code = EXIT_OK if verification.passed else EXIT_INVARIANT
        rows = [[name, ok] for name, ok in verification.summary().items()]
        print_table_data(f"Model invariants, levels 0..{state.built}", ["check", "result"], rows)

    report = _report(config, "blaschke_model", tol, trace_settings, result, code,
                     blaschke={"levels": levels, "samples": blaschke_settings.samples, "targets": targets})
    if "json" in config.emit:
        report_writer.write_json(config.out / "blaschke_regions.json", table.model_dump(by_alias=True))
        report_writer.write_json(config.out / "blaschke_report.json", report.as_dict())
        if state.built >= 0:
            report_writer.write_json(config.out / "blaschke_translated.json", translate_tower(state).as_dict())
    if "svg" in config.emit and state.built >= 0:
        svg_plot.plot_regions(state, config.out / "blaschke_regions.svg")
    rows = [[p.level, p.a, p.r, p.eps, p.critical_value] for p in state.levels]
    print_table_data("Levels", ["m", "a_m", "r_m", "ε_m", "v_m"], rows)
    _record(record, config, report)
    raise typer.Exit(code=code)


@app.command(context_settings=_EXTRA_ARGS)
def foliation(
    ctx: typer.Context,
    tower: Path = TowerOption,
    horizon: Optional[int] = HorizonOption,
    leaves: int = typer.Option(5, "--leaves", min=1, help="Число листов каждого слоения"),
    samples: int = typer.Option(64, "--samples", min=2, help="Точек на лист"),
    out: Path = OutOption,
    emit: str = EmitOption,
    record: bool = RecordOption,
):
    """
    Сжимающее (и изометричное) слоение поверхности 0 для тонкой несжимающей башни.
    """
    config = _experiment(ctx, "foliation", tower=tower, horizon=horizon, out=out, emit=_emit_set(emit))
    spec = _load(config)
    tol, settings = _settings(config, spec)
    _validated(spec, settings)
    try:
        descriptors = foliation_extract(spec, leaves, samples, tol, settings)
    except PreconditionError as e:
        report = _report(config, spec.name, tol, settings, {"skipped": e.reason}, EXIT_INCONCLUSIVE)
        _record(record, config, report, horizon=spec.horizon)
        raise _fail(f"{spec.name}: {e.reason}", EXIT_INCONCLUSIVE)
    except (DomainError, NumericalBreakdown) as e:
        raise _fail(f"{spec.name}: {e}", EXIT_INCONCLUSIVE)
    passed = all(d.passed for d in descriptors)
    code = EXIT_OK if passed else EXIT_INVARIANT
    report = _report(config, spec.name, tol, settings, {"foliations": descriptors}, code)
    stem = config.out / f"{spec.name or 'tower'}_foliation"
    if "json" in config.emit:
        report_writer.write_json(stem.with_suffix(".json"), report.as_dict())
    if "svg" in config.emit:
        svg_plot.plot_leaves(descriptors, stem.with_suffix(".svg"))
    rows = [[d.kind, c.leaf, c.label, c.final, c.ok] for d in descriptors for c in d.checks]
    print_table_data(f"Leaves of {spec.name}", ["foliation", "leaf", "label", "final distance", "check"], rows)
    _record(record, config, report, horizon=spec.horizon)
    raise typer.Exit(code=code)


@app.command("report", context_settings=_EXTRA_ARGS)
def six_type_report(
    ctx: typer.Context,
    towers: Optional[Path] = typer.Option(None, "--towers", help="Каталог JSON-башен (по умолчанию поставляемые)"),
    horizon: Optional[int] = HorizonOption,
    out: Path = OutOption,
    emit: str = EmitOption,
    record: bool = RecordOption,
):
    """
    Сводная таблица шести типов по всем башням каталога.
    """
    config = _experiment(ctx, "report", horizon=horizon, out=out, emit=_emit_set(emit))
    tol = config.effective_tolerances()
    if towers is not None and not towers.is_dir():
        raise _fail(f"towers directory not found: {towers}", EXIT_USAGE)
    paths = sorted(towers.glob("*.json")) if towers is not None else shipped_towers()
    if not paths:
        raise _fail("no tower files to report on", EXIT_USAGE)

    entries: List[Dict[str, Any]] = []
    rows: List[List[Any]] = []
    code = EXIT_OK
    for path in paths:
        spec = _load(config.model_copy(update={"tower": path}))
        _, settings = _settings(config, spec)
        try:
            verdict = main_type(spec, tol, settings)
        except (DomainError, NumericalBreakdown) as e:
            logger.error("classification of %s failed: %s", spec.name, e, exc_info=True)
            code = EXIT_INCONCLUSIVE
            entries.append({"tower": spec.name, "file": path.name, "expected_row": spec.expected_row,
                            "error": str(e)})
            rows.append([spec.name, spec.expected_row, None, None, "", str(e)])
            continue
        if not verdict.conclusive:
            code = EXIT_INCONCLUSIVE
        entries.append({"tower": spec.name, "file": path.name, "expected_row": spec.expected_row,
                        **verdict.as_dict()})
        rows.append([spec.name, spec.expected_row, verdict.row, verdict.modality.aggregate,
                     ", ".join(verdict.expected), "; ".join(verdict.discrepancies) or None])
    print_table_data("Six types", ["tower", "declared", "row", "modality", "expected labels", "discrepancies"], rows)
    print_message(CONNECTIVITY_NOTE, style="dim")
    summary = _report(config, None, tol, TraceSettings.from_env(),
                      {"rows": entries, "note": CONNECTIVITY_NOTE}, code)
    if "json" in config.emit:
        report_writer.write_json(config.out / "six_type_report.json", summary.as_dict())
    _record(record, config, summary)
    raise typer.Exit(code=code)


@app.command()
def runs(
    tower: Optional[str] = typer.Option(None, "--tower", help="Только запуски этой башни"),
    limit: int = typer.Option(20, "--limit", min=1, help="Сколько последних запусков показать"),
    db_url: Optional[str] = typer.Option(None, "--db-url", help="Строка подключения SQLAlchemy"),
):
    """
    Показать записанные запуски.
    """
    store = StoreConfig(url=db_url) if db_url else StoreConfig.from_env()
    service = ExperimentService(store)
    recorded = service.list_runs(tower, limit)
    if not recorded:
        print_message("No recorded runs.", style="yellow")
        return
    rows = [[r.id, r.created_at.strftime("%Y-%m-%d %H:%M:%S"), r.command, r.tower_name, r.horizon, r.row,
             r.modality, r.exit_code] for r in recorded]
    print_table_data("Recorded runs", ["id", "created", "command", "tower", "horizon", "row", "modality", "exit"],
                     rows)


if __name__ == "__main__":
    app()
