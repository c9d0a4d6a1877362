# hypdyn/utils/console_printer.py
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

console = Console()
err_console = Console(stderr=True)


def _cell(item: Any) -> str:
    if item is None:
        return "[dim]-[/dim]"
    if isinstance(item, float):
        return f"{item:.6g}"
    if isinstance(item, bool):
        return "[green]ok[/green]" if item else "[bold red]FAIL[/bold red]"
    return str(item)


def print_table_data(title: str, headers: List[str], rows: List[List[Any]], row_limit: Optional[int] = None):
    """
    Печатает данные в виде таблицы Rich.

    Args:
        title (str): заголовок таблицы.
        headers (List[str]): заголовки столбцов.
        rows (List[List[Any]]): строки данных.
        row_limit (int, optional): максимум отображаемых строк (по умолчанию все).
    """
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for header in headers:
        table.add_column(header)

    display_rows = rows[:row_limit] if row_limit is not None else rows
    for row in display_rows:
        table.add_row(*[_cell(item) for item in row])

    if row_limit is not None and len(rows) > row_limit:
        table.caption = f"Displaying {len(display_rows)} of {len(rows)} rows."

    console.print(table)


def print_key_value_pairs(title: str, data: Dict[str, Any]):
    """Печатает пары ключ–значение под заголовком."""
    console.print(f"\n[bold green]{title}[/bold green]")
    for key, value in data.items():
        console.print(f"  [cyan]{key}[/cyan]: [white]{_cell(value)}[/white]")


def print_message(message: str, style: str = "white"):
    console.print(f"[{style}]{message}[/{style}]")


def print_error(message: str):
    """Сообщение об ошибке в stderr."""
    err_console.print(f"[bold red]{message}[/bold red]")
