"""Figure regeneration for the stance-feasibility simulator's CSV outputs."""

__version__ = "0.1.0"

from .figures import (
    FIGURE_IDS,
    SCHEMAS,
    FigureSpec,
    MissingColumn,
    SchemaMismatch,
    load_table,
    render,
)

__all__ = [
    "FIGURE_IDS",
    "SCHEMAS",
    "FigureSpec",
    "MissingColumn",
    "SchemaMismatch",
    "load_table",
    "render",
    "__version__",
]
