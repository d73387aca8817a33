"""Figure rendering for the cvqkd reference datasets."""

from .render import (
    FigureSpec,
    RenderResult,
    SchemaError,
    from_directory,
    render,
    render_all,
)

__version__ = "0.1.0"
