"""Report generator for drjadce Monte-Carlo sweep results."""

from .figures import (ALGO_LABELS, FIGURE_KINDS, EmptyDataError, FigureSpec,
                      SchemaError, aggregate, load_rows, render)

__version__ = "0.1.0"
