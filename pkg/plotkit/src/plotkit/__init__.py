"""Figure rendering for workbench CSV outputs; no computation of its own."""

from .inputs import HashMismatchError, InputError, Table, check_hashes, read_table
from .render import PlotSpec, render

__version__ = "0.1.0"
