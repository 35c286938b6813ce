"""Static figures from recompiler CSV traces and circuit files."""

from .circuits import ResourceCount, count_gates, count_gates_file
from .plots import RenderInfo, plot_elimination, plot_fidelity_compare, plot_recompile, plot_resources
from .traces import TraceError, TraceFrame

__version__ = "0.1.0"
