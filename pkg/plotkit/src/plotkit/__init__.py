"""Figure rendering for pentadrive sweep and trace CSV outputs."""

from .figures import (FigureKind, FigureSpec, MissingColumns, plot_sweep,
                      plot_trajectory, plot_vv_map, render)

__version__ = "0.1.0"

__all__ = ["FigureKind", "FigureSpec", "MissingColumns", "plot_sweep",
           "plot_trajectory", "plot_vv_map", "render", "__version__"]
