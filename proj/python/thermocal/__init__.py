"""Steady-state 2D thermal models: forward solves, synthetic data,
conductivity calibration and convergence studies."""

try:
    from ._thermocal import *  # noqa: F401,F403  (installed package layout)
    from ._thermocal import __version__  # noqa: F401
except ImportError:  # in-tree build: extension sits on sys.path
    from _thermocal import *  # noqa: F401,F403
    from _thermocal import __version__  # noqa: F401
