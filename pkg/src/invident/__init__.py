"""Data-driven transfer-function models of grid-support inverter functions.

Modules: ``signals`` (probing waveforms), ``gsf`` (curves and region
schemes), ``plant`` (surrogate plants), ``dataio`` (CSV ingestion and
preprocessing), ``sysid`` (estimation and order selection), ``partition``
(piecewise models) and ``cli``.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0"
