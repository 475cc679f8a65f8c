"""darkmeter: darkness measurements from shuttered photon counting.

Submodules:

* ``protocol``: shutter block structure, open/closed differencing, summaries
* ``simulator``: seeded synthetic campaigns with drifting dark rates
* ``bayes``: priors, MCMC posterior, HDI, pd+, Savage-Dickey sensitivity sweeps
* ``jzs``: Cauchy-prior one-sample Bayes factor
* ``attenuation``: LED/filter tomography and environment-attenuation estimate
* ``budget``: flash correction, dark-limited interval length, retinal scaling
"""

from __future__ import annotations

__version__ = "0.1.0"

from .common import GaussianEstimate, Side, Support  # noqa: E402
from .protocol import (  # noqa: E402
    CountSeries,
    DifferenceSeries,
    SeriesSummary,
    ShutterProtocol,
    build_differences,
    summarize,
)

__all__ = [
    "CountSeries",
    "DifferenceSeries",
    "GaussianEstimate",
    "SeriesSummary",
    "ShutterProtocol",
    "Side",
    "Support",
    "__version__",
    "build_differences",
    "summarize",
]
