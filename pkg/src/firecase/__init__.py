"""Safety assurance toolchain for an on-board wildfire detection component.

The package splits into three layers: the GSN argument machinery
(:mod:`firecase.gsn`), the requirements/data/metrics core used to produce
evidence (:mod:`firecase.requirements`, :mod:`firecase.raster`,
:mod:`firecase.metrics`, :mod:`firecase.data_eval`,
:mod:`firecase.verification`, :mod:`firecase.simulate`), and the assembly
layer that binds evidence into a reviewable case
(:mod:`firecase.evidence`, :mod:`firecase.assemble`, :mod:`firecase.cli`).
"""

from __future__ import annotations

__version__ = "0.1.0"
