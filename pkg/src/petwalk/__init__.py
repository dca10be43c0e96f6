"""petwalk: a context-aware, pet-mediated tourism notification engine.

Activity detection from location fixes, environmental severity assessment
from sensor and forecast feeds, three notification scenarios with an
interactive shelter dialog, an HTTP facade, deterministic trace replay,
and the companion evaluation statistics toolkit.
"""

__version__ = "0.1.0"
