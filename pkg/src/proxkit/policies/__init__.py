"""Policy families composed by the solver: boosting, smoothing, step, prox."""

from . import boosting, prox, smoothing, step

__all__ = ["boosting", "smoothing", "step", "prox"]
