"""Execution backends: shared-memory loops and the parameter-server roles."""

from . import shared

__all__ = ["shared", "paramserver"]
