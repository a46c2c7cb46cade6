"""HTTP service exposing the library over JSON."""

from .app import create_app

__all__ = ["create_app"]
