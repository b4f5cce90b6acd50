"""FastAPI service wrapping the core detection and evaluation package."""

from .app import app, create_app

__all__ = ["app", "create_app"]
