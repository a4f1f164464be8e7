"""Unified university inventory service."""

from .service import ServiceConfig, UuisService

__all__ = ["ServiceConfig", "UuisService"]
__version__ = "0.1.0"
