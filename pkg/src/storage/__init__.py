"""
Flat-file output storage
"""

from .file_manager import OutputManager, RunManifest

__all__ = ["OutputManager", "RunManifest"]
