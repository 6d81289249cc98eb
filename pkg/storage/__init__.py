"""Bridgify Storage Package"""
from .connection import open_output_dir, get_output_dir, artifact_path
from .artifact_repository import ArtifactRepository

__all__ = ["open_output_dir", "get_output_dir", "artifact_path", "ArtifactRepository"]
