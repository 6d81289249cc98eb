"""
Output directory handling for analysis artifacts.
"""
from pathlib import Path
from typing import Optional
from config import settings
from models.errors import BridgifyError

_output_dir: Optional[Path] = None


def open_output_dir(path: Optional[Path] = None) -> Path:
    """Create (if needed) and select the directory artifacts are written to."""
    global _output_dir
    target = Path(path) if path is not None else Path(settings.output_dir)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise BridgifyError(f"Cannot create output directory {target}: {e}")
    _output_dir = target
    return target


def get_output_dir() -> Path:
    """Get the selected output directory, opening the default one on first use."""
    if _output_dir is None:
        return open_output_dir()
    return _output_dir


def artifact_path(name: str) -> Path:
    return get_output_dir() / name
