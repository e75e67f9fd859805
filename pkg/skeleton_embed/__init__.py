from typing import Optional

from .config import Settings
from .modules.embedder import Embedding
from .modules.instance_io import Instance
from .modules.pipeline import run_pipeline

__version__ = "1.0.0"
__all__ = ["embed_instance", "run_pipeline"]


def embed_instance(instance: Instance, settings: Optional[Settings] = None) -> Embedding:
    """Embed the instance's tree onto its points and return the drawing."""
    result = run_pipeline(instance, settings, until="embed")
    if result.embedding is None:
        raise RuntimeError("embed stage did not run")
    return result.embedding
