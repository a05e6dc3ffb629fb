"""Export corpus texts as an embedding TSV.

The matching engine keys embeddings by raw text. This package collects
every distinct text a corpus directory can ask for, encodes each exactly
once, and writes the table in the engine's file format: a ``#dim=D``
header followed by ``text<TAB>v1,...,vD`` rows sorted by text.
"""

from .encoders import EncoderError, HashEncoder, resolve_encoder
from .export import DEFAULT_BATCH, ExportError, collect_texts, export

__all__ = [
    "DEFAULT_BATCH",
    "EncoderError",
    "ExportError",
    "HashEncoder",
    "collect_texts",
    "export",
    "resolve_encoder",
]
