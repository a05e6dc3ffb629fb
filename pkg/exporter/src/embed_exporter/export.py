"""Collect unique corpus texts and write the embedding table atomically."""

import contextlib
import json
import os
import tempfile
from pathlib import Path

from .encoders import resolve_encoder

COMPANIES_FILE = "companies.jsonl"
INVESTORS_FILE = "investors.jsonl"
DEFAULT_BATCH = 64


class ExportError(Exception):
    """Corpus unreadable, malformed, or empty of text."""


def _rows(path: Path):
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ExportError(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(row, dict):
            raise ExportError(f"{path}:{lineno}: expected a JSON object")
        yield row


def collect_texts(corpus_dir: str | Path) -> list[str]:
    """Every distinct text the matching engine looks up, sorted.

    Companies contribute descriptions, industry labels, and locations;
    investors contribute industry preference labels and locations. Empty
    strings are dropped, duplicates collapse to one entry.
    """
    root = Path(corpus_dir)
    texts: set[str] = set()
    for row in _rows(root / COMPANIES_FILE):
        texts.add(str(row.get("description", "")))
        for label in row.get("industry_focus", ()):
            texts.add(str(label))
        texts.add(str(row.get("location", "")))
    for row in _rows(root / INVESTORS_FILE):
        for label in row.get("industry_deal_counts", {}):
            texts.add(str(label))
        texts.add(str(row.get("location", "")))
    texts.discard("")
    if not texts:
        raise ExportError(f"corpus at {root} has no text to embed")
    return sorted(texts)


def export(
    corpus_dir: str | Path,
    out_path: str | Path,
    encoder_name: str = "hash-64",
    batch_size: int = DEFAULT_BATCH,
) -> int:
    """Encode each unique corpus text once and write the TSV; returns row count."""
    if batch_size < 1:
        raise ExportError("batch_size must be >= 1")
    encoder = resolve_encoder(encoder_name)
    texts = collect_texts(corpus_dir)

    vectors: list = []
    for start in range(0, len(texts), batch_size):
        vectors.extend(encoder.encode_batch(texts[start : start + batch_size]))

    lines = [f"#dim={encoder.dim}"]
    for text, vec in zip(texts, vectors):
        if "\t" in text or "\n" in text:
            raise ExportError(f"text contains a tab or newline: {text!r}")
        if len(vec) != encoder.dim:
            raise ExportError(
                f"encoder returned {len(vec)} values for {text!r}, expected {encoder.dim}"
            )
        lines.append(text + "\t" + ",".join(repr(float(x)) for x in vec))

    out = Path(out_path)
    fd, tmp = tempfile.mkstemp(dir=str(out.parent), prefix=out.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, out)
    except BaseException:
        with contextlib.suppress(OSError):
            os.remove(tmp)
        raise
    return len(texts)
