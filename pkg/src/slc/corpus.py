"""The shipped corpus of LinLang programs and its golden acceptance matrix."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .checker import MODES, Code, Mode, check_program
from .syntax import LexError, ParseError, Term, parse_source

CORPUS_DIR = Path(__file__).parent / "corpus"
DEFAULT_MANIFEST = CORPUS_DIR / "corpus.tsv"

COLUMNS = ["name", "path"] + [f"verdict_{m.value}" for m in MODES]
_CODES = {c.value for c in Code}


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    verdicts: dict[Mode, str]
    ledger: tuple[int, ...] | None = None

    def source(self) -> str:
        return self.path.read_text(encoding="utf-8")

    def term(self) -> Term:
        return parse_source(self.source())


def _check_verdict(text: str, lineno: int) -> str:
    if text == "accept":
        return text
    kind, _, code = text.partition(":")
    if kind != "reject" or code not in _CODES:
        raise ManifestError(f"line {lineno}: bad verdict {text!r}")
    return text


def load_manifest(path: Path | str = DEFAULT_MANIFEST) -> list[CorpusEntry]:
    """Read a tab-separated manifest; ``#`` lines are comments.

    Program paths are resolved relative to the manifest's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    rows = [
        (i, row)
        for i, row in enumerate(csv.reader(text.splitlines(), delimiter="\t"), 1)
        if row and not row[0].startswith("#")
    ]
    if not rows:
        return []
    lineno, header = rows[0]
    if header[: len(COLUMNS)] != COLUMNS or len(header) > len(COLUMNS) + 1:
        raise ManifestError(f"line {lineno}: unexpected header {header!r}")
    entries = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ManifestError(f"line {lineno}: expected {len(header)} columns, got {len(row)}")
        verdicts = {m: _check_verdict(v, lineno) for m, v in zip(MODES, row[2:7])}
        ledger = None
        if len(row) > 7 and row[7] != "-":
            try:
                ledger = tuple(int(x) for x in row[7].split(","))
            except ValueError:
                raise ManifestError(f"line {lineno}: bad ledger {row[7]!r}") from None
        entries.append(CorpusEntry(row[0], path.parent / row[1], verdicts, ledger))
    return entries


def corpus_entries() -> list[CorpusEntry]:
    return load_manifest(DEFAULT_MANIFEST)


def verdicts_for(entry: CorpusEntry) -> dict[Mode, str]:
    """Actual verdict of the checker on one entry, per mode."""
    try:
        term = entry.term()
    except OSError as exc:
        raise ManifestError(f"{entry.name}: cannot read {entry.path}: {exc}") from exc
    except LexError:
        return {m: "reject:LexError" for m in MODES}
    except ParseError:
        return {m: "reject:ParseError" for m in MODES}
    return {m: check_program(term, m).verdict() for m in MODES}


@dataclass(frozen=True)
class Mismatch:
    name: str
    mode: Mode
    expected: str
    actual: str


def run_corpus(entries: list[CorpusEntry]) -> tuple[list[dict[Mode, str]], list[Mismatch]]:
    """Check every entry in every mode; results keep manifest order."""
    with ThreadPoolExecutor() as pool:
        actual = list(pool.map(verdicts_for, entries))
    mismatches = [
        Mismatch(e.name, m, e.verdicts[m], got[m])
        for e, got in zip(entries, actual)
        for m in MODES
        if e.verdicts[m] != got[m]
    ]
    return actual, mismatches
