"""Flat ``key = value`` text documents.

One assignment per line; blank lines and ``#`` comments are skipped on
parse. Model files, baseline parameter files, and run configs all share
this format. Floats are written with 9 significant digits so a
save/load/save cycle is byte-identical.
"""

from __future__ import annotations


def format_float(x: float) -> str:
    """Render a float at 9 significant digits (the serialization precision)."""
    return f"{x:.9g}"


def dumps(pairs: list[tuple[str, str]]) -> str:
    """Serialize ordered (key, value) pairs, one ``key = value`` per line."""
    return "".join(f"{key} = {value}\n" for key, value in pairs)


def loads(text: str) -> dict[str, str]:
    """Parse a flat key-value document into a dict.

    Raises ValueError naming the line number for malformed or duplicate
    assignments.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_file(path) -> dict[str, str]:
    with open(path, "r", encoding="ascii") as fh:
        return loads(fh.read())


def save_file(path, pairs: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(pairs))
