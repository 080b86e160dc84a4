"""Reading and writing problem files.

Text layout::

    pep <n> <d> <structure> [name ...]
    <n rows of n entries re,im>     # A_0
    ...
    <n rows of n entries re,im>     # A_d

Blank lines and ``#`` comments are ignored. Files ending in ``.json`` hold
``{"n", "d", "structure", "name", "coeffs"}`` with ``coeffs[i][r][c] = [re, im]``.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .core import MatrixPolynomial, Structure

MAX_ENTRIES = 50_000_000
_ENTRY_RE = re.compile(r"^A_(\d+) violates \w+ structure at entry \((\d+), (\d+)\)$")


class ProblemFormatError(ValueError):
    """Malformed problem file; carries a 1-based line and column when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None, path=None):
        self.message = message
        self.line = line
        self.col = col
        self.path = str(path) if path is not None else None
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        where = self.path or "<input>"
        if self.line is not None:
            where += f":{self.line}"
            if self.col is not None:
                where += f":{self.col}"
        return f"{where}: {self.message}"


def format_complex(z: complex) -> str:
    """``re,im`` with repr floats, so parsing gives back the same bits."""
    z = complex(z)
    return f"{float(z.real)!r},{float(z.imag)!r}"


def parse_complex(token: str) -> complex:
    parts = token.split(",")
    if len(parts) == 1:
        re_, im = parts[0], "0"
    elif len(parts) == 2:
        re_, im = parts
    else:
        raise ValueError(f"expected re,im but got {token!r}")
    try:
        z = complex(float(re_), float(im))
    except ValueError:
        raise ValueError(f"non-numeric entry {token!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite entry {token!r}")
    return z


def _tokens(line: str):
    """Whitespace-separated tokens with their 1-based start columns."""
    for m in re.finditer(r"\S+", line):
        yield m.group(0), m.start() + 1


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            yield lineno, line


def _int_field(tok, col, lineno, what, path):
    try:
        v = int(tok)
    except ValueError:
        raise ProblemFormatError(f"{what} must be an integer, got {tok!r}", lineno, col, path) from None
    if v < 1:
        raise ProblemFormatError(f"{what} must be at least 1, got {v}", lineno, col, path)
    return v


def parse_text(text: str, path=None) -> MatrixPolynomial:
    lines = list(_content_lines(text))
    if not lines:
        raise ProblemFormatError("empty problem file", path=path)
    lineno, header = lines[0]
    toks = list(_tokens(header))
    if toks[0][0] != "pep":
        raise ProblemFormatError(f"header must start with 'pep', got {toks[0][0]!r}", lineno, toks[0][1], path)
    if len(toks) < 4:
        raise ProblemFormatError("header needs: pep n d structure [name]", lineno, len(header) + 1, path)
    n = _int_field(toks[1][0], toks[1][1], lineno, "n", path)
    d = _int_field(toks[2][0], toks[2][1], lineno, "d", path)
    try:
        structure = Structure(toks[3][0])
    except ValueError:
        tags = ", ".join(s.value for s in Structure)
        raise ProblemFormatError(f"unknown structure {toks[3][0]!r} (expected {tags})", lineno, toks[3][1], path) from None
    name = " ".join(t for t, _ in toks[4:]) or None
    if n * n * (d + 1) > MAX_ENTRIES:
        raise ProblemFormatError(f"problem too large: n={n}, d={d}", lineno, toks[1][1], path)

    body = lines[1:]
    need = n * (d + 1)
    if len(body) != need:
        at = body[need][0] if len(body) > need else (body[-1][0] + 1 if body else lineno + 1)
        raise ProblemFormatError(
            f"expected {need} coefficient rows ({d + 1} blocks of {n}), found {len(body)}", at, 1, path
        )
    A = np.zeros((d + 1, n, n), dtype=np.complex128)
    where = {}
    for idx, (ln, line) in enumerate(body):
        i, r = divmod(idx, n)
        row = list(_tokens(line))
        if len(row) != n:
            col = row[n][1] if len(row) > n else len(line) + 1
            raise ProblemFormatError(f"row {r} of A_{i} has {len(row)} entries, expected {n}", ln, col, path)
        for c, (tok, col) in enumerate(row):
            try:
                A[i, r, c] = parse_complex(tok)
            except ValueError as e:
                raise ProblemFormatError(str(e), ln, col, path) from None
            where[(i, r, c)] = (ln, col)
    return _build(A, structure, name, path, where)


def _build(A, structure, name, path, where):
    try:
        return MatrixPolynomial(A, structure, name)
    except ValueError as e:
        m = _ENTRY_RE.match(str(e))
        if m:
            key = tuple(int(g) for g in m.groups())
            ln, col = where.get(key, (None, None))
            raise ProblemFormatError(str(e), ln, col, path) from None
        raise ProblemFormatError(str(e), path=path) from None


def parse_json(text: str, path=None) -> MatrixPolynomial:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemFormatError(f"invalid JSON: {e.msg}", e.lineno, e.colno, path) from None
    if not isinstance(doc, dict):
        raise ProblemFormatError("JSON problem must be an object", path=path)
    for key in ("n", "d", "structure", "coeffs"):
        if key not in doc:
            raise ProblemFormatError(f"missing field {key!r}", path=path)
    n, d = doc["n"], doc["d"]
    if not (isinstance(n, int) and isinstance(d, int)) or isinstance(n, bool) or isinstance(d, bool) or n < 1 or d < 1:
        raise ProblemFormatError("n and d must be positive integers", path=path)
    if n * n * (d + 1) > MAX_ENTRIES:
        raise ProblemFormatError(f"problem too large: n={n}, d={d}", path=path)
    try:
        structure = Structure(doc["structure"])
    except (ValueError, TypeError):
        raise ProblemFormatError(f"unknown structure {doc['structure']!r}", path=path) from None
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ProblemFormatError("name must be a string", path=path)
    coeffs = doc["coeffs"]
    if not isinstance(coeffs, list) or len(coeffs) != d + 1:
        raise ProblemFormatError(f"coeffs must list {d + 1} matrices", path=path)
    A = np.zeros((d + 1, n, n), dtype=np.complex128)
    for i, M in enumerate(coeffs):
        if not isinstance(M, list) or len(M) != n:
            raise ProblemFormatError(f"coeffs[{i}] must have {n} rows", path=path)
        for r, row in enumerate(M):
            if not isinstance(row, list) or len(row) != n:
                raise ProblemFormatError(f"coeffs[{i}][{r}] must have {n} entries", path=path)
            for c, z in enumerate(row):
                ok = (
                    isinstance(z, list)
                    and len(z) == 2
                    and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)
                )
                if not ok:
                    raise ProblemFormatError(f"coeffs[{i}][{r}][{c}] must be [re, im]", path=path)
                try:
                    v = complex(float(z[0]), float(z[1]))
                except OverflowError:
                    v = complex(math.inf)
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise ProblemFormatError(f"coeffs[{i}][{r}][{c}] is not finite", path=path)
                A[i, r, c] = v
    return _build(A, structure, name, path, {})


def parse_problem(path) -> MatrixPolynomial:
    """Read a problem file; the ``.json`` extension selects the JSON reader."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ProblemFormatError(f"cannot read file: {e.strerror or e}", path=path) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ProblemFormatError(f"not UTF-8 text (byte {e.start})", path=path) from None
    if path.suffix.lower() == ".json":
        return parse_json(text, path)
    return parse_text(text, path)


def emit_text(P: MatrixPolynomial) -> str:
    head = f"pep {P.n} {P.d} {P.structure.value}"
    if P.name:
        head += " " + " ".join(P.name.replace("#", " ").split())
    out = [head]
    for i, M in enumerate(P.coeffs):
        out.append(f"# A_{i}")
        out.extend(" ".join(format_complex(z) for z in row) for row in M)
    return "\n".join(out) + "\n"


def emit_json(P: MatrixPolynomial) -> str:
    doc = {
        "n": P.n,
        "d": P.d,
        "structure": P.structure.value,
        "name": P.name,
        "coeffs": [[[[float(z.real), float(z.imag)] for z in row] for row in M] for M in P.coeffs],
    }
    return json.dumps(doc)


def write_problem(P: MatrixPolynomial, path) -> None:
    path = Path(path)
    path.write_text(emit_json(P) if path.suffix.lower() == ".json" else emit_text(P))
