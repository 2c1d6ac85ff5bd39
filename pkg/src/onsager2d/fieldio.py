"""Plain-text field files, CSV tables and JSON run manifests.

Field format: one mode per line, ``a1 a2 re1 im1 re2 im2`` for vector
fields and ``a1 a2 re im`` for scalars. Lines starting with ``#`` are
comments. Floats are written with 17 significant digits so that a write /
read round trip is exact.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import sys
import time

import numpy as np

from . import __version__
from .errors import DivergenceError, ValidationError
from .spectral import SparseSpectralField


class FieldFormatError(ValidationError):
    pass


def format_field(F: SparseSpectralField, header: str | None = None) -> str:
    out = io.StringIO()
    out.write(f"# ncomp={F.ncomp} modes={len(F)}\n")
    if header:
        for line in header.splitlines():
            out.write(f"# {line}\n")
    for k, c in zip(F.k, F.c):
        parts = [str(int(k[0])), str(int(k[1]))]
        for z in c:
            parts += [f"{z.real:.17g}", f"{z.imag:.17g}"]
        out.write(" ".join(parts) + "\n")
    return out.getvalue()


def write_field(path, F: SparseSpectralField, header: str | None = None):
    with open(path, "w") as fh:
        fh.write(format_field(F, header))


def parse_field(text: str, *, check_divergence=False, tol=1e-10) -> SparseSpectralField:
    ks, cs = [], []
    width = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if width is None:
            width = len(tok)
            if width not in (4, 6):
                raise FieldFormatError(f"line {lineno}: expected 4 or 6 columns, got {width}")
        elif len(tok) != width:
            raise FieldFormatError(f"line {lineno}: expected {width} columns, got {len(tok)}")
        try:
            a = (int(tok[0]), int(tok[1]))
            vals = [float(v) for v in tok[2:]]
        except ValueError:
            raise FieldFormatError(f"line {lineno}: cannot parse {raw!r}") from None
        if not all(np.isfinite(vals)):
            raise FieldFormatError(f"line {lineno}: non-finite coefficient")
        ks.append(a)
        cs.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    if width is None:
        raise FieldFormatError("field file has no modes")
    ncomp = (width - 2) // 2
    F = SparseSpectralField(np.array(ks), np.array(cs), ncomp=ncomp)
    if check_divergence and ncomp == 2 and not F.is_divergence_free(tol):
        raise DivergenceError(f"field is not divergence-free (residual {F.divergence_residual():.3g})")
    return F


def read_field(path, *, check_divergence=False, tol=1e-10) -> SparseSpectralField:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise FieldFormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_field(text, check_divergence=check_divergence, tol=tol)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command: str, parameters: dict, outputs, seeds=None, wall_time=None, extra=None):
    """JSON provenance record: command, parameters, seeds, output hashes, timing, version."""
    doc = {
        "command": command,
        "parameters": parameters,
        "seeds": seeds or {},
        "artifacts": {str(p): sha256_file(p) for p in outputs},
        "wall_time_s": wall_time,
        "tool_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return doc


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)
