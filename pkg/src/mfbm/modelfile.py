"""Line-oriented model files and seeded random models.

Format::

    # comments and blank lines are ignored
    <kind> <n>                  kind is "classical" or "quantum"
    meta <key> <value...>
    h i [s] <value>
    w i j [s t] <value>
    v i j k [s t u] <value>

Sites are 1-based. Spin labels (1, 2, 3 for sigma_1..3) appear only in
quantum files. Site tuples may be unsorted; spin labels follow their
sites. Terms not listed are zero. Values are written with 17 significant
digits so that parsing an emitted file reproduces the model exactly.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._indexing import canonical_key, site_tuples, tuple_position
from ._validation import CLASSICAL_SITE_CAP, QUANTUM_SITE_CAP, DomainError, check_site_count
from .cbm import CbmParams
from .qbm import QbmParams

KINDS = ("classical", "quantum")
_ORDER = {"h": 1, "w": 2, "v": 3}


class ModelFormatError(DomainError):
    def __init__(self, message, line=None, position=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", field {position}" if position is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.position = position


@dataclass(eq=False)
class ModelFile:
    kind: str
    n: int
    params: CbmParams | QbmParams
    metadata: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return (self.kind, self.n, self.metadata) == (other.kind, other.n, other.metadata) and self.params == other.params

    def scaled(self, scale_w: float, scale_v: float | None = None) -> "ModelFile":
        """Copy with pair and triple couplings multiplied by the given factors."""
        scale_v = scale_w if scale_v is None else scale_v
        p = self.params.replace(w=self.params.w * scale_w, v=self.params.v * scale_v)
        return ModelFile(self.kind, self.n, p, dict(self.metadata))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_model(model: ModelFile) -> str:
    """Serialize ``model`` in canonical form."""
    lines = [f"{model.kind} {model.n}"]
    for key in sorted(model.metadata):
        value = str(model.metadata[key])
        if not key or any(ch.isspace() for ch in key) or "\n" in value:
            raise DomainError(f"metadata key/value not representable: {key!r}")
        lines.append(f"meta {key} {value}".rstrip())
    p, n = model.params, model.n
    if model.kind == "classical":
        for i in range(n):
            if p.h[i] != 0:
                lines.append(f"h {i + 1} {_fmt(p.h[i])}")
        for name, order, arr in (("w", 2, p.w), ("v", 3, p.v)):
            for sites, value in zip(site_tuples(n, order), arr):
                if value != 0:
                    lines.append(f"{name} {' '.join(str(x + 1) for x in sites)} {_fmt(value)}")
    else:
        for i in range(n):
            for s in range(3):
                if p.h[i, s] != 0:
                    lines.append(f"h {i + 1} {s + 1} {_fmt(p.h[i, s])}")
        for name, order, arr in (("w", 2, p.w), ("v", 3, p.v)):
            for sites, block in zip(site_tuples(n, order), arr):
                for spins in np.ndindex(*block.shape):
                    value = block[spins]
                    if value != 0:
                        idx = " ".join(str(x + 1) for x in sites + spins)
                        lines.append(f"{name} {idx} {_fmt(value)}")
    return "\n".join(lines) + "\n"


def write_model(model: ModelFile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_model(model))


def _int(tok, lineno, pos):
    try:
        return int(tok)
    except ValueError:
        raise ModelFormatError(f"expected an integer, got {tok!r}", lineno, pos) from None


def parse_model(source) -> ModelFile:
    """Parse a model from a path, an open text stream or a string of file text."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source
    return _parse_text(text)


def _parse_text(text: str) -> ModelFile:
    kind = n = None
    metadata = {}
    arrays = None
    seen = set()
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if kind is None:
            if len(toks) != 2 or toks[0] not in KINDS:
                raise ModelFormatError("header must be '<classical|quantum> <n>'", lineno)
            kind = toks[0]
            cap = CLASSICAL_SITE_CAP if kind == "classical" else QUANTUM_SITE_CAP
            try:
                n = check_site_count(_int(toks[1], lineno, 2), cap)
            except ModelFormatError:
                raise
            except DomainError as exc:
                raise ModelFormatError(str(exc), lineno, 2) from None
            zeros = (CbmParams if kind == "classical" else QbmParams).zeros(n)
            arrays = {"h": zeros.h.copy(), "w": zeros.w.copy(), "v": zeros.v.copy()}
            continue
        tag = toks[0]
        if tag == "meta":
            if len(toks) < 2:
                raise ModelFormatError("meta needs a key", lineno)
            if toks[1] in metadata:
                raise ModelFormatError(f"duplicate metadata key {toks[1]!r}", lineno, 2)
            metadata[toks[1]] = " ".join(toks[2:])
            continue
        if tag not in _ORDER:
            raise ModelFormatError(f"unknown record type {tag!r}", lineno, 1)
        order = _ORDER[tag]
        nidx = order * (2 if kind == "quantum" else 1)
        if len(toks) != nidx + 2:
            raise ModelFormatError(f"record {tag!r} needs {nidx} indices and a value", lineno)
        idx = [_int(t, lineno, k + 2) for k, t in enumerate(toks[1 : 1 + nidx])]
        sites = idx[:order]
        spins = idx[order:] if kind == "quantum" else None
        for k, i in enumerate(sites):
            if not 1 <= i <= n:
                raise ModelFormatError(f"site index {i} out of range 1..{n}", lineno, k + 2)
        for k, s in enumerate(spins or ()):
            if s not in (1, 2, 3):
                raise ModelFormatError(f"spin index {s} not in 1..3", lineno, order + k + 2)
        try:
            value = float(toks[-1])
        except ValueError:
            raise ModelFormatError(f"expected a number, got {toks[-1]!r}", lineno, nidx + 2) from None
        if not math.isfinite(value):
            raise ModelFormatError(f"non-finite value {toks[-1]!r}", lineno, nidx + 2)
        try:
            key, sp = canonical_key([i - 1 for i in sites], spins)
        except DomainError as exc:
            raise ModelFormatError(str(exc), lineno) from None
        full = (tag, key, sp)
        if full in seen:
            label = " ".join(str(x + 1) for x in key) + ("" if sp is None else " " + " ".join(map(str, sp)))
            raise ModelFormatError(f"duplicate {tag} entry for ({label})", lineno)
        seen.add(full)
        slot = (key[0],) if order == 1 else (tuple_position(n, order)[key],)
        if sp is not None:
            slot += tuple(s - 1 for s in sp)
        arrays[tag][slot] = value
    if kind is None:
        raise ModelFormatError("missing header line")
    cls = CbmParams if kind == "classical" else QbmParams
    return ModelFile(kind, n, cls(n, arrays["h"], arrays["w"], arrays["v"]), metadata)


# -- random models -----------------------------------------------------------

def gaussian_stream(seed: int, count: int) -> np.ndarray:
    """``count`` standard normals from the PCG64 generator seeded with ``seed``.

    Raw 64-bit outputs r are mapped to u = ((r >> 11) + 1) / 2**53 in (0, 1]
    and paired (u1, u2) through Box-Muller: sqrt(-2 ln u1) cos(2 pi u2),
    then sqrt(-2 ln u1) sin(2 pi u2). Only the bit generator comes from
    numpy, whose PCG64 stream is fixed by its published definition.
    """
    npairs = (count + 1) // 2
    raw = np.random.PCG64(seed).random_raw(2 * npairs)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u1, u2 = u[0::2], u[1::2]
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * npairs)
    z[0::2] = rad * np.cos(2.0 * np.pi * u2)
    z[1::2] = rad * np.sin(2.0 * np.pi * u2)
    return z[:count]


def gen_random_model(kind: str, n: int, scales=(1.0, 1.0, 1.0), seed: int = 0) -> ModelFile:
    """Model with independent zero-mean Gaussian entries of the given scales.

    Entries are drawn in storage order (h, then w, then v), always the full
    count, so models with the same seed differ only by the scales.
    """
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
    sh, sw, sv = (float(x) for x in scales)
    if min(sh, sw, sv) < 0 or not all(math.isfinite(x) for x in (sh, sw, sv)):
        raise DomainError(f"scales must be finite and >= 0, got {scales}")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    zeros = (CbmParams if kind == "classical" else QbmParams).zeros(n)
    sizes = [zeros.h.size, zeros.w.size, zeros.v.size]
    z = gaussian_stream(int(seed), sum(sizes))
    h = (sh * z[: sizes[0]]).reshape(zeros.h.shape)
    w = (sw * z[sizes[0] : sizes[0] + sizes[1]]).reshape(zeros.w.shape)
    v = (sv * z[sizes[0] + sizes[1] :]).reshape(zeros.v.shape)
    params = zeros.replace(h=h + 0.0, w=w + 0.0, v=v + 0.0)
    meta = {
        "seed": str(int(seed)),
        "scale_h": _fmt(sh),
        "scale_w": _fmt(sw),
        "scale_v": _fmt(sv),
    }
    return ModelFile(kind, zeros.n, params, meta)
