"""Plain-text records for lattices, frequency sets, subsamples and approximants.

Every format starts with a header line of whitespace-separated fields
followed by one record per line. Floats are written with 17 significant
digits so that a round trip is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .freqsets import FrequencySet
from .lattice import Lattice
from .sampling import SubsampleIndex, SubsamplePlan


def _f(x: float) -> str:
    return format(float(x), ".17g")


def _lines(source):
    text = Path(source).read_text() if isinstance(source, Path) else str(source)
    return [ln for ln in text.splitlines() if ln.strip()]


def _write(text: str, path):
    if path is not None:
        Path(path).write_text(text)
    return text


def dump_lattice(lat: Lattice, path=None) -> str:
    """``"n d"`` then the components of ``z`` on one line."""
    return _write(f"{lat.n} {lat.d}\n" + " ".join(str(c) for c in lat.z) + "\n", path)


def load_lattice(source) -> Lattice:
    lines = _lines(source)
    n, d = (int(v) for v in lines[0].split())
    z = tuple(int(v) for v in lines[1].split()) if d else ()
    if len(z) != d:
        raise ValueError(f"expected {d} components, got {len(z)}")
    return Lattice(n, z)


def dump_frequency_set(B: FrequencySet, path=None) -> str:
    """``"count d M"`` then one index per line, residue appended if known."""
    out = [f"{len(B)} {B.d} {_f(B.M)}"]
    for i, h in enumerate(B.indices):
        row = " ".join(str(int(v)) for v in h)
        if B.residues is not None:
            row += f" {int(B.residues[i])}"
        out.append(row)
    return _write("\n".join(out) + "\n", path)


def load_frequency_set(source) -> FrequencySet:
    lines = _lines(source)
    head = lines[0].split()
    count, d, M = int(head[0]), int(head[1]), float(head[2])
    rows = [[int(v) for v in ln.split()] for ln in lines[1 : 1 + count]]
    if len(rows) != count:
        raise ValueError(f"expected {count} indices, got {len(rows)}")
    width = len(rows[0]) if rows else d
    arr = np.array(rows, dtype=np.int64).reshape(count, width)
    if arr.shape[1] not in (d, d + 1):
        raise ValueError("malformed index line")
    res = arr[:, d].copy() if arr.shape[1] == d + 1 else None
    return FrequencySet(arr[:, :d].copy(), M, res)


def dump_subsample(J: SubsampleIndex, path=None) -> str:
    """``"m n seed"`` then one entry per line."""
    body = "\n".join(str(int(e)) for e in J.entries)
    return _write(f"{len(J)} {J.n} {J.plan.seed}\n{body}\n", path)


def load_subsample(source, plan: SubsamplePlan = None) -> SubsampleIndex:
    lines = _lines(source)
    m, n, seed = (int(v) for v in lines[0].split())
    entries = np.array([int(v) for v in lines[1 : 1 + m]], dtype=np.int64)
    if len(entries) != m:
        raise ValueError(f"expected {m} entries, got {len(entries)}")
    plan = plan or SubsamplePlan(mode="practice", seed=seed, size_override=m)
    return SubsampleIndex(entries, n, plan)


def dump_approximant(approx, path=None) -> str:
    """Header ``"fourier n d M count"`` or ``"kernel n d count"``, then lines
    ``"h_1 .. h_d re im"`` or ``"k re im"``."""
    from .approximation import FourierApproximant

    lat = approx.lat
    coeffs = np.asarray(approx.coeffs, dtype=complex)
    if isinstance(approx, FourierApproximant):
        out = [f"fourier {lat.n} {lat.d} {_f(approx.B.M)} {len(coeffs)}",
               " ".join(str(c) for c in lat.z)]
        for h, a in zip(approx.B.indices, coeffs):
            out.append(" ".join(str(int(v)) for v in h) + f" {_f(a.real)} {_f(a.imag)}")
    else:
        out = [f"kernel {lat.n} {lat.d} {len(coeffs)}", " ".join(str(c) for c in lat.z)]
        for k, a in zip(approx.rows, coeffs):
            out.append(f"{int(k)} {_f(a.real)} {_f(a.imag)}")
    return _write("\n".join(out) + "\n", path)


def load_approximant(source, space=None):
    """Inverse of :func:`dump_approximant`; kernel records need ``space``."""
    from .approximation import LEAST_SQUARES, FourierApproximant, KernelApproximant

    lines = _lines(source)
    head = lines[0].split()
    kind, n, d = head[0], int(head[1]), int(head[2])
    lat = Lattice(n, tuple(int(v) for v in lines[1].split()))
    if kind == "fourier":
        M, count = float(head[3]), int(head[4])
        rows = [ln.split() for ln in lines[2 : 2 + count]]
        H = np.array([[int(v) for v in r[:d]] for r in rows], dtype=np.int64).reshape(count, d)
        coeffs = np.array([float(r[d]) + 1j * float(r[d + 1]) for r in rows])
        return FourierApproximant(FrequencySet(H, M), coeffs, LEAST_SQUARES, lat)
    if kind == "kernel":
        if space is None:
            raise ValueError("kernel approximants need the space to be loaded")
        count = int(head[3])
        rows = [ln.split() for ln in lines[2 : 2 + count]]
        k = np.array([int(r[0]) for r in rows], dtype=np.int64)
        coeffs = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
        return KernelApproximant(space, lat, k, coeffs)
    raise ValueError(f"unknown approximant kind {kind!r}")
