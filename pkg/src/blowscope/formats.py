"""On-disk formats: binary states, CSV exports, JSON reports.

Binary state layout (little endian), shared by fields and spectra:

    bytes 0:4    magic  b"BXF1"
    byte  4      kind   0 = field samples, 1 = spectrum coefficients
    byte  5      d      spatial dimension
    bytes 6:8    reserved (zero)
    bytes 8:12   n      points per axis (uint32)
    bytes 12:20  half_width (float64)
    bytes 20:24  convention tag b"2PI\\0"
    bytes 24:    n^d complex values as interleaved (re, im) float64

Values are in lexicographic (C) order.  Field samples run over x from
-half_width upward; spectrum coefficients are written in ascending
frequency order per axis (fftshifted relative to the in-memory layout).

CSV exports carry one row per entry: flat index, coordinates, re, im.
Diagnostics CSV columns: t, mass, density, F, sup_norm, tail_fraction and
one (scale, max_mass, corner...) triple per attached scan.  Reports are
JSON with sorted keys and no timestamps so re-analysis is byte-stable.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import TimeSeries
from .spectral import Field, Grid, Spectrum

_MAGIC = b"BXF1"
_TAG = b"2PI\x00"
_HEADER = struct.Struct("<4sBBHId4s")


def _write_state(path, grid: Grid, data: np.ndarray, kind: int):
    header = _HEADER.pack(_MAGIC, kind, grid.d, 0, grid.n, grid.half_width, _TAG)
    flat = np.ascontiguousarray(data, dtype=np.complex128).ravel()
    buf = np.empty(2 * flat.size, dtype="<f8")
    buf[0::2] = flat.real
    buf[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(buf.tobytes())


def _read_state(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, kind, d, _, n, half_width, tag = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if tag != _TAG:
        raise ValueError(f"{path}: unknown convention tag {tag!r}")
    grid = Grid(int(d), int(n), float(half_width))
    count = n ** d
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * count:
        raise ValueError(f"{path}: expected {2 * count} floats, found {body.size}")
    data = (body[0::2] + 1j * body[1::2]).reshape(grid.shape)
    return grid, data, kind


def write_field(path, f: Field):
    _write_state(path, f.grid, f.values, 0)


def read_field(path) -> Field:
    grid, data, kind = _read_state(path)
    if kind != 0:
        raise ValueError(f"{path}: contains a spectrum, not a field")
    return Field(grid, data)


def write_spectrum(path, s: Spectrum):
    shifted = np.fft.fftshift(s.coeffs)
    _write_state(path, s.grid, shifted, 1)


def read_spectrum(path) -> Spectrum:
    grid, data, kind = _read_state(path)
    if kind != 1:
        raise ValueError(f"{path}: contains a field, not a spectrum")
    return Spectrum(grid, np.fft.ifftshift(data))


def field_to_csv(path, f: Field):
    g = f.grid
    ax = g.axis()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        coords = [f"x{i}" for i in range(g.d)]
        w.writerow(["index", *coords, "re", "im"])
        flat = f.values.ravel()
        for idx in range(flat.size):
            unr = np.unravel_index(idx, g.shape)
            w.writerow([idx, *(repr(float(ax[j])) for j in unr),
                        repr(float(flat[idx].real)), repr(float(flat[idx].imag))])


def spectrum_to_csv(path, s: Spectrum):
    g = s.grid
    xi = np.fft.fftshift(g.xi_axis())
    shifted = np.fft.fftshift(s.coeffs)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        coords = [f"xi{i}" for i in range(g.d)]
        w.writerow(["index", *coords, "re", "im"])
        flat = shifted.ravel()
        for idx in range(flat.size):
            unr = np.unravel_index(idx, g.shape)
            w.writerow([idx, *(repr(float(xi[j])) for j in unr),
                        repr(float(flat[idx].real)), repr(float(flat[idx].imag))])


_DIAG_BASE = ["t", "mass", "density", "F", "sup_norm", "tail_fraction"]


def write_diagnostics_csv(path, ts: TimeSeries):
    n_scans = 0
    scan_rows = None
    if ts.scans:
        if len(ts.scans) != ts.t.size:
            raise ValueError("scan column length does not match the time axis")
        n_scans = max(len(row) for row in ts.scans)
        scan_rows = ts.scans
    header = list(_DIAG_BASE)
    d = ts.d
    for i in range(n_scans):
        header += [f"scan{i}_scale", f"scan{i}_max_mass"] + [f"scan{i}_corner{j}" for j in range(d)]
    F = ts.F if ts.F is not None else np.full(ts.t.size, np.nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(ts.t.size):
            row = [repr(float(ts.t[i])), repr(float(ts.mass[i])), repr(float(ts.density[i])),
                   repr(float(F[i])), repr(float(ts.sup_norm[i])), repr(float(ts.tail_fraction[i]))]
            if scan_rows is not None:
                for scan in scan_rows[i]:
                    row += [repr(float(scan.side)), repr(float(scan.max_mass))] + [str(c) for c in scan.corner]
                row += [""] * ((n_scans - len(scan_rows[i])) * (2 + d))
            w.writerow(row)


def read_diagnostics_csv(path, d: int) -> TimeSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[: len(_DIAG_BASE)] != _DIAG_BASE:
        raise ValueError(f"{path}: unexpected diagnostics columns {header[:6]}")
    arr = np.array([[float(v) for v in row[: len(_DIAG_BASE)]] for row in body])
    F = arr[:, 3]
    return TimeSeries(
        d=d, t=arr[:, 0], mass=arr[:, 1], density=arr[:, 2],
        sup_norm=arr[:, 4], tail_fraction=arr[:, 5],
        F=None if np.all(np.isnan(F)) else F,
    )


def dump_json(path, payload: dict):
    """Deterministic JSON: sorted keys, LF endings, trailing newline."""
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return None
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj
