"""Portable array files: one JSON header line, then raw little-endian
float64 payload in C order.  Write -> read roundtrips are bit-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .geometry import detector_from_dict
from .grids import ConeDataGrid, VolumeGrid


def _write(path, header: dict, values: np.ndarray):
    header = dict(header, dtype="f64", order="C",
                  dims=list(values.shape))
    payload = np.ascontiguousarray(values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def _read(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    dims = tuple(header["dims"])
    expected = int(np.prod(dims)) * 8
    if len(payload) != expected:
        raise ValueError(f"payload length {len(payload)} != {expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(dims).copy()
    return header, values


def write_volume(path, vol: VolumeGrid):
    _write(path, {"kind": "volume", "origin": vol.origin.tolist(),
                  "spacing": vol.spacing}, vol.values)


def write_conedata(path, g: ConeDataGrid):
    header = {"kind": "conedata",
              "axes": [a.tolist() for a in g.axes],
              "axis_weights": [w.tolist() for w in g.axis_weights],
              "detector": g.detector.to_dict()}
    if g.phi0 is not None:
        header["phi0"] = g.phi0
    _write(path, header, g.values)


def read(path):
    """Read either kind; returns a VolumeGrid or a ConeDataGrid."""
    header, values = _read(path)
    kind = header.get("kind")
    if kind == "volume":
        return VolumeGrid(np.asarray(header["origin"]),
                          float(header["spacing"]), values)
    if kind == "conedata":
        detector = detector_from_dict(header["detector"])
        axes = tuple(np.asarray(a) for a in header["axes"])
        weights = tuple(np.asarray(w) for w in header["axis_weights"])
        return ConeDataGrid(detector, axes, weights, values,
                            phi0=header.get("phi0"))
    raise ValueError(f"unknown array kind {kind!r}")


def write(path, obj):
    if isinstance(obj, VolumeGrid):
        write_volume(path, obj)
    elif isinstance(obj, ConeDataGrid):
        write_conedata(path, obj)
    else:
        raise TypeError("expected VolumeGrid or ConeDataGrid")
