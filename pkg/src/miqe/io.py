"""JSON representation of excitation matrices, unitaries, states and density matrices.

Complex numbers are ``[re, im]`` pairs and occupation vectors are integer
arrays; see ``docs/schema.md``. Floats are written with ``repr`` precision,
so a write/read cycle is bit-exact.
"""

import json
import numbers

import numpy as np

from ._validation import check_excitation_matrix, check_unitary
from .fock import DensityMatrix, FockState


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(obj):
    if isinstance(obj, numbers.Real):
        return complex(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(isinstance(v, numbers.Real) for v in obj):
        return complex(obj[0], obj[1])
    raise ValueError(f"cannot read a complex number from {obj!r}")


def encode_matrix(mat):
    mat = np.asarray(mat, dtype=complex)
    return [[encode_complex(z) for z in row] for row in mat]


def decode_matrix(obj):
    if not isinstance(obj, list) or not obj or not all(isinstance(row, list) for row in obj):
        raise ValueError("matrix must be a nonempty list of rows")
    rows = [[decode_complex(z) for z in row] for row in obj]
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(rows, dtype=complex)


def gamma_to_json(gamma):
    return {"type": "excitation_matrix", "entries": encode_matrix(check_excitation_matrix(gamma))}


def gamma_from_json(obj):
    """Excitation matrix from a typed object or a bare nested list."""
    entries = obj["entries"] if isinstance(obj, dict) else obj
    return check_excitation_matrix(decode_matrix(entries))


def unitary_to_json(u):
    return {"type": "mode_unitary", "entries": encode_matrix(check_unitary(u))}


def unitary_from_json(obj):
    entries = obj["entries"] if isinstance(obj, dict) else obj
    return check_unitary(decode_matrix(entries))


def state_to_json(state):
    return {
        "type": "fock_state",
        "mode_count": state.mode_count,
        "photon_number": state.photon_number,
        "amplitudes": [
            {"occupation": list(occ), "amplitude": encode_complex(amp)} for occ, amp in state.amplitudes.items()
        ],
    }


def state_from_json(obj):
    amps = {tuple(entry["occupation"]): decode_complex(entry["amplitude"]) for entry in obj["amplitudes"]}
    return FockState(int(obj["mode_count"]), int(obj["photon_number"]), amps)


def density_to_json(rho):
    return {
        "type": "density_matrix",
        "mode_count": rho.mode_count,
        "photon_number": rho.photon_number,
        "basis": [list(occ) for occ in rho.basis],
        "matrix": encode_matrix(rho.matrix),
    }


def density_from_json(obj):
    m, n = int(obj["mode_count"]), int(obj["photon_number"])
    matrix = decode_matrix(obj["matrix"])
    if "basis" in obj:
        basis = [tuple(b) for b in obj["basis"]]
        expected = list(DensityMatrix.maximally_mixed(m, n).basis)
        if basis != expected:
            raise ValueError("density matrix basis is not in canonical order")
    return DensityMatrix(m, n, matrix)


_READERS = {
    "excitation_matrix": gamma_from_json,
    "mode_unitary": unitary_from_json,
    "fock_state": state_from_json,
    "density_matrix": density_from_json,
}


def from_json(obj):
    """Decode any typed object; bare lists are read as excitation matrices."""
    if isinstance(obj, list):
        return gamma_from_json(obj)
    kind = obj.get("type")
    if kind not in _READERS:
        raise ValueError(f"unknown object type {kind!r}")
    return _READERS[kind](obj)


def to_json(value):
    if isinstance(value, FockState):
        return state_to_json(value)
    if isinstance(value, DensityMatrix):
        return density_to_json(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"no JSON encoding for {type(value).__name__}")


def load(path, expect=None):
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if expect is not None:
        kind = "excitation_matrix" if isinstance(obj, list) else obj.get("type")
        if kind != expect:
            raise ValueError(f"{path}: expected {expect}, found {kind}")
    return from_json(obj)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")
