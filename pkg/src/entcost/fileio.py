"""Text-based channel and simulation-plan files.

Channels are stored as JSON with explicit ``[re, im]`` pairs, row-major, with
dimensions listed outermost first; exactly one of ``choi`` / ``kraus`` must be
present.  Floats round-trip exactly, so writing and re-reading a channel
reproduces the Choi matrix bit for bit.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import tensorcore as tc
from .tensorcore import ChoiChannel, DensityMatrix, DimSpec


class ChannelFileError(ValueError):
    """Malformed channel or plan file."""


def _labels_for(count: int, suffix: str = "") -> list[str]:
    if count == 2:
        base = ["A", "B"]
    elif count == 4:
        base = ["A", "Ap", "B", "Bp"]
    else:
        base = [f"s{i}" for i in range(count)]
    return [l + suffix for l in base]


def _dims_from(entry, suffix: str = "") -> DimSpec:
    if not isinstance(entry, list) or not entry or not all(
            isinstance(d, int) and d >= 1 for d in entry):
        raise ChannelFileError(f"dims must be a list of positive integers, got {entry!r}")
    return DimSpec.of(*zip(_labels_for(len(entry), suffix), entry))


def _matrix_to_rows(mat: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in mat]


def _rows_to_matrix(rows, what: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ChannelFileError(f"{what}: expected a list of rows")
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ChannelFileError(f"{what}: rows must hold [re, im] pairs ({exc})")


def channel_to_dict(ch: ChoiChannel, name: str = "", description: str = "") -> dict:
    return {
        "name": name,
        "description": description,
        "in_dims": list(ch.in_dims.dims),
        "out_dims": list(ch.out_dims.dims),
        "choi": {"rows": _matrix_to_rows(ch.choi.mat)},
    }


def channel_from_dict(data: dict) -> tuple[ChoiChannel, dict]:
    if not isinstance(data, dict):
        raise ChannelFileError("channel file must hold a JSON object")
    for key in ("in_dims", "out_dims"):
        if key not in data:
            raise ChannelFileError(f"missing field {key!r}")
    has_choi, has_kraus = "choi" in data, "kraus" in data
    if has_choi == has_kraus:
        raise ChannelFileError("exactly one of 'choi' or 'kraus' must be present")
    in_dims = _dims_from(data["in_dims"])
    out_dims = _dims_from(data["out_dims"])  # joint_dims disambiguates clashes
    meta = {"name": data.get("name", ""), "description": data.get("description", "")}

    try:
        if has_choi:
            rows = _rows_to_matrix(data["choi"].get("rows"), "choi")
            d = in_dims.total_dim * out_dims.total_dim
            if rows.shape != (d, d):
                raise ChannelFileError(f"choi must be {d}x{d}, got {rows.shape}")
            joint = tc.joint_dims(in_dims, out_dims)
            ch = ChoiChannel(in_dims, out_dims, DensityMatrix(joint, rows))
        else:
            ops = data["kraus"].get("operators")
            if not isinstance(ops, list) or not ops:
                raise ChannelFileError("kraus: expected a list of operators")
            mats = [_rows_to_matrix(op.get("rows"), f"kraus[{i}]")
                    for i, op in enumerate(ops)]
            ch = tc.choi_from_kraus(mats, in_dims, out_dims)
    except ChannelFileError:
        raise
    except (ValueError, tc.DimensionError) as exc:
        raise ChannelFileError(f"invalid channel: {exc}")
    return ch, meta


def write_channel(path, ch: ChoiChannel, name: str = "", description: str = ""):
    with open(path, "w") as fh:
        json.dump(channel_to_dict(ch, name, description), fh, indent=1)
        fh.write("\n")


def read_channel(path) -> tuple[ChoiChannel, dict]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ChannelFileError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path} is not valid JSON: {exc}")
    return channel_from_dict(data)


def plan_to_dict(plan) -> dict:
    diag = plan.fsepp_diagnostics
    return {
        "method": plan.method,
        "k": plan.k,
        "ebits": plan.ebits,
        "achieved_error": plan.achieved_error,
        "fsepp_diagnostics": None if diag is None else {
            "samples": diag.samples, "seed": diag.seed, "tol": diag.tol,
            "worst_violation": diag.worst_violation,
            "result": "PASS(sampled)" if diag.passed else "FAIL",
        },
        "certificates": _jsonable(plan.certificates),
        "simulator": channel_to_dict(plan.m, name=f"{plan.method}-simulator"),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _matrix_to_rows(obj.reshape(len(obj), -1) if obj.ndim == 1 else obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_plan(path, plan):
    with open(path, "w") as fh:
        json.dump(plan_to_dict(plan), fh, indent=1)
        fh.write("\n")
