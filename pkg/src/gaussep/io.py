"""File formats: state files, state specs and reference parameters.

State files are JSON objects {"n_modes": n, "means": [...], "cov": [[...]]}
with the covariance matrix stored row-major in full (not triangular).

A state spec selects a constructor:
    {"kind": "vacuum" | "thermal" | "dst" | "tmsv" | "simon" | "random",
     "params": {...}}
"""

from __future__ import annotations

import json

import numpy as np

from .core import GaussianState, tensor_product
from .exceptions import InvalidStateError
from .states import (
    ReferenceStateParams,
    displaced_squeezed_thermal,
    random_state,
    simon_form,
    thermal,
    two_mode_squeezed_vacuum,
    vacuum,
)

STATE_KINDS = ("vacuum", "thermal", "dst", "tmsv", "simon", "random")


def save_state(state: GaussianState, path) -> None:
    payload = {
        "n_modes": state.n_modes,
        "means": state.means.tolist(),
        "cov": state.cov.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state(path) -> GaussianState:
    with open(path) as fh:
        payload = json.load(fh)
    return state_from_payload(payload)


def state_from_payload(payload: dict) -> GaussianState:
    if not isinstance(payload, dict):
        raise InvalidStateError("state file must contain a JSON object")
    missing = {"n_modes", "means", "cov"} - set(payload)
    if missing:
        raise InvalidStateError(f"state file is missing keys {sorted(missing)}")
    n_modes = payload["n_modes"]
    means = np.asarray(payload["means"], dtype=float)
    cov = np.asarray(payload["cov"], dtype=float)
    if means.shape != (2 * n_modes,) or cov.shape != (2 * n_modes, 2 * n_modes):
        raise InvalidStateError(
            f"inconsistent shapes for n_modes={n_modes}: "
            f"means {means.shape}, cov {cov.shape}"
        )
    return GaussianState(means=means, cov=cov)


def reference_params_from_dict(params: dict) -> ReferenceStateParams:
    allowed = {"n_bar", "d", "beta", "theta", "gamma"}
    unknown = set(params) - allowed
    if unknown:
        raise InvalidStateError(f"unknown reference parameters {sorted(unknown)}")
    return ReferenceStateParams(**params)


def _check_params(kind: str, params: dict, allowed: set) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise InvalidStateError(
            f"unknown parameters {sorted(unknown)} for state kind {kind!r}"
        )


def state_from_spec(spec: dict) -> GaussianState:
    """Build a state from a spec dictionary; unknown keys are rejected."""
    if not isinstance(spec, dict) or set(spec) - {"kind", "params"}:
        raise InvalidStateError(
            "state spec must be {'kind': ..., 'params': {...}}"
        )
    kind = spec.get("kind")
    params = spec.get("params", {}) or {}
    if kind not in STATE_KINDS:
        raise InvalidStateError(f"unknown state kind {kind!r}; expected {STATE_KINDS}")
    if kind == "vacuum":
        _check_params(kind, params, {"n_modes"})
        return vacuum(int(params.get("n_modes", 2)))
    if kind == "thermal":
        _check_params(kind, params, {"n_bar", "n_bars"})
        if "n_bars" in params:
            bars = list(params["n_bars"])
            state = thermal(bars[0])
            for nb in bars[1:]:
                state = tensor_product(state, thermal(nb))
            return state
        return thermal(float(params.get("n_bar", 0.0)))
    if kind == "dst":
        _check_params(kind, params, {"n_bar", "d", "beta", "theta", "gamma"})
        return displaced_squeezed_thermal(ReferenceStateParams(**params))
    if kind == "tmsv":
        _check_params(kind, params, {"r"})
        return two_mode_squeezed_vacuum(float(params.get("r", 0.5)))
    if kind == "simon":
        _check_params(kind, params, {"lambda", "mu", "s", "t"})
        return simon_form(
            float(params["lambda"]), float(params["mu"]),
            float(params["s"]), float(params["t"]),
        )
    _check_params(kind, params, {"seed", "max_squeeze", "max_thermal"})
    return random_state(
        int(params.get("seed", 0)),
        max_squeeze=float(params.get("max_squeeze", 1.0)),
        max_thermal=float(params.get("max_thermal", 2.0)),
    )
