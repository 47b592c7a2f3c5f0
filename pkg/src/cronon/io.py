"""JSON file formats for spectra and states.

Spectrum file:  {"hbar": <real>, "energies": [<real>, ...]}
State file:     {"dim": <int>, "re": [[<real>...]...], "im": [[<real>...]...]}

Both matrices in the state file are dim x dim, row-major.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import DensityMatrix, EnergySpectrum
from .errors import InvalidInputError

__all__ = [
    "load_spectrum",
    "save_spectrum",
    "load_state",
    "save_state",
]


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InvalidInputError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON in {path}: {exc}")
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: expected a JSON object")
    return doc


def load_spectrum(path) -> EnergySpectrum:
    doc = _load_json(path)
    try:
        return EnergySpectrum(energies=doc["energies"], hbar=float(doc.get("hbar", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: bad spectrum file: {exc}")


def save_spectrum(spectrum: EnergySpectrum, path) -> None:
    doc = {"hbar": spectrum.hbar, "energies": list(map(float, spectrum.energies))}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_state(path) -> DensityMatrix:
    doc = _load_json(path)
    try:
        dim = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{path}: bad state file: {exc}")
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise InvalidInputError(
            f"{path}: re/im must both be {dim}x{dim}, got {re.shape} and {im.shape}"
        )
    return DensityMatrix(re + 1j * im)


def save_state(rho: DensityMatrix, path) -> None:
    doc = {
        "dim": rho.dim,
        "re": rho.entries.real.tolist(),
        "im": rho.entries.imag.tolist(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
