"""JSON and CSV formats.

Complex numbers are stored as ``[re, im]`` pairs, matrices row-major. Every
top-level document carries ``schema_version``.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .lhv import BellCertificate, FThreshold, JointDistribution
from .measurements import ProbabilityTable, SettingsQuad
from .states import DensityOperator, PureState, StateAngles

SCHEMA_VERSION = 1
CSV_COLUMNS = ("index", "feasible", "value")


class FormatError(ValueError):
    """Input document does not match the expected schema."""


def complex_to_pairs(values):
    arr = np.asarray(values, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def pairs_to_complex(pairs, where="value"):
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise FormatError(f"{where}: expected [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def pure_state_to_json(psi):
    return complex_to_pairs(psi.amplitudes)


def pure_state_from_json(data, where="psi"):
    amps = pairs_to_complex(data, where)
    if amps.shape != (9,):
        raise FormatError(f"{where}: a pure state needs 9 amplitudes")
    return PureState(amps)


def density_to_json(rho):
    return complex_to_pairs(rho.matrix)


def density_from_json(data, where="rho"):
    m = pairs_to_complex(data, where)
    if m.shape != (9, 9):
        raise FormatError(f"{where}: a density operator is 9x9")
    return DensityOperator(m)


def settings_to_json(settings):
    return {
        "schema_version": SCHEMA_VERSION,
        "a1": list(settings.a1.phi),
        "a2": list(settings.a2.phi),
        "b1": list(settings.b1.phi),
        "b2": list(settings.b2.phi),
    }


def settings_from_json(data, where="settings"):
    try:
        rows = [data[k] for k in ("a1", "a2", "b1", "b2")]
        return SettingsQuad.from_array(np.asarray(rows, dtype=float))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{where}: expected keys a1, a2, b1, b2 with 8 angles each") from exc
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from exc


STATE_ANGLE_KEYS = ("psi", "theta", "phi", "chi1", "chi2", "chi3")


def state_angles_to_json(angles):
    out = {"schema_version": SCHEMA_VERSION}
    out.update({k: float(v) for k, v in zip(STATE_ANGLE_KEYS, angles.as_array())})
    return out


def state_angles_from_json(data, where="state_angles"):
    try:
        return StateAngles(*(float(data[k]) for k in STATE_ANGLE_KEYS))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: expected keys {', '.join(STATE_ANGLE_KEYS)}") from exc


def table_to_json(table):
    return table.rows().tolist()


def table_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.shape != (4, 9):
        raise FormatError("probability table: expected a 4x9 array")
    return ProbabilityTable(arr)


def distribution_to_json(dist):
    return dist.flat().tolist()


def certificate_to_json(cert, table=None):
    excess, margin = cert.audit()
    out = {
        "schema_version": SCHEMA_VERSION,
        "coefficients": cert.coefficients.reshape(4, 9).tolist(),
        "lhv_bound": cert.lhv_bound,
        "quantum_value": cert.quantum_value,
        "margin": margin,
        "strategy_audit": {
            "strategy_values": cert.strategy_values().tolist(),
            "max_excess_over_bound": excess,
        },
    }
    if table is not None:
        out["table"] = table_to_json(table)
    return out


def certificate_from_json(data):
    return BellCertificate(
        np.asarray(data["coefficients"], dtype=float), float(data["lhv_bound"]), float(data["quantum_value"])
    )


def threshold_to_json(threshold):
    return {
        "schema_version": SCHEMA_VERSION,
        "value": threshold.value,
        "witness_distribution": distribution_to_json(threshold.witness_distribution),
        "settings": settings_to_json(threshold.settings),
        "state_angles": state_angles_to_json(threshold.state_angles),
    }


def threshold_from_json(data):
    return FThreshold(
        float(data["value"]),
        JointDistribution(np.asarray(data["witness_distribution"], dtype=float)),
        settings_from_json(data["settings"]),
        state_angles_from_json(data["state_angles"]),
    )


def campaign_report_to_json(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "trials_run": report.trials_run,
        "feasible_count": report.feasible_count,
        "infeasible_count": len(report.infeasible_records),
        "error_count": len(report.error_records),
        "wall_time": report.wall_time,
        "config": report.config,
        "infeasible_records": [
            {
                "index": rec.index,
                "settings": settings_to_json(rec.settings),
                "certificate": certificate_to_json(rec.certificate),
            }
            for rec in report.infeasible_records
        ],
        "error_records": [{"index": rec.index, "error": rec.error} for rec in report.error_records],
    }


def minimization_to_json(result):
    return {
        "schema_version": SCHEMA_VERSION,
        "best_F": result.best_F,
        "best_settings": settings_to_json(result.best_settings),
        "best_state_angles": state_angles_to_json(result.best_state_angles),
        "best_state_vector": pure_state_to_json(result.best_state_vector),
        "per_restart_F": list(result.per_restart_F),
        "evaluations": result.evaluations,
        "restarts": [
            {
                "restart": r.restart,
                "start_F": r.start_F,
                "best_F": r.best_F,
                "evaluations": r.evaluations,
                "iterations": r.iterations,
                "stop_reason": r.reason,
            }
            for r in result.restarts
        ],
        "config": result.config,
    }


def write_json(path, document):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def read_json(path):
    """Parse a JSON file, raising FormatError that names the file, line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def write_trial_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in rows:
            writer.writerow([rec.index, int(rec.feasible), repr(float(rec.value))])
