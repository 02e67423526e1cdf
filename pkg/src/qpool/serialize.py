"""File formats: scenario inputs and machine-readable reports.

All files are JSON with a mandatory "format_version": 1. Complex numbers
are two-element [re, im] arrays; matrices are row-major nested lists of
them. Floats go through json's repr round-trip, so machine reports keep
full binary64 precision and parse(emit(report)) reproduces the report
exactly. Writes are atomic (temp file in the target directory, then
rename). Parse errors name the offending field by its path.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any

import numpy as np

from . import __version__
from .errors import FormatError
from .measure import Povm
from .pooling import PooledState
from .scenario import (
    OutcomeRecord,
    PoolingReport,
    Scenario,
    SweepConfig,
    SweepReport,
    SweepTrial,
)
from .states import (
    DensityOperator,
    MultipartiteState,
    choi_state,
    ghz_state,
    orthogonal_product_mixture,
    pure_state,
    state_224,
)

FORMAT_VERSION = 1


# ---------------------------------------------------------------- encoding

def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m: np.ndarray) -> list:
    return [[encode_complex(x) for x in row] for row in np.asarray(m)]


def encode_vector(v: np.ndarray) -> list:
    return [encode_complex(x) for x in np.asarray(v).reshape(-1)]


# ---------------------------------------------------------------- decoding

def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _as_dict(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise FormatError(f"{path or 'document'}: expected an object")
    return obj


def _as_list(obj, path: str) -> list:
    if not isinstance(obj, list):
        raise FormatError(f"{path}: expected an array")
    return obj


def _get(d: dict, key: str, path: str):
    if key not in d:
        raise FormatError(f"{_join(path, key)}: missing required field")
    return d[key]


def _as_number(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise FormatError(f"{path}: expected a number")
    return float(obj)


def _as_int(obj, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise FormatError(f"{path}: expected an integer")
    return obj


def _as_bool(obj, path: str) -> bool:
    if not isinstance(obj, bool):
        raise FormatError(f"{path}: expected true or false")
    return obj


def _as_str(obj, path: str) -> str:
    if not isinstance(obj, str):
        raise FormatError(f"{path}: expected a string")
    return obj


def decode_complex(obj, path: str) -> complex:
    pair = _as_list(obj, path)
    if len(pair) != 2:
        raise FormatError(f"{path}: expected an [re, im] pair")
    return complex(_as_number(pair[0], _join(path, 0)), _as_number(pair[1], _join(path, 1)))


def decode_vector(obj, path: str) -> np.ndarray:
    items = _as_list(obj, path)
    if not items:
        raise FormatError(f"{path}: vector must not be empty")
    return np.array(
        [decode_complex(x, _join(path, i)) for i, x in enumerate(items)],
        dtype=np.complex128,
    )


def decode_matrix(obj, path: str) -> np.ndarray:
    rows = _as_list(obj, path)
    if not rows:
        raise FormatError(f"{path}: matrix must not be empty")
    decoded = []
    width = None
    for i, row in enumerate(rows):
        r = decode_vector(row, _join(path, i))
        if width is None:
            width = r.size
        elif r.size != width:
            raise FormatError(f"{_join(path, i)}: row length {r.size} != {width}")
        decoded.append(r)
    return np.array(decoded, dtype=np.complex128)


def _check_version(d: dict, path: str = "") -> None:
    v = _as_int(_get(d, "format_version", path), _join(path, "format_version"))
    if v != FORMAT_VERSION:
        raise FormatError(
            f"{_join(path, 'format_version')}: unsupported version {v} "
            f"(this tool reads version {FORMAT_VERSION})"
        )


def _int_list(obj, path: str) -> list[int]:
    return [_as_int(x, _join(path, i)) for i, x in enumerate(_as_list(obj, path))]


def _matrix_list(obj, path: str) -> list[np.ndarray]:
    return [decode_matrix(m, _join(path, i)) for i, m in enumerate(_as_list(obj, path))]


# ---------------------------------------------------------------- file IO

def write_json(path: str, data: dict) -> None:
    """Atomic JSON write: temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str) -> dict:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return _as_dict(data, "document")


# ---------------------------------------------------------------- scenario

_STATE_CLASS_BY_KIND = {
    "ghz": "other",
    "state224": "i",
    "pure": "other",
    "density": "other",
    "choi": "i",
    "orthogonal_mixture": "ii",
}


def _state_from_dict(d: dict, path: str) -> tuple[MultipartiteState, str]:
    d = _as_dict(d, path)
    kind = _as_str(_get(d, "kind", path), _join(path, "kind"))
    if kind not in _STATE_CLASS_BY_KIND:
        raise FormatError(
            f"{_join(path, 'kind')}: unknown state kind {kind!r}; expected one of "
            + ", ".join(sorted(_STATE_CLASS_BY_KIND))
        )
    if kind == "ghz":
        state = ghz_state()
    elif kind == "state224":
        state = state_224()
    elif kind == "pure":
        vec = decode_vector(_get(d, "vector", path), _join(path, "vector"))
        dims = _int_list(_get(d, "dims", path), _join(path, "dims"))
        state = pure_state(vec, dims)
    elif kind == "density":
        m = decode_matrix(_get(d, "matrix", path), _join(path, "matrix"))
        dims = _int_list(_get(d, "dims", path), _join(path, "dims"))
        state = MultipartiteState(DensityOperator(m), tuple(dims))
    elif kind == "choi":
        rho = decode_matrix(_get(d, "rho", path), _join(path, "rho"))
        u = decode_matrix(_get(d, "isometry", path), _join(path, "isometry"))
        dims = _int_list(_get(d, "party_dims", path), _join(path, "party_dims"))
        state = choi_state(DensityOperator(rho), tuple(dims), u)
    else:
        weights = [
            _as_number(x, _join(_join(path, "weights"), i))
            for i, x in enumerate(_as_list(_get(d, "weights", path), _join(path, "weights")))
        ]
        state = orthogonal_product_mixture(
            weights,
            _matrix_list(_get(d, "states_a", path), _join(path, "states_a")),
            _matrix_list(_get(d, "states_b", path), _join(path, "states_b")),
            _matrix_list(_get(d, "states_shared", path), _join(path, "states_shared")),
        )
    return state, _STATE_CLASS_BY_KIND[kind]


def scenario_from_dict(d: dict) -> Scenario:
    _check_version(d)
    state, derived_class = _state_from_dict(_get(d, "state", ""), "state")
    povm_objs = []
    povm_list = _as_list(_get(d, "povms", ""), "povms")
    for i, p in enumerate(povm_list):
        p = _as_dict(p, _join("povms", i))
        effects = _matrix_list(_get(p, "effects", _join("povms", i)), _join(_join("povms", i), "effects"))
        povm_objs.append(Povm(tuple(effects)))
    sel = d.get("outcome_selection", "all")
    if sel != "all":
        sel = tuple(_int_list(sel, "outcome_selection"))
    label = _as_str(d.get("label", ""), "label")
    seed = d.get("seed")
    if seed is not None:
        seed = _as_int(seed, "seed")
    state_class = d.get("state_class", derived_class)
    if state_class not in ("i", "ii", "other"):
        raise FormatError(f"state_class: expected 'i', 'ii', or 'other', got {state_class!r}")
    return Scenario(state, tuple(povm_objs), sel, label, seed, state_class)


def load_scenario(path: str) -> Scenario:
    return scenario_from_dict(load_json(path))


def scenario_to_dict(scenario: Scenario) -> dict:
    """Emit a scenario as an explicit-density ScenarioFile document."""
    sel = scenario.outcome_selection
    return {
        "format_version": FORMAT_VERSION,
        "label": scenario.label,
        "seed": scenario.seed,
        "outcome_selection": "all" if sel == "all" else list(sel),
        "state_class": scenario.state_class,
        "state": {
            "kind": "density",
            "dims": [int(x) for x in scenario.state.dims],
            "matrix": encode_matrix(scenario.state.density.matrix),
        },
        "povms": [
            {"effects": [encode_matrix(e) for e in povm.effects]}
            for povm in scenario.povms
        ],
    }


# ------------------------------------------------------------------ reports

def pooling_report_to_dict(report: PoolingReport) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "report_kind": "scenario",
        "tool_version": __version__,
        "label": report.label,
        "dims": [int(x) for x in report.dims],
        "state_class": report.state_class,
        "rank_condition": bool(report.rank_condition),
        "skip_tol": float(report.skip_tol),
        "tol": float(report.tol),
        "probability_total": float(report.probability_total),
        "max_distance": float(report.max_distance),
        "mean_distance": float(report.mean_distance),
        "max_marginal_defect": (
            None if report.max_marginal_defect is None else float(report.max_marginal_defect)
        ),
        "records": [
            {
                "outcomes": [int(a) for a in r.outcomes],
                "probability": float(r.probability),
                "posteriors": [encode_matrix(p.matrix) for p in r.posteriors],
                "joint_posterior": encode_matrix(r.joint_posterior.matrix),
                "pooled": encode_matrix(r.pooled.matrix),
                "hermiticity_defect": float(r.pooled.hermiticity_defect),
                "hermitian": bool(r.pooled.hermitian),
                "distance": float(r.distance),
                "parties_compatible": bool(r.parties_compatible),
                "joint_in_intersection": bool(r.joint_in_intersection),
            }
            for r in report.records
        ],
        "skipped": [
            {"outcomes": [int(a) for a in t], "probability": float(p)}
            for t, p in report.skipped
        ],
    }


def pooling_report_from_dict(d: dict) -> PoolingReport:
    _check_version(d)
    kind = _as_str(_get(d, "report_kind", ""), "report_kind")
    if kind != "scenario":
        raise FormatError(f"report_kind: expected 'scenario', got {kind!r}")
    records = []
    for i, r in enumerate(_as_list(_get(d, "records", ""), "records")):
        p = _join("records", i)
        r = _as_dict(r, p)
        records.append(
            OutcomeRecord(
                outcomes=tuple(_int_list(_get(r, "outcomes", p), _join(p, "outcomes"))),
                probability=_as_number(_get(r, "probability", p), _join(p, "probability")),
                posteriors=tuple(
                    DensityOperator(m)
                    for m in _matrix_list(_get(r, "posteriors", p), _join(p, "posteriors"))
                ),
                joint_posterior=DensityOperator(
                    decode_matrix(_get(r, "joint_posterior", p), _join(p, "joint_posterior"))
                ),
                pooled=PooledState(
                    decode_matrix(_get(r, "pooled", p), _join(p, "pooled")),
                    _as_number(_get(r, "hermiticity_defect", p), _join(p, "hermiticity_defect")),
                    _as_bool(_get(r, "hermitian", p), _join(p, "hermitian")),
                ),
                distance=_as_number(_get(r, "distance", p), _join(p, "distance")),
                parties_compatible=_as_bool(
                    _get(r, "parties_compatible", p), _join(p, "parties_compatible")
                ),
                joint_in_intersection=_as_bool(
                    _get(r, "joint_in_intersection", p), _join(p, "joint_in_intersection")
                ),
            )
        )
    skipped = []
    for i, s in enumerate(_as_list(_get(d, "skipped", ""), "skipped")):
        p = _join("skipped", i)
        s = _as_dict(s, p)
        skipped.append(
            (
                tuple(_int_list(_get(s, "outcomes", p), _join(p, "outcomes"))),
                _as_number(_get(s, "probability", p), _join(p, "probability")),
            )
        )
    marginal = d.get("max_marginal_defect")
    if marginal is not None:
        marginal = _as_number(marginal, "max_marginal_defect")
    return PoolingReport(
        label=_as_str(_get(d, "label", ""), "label"),
        dims=tuple(_int_list(_get(d, "dims", ""), "dims")),
        state_class=_as_str(_get(d, "state_class", ""), "state_class"),
        rank_condition=_as_bool(_get(d, "rank_condition", ""), "rank_condition"),
        skip_tol=_as_number(_get(d, "skip_tol", ""), "skip_tol"),
        tol=_as_number(_get(d, "tol", ""), "tol"),
        records=tuple(records),
        skipped=tuple(skipped),
        probability_total=_as_number(_get(d, "probability_total", ""), "probability_total"),
        max_distance=_as_number(_get(d, "max_distance", ""), "max_distance"),
        mean_distance=_as_number(_get(d, "mean_distance", ""), "mean_distance"),
        max_marginal_defect=marginal,
    )


def sweep_config_to_dict(config: SweepConfig) -> dict:
    return {
        "category": config.category,
        "trials": int(config.trials),
        "seed": int(config.seed),
        "jobs": int(config.jobs),
        "tol": float(config.tol),
        "skip_tol": float(config.skip_tol),
        "party_dims": None if config.party_dims is None else [int(x) for x in config.party_dims],
        "shared_dim": None if config.shared_dim is None else int(config.shared_dim),
        "outcome_range": [int(x) for x in config.outcome_range],
        "distance_tol": float(config.distance_tol),
        "commutator_tol": float(config.commutator_tol),
        "marginal_tol": float(config.marginal_tol),
        "probability_tol": float(config.probability_tol),
        "failure_threshold": float(config.failure_threshold),
        "min_failure_fraction": float(config.min_failure_fraction),
    }


def sweep_report_to_dict(report: SweepReport) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "report_kind": "sweep",
        "tool_version": __version__,
        "config": sweep_config_to_dict(report.config),
        "passed": bool(report.passed),
        "wall_time_s": float(report.wall_time_s),
        "aggregate": {
            "max_distance": float(report.max_distance),
            "mean_distance": float(report.mean_distance),
            "n_disagreeing": int(report.n_disagreeing),
            "fraction_disagreeing": float(report.fraction_disagreeing),
            "max_commutator": (
                None if report.max_commutator is None else float(report.max_commutator)
            ),
            "max_marginal_defect": float(report.max_marginal_defect),
            "max_probability_defect": float(report.max_probability_defect),
            "all_compatible": bool(report.all_compatible),
        },
        "trials": [
            {
                "index": int(t.index),
                "seed": int(t.seed),
                "label": t.label,
                "dims": [int(x) for x in t.dims],
                "outcome_counts": [int(x) for x in t.outcome_counts],
                "n_evaluated": int(t.n_evaluated),
                "n_skipped": int(t.n_skipped),
                "max_distance": float(t.max_distance),
                "mean_distance": float(t.mean_distance),
                "probability_total": float(t.probability_total),
                "marginal_defect": float(t.marginal_defect),
                "all_compatible": bool(t.all_compatible),
                "max_commutator": (
                    None if t.max_commutator is None else float(t.max_commutator)
                ),
                "max_hermiticity_defect": float(t.max_hermiticity_defect),
                "rank_condition": bool(t.rank_condition),
                "disagrees": bool(t.disagrees),
            }
            for t in report.trials
        ],
    }


def sweep_config_from_dict(d: dict, path: str = "config") -> SweepConfig:
    d = _as_dict(d, path)
    party_dims = d.get("party_dims")
    if party_dims is not None:
        party_dims = tuple(_int_list(party_dims, _join(path, "party_dims")))
    shared_dim = d.get("shared_dim")
    if shared_dim is not None:
        shared_dim = _as_int(shared_dim, _join(path, "shared_dim"))
    rng_pair = _int_list(_get(d, "outcome_range", path), _join(path, "outcome_range"))
    if len(rng_pair) != 2:
        raise FormatError(f"{_join(path, 'outcome_range')}: expected [lo, hi]")
    return SweepConfig(
        category=_as_str(_get(d, "category", path), _join(path, "category")),
        trials=_as_int(_get(d, "trials", path), _join(path, "trials")),
        seed=_as_int(_get(d, "seed", path), _join(path, "seed")),
        jobs=_as_int(_get(d, "jobs", path), _join(path, "jobs")),
        tol=_as_number(_get(d, "tol", path), _join(path, "tol")),
        skip_tol=_as_number(_get(d, "skip_tol", path), _join(path, "skip_tol")),
        party_dims=party_dims,
        shared_dim=shared_dim,
        outcome_range=tuple(rng_pair),
        distance_tol=_as_number(_get(d, "distance_tol", path), _join(path, "distance_tol")),
        commutator_tol=_as_number(_get(d, "commutator_tol", path), _join(path, "commutator_tol")),
        marginal_tol=_as_number(_get(d, "marginal_tol", path), _join(path, "marginal_tol")),
        probability_tol=_as_number(_get(d, "probability_tol", path), _join(path, "probability_tol")),
        failure_threshold=_as_number(_get(d, "failure_threshold", path), _join(path, "failure_threshold")),
        min_failure_fraction=_as_number(_get(d, "min_failure_fraction", path), _join(path, "min_failure_fraction")),
    )


def sweep_report_from_dict(d: dict) -> SweepReport:
    _check_version(d)
    kind = _as_str(_get(d, "report_kind", ""), "report_kind")
    if kind != "sweep":
        raise FormatError(f"report_kind: expected 'sweep', got {kind!r}")
    agg = _as_dict(_get(d, "aggregate", ""), "aggregate")
    trials = []
    for i, t in enumerate(_as_list(_get(d, "trials", ""), "trials")):
        p = _join("trials", i)
        t = _as_dict(t, p)
        comm = t.get("max_commutator")
        if comm is not None:
            comm = _as_number(comm, _join(p, "max_commutator"))
        trials.append(
            SweepTrial(
                index=_as_int(_get(t, "index", p), _join(p, "index")),
                seed=_as_int(_get(t, "seed", p), _join(p, "seed")),
                label=_as_str(_get(t, "label", p), _join(p, "label")),
                dims=tuple(_int_list(_get(t, "dims", p), _join(p, "dims"))),
                outcome_counts=tuple(
                    _int_list(_get(t, "outcome_counts", p), _join(p, "outcome_counts"))
                ),
                n_evaluated=_as_int(_get(t, "n_evaluated", p), _join(p, "n_evaluated")),
                n_skipped=_as_int(_get(t, "n_skipped", p), _join(p, "n_skipped")),
                max_distance=_as_number(_get(t, "max_distance", p), _join(p, "max_distance")),
                mean_distance=_as_number(_get(t, "mean_distance", p), _join(p, "mean_distance")),
                probability_total=_as_number(
                    _get(t, "probability_total", p), _join(p, "probability_total")
                ),
                marginal_defect=_as_number(
                    _get(t, "marginal_defect", p), _join(p, "marginal_defect")
                ),
                all_compatible=_as_bool(
                    _get(t, "all_compatible", p), _join(p, "all_compatible")
                ),
                max_commutator=comm,
                max_hermiticity_defect=_as_number(
                    _get(t, "max_hermiticity_defect", p), _join(p, "max_hermiticity_defect")
                ),
                rank_condition=_as_bool(_get(t, "rank_condition", p), _join(p, "rank_condition")),
                disagrees=_as_bool(_get(t, "disagrees", p), _join(p, "disagrees")),
            )
        )
    agg_comm = agg.get("max_commutator")
    if agg_comm is not None:
        agg_comm = _as_number(agg_comm, "aggregate.max_commutator")
    return SweepReport(
        config=sweep_config_from_dict(_get(d, "config", ""), "config"),
        trials=tuple(trials),
        max_distance=_as_number(_get(agg, "max_distance", "aggregate"), "aggregate.max_distance"),
        mean_distance=_as_number(_get(agg, "mean_distance", "aggregate"), "aggregate.mean_distance"),
        n_disagreeing=_as_int(_get(agg, "n_disagreeing", "aggregate"), "aggregate.n_disagreeing"),
        fraction_disagreeing=_as_number(
            _get(agg, "fraction_disagreeing", "aggregate"), "aggregate.fraction_disagreeing"
        ),
        max_commutator=agg_comm,
        max_marginal_defect=_as_number(
            _get(agg, "max_marginal_defect", "aggregate"), "aggregate.max_marginal_defect"
        ),
        max_probability_defect=_as_number(
            _get(agg, "max_probability_defect", "aggregate"), "aggregate.max_probability_defect"
        ),
        all_compatible=_as_bool(_get(agg, "all_compatible", "aggregate"), "aggregate.all_compatible"),
        passed=_as_bool(_get(d, "passed", ""), "passed"),
        wall_time_s=_as_number(_get(d, "wall_time_s", ""), "wall_time_s"),
    )


# ------------------------------------------------------------ density files

def density_to_dict(op: DensityOperator) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "matrix": encode_matrix(op.matrix),
    }


def density_from_dict(d: dict) -> DensityOperator:
    _check_version(d)
    return DensityOperator(decode_matrix(_get(d, "matrix", ""), "matrix"))


def load_density(path: str) -> DensityOperator:
    return density_from_dict(load_json(path))
