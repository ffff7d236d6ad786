import jsonschema
import pandas as pd

from errors import ConsistencyError

NUMBER_LIST = {"type": "array", "items": {"type": "number"}}
NULLABLE_NUMBER = {"type": ["number", "null"]}

STATE_SCHEMA = {
    "type": "object",
    "required": ["dim", "re", "im"],
    "additionalProperties": False,
    "properties": {"dim": {"type": "integer", "minimum": 1}, "re": NUMBER_LIST, "im": NUMBER_LIST},
}

PROTECTIVE_RUN_SCHEMA = {
    "type": "object",
    "required": ["steps", "coupling", "mode", "pointer_mean_shift", "survival_probability", "survival_constant", "inferred_expectation", "aborted", "aborted_at"],
    "properties": {
        "steps": {"type": "integer", "minimum": 0},
        "coupling": {"type": "number"},
        "mode": {"enum": ["deterministic", "sampled"]},
        "pointer_mean_shift": {"type": "number"},
        "survival_probability": {"type": "number", "minimum": 0, "maximum": 1},
        "survival_constant": NULLABLE_NUMBER,
        "inferred_expectation": NULLABLE_NUMBER,
        "aborted": {"type": "boolean"},
        "aborted_at": {"type": ["integer", "null"]},
    },
}

VIOLATION_SCHEMA = {
    "type": "object",
    "required": ["q", "violation_lower_bound", "dual_bound", "duality_gap", "status", "witnessing_responses"],
    "properties": {
        "q": {"type": "number", "minimum": 0, "maximum": 1},
        "violation_lower_bound": NULLABLE_NUMBER,
        "status": {"enum": ["certified", "indeterminate"]},
        "witnessing_responses": {
            "type": "object",
            "required": ["lambda", "outcomes", "table"],
            "properties": {"table": {"type": "array", "items": NUMBER_LIST}},
        },
    },
}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["lambda", "preparations"],
    "properties": {
        "lambda": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "preparations": {"type": "object", "additionalProperties": NUMBER_LIST},
        "responses": {"type": "object", "additionalProperties": {"type": "array", "items": NUMBER_LIST}},
        "outcomes": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "seed", "config", "versions", "files"],
    "properties": {
        "subcommand": {"type": "string"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "versions": {"type": "object", "additionalProperties": {"type": "string"}},
        "files": {"type": "array", "items": {"type": "string"}},
    },
}

SUMMARY_SCHEMAS = {
    "protective": {
        "type": "object",
        "required": ["state", "observable", "run", "exact_expectation", "tomography"],
        "properties": {
            "state": STATE_SCHEMA,
            "run": PROTECTIVE_RUN_SCHEMA,
            "tomography": {"type": "object", "required": ["fidelity", "total_survival", "expectations", "reconstructed"]},
        },
    },
    "leak": {
        "type": "object",
        "required": ["prepared", "protected", "survival", "expected_survival", "surviving_state", "ensemble"],
        "properties": {"prepared": STATE_SCHEMA, "protected": STATE_SCHEMA, "surviving_state": {"oneOf": [STATE_SCHEMA, {"type": "null"}]}},
    },
    "scan": {"type": "object", "required": ["grid", "width", "momentum", "max_error", "zero_momentum_component"]},
    "pbr": {
        "type": "object",
        "required": ["trials", "seed", "mixture", "outcomes", "forbidden", "counts", "forbidden_counts"],
        "properties": {"counts": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "integer", "minimum": 0}}}},
    },
    "steer": {"type": "object", "required": ["trials", "bases"]},
    "onto": {
        "type": "object",
        "required": ["q", "resolution", "overlaps", "monte_carlo"],
        "properties": {"bound": VIOLATION_SCHEMA, "single_qubit_bound": VIOLATION_SCHEMA},
    },
    "nogo": {"type": "object", "required": ["trials", "device_dim", "before", "max_difference"]},
}

CSV_COLUMNS = {
    "per_step": ["step", "survival", "pointer_mean"],
    "signature": ["candidate", "protective_value", "exact_value", "overlap_squared"],
    "sweep": ["n", "g", "inferred", "exact", "survival", "survival_constant"],
    "scan": ["x", "re_scan", "im_scan", "re_psi_true", "im_psi_true"],
    "contingency": ["preparation", "xi1", "xi2", "xi3", "xi4"],
    "steering": ["alice_basis", "alice_outcome", "bob_state", "probability", "count"],
    "monte_carlo": ["preparation", "outcome", "count", "frequency", "predicted", "forbidden"],
    "responses": ["lambda"],
    "nogo": ["trial", "before", "after", "difference"],
    "history": ["id", "subcommand", "seed", "output_dir", "exit_status", "created_at"],
}


DOCUMENT_SCHEMAS = {**SUMMARY_SCHEMAS, "manifest": MANIFEST_SCHEMA, "model": MODEL_SCHEMA, "joint": {"type": "object", "required": ["grid", "system_dim", "re", "im"]}}


def validate_document(name, document, schema=None):
    schema = schema or DOCUMENT_SCHEMAS[name]
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as exc:
        raise ConsistencyError(f"{name} document does not match its schema: {exc.message}") from exc


def validate_table(name, frame: pd.DataFrame):
    missing = [c for c in CSV_COLUMNS[name] if c not in frame.columns]
    if missing:
        raise ConsistencyError(f"{name} table is missing columns {missing}")
