"""Finite ontological models and the cost of letting two quantum states share a lambda.

A model lists physical states lambda, a distribution over them for every
preparation, and for every measurement a response table whose row lambda is
the outcome distribution the device produces on lambda.  Pair preparations
are products of single-system distributions; the model records which pairs
were built that way so the independence assumption can be checked.
"""
import itertools
import json
import logging
from pathlib import Path

import attrs
import jsonschema
import numpy as np
import pandas as pd
from attrs import field, frozen
from scipy.optimize import linprog

from errors import ConsistencyError, PreconditionError, UnknownIdError
from hilbert import MINUS, ONE, PLUS, ZERO, EigenDecomposition
from measurement import born_probabilities, clean_probabilities, sample_outcomes, substream
from pbr import OUTCOMES as PBR_OUTCOMES
from pbr import PREPARATIONS as PBR_PREPARATIONS
from pbr import pbr_basis
from schemas import MODEL_SCHEMA

log = logging.getLogger(__name__)

DISTRIBUTION_TOL = 1e-12
PREDICTION_TOL = 1e-11
ONTIC_TOL = 1e-12
CERTIFICATE_TOL = 1e-6
MAX_GRID_POINTS = 200_000

SHARED, ZERO_ONLY, PLUS_ONLY = "lambda_bar", "lambda_0", "lambda_plus"
PBR_PAIRS = {"00": ("0", "0"), "0+": ("0", "+"), "+0": ("+", "0"), "++": ("+", "+")}

CERTIFIED = "certified"
INDETERMINATE = "indeterminate"


def _labels(values):
    labels = tuple(str(v) for v in values)
    if len(labels) < 1:
        raise PreconditionError("a lambda space needs at least one element")
    if len(set(labels)) != len(labels):
        raise PreconditionError(f"lambda labels must be distinct: {labels}")
    return labels


@frozen
class LambdaSpace:
    labels: tuple = field(converter=_labels)

    @property
    def size(self):
        return len(self.labels)


def _check_distribution(name, values, tol=DISTRIBUTION_TOL):
    if np.any(values < 0):
        raise PreconditionError(f"{name} has negative entries")
    if abs(values.sum() - 1.0) > tol:
        raise PreconditionError(f"{name} sums to {values.sum()!r}, not 1")


def _frozen_arrays(mapping):
    out = {}
    for key, values in mapping.items():
        arr = np.array(values, dtype=float)
        arr.setflags(write=False)
        out[str(key)] = arr
    return out


@frozen(eq=False)
class OntologicalModel:
    space: LambdaSpace
    preparations: dict = field(converter=_frozen_arrays)
    responses: dict = field(factory=dict, converter=_frozen_arrays)
    outcomes: dict = field(factory=dict)
    pair_of: dict = field(factory=dict)

    def __attrs_post_init__(self):
        size = self.space.size
        for prep, p in self.preparations.items():
            if p.shape != (size,):
                raise PreconditionError(f"preparation {prep} has {p.size} weights for {size} lambda values")
            _check_distribution(f"preparation {prep}", p)
        for meas, table in self.responses.items():
            if table.ndim != 2 or table.shape[0] != size:
                raise PreconditionError(f"response table {meas} must have {size} rows, got shape {table.shape}")
            for row, label in zip(table, self.space.labels):
                _check_distribution(f"response {meas} at {label}", row)
            if meas in self.outcomes and len(self.outcomes[meas]) != table.shape[1]:
                raise PreconditionError(f"response table {meas} has {table.shape[1]} outcomes but {len(self.outcomes[meas])} labels")

    def outcome_labels(self, meas):
        table = self.responses[meas]
        return tuple(self.outcomes.get(meas, tuple(str(k) for k in range(table.shape[1]))))


@frozen
class OverlapReport:
    preparations: tuple
    variational_overlap: float
    is_ontic_pair: bool

    def to_json(self):
        return {"preparations": list(self.preparations), "variational_overlap": self.variational_overlap, "is_ontic_pair": self.is_ontic_pair}


@frozen(eq=False)
class Scenario:
    name: str
    measurement: str
    preparations: tuple
    forbidden: dict
    born: dict


@frozen(eq=False)
class ViolationBound:
    q: float
    violation_lower_bound: float
    witnessing_responses: pd.DataFrame
    status: str
    duality_gap: float
    dual_bound: float
    grid_value: float | None
    forbidden_probabilities: dict

    @property
    def certified(self):
        return self.status == CERTIFIED

    def to_json(self):
        values = list(self.forbidden_probabilities.values())
        return {
            "q": self.q,
            "violation_lower_bound": self.violation_lower_bound,
            "dual_bound": self.dual_bound,
            "duality_gap": self.duality_gap,
            "status": self.status,
            "grid_value": self.grid_value,
            "forbidden_probabilities": self.forbidden_probabilities,
            "forbidden_sum": float(sum(values)),
            "forbidden_mean": float(np.mean(values)),
            "witnessing_responses": {
                "lambda": list(self.witnessing_responses.index),
                "outcomes": list(self.witnessing_responses.columns),
                "table": self.witnessing_responses.to_numpy().tolist(),
            },
        }


@frozen(eq=False)
class MonteCarloResult:
    scenario: str
    trials: int
    counts: pd.DataFrame
    frequencies: pd.DataFrame
    predicted: pd.DataFrame
    max_forbidden_frequency: float
    forbidden: dict = field(factory=dict)

    def tidy(self):
        """Long-form table: one row per (preparation, outcome)."""
        rows = []
        for prep in self.counts.index:
            for k, outcome in enumerate(self.counts.columns):
                rows.append(
                    {
                        "preparation": prep,
                        "outcome": outcome,
                        "count": int(self.counts.loc[prep, outcome]),
                        "frequency": float(self.frequencies.loc[prep, outcome]),
                        "predicted": float(self.predicted.loc[prep, outcome]),
                        "forbidden": self.forbidden.get(prep) == k,
                    }
                )
        return pd.DataFrame(rows, columns=["preparation", "outcome", "count", "frequency", "predicted", "forbidden"])


def _require(mapping, key, kind):
    if key not in mapping:
        raise UnknownIdError(f"unknown {kind} id {key!r}; known: {sorted(mapping)}")
    return mapping[key]


def predict(model, prep, meas):
    p = _require(model.preparations, prep, "preparation")
    table = _require(model.responses, meas, "measurement")
    distribution = p @ table
    if np.any(distribution < -PREDICTION_TOL) or abs(distribution.sum() - 1.0) > PREDICTION_TOL:
        raise ConsistencyError(f"prediction for ({prep}, {meas}) is not a distribution: {distribution}")
    return np.clip(distribution, 0.0, None)


def overlap(model, prep1, prep2):
    p = _require(model.preparations, prep1, "preparation")
    r = _require(model.preparations, prep2, "preparation")
    value = float(np.clip(np.minimum(p, r).sum(), 0.0, 1.0))
    return OverlapReport((prep1, prep2), value, value < ONTIC_TOL)


def build_shared_reality_model(q):
    """|0> and |+> share lambda_bar with weight q; the rest of each is private.

    The Z response answers 0 on lambda_bar and lambda_0 and is unbiased on
    lambda_plus, which is Born-faithful only at q = 0.
    """
    if not 0.0 <= q <= 1.0:
        raise PreconditionError(f"shared weight q must lie in [0, 1], got {q}")
    return OntologicalModel(
        LambdaSpace((SHARED, ZERO_ONLY, PLUS_ONLY)),
        {"0": [q, 1 - q, 0.0], "+": [q, 0.0, 1 - q]},
        {"Z": [[1.0, 0.0], [1.0, 0.0], [0.5, 0.5]]},
        {"Z": ("0", "1")},
    )


def product_model(single, pairs):
    """Pairs of independently prepared systems; lambda is the pair of single lambdas."""
    labels = [f"{a}|{b}" for a, b in itertools.product(single.space.labels, repeat=2)]
    preparations = {}
    for label, (first, second) in pairs.items():
        p = _require(single.preparations, first, "preparation")
        r = _require(single.preparations, second, "preparation")
        preparations[label] = np.outer(p, r).reshape(-1)
    return OntologicalModel(LambdaSpace(labels), preparations, pair_of=dict(pairs))


def check_preparation_independence(model, single):
    for label, (first, second) in model.pair_of.items():
        expected = np.outer(single.preparations[first], single.preparations[second]).reshape(-1)
        if np.max(np.abs(model.preparations[label] - expected)) > DISTRIBUTION_TOL:
            raise ConsistencyError(f"pair preparation {label} is not the product of {first} and {second}")
    return True


def with_responses(model, meas, table, outcomes=None):
    responses = dict(model.responses)
    responses[meas] = np.asarray(table, dtype=float)
    labels = dict(model.outcomes)
    if outcomes is not None:
        labels[meas] = tuple(outcomes)
    return attrs.evolve(model, responses=responses, outcomes=labels)


def build_orthodox_model(states, measurements, outcomes=None):
    """lambda is the quantum state itself and every response is the Born rule."""
    labels = list(states)
    eye = np.eye(len(labels))
    preparations = {label: eye[i] for i, label in enumerate(labels)}
    responses = {}
    for meas, basis in measurements.items():
        rows = np.array([clean_probabilities(born_probabilities(states[label], basis)) for label in labels])
        responses[meas] = rows / rows.sum(axis=1, keepdims=True)
    return OntologicalModel(LambdaSpace(labels), preparations, responses, dict(outcomes or {}))


SINGLE_STATES = {"0": ZERO, "1": ONE, "+": PLUS, "-": MINUS}


def _single_measurements():
    return {"Z": EigenDecomposition.from_basis((ZERO, ONE)), "X": EigenDecomposition.from_basis((PLUS, MINUS))}


def orthodox_single_model():
    return build_orthodox_model(SINGLE_STATES, _single_measurements(), {"Z": ("0", "1"), "X": ("+", "-")})


def orthodox_pair_model():
    basis = pbr_basis()
    return build_orthodox_model(basis.preparations, {"pbr": basis.decomposition}, {"pbr": PBR_OUTCOMES})


def scenarios():
    """Every implemented measurement scenario with its Born statistics and zero-probability cells."""
    basis = pbr_basis()
    pbr_born = {label: clean_probabilities(born_probabilities(basis.preparations[label], basis.decomposition)) for label in PBR_PREPARATIONS}
    single = _single_measurements()
    z_born = {label: clean_probabilities(born_probabilities(SINGLE_STATES[label], single["Z"])) for label in SINGLE_STATES}
    x_born = {label: clean_probabilities(born_probabilities(SINGLE_STATES[label], single["X"])) for label in SINGLE_STATES}
    return {
        "pbr": Scenario("pbr", "pbr", PBR_PREPARATIONS, dict(basis.forbidden_map), pbr_born),
        "z": Scenario("z", "Z", tuple(SINGLE_STATES), {"0": 1, "1": 0}, z_born),
        "x": Scenario("x", "X", tuple(SINGLE_STATES), {"+": 1, "-": 0}, x_born),
    }


def scenario(name):
    return _require(scenarios(), name, "scenario")


def born_deviation(model, meas, expected):
    """Total-variation distance from the expected distribution, per preparation."""
    return {prep: 0.5 * float(np.abs(predict(model, prep, meas) - np.asarray(dist)).sum()) for prep, dist in expected.items()}


def _simplex_grid(parts, resolution):
    points = [c for c in itertools.product(range(resolution + 1), repeat=parts - 1) if sum(c) <= resolution]
    return np.array([list(c) + [resolution - sum(c)] for c in points], dtype=float) / resolution


def _grid_search(weights, forbidden, outcomes, resolution):
    """Upper bound from gridding the rows that cannot avoid every forbidden outcome.

    ``weights`` is (preparations, lambdas); ``forbidden`` lists each preparation's
    forbidden outcome.  Rows that can avoid all forbidden outcomes of the
    preparations supporting them contribute nothing.
    """
    contested = []
    for lam in range(weights.shape[1]):
        support = np.flatnonzero(weights[:, lam] > 0)
        if support.size and {forbidden[p] for p in support} >= set(range(outcomes)):
            contested.append(lam)
    if not contested:
        return 0.0
    grid = _simplex_grid(outcomes, resolution)
    if grid.shape[0] ** len(contested) > MAX_GRID_POINTS:
        log.debug("grid phase skipped: %d contested rows", len(contested))
        return None
    totals = np.zeros((1, weights.shape[0]))
    for lam in contested:
        contribution = grid[:, forbidden] * weights[:, lam]
        totals = (totals[:, None, :] + contribution[None, :, :]).reshape(-1, weights.shape[0])
    return float(totals.max(axis=1).min())


def _minimax_lp(constraints, rows, outcomes):
    """Minimize t over response tables subject to a . r + const <= t for each constraint."""
    n_vars = rows * outcomes + 1
    c = np.zeros(n_vars)
    c[-1] = 1.0
    a_ub = np.zeros((len(constraints), n_vars))
    b_ub = np.zeros(len(constraints))
    for i, (coefficients, constant) in enumerate(constraints):
        a_ub[i, :-1] = coefficients.reshape(-1)
        a_ub[i, -1] = -1.0
        b_ub[i] = -constant
    a_eq = np.zeros((rows, n_vars))
    for lam in range(rows):
        a_eq[lam, lam * outcomes : (lam + 1) * outcomes] = 1.0
    b_eq = np.ones(rows)
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * n_vars, method="highs")
    if res.status != 0:
        log.warning("response LP did not solve: %s", res.message)
        return None, float("nan"), float("inf")
    y = np.asarray(res.ineqlin.marginals)
    z = np.asarray(res.eqlin.marginals)
    reduced = c - a_ub.T @ y - a_eq.T @ z
    infeasibility = max(0.0, float(-reduced.min()), float(y.max(initial=0.0)))
    dual = float(b_ub @ y + b_eq @ z)
    gap = abs(float(res.fun) - dual) + infeasibility
    table = np.clip(res.x[:-1].reshape(rows, outcomes), 0.0, None)
    table /= table.sum(axis=1, keepdims=True)
    return table, dual, gap


def pbr_min_violation(q, resolution=8):
    """Least worst-case forbidden-outcome probability any response table must incur.

    Preparations are independent pairs from ``build_shared_reality_model(q)``;
    the measurement has the four outcomes of the antidistinguishing basis.
    """
    if resolution < 1:
        raise PreconditionError(f"grid resolution must be positive, got {resolution}")
    single = build_shared_reality_model(q)
    pairs = product_model(single, PBR_PAIRS)
    check_preparation_independence(pairs, single)
    forbidden_map = pbr_basis().forbidden_map
    weights = np.array([pairs.preparations[p] for p in PBR_PREPARATIONS])
    forbidden = [forbidden_map[p] for p in PBR_PREPARATIONS]
    rows, outcomes = pairs.space.size, len(PBR_OUTCOMES)
    grid_value = _grid_search(weights, forbidden, outcomes, resolution)
    constraints = []
    for p, f in enumerate(forbidden):
        coefficients = np.zeros((rows, outcomes))
        coefficients[:, f] = weights[p]
        constraints.append((coefficients, 0.0))
    table, dual, gap = _minimax_lp(constraints, rows, outcomes)
    return _bound(q, table, dual, gap, grid_value, pairs.space.labels, PBR_OUTCOMES, weights, forbidden, PBR_PREPARATIONS)


def single_qubit_min_violation(q):
    """Least deviation from P(1|0) = 0 and P(1|+) = 1/2 for a Z device when |0>, |+> share lambda_bar."""
    single = build_shared_reality_model(q)
    p0, pplus = single.preparations["0"], single.preparations["+"]
    rows, outcomes = single.space.size, 2

    def on_one(weights):
        coefficients = np.zeros((rows, outcomes))
        coefficients[:, 1] = weights
        return coefficients

    constraints = [(on_one(p0), 0.0), (on_one(pplus), -0.5), (-on_one(pplus), 0.5)]
    table, dual, gap = _minimax_lp(constraints, rows, outcomes)
    weights = np.array([p0, pplus])
    return _bound(q, table, dual, gap, None, single.space.labels, ("0", "1"), weights, [1, 1], ("0", "+"))


def _bound(q, table, dual, gap, grid_value, lambdas, outcomes, weights, forbidden, preparations):
    if table is None:
        empty = pd.DataFrame(index=list(lambdas), columns=list(outcomes), dtype=float)
        return ViolationBound(q, float("nan"), empty, INDETERMINATE, gap, dual, grid_value, {})
    probabilities = {prep: float(weights[i] @ table[:, forbidden[i]]) for i, prep in enumerate(preparations)}
    value = dual if gap <= CERTIFICATE_TOL else float("nan")
    status = CERTIFIED if gap <= CERTIFICATE_TOL else INDETERMINATE
    if grid_value is not None and grid_value < dual - CERTIFICATE_TOL:
        raise ConsistencyError(f"grid search value {grid_value} lies below the certified bound {dual}")
    log.debug("violation bound q=%g: %s, value %.9f, gap %.2e, grid %s", q, status, dual, gap, grid_value)
    responses = pd.DataFrame(table, index=list(lambdas), columns=list(outcomes))
    responses.index.name = "lambda"
    return ViolationBound(q, value, responses, status, gap, dual, grid_value, probabilities)


def monte_carlo_onto(model, scenario, trials, seed=0):
    """Sample lambda from each preparation, then an outcome from the response row.

    Trial i consumes draw i of the lambda and outcome streams of its preparation.
    """
    if trials < 1:
        raise PreconditionError(f"trial count must be positive, got {trials}")
    table = _require(model.responses, scenario.measurement, "measurement")
    expected = len(next(iter(scenario.born.values())))
    if table.shape[1] != expected:
        raise PreconditionError(f"measurement {scenario.measurement} has {table.shape[1]} outcomes, scenario {scenario.name} needs {expected}")
    outcomes = model.outcome_labels(scenario.measurement)
    preparations = [prep for prep in scenario.preparations if prep in model.preparations]
    if not preparations:
        raise UnknownIdError(f"model prepares none of {list(scenario.preparations)}")
    counts = {}
    for prep in preparations:
        p = model.preparations[prep]
        lambdas = sample_outcomes(p, substream(seed, "onto", scenario.name, prep, "lambda").random(trials))
        draws = substream(seed, "onto", scenario.name, prep, "outcome").random(trials)
        observed = np.zeros(trials, dtype=np.int64)
        for lam in np.unique(lambdas):
            mask = lambdas == lam
            observed[mask] = sample_outcomes(table[lam], draws[mask])
        counts[prep] = np.bincount(observed, minlength=table.shape[1])
    count_frame = pd.DataFrame.from_dict(counts, orient="index", columns=list(outcomes))
    frequencies = count_frame / trials
    predicted = pd.DataFrame({prep: predict(model, prep, scenario.measurement) for prep in preparations}, index=list(outcomes)).T
    forbidden = [frequencies.loc[prep].iloc[index] for prep, index in scenario.forbidden.items() if prep in counts]
    return MonteCarloResult(scenario.name, trials, count_frame, frequencies, predicted, float(max(forbidden, default=0.0)), dict(scenario.forbidden))


def dump_model(model):
    return {
        "lambda": list(model.space.labels),
        "preparations": {k: v.tolist() for k, v in model.preparations.items()},
        "responses": {k: v.tolist() for k, v in model.responses.items()},
        "outcomes": {k: list(v) for k, v in model.outcomes.items()},
    }


def load_model(source):
    try:
        data = json.loads(Path(source).read_text()) if isinstance(source, (str, Path)) else source
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read model descriptor {source}: {exc}") from exc
    try:
        jsonschema.validate(data, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise PreconditionError(f"invalid model descriptor: {exc.message}") from exc
    try:
        return OntologicalModel(
            LambdaSpace(data["lambda"]),
            data["preparations"],
            data.get("responses", {}),
            {k: tuple(v) for k, v in data.get("outcomes", {}).items()},
        )
    except PreconditionError:
        raise
    except ValueError as exc:
        # ragged rows fail inside numpy
        raise PreconditionError(f"invalid model descriptor: {exc}") from exc
