"""Problem descriptions: parsing, validation, and canonical serialization.

The on-disk format is JSON with explicit dimensions and row-major matrices;
polynomial Hamiltonians are (coefficient, exponent-vector) term lists.  Field
names are frozen in docs/FORMAT.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .continuation import ContinuationConfig, PolynomialHamiltonian
from .errors import ConsistencyError, SpecError
from .linalg import TolerancePolicy, matrix_norm


@dataclass(frozen=True)
class Equilibrium:
    point: np.ndarray
    hessian: np.ndarray
    brouwer_index: int | None = None


@dataclass(frozen=True)
class AnalysisOptions:
    lambda_max: float = 10.0
    j_max: int | None = None
    betas: tuple[float, ...] | str = "all"
    seed: int = 0
    tolerances: TolerancePolicy = field(default_factory=TolerancePolicy)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    continuation_enabled: bool = True


@dataclass(frozen=True)
class ProblemSpec:
    dim: int
    equilibria: tuple[Equilibrium, ...]
    hamiltonian: PolynomialHamiltonian | None = None
    options: AnalysisOptions = field(default_factory=AnalysisOptions)


def _require(condition, message, path):
    if not condition:
        raise SpecError(message, path)


def _as_float_list(value, length, path):
    _require(isinstance(value, (list, tuple)), "expected a list of numbers", path)
    _require(len(value) == length, f"expected length {length}, got {len(value)}", path)
    try:
        return np.array([float(v) for v in value])
    except (TypeError, ValueError):
        raise SpecError("entries must be numbers", path) from None


def _as_matrix(value, dim, path):
    _require(isinstance(value, (list, tuple)), "expected a row-major matrix", path)
    _require(len(value) == dim, f"expected {dim} rows, got {len(value)}", path)
    rows = [_as_float_list(row, dim, f"{path}[{i}]") for i, row in enumerate(value)]
    M = np.vstack(rows)
    _require(bool(np.all(np.isfinite(M))), "matrix entries must be finite", path)
    return M


def _parse_tolerances(data, path):
    if data is None:
        return TolerancePolicy()
    _require(isinstance(data, dict), "expected an object", path)
    known = {"rank_tol", "eig_zero_tol", "residual_tol"}
    unknown = set(data) - known
    _require(not unknown, f"unknown tolerance fields {sorted(unknown)}", path)
    try:
        return TolerancePolicy(**{k: float(v) for k, v in data.items()})
    except ValueError as exc:
        raise SpecError(str(exc), path) from None


def _parse_continuation(data, path):
    if data is None:
        return ContinuationConfig(), True
    _require(isinstance(data, dict), "expected an object", path)
    data = dict(data)
    enabled = bool(data.pop("enabled", True))
    valid = set(ContinuationConfig.__dataclass_fields__)
    unknown = set(data) - valid
    _require(not unknown, f"unknown continuation fields {sorted(unknown)}", path)
    try:
        return ContinuationConfig(**data), enabled
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc), path) from None


def _parse_hamiltonian(data, dim, path):
    _require(isinstance(data, dict), "expected an object", path)
    _require("terms" in data, "hamiltonian needs a 'terms' list", path)
    declared = data.get("dim", dim)
    _require(declared == dim, f"hamiltonian dim {declared} != problem dim {dim}", path)
    terms = []
    for i, term in enumerate(data["terms"]):
        tpath = f"{path}.terms[{i}]"
        if isinstance(term, dict):
            _require({"coefficient", "exponents"} <= set(term), "term needs coefficient and exponents", tpath)
            coeff, exps = term["coefficient"], term["exponents"]
        else:
            _require(isinstance(term, (list, tuple)) and len(term) == 2, "term must be [coefficient, exponents]", tpath)
            coeff, exps = term
        _require(isinstance(exps, (list, tuple)) and len(exps) == dim, f"exponents must have length {dim}", tpath)
        try:
            terms.append((float(coeff), tuple(int(e) for e in exps)))
        except (TypeError, ValueError):
            raise SpecError("coefficient must be a number, exponents integers", tpath) from None
    try:
        return PolynomialHamiltonian(dim=dim, terms=tuple(terms))
    except ValueError as exc:
        raise SpecError(str(exc), path) from None


def parse_problem(text: str, tol: TolerancePolicy | None = None) -> ProblemSpec:
    """Parse and validate a JSON problem description.

    Schema violations raise :class:`SpecError` with the offending path;
    disagreements between declared and derived data raise
    :class:`ConsistencyError` naming the equilibrium.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}", "$") from None
    _require(isinstance(data, dict), "top level must be an object", "$")
    unknown = set(data) - {"dim", "equilibria", "hamiltonian", "analysis"}
    _require(not unknown, f"unknown top-level fields {sorted(unknown)}", "$")
    _require("dim" in data, "missing 'dim'", "$")
    dim = data["dim"]
    _require(isinstance(dim, int) and dim >= 2 and dim % 2 == 0, "'dim' must be an even integer >= 2", "$.dim")
    _require("equilibria" in data and isinstance(data["equilibria"], list) and data["equilibria"],
             "at least one equilibrium is required", "$.equilibria")

    analysis = data.get("analysis") or {}
    _require(isinstance(analysis, dict), "expected an object", "$.analysis")
    unknown = set(analysis) - {"lambda_max", "j_max", "betas", "seed", "tolerances", "continuation"}
    _require(not unknown, f"unknown analysis fields {sorted(unknown)}", "$.analysis")
    tolerances = tol if tol is not None else _parse_tolerances(analysis.get("tolerances"), "$.analysis.tolerances")
    continuation, enabled = _parse_continuation(analysis.get("continuation"), "$.analysis.continuation")
    lambda_max = float(analysis.get("lambda_max", 10.0))
    _require(lambda_max > 0.0, "lambda_max must be positive", "$.analysis.lambda_max")
    j_max = analysis.get("j_max")
    if j_max is not None:
        _require(isinstance(j_max, int) and j_max >= 1, "j_max must be a positive integer", "$.analysis.j_max")
    betas = analysis.get("betas", "all")
    if betas != "all":
        betas = tuple(float(b) for b in betas)
        _require(all(b > 0 for b in betas), "requested betas must be positive", "$.analysis.betas")
    seed = analysis.get("seed", 0)
    _require(isinstance(seed, int), "seed must be an integer", "$.analysis.seed")

    hamiltonian = None
    if data.get("hamiltonian") is not None:
        hamiltonian = _parse_hamiltonian(data["hamiltonian"], dim, "$.hamiltonian")

    equilibria = []
    for i, eq in enumerate(data["equilibria"]):
        path = f"$.equilibria[{i}]"
        _require(isinstance(eq, dict), "expected an object", path)
        unknown = set(eq) - {"point", "hessian", "brouwer_index"}
        _require(not unknown, f"unknown fields {sorted(unknown)}", path)
        _require("point" in eq and "hessian" in eq, "equilibrium needs 'point' and 'hessian'", path)
        point = _as_float_list(eq["point"], dim, f"{path}.point")
        hessian = _as_matrix(eq["hessian"], dim, f"{path}.hessian")
        scale = 1.0 + matrix_norm(hessian)
        asym = float(np.max(np.abs(hessian - hessian.T)))
        if asym > tolerances.residual_tol * scale:
            raise ConsistencyError(
                f"equilibrium {i}: hessian asymmetry {asym:.3e} exceeds tolerance",
                f"{path}.hessian",
            )
        hessian = 0.5 * (hessian + hessian.T)
        brouwer = eq.get("brouwer_index")
        if brouwer is not None:
            _require(isinstance(brouwer, int), "brouwer_index must be an integer", f"{path}.brouwer_index")
        if hamiltonian is not None:
            grad = hamiltonian.gradient(point)
            gnorm = float(np.linalg.norm(grad))
            if gnorm > tolerances.residual_tol * scale:
                raise ConsistencyError(
                    f"equilibrium {i}: Hamiltonian gradient norm {gnorm:.3e} does not vanish",
                    f"{path}.point",
                )
            derived = hamiltonian.hessian(point)
            mismatch = float(np.max(np.abs(derived - hessian)))
            if mismatch > tolerances.residual_tol * scale:
                raise ConsistencyError(
                    f"equilibrium {i}: declared hessian differs from the Hamiltonian's by {mismatch:.3e}",
                    f"{path}.hessian",
                )
        equilibria.append(Equilibrium(point=point, hessian=hessian, brouwer_index=brouwer))

    options = AnalysisOptions(
        lambda_max=lambda_max,
        j_max=j_max,
        betas=betas,
        seed=seed,
        tolerances=tolerances,
        continuation=continuation,
        continuation_enabled=enabled,
    )
    return ProblemSpec(dim=dim, equilibria=tuple(equilibria), hamiltonian=hamiltonian, options=options)


def problem_to_dict(spec: ProblemSpec) -> dict:
    """Canonical JSON-ready form of a problem; parse(emit(.)) is the identity."""
    out: dict = {
        "dim": spec.dim,
        "equilibria": [
            {
                "point": [float(v) for v in eq.point],
                "hessian": [[float(v) for v in row] for row in eq.hessian],
                **({"brouwer_index": eq.brouwer_index} if eq.brouwer_index is not None else {}),
            }
            for eq in spec.equilibria
        ],
        "analysis": {
            "lambda_max": spec.options.lambda_max,
            "j_max": spec.options.j_max,
            "betas": "all" if spec.options.betas == "all" else list(spec.options.betas),
            "seed": spec.options.seed,
            "tolerances": {
                "rank_tol": spec.options.tolerances.rank_tol,
                "eig_zero_tol": spec.options.tolerances.eig_zero_tol,
                "residual_tol": spec.options.tolerances.residual_tol,
            },
            "continuation": {
                "enabled": spec.options.continuation_enabled,
                **{
                    name: getattr(spec.options.continuation, name)
                    for name in ContinuationConfig.__dataclass_fields__
                },
            },
        },
    }
    if spec.hamiltonian is not None:
        out["hamiltonian"] = {
            "dim": spec.hamiltonian.dim,
            "terms": [
                {"coefficient": c, "exponents": list(e)} for c, e in spec.hamiltonian.terms
            ],
        }
    return out


def emit_problem(spec: ProblemSpec) -> str:
    return json.dumps(problem_to_dict(spec), indent=2, sort_keys=True) + "\n"
