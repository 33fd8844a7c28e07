"""Morse-index jumps, bifurcation indices, and the main condition check.

For a symmetric A with +-i*beta in the spectrum of J A, the doubled symmetric
family [[-(lam/j) A, J], [-J, -(lam/j) A]] loses definiteness exactly at the
characteristic levels lam/j = 1/beta.  The jump gamma of its Morse index
across such a level is computed spectrally here and cross-checked against the
structural route -2*kappa from the block counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DecompositionError,
    DegeneracyError,
    EigenvalueNotFoundError,
    PlanarDegreeError,
    SplittingError,
)
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_symmetric,
    matrix_norm,
    morse_index,
    numeric_rank,
    standard_symplectic,
    symplectic_gram_schmidt,
)
from .normal_forms import BlockCounts, BlockSpec, block_counts, structural_decomposition
from .spectral import EigenvalueClass, classify_eigenvalue, spectral_summary


@dataclass(frozen=True)
class LambdaSet:
    """Candidate levels m/beta up to a truncation, with their provenance."""

    points: tuple[float, ...]
    lambda_max: float
    source_betas: tuple[tuple[float, tuple[int, ...]], ...]

    @property
    def betas(self) -> tuple[float, ...]:
        return tuple(beta for beta, _ in self.source_betas)


@dataclass(frozen=True)
class BifurcationIndex:
    """Sparse integer sequence j -> eta_j; absent coordinates are zero."""

    entries: tuple[tuple[int, int], ...]
    base_point: tuple[str, float]
    j_max: int
    truncated: bool

    def __post_init__(self):
        if any(j < 1 or eta == 0 for j, eta in self.entries):
            raise ValueError("entries must map j >= 1 to nonzero integers")

    @property
    def is_trivial(self) -> bool:
        return not self.entries

    def coordinate(self, j: int) -> int:
        return dict(self.entries).get(j, 0)


@dataclass(frozen=True)
class ConditionReport:
    """Both routes to the branch-existence condition at one frequency."""

    beta0: float
    gamma: int
    counts: BlockCounts | None
    brouwer: int | None
    condition_holds: bool | None
    routes_agree: bool | None

    @property
    def kappa(self) -> int | None:
        return None if self.counts is None else self.counts.kappa


def t_matrix(j: int, lam: float, A) -> np.ndarray:
    """The symmetric 4N x 4N matrix [[-(lam/j) A, J], [-J, -(lam/j) A]]."""
    if j < 1:
        raise ValueError("j must be a positive integer")
    A = as_symmetric(A, name="t_matrix argument")
    if A.shape[0] % 2 != 0:
        raise ValueError("A must have even dimension")
    N = A.shape[0] // 2
    J = standard_symplectic(N)
    a = lam / j
    T = np.zeros((4 * N, 4 * N))
    T[: 2 * N, : 2 * N] = -a * A
    T[2 * N :, 2 * N :] = -a * A
    T[: 2 * N, 2 * N :] = J
    T[2 * N :, : 2 * N] = -J
    return T


def _spectrum_betas(A, tol: TolerancePolicy) -> tuple[float, ...]:
    N = A.shape[0] // 2
    M = standard_symplectic(N) @ A
    return spectral_summary(M, tol).betas


def lambda_set(A, lambda_max: float, tol: TolerancePolicy = DEFAULT_TOL) -> LambdaSet:
    """All levels m/beta <= lambda_max over frequencies of J A, deduplicated."""
    if lambda_max <= 0.0:
        raise ValueError("lambda_max must be positive")
    A = as_symmetric(A)
    betas = _spectrum_betas(A, tol)
    sources = []
    points: list[float] = []
    for beta in betas:
        ms = tuple(range(1, int(math.floor(lambda_max * beta + 1e-12)) + 1))
        sources.append((beta, ms))
        points.extend(m / beta for m in ms)
    points.sort()
    band = tol.zero_band(max([1.0, *points]))
    unique: list[float] = []
    for p in points:
        if not unique or p - unique[-1] > band:
            unique.append(p)
    return LambdaSet(points=tuple(unique), lambda_max=lambda_max, source_betas=tuple(sources))


def _grid_distance(level: float, betas, exclude_self: bool, tol: TolerancePolicy) -> float:
    """Distance from ``level`` to the exact grids {m/beta}, optionally skipping
    the grid point coinciding with ``level``."""
    band = tol.zero_band(max(1.0, abs(level)))
    best = math.inf
    for beta in betas:
        t = level * beta
        for m in range(max(1, math.floor(t) - 1), math.ceil(t) + 2):
            d = abs(level - m / beta)
            if exclude_self and d <= band:
                continue
            best = min(best, d)
    return best


def isolation_radius(level: float, betas, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Half the distance from ``level`` to the nearest distinct grid point m/beta."""
    if not betas:
        raise ValueError("no frequencies: the level grid is empty")
    return 0.5 * _grid_distance(level, betas, exclude_self=True, tol=tol)


def choose_mu(lambda0: float, ls: LambdaSet, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Half-gap isolation radius of a level that must belong to the set."""
    band = tol.zero_band(max(1.0, lambda0))
    if _grid_distance(lambda0, ls.betas, exclude_self=False, tol=tol) > band:
        raise ValueError(f"lambda0={lambda0} is not a candidate level within tolerance")
    return isolation_radius(lambda0, ls.betas, tol)


# Off the characteristic levels the doubled family is provably nondegenerate,
# but eigencurves of a half-dim-n block vanish like mu^n near a level, which
# can undercut the generic zero band while still sitting far above the
# eigensolver noise floor (~1e-15 * norm).  Jumps therefore count signs with a
# band just above that floor.
_JUMP_ZERO_TOL = 1e-12


def _morse_jump(A, j: int, lam0: float, mu: float, tol: TolerancePolicy) -> int:
    jump_tol = replace(tol, eig_zero_tol=min(tol.eig_zero_tol, _JUMP_ZERO_TOL))
    for attempt in range(2):
        try:
            upper = morse_index(t_matrix(j, lam0 + mu, A), jump_tol)
            lower = morse_index(t_matrix(j, lam0 - mu, A), jump_tol)
            return upper - lower
        except DegeneracyError:
            if attempt == 1:
                raise
            mu *= 0.5
    raise AssertionError("unreachable")


def gamma_jump(A, beta0: float, j: int = 1, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Jump of the Morse index of the level-j family across lam = 1/beta0.

    Always an even integer; zero unless j/beta0 resonates with a frequency of
    J A (for j = 1 that frequency is beta0 itself).
    """
    A = as_symmetric(A, tol)
    betas = _spectrum_betas(A, tol)
    band = tol.zero_band(max(1.0, beta0, matrix_norm(A)))
    if not any(abs(b - beta0) <= max(band, 1e-6 * beta0) for b in betas):
        raise EigenvalueNotFoundError(f"i*{beta0} is not in the spectrum of J A")
    lam0 = 1.0 / beta0
    mu = isolation_radius(lam0 / j, betas, tol)
    return _morse_jump(A, j, lam0, mu, tol)


def gamma_block(spec: BlockSpec) -> int:
    """Closed-form jump contribution of one catalogue block."""
    n = spec.half_dim
    if n % 2 == 0:
        return 0
    return 2 * (-1) ** (((n + 1) // 2) % 2) * spec.epsilon


def brouwer_nondegenerate(A, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """sign(det A) for a nondegenerate symmetric A (the local index of its gradient)."""
    A = as_symmetric(A, tol)
    w = np.linalg.eigvalsh(A)
    band = tol.zero_band(matrix_norm(A))
    if np.min(np.abs(w)) <= band:
        raise DegeneracyError(
            "Hessian is degenerate; supply the index or use the planar winding number"
        )
    return -1 if int(np.count_nonzero(w < 0.0)) % 2 else 1


def brouwer_planar(grad, center, radius: float, samples: int = 64,
                   tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Winding number of a planar gradient field along a circle.

    Angle increments are accumulated and the sampling refined until every
    increment is below pi/2.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, dtype=float)
    if center.shape != (2,):
        raise ValueError("center must be a point in the plane")
    n = max(8, int(samples))
    while True:
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        points = center[None, :] + radius * np.column_stack([np.cos(theta), np.sin(theta)])
        values = np.array([grad(p) for p in points], dtype=float)
        norms = np.hypot(values[:, 0], values[:, 1])
        if np.min(norms) <= tol.residual_tol:
            raise PlanarDegreeError(
                f"field norm {np.min(norms):.3e} on the circle; shrink the radius"
            )
        angles = np.arctan2(values[:, 1], values[:, 0])
        increments = np.diff(np.concatenate([angles, angles[:1]]))
        increments = (increments + np.pi) % (2.0 * np.pi) - np.pi
        if np.max(np.abs(increments)) < 0.5 * np.pi:
            return int(round(float(np.sum(increments)) / (2.0 * np.pi)))
        n *= 2
        if n > 2 ** 20:
            raise PlanarDegreeError("winding number did not stabilize under refinement")


def eta_coordinate(A, brouwer: int, lambda0: float, j: int,
                   tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Brouwer-weighted Morse jump of the level-j family across lambda0."""
    if j < 1:
        raise ValueError("j must be a positive integer")
    A = as_symmetric(A, tol)
    betas = _spectrum_betas(A, tol)
    band = tol.zero_band(max(1.0, lambda0))
    if _grid_distance(lambda0, betas, exclude_self=False, tol=tol) > band:
        raise ValueError(f"lambda0={lambda0} is not a candidate level within tolerance")
    if brouwer == 0:
        return 0
    mu = isolation_radius(lambda0, betas, tol)
    return brouwer * _morse_jump(A, j, lambda0, mu, tol)


def bifurcation_index(A, brouwer: int, lambda0: float, j_max: int | None = None,
                      tol: TolerancePolicy = DEFAULT_TOL,
                      base_label: str = "equilibrium") -> BifurcationIndex:
    """All nonzero coordinates eta_j for j <= j_max (default covers every
    resonance the spectrum admits at this level)."""
    A = as_symmetric(A, tol)
    betas = _spectrum_betas(A, tol)
    if not betas:
        raise EigenvalueNotFoundError("J A has no purely imaginary frequencies")
    if j_max is None:
        j_max = int(math.ceil(max(betas) / min(betas))) + 1
    if j_max < 1:
        raise ValueError("j_max must be a positive integer")
    band = tol.zero_band(max(1.0, lambda0))
    if _grid_distance(lambda0, betas, exclude_self=False, tol=tol) > band:
        raise ValueError(f"lambda0={lambda0} is not a candidate level within tolerance")

    entries: list[tuple[int, int]] = []
    if brouwer != 0:
        mu = isolation_radius(lambda0, betas, tol)
        for j in range(1, j_max + 1):
            # only levels lambda0/j = 1/beta can carry a jump; skip the rest
            if min(abs(lambda0 / j - 1.0 / b) for b in betas) > band:
                continue
            eta = brouwer * _morse_jump(A, j, lambda0, mu, tol)
            if eta != 0:
                entries.append((j, eta))
    truncated = any(b * lambda0 > j_max + band for b in betas)
    return BifurcationIndex(
        entries=tuple(entries),
        base_point=(base_label, lambda0),
        j_max=j_max,
        truncated=truncated,
    )


@dataclass(frozen=True)
class AssumptionResult:
    """Outcome of one classical hypothesis; None means not evaluated."""

    holds: bool | None
    certified_betas: tuple[float, ...] = ()
    details: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    nonresonant_pair: AssumptionResult       # classical nonresonance hypothesis
    positive_definite: AssumptionResult      # definite Hessian hypothesis
    signature_resonant: AssumptionResult     # nondegenerate + signature + common period
    split_definite: AssumptionResult         # definite on an invariant factor
    split_signature: AssumptionResult        # nonzero signature on an invariant factor


@dataclass(frozen=True)
class NonresonanceReport:
    flags: tuple[tuple[float, bool], ...]
    lower_bound: int


_INT_RATIO_FACTOR = 100.0  # integer-ratio test width, in units of eig_zero_tol


def _is_integer_ratio(ratio: float, tol: TolerancePolicy) -> bool:
    return abs(ratio - round(ratio)) <= _INT_RATIO_FACTOR * tol.eig_zero_tol


def _certify(A, betas, tol) -> tuple[float, ...]:
    out = []
    for beta in betas:
        try:
            if gamma_jump(A, beta, 1, tol) != 0:
                out.append(beta)
        except (DegeneracyError, EigenvalueNotFoundError):
            continue
    return tuple(out)


def _common_period(betas, tol: TolerancePolicy, max_denominator: int = 64):
    """Smallest common period of the rotations at the given frequencies, or None."""
    from fractions import Fraction

    if not betas:
        return None
    base = min(betas)
    denominators = []
    for beta in betas:
        ratio = beta / base
        frac = Fraction(ratio).limit_denominator(max_denominator)
        if abs(ratio - float(frac)) > _INT_RATIO_FACTOR * tol.eig_zero_tol:
            return None
        denominators.append(frac.denominator)
    lcm = 1
    for q in denominators:
        lcm = lcm * q // math.gcd(lcm, q)
    return 2.0 * math.pi * lcm / base


def _validate_split(A, split, tol: TolerancePolicy):
    """Check a claimed invariant J-orthogonal symplectic splitting; return the
    restricted Hessians and flow generators in symplectic coordinates."""
    Q1 = np.asarray(split[0], dtype=float)
    Q2 = np.asarray(split[1], dtype=float)
    dim = A.shape[0]
    for name, Q in (("E1", Q1), ("E2", Q2)):
        if Q.ndim != 2 or Q.shape[0] != dim or Q.shape[1] % 2 != 0 or Q.shape[1] == 0:
            raise SplittingError(f"{name} must be a 2N x 2k basis with k >= 1")
    if Q1.shape[1] + Q2.shape[1] != dim:
        raise SplittingError("splitting dimensions must add up to the full space")
    N = dim // 2
    J = standard_symplectic(N)
    M = J @ A
    scale = max(1.0, matrix_norm(A))
    if np.linalg.norm(Q1.T @ J @ Q2) > tol.residual_tol * scale * dim:
        raise SplittingError("factors are not J-orthogonal")
    parts = []
    for name, Q in (("E1", Q1), ("E2", Q2)):
        if numeric_rank(Q, tol) != Q.shape[1]:
            raise SplittingError(f"{name} basis is rank deficient")
        proj = Q @ np.linalg.solve(Q.T @ Q, Q.T)
        defect = np.linalg.norm(M @ Q - proj @ (M @ Q))
        if defect > tol.residual_tol * scale * dim:
            raise SplittingError(f"{name} is not invariant under the linearized flow")
        try:
            Qs = symplectic_gram_schmidt(Q, tol)
        except ValueError as exc:
            raise SplittingError(f"{name} is not a symplectic subspace: {exc}") from exc
        A_res = Qs.T @ A @ Qs
        M_res = standard_symplectic(Q.shape[1] // 2) @ A_res
        parts.append((A_res, M_res))
    return parts


def check_classical_assumptions(A, split=None, tol: TolerancePolicy = DEFAULT_TOL) -> AssumptionReport:
    """Evaluate the classical hypotheses that imply the branch condition.

    Each satisfied hypothesis reports the frequencies it certifies (those with
    a nonzero Morse jump).  The split-based hypotheses need an invariant
    J-orthogonal symplectic splitting (E1, E2) and are skipped otherwise.
    """
    A = as_symmetric(A, tol)
    N = A.shape[0] // 2
    summary = spectral_summary(standard_symplectic(N) @ A, tol)
    betas = summary.betas
    band = tol.zero_band(matrix_norm(A))
    eigs = np.linalg.eigvalsh(A)
    nondegenerate = bool(np.min(np.abs(eigs)) > band) if eigs.size else False
    has_zero_eig = any(abs(z) <= band for z in summary.other_eigenvalues)

    # classical nonresonance: a simple pair no other frequency divides
    a0_betas = []
    for ev in summary.imaginary:
        if ev.algebraic_mult != 1 or has_zero_eig:
            continue
        resonant = any(
            _is_integer_ratio(other.beta / ev.beta, tol)
            for other in summary.imaginary
            if other.beta != ev.beta
        )
        if not resonant:
            a0_betas.append(ev.beta)
    a0 = AssumptionResult(
        holds=bool(a0_betas),
        certified_betas=_certify(A, a0_betas, tol),
        details="simple pair with no integer frequency ratios"
        if a0_betas
        else "every frequency is resonant, multiple, or the Hessian kernel is nontrivial",
    )

    # definite Hessian
    posdef = bool(eigs.size and np.min(eigs) > band)
    a1 = AssumptionResult(
        holds=posdef,
        certified_betas=_certify(A, betas, tol) if posdef else (),
        details="Hessian positive definite" if posdef else "Hessian not positive definite",
    )

    # nondegenerate + nonzero signature + fully periodic linearized flow
    semisimple = bool(betas) and not summary.has_nonimaginary and all(
        classify_eigenvalue(ev) in (EigenvalueClass.SIMPLE, EigenvalueClass.SEMISIMPLE)
        for ev in summary.imaginary
    )
    sig = int(np.count_nonzero(eigs > band) - np.count_nonzero(eigs < -band))
    period = _common_period(betas, tol) if semisimple else None
    a2_holds = nondegenerate and sig != 0 and semisimple and period is not None
    a2 = AssumptionResult(
        holds=a2_holds,
        certified_betas=_certify(A, betas, tol) if a2_holds else (),
        details=(
            f"signature {sig}, common period {period:.6g}"
            if a2_holds
            else f"nondegenerate={nondegenerate}, signature={sig}, "
            f"semisimple imaginary spectrum={semisimple}, common period={period}"
        ),
    )

    if split is None:
        skipped = AssumptionResult(holds=None, details="requires an invariant splitting")
        return AssumptionReport(a0, a1, a2, skipped, skipped)

    (A1_res, M1_res), (A2_res, M2_res) = _validate_split(A, split, tol)
    w1 = np.linalg.eigvals(M1_res)
    w2 = np.linalg.eigvals(M2_res)
    sep = min((abs(u - v) for u in w1 for v in w2), default=math.inf)
    disjoint = bool(sep > band)
    sub = spectral_summary(M1_res, tol)
    e1_betas = sub.betas
    e1_posdef = bool(np.min(np.linalg.eigvalsh(A1_res)) > band)
    a3_holds = bool(nondegenerate and e1_posdef and disjoint)
    a3 = AssumptionResult(
        holds=a3_holds,
        certified_betas=_certify(A, e1_betas, tol) if a3_holds else (),
        details=f"factor Hessian definite={e1_posdef}, spectra disjoint={disjoint}",
    )
    e1_semisimple = bool(e1_betas) and not sub.has_nonimaginary and all(
        classify_eigenvalue(ev) in (EigenvalueClass.SIMPLE, EigenvalueClass.SEMISIMPLE)
        for ev in sub.imaginary
    )
    w1h = np.linalg.eigvalsh(A1_res)
    sig1 = int(np.count_nonzero(w1h > band) - np.count_nonzero(w1h < -band))
    a4_holds = bool(nondegenerate and e1_semisimple and sig1 != 0 and disjoint)
    a4 = AssumptionResult(
        holds=a4_holds,
        certified_betas=_certify(A, e1_betas, tol) if a4_holds else (),
        details=f"factor signature {sig1}, semisimple={e1_semisimple}, disjoint={disjoint}",
    )
    return AssumptionReport(a0, a1, a2, a3, a4)


def nonresonance_and_branch_count(A, tol: TolerancePolicy = DEFAULT_TOL,
                                  brouwer: int | None = None) -> NonresonanceReport:
    """Flag frequencies no larger frequency divides, and count how many of the
    flagged ones also pass the branch condition (a lower bound on connected
    families with distinct minimal periods)."""
    A = as_symmetric(A, tol)
    N = A.shape[0] // 2
    betas = sorted(spectral_summary(standard_symplectic(N) @ A, tol).betas, reverse=True)
    if not betas:
        raise EigenvalueNotFoundError("J A has no purely imaginary frequencies")
    if brouwer is None:
        try:
            brouwer = brouwer_nondegenerate(A, tol)
        except DegeneracyError:
            brouwer = None
    flags = []
    bound = 0
    for beta in betas:
        flag = not any(_is_integer_ratio(big / beta, tol) for big in betas if big > beta)
        flags.append((beta, flag))
        if flag:
            report = check_main_condition(A, brouwer, beta, tol)
            if report.condition_holds:
                bound += 1
    return NonresonanceReport(flags=tuple(flags), lower_bound=bound)


def check_main_condition(A, brouwer: int | None, beta0: float,
                         tol: TolerancePolicy = DEFAULT_TOL) -> ConditionReport:
    """Evaluate the branch-existence condition at beta0 by both routes.

    The spectral route (gamma) always runs; the structural route (block
    counts) is best effort and its failure only downgrades ``routes_agree``.
    ``condition_holds`` is None when the Brouwer index is unknown.
    """
    A = as_symmetric(A, tol)
    gamma = gamma_jump(A, beta0, j=1, tol=tol)
    N = A.shape[0] // 2
    counts: BlockCounts | None = None
    try:
        blocks = structural_decomposition(standard_symplectic(N) @ A, beta0, tol)
        counts = block_counts(blocks, beta0, tol)
    except (DecompositionError, ValueError):
        counts = None
    routes_agree = None if counts is None else (gamma == -2 * counts.kappa)
    condition_holds = None if brouwer is None else (gamma != 0 and brouwer != 0)
    return ConditionReport(
        beta0=beta0,
        gamma=gamma,
        counts=counts,
        brouwer=brouwer,
        condition_holds=condition_holds,
        routes_agree=routes_agree,
    )
