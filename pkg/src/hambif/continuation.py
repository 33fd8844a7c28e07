"""Periodic-orbit continuation for polynomial Hamiltonian fields.

The family traced here keeps the period fixed at 2*pi and continues in the
time-scale parameter lambda, so orbits of x' = lambda J grad H(x) correspond
to orbits of the unscaled field with period 2*pi*lambda.  Orbits are corrected
by Gauss-Newton shooting with variational-equation Jacobians and continued by
pseudo-arclength steps in (x0, lambda).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CorrectorError, EigenvalueNotFoundError, IntegrationError
from .linalg import as_symmetric, standard_symplectic

TWO_PI = 2.0 * math.pi

# solve_ivp controls the local error; run it below the advertised tolerance so
# accumulated drift over one period stays within the 10x-tolerance contract
_SAFETY = 1.0e-2


@dataclass(frozen=True)
class PolynomialHamiltonian:
    """Polynomial H on R^(2N) as (coefficient, exponent vector) terms."""

    dim: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2 != 0:
            raise ValueError("dim must be an even integer >= 2")
        cleaned = []
        for coeff, exps in self.terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.dim or any(e < 0 for e in exps):
                raise ValueError("exponent vectors must be nonnegative of length dim")
            if coeff != 0.0:
                cleaned.append((coeff, exps))
        object.__setattr__(self, "terms", tuple(cleaned))

    @classmethod
    def from_quadratic(cls, A) -> "PolynomialHamiltonian":
        """The quadratic Hamiltonian x -> x^T A x / 2."""
        A = as_symmetric(A)
        dim = A.shape[0]
        terms = []
        for i in range(dim):
            for j in range(i, dim):
                coeff = A[i, i] / 2.0 if i == j else A[i, j]
                if coeff != 0.0:
                    e = [0] * dim
                    e[i] += 1
                    e[j] += 1
                    terms.append((coeff, tuple(e)))
        return cls(dim=dim, terms=tuple(terms))

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for coeff, exps in self.terms:
            total += coeff * np.prod([x[k] ** e for k, e in enumerate(exps) if e])
        return float(total)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.dim)
        for coeff, exps in self.terms:
            for k, ek in enumerate(exps):
                if ek == 0:
                    continue
                prod = coeff * ek
                for m, em in enumerate(exps):
                    p = em - 1 if m == k else em
                    if p:
                        prod *= x[m] ** p
                g[k] += prod
        return g

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        H = np.zeros((self.dim, self.dim))
        for coeff, exps in self.terms:
            for k, ek in enumerate(exps):
                if ek == 0:
                    continue
                for l, el in enumerate(exps):
                    factor = ek * (ek - 1) if l == k else ek * el
                    if factor == 0:
                        continue
                    prod = coeff * factor
                    for m, em in enumerate(exps):
                        p = em - (2 if (m == k and l == k) else (1 if m in (k, l) else 0))
                        if p:
                            prod *= x[m] ** p
                    H[k, l] += prod
        return 0.5 * (H + H.T)


@dataclass(frozen=True)
class HamiltonianField:
    """x -> lam * J * grad H(x), with the matching Jacobian for variational runs."""

    H: PolynomialHamiltonian
    lam: float

    def __call__(self, x) -> np.ndarray:
        J = standard_symplectic(self.H.dim // 2)
        return self.lam * (J @ self.H.gradient(x))

    def jacobian(self, x) -> np.ndarray:
        J = standard_symplectic(self.H.dim // 2)
        return self.lam * (J @ self.H.hessian(x))


@dataclass(frozen=True)
class LinearField:
    """x -> M x; convenient for flow tests on linear systems."""

    M: np.ndarray

    def __call__(self, x) -> np.ndarray:
        return self.M @ np.asarray(x, dtype=float)

    def jacobian(self, x) -> np.ndarray:
        return np.asarray(self.M, dtype=float)


def gradient_field(H: PolynomialHamiltonian, lam: float) -> HamiltonianField:
    """The time-scaled Hamiltonian vector field lambda * J * grad H."""
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    return HamiltonianField(H=H, lam=lam)


@dataclass(frozen=True)
class FlowResult:
    endpoint: np.ndarray
    monodromy: np.ndarray
    solution: object  # dense interpolant over [0, T]


def flow(field, x0, T: float, rtol: float = 1e-10, atol: float = 1e-10,
         domain_bound: float = 1e6, dense: bool = False) -> FlowResult:
    """Integrate the field and its variational equations over [0, T].

    Uses an adaptive embedded 5(4) pair.  Exceeding ``domain_bound`` in norm or
    an integrator failure raises :class:`IntegrationError` with the exit time.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    jac = getattr(field, "jacobian", None)
    if jac is None:
        raise ValueError("field must expose a jacobian for variational integration")

    def rhs(t, y):
        x = y[:n]
        Phi = y[n:].reshape(n, n)
        dx = field(x)
        dPhi = jac(x) @ Phi
        return np.concatenate([dx, dPhi.ravel()])

    def escape(t, y):
        return float(np.linalg.norm(y[:n]) - domain_bound)

    escape.terminal = True
    escape.direction = 1.0

    y0 = np.concatenate([x0, np.eye(n).ravel()])
    sol = solve_ivp(
        rhs,
        (0.0, T),
        y0,
        method="RK45",
        rtol=max(rtol * _SAFETY, 1e-13),
        atol=max(atol * _SAFETY, 1e-14),
        events=escape,
        dense_output=dense,
    )
    if sol.t_events and sol.t_events[0].size:
        raise IntegrationError(
            f"trajectory left the domain (norm > {domain_bound:g})",
            exit_time=float(sol.t_events[0][0]),
        )
    if not sol.success:
        raise IntegrationError(sol.message, exit_time=float(sol.t[-1]))
    yT = sol.y[:, -1]
    return FlowResult(
        endpoint=yT[:n],
        monodromy=yT[n:].reshape(n, n),
        solution=sol.sol if dense else None,
    )


@dataclass(frozen=True)
class PeriodicOrbit:
    """One corrected 2*pi-periodic orbit of the time-scaled family."""

    x0: np.ndarray
    lam: float
    amplitude: float
    residual: float
    energy_drift: float
    period_in_rescaled_time: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        if self.lam <= 0.0:
            raise ValueError("lambda must stay positive along a branch")


@dataclass(frozen=True)
class Branch:
    orbits: tuple[PeriodicOrbit, ...]
    origin: tuple[tuple[float, ...], float]  # (equilibrium point, beta0)
    termination: str  # step_budget | domain_boundary | corrector_failure | amplitude_target

    def lambdas(self) -> np.ndarray:
        return np.array([o.lam for o in self.orbits])

    def amplitudes(self) -> np.ndarray:
        return np.array([o.amplitude for o in self.orbits])


@dataclass(frozen=True)
class ContinuationConfig:
    corrector_tol: float = 1e-9
    max_corrector_iters: int = 25
    integrator_rtol: float = 1e-10
    integrator_atol: float = 1e-10
    seed_amplitude: float = 0.01
    initial_step: float = 0.02
    min_step: float = 1e-6
    max_step: float = 0.15
    growth: float = 1.3
    growth_after: int = 3
    max_steps: int = 400
    amplitude_cap: float = 1.0
    amplitude_target: float | None = None
    lambda_min: float = 1e-3
    lambda_max: float = 1e3
    domain_bound: float = 100.0
    sample_points: int = 256


DEFAULT_CONFIG = ContinuationConfig()


def _orbit_diagnostics(H, equilibrium, x0, lam, config, dense_sol):
    ts = np.linspace(0.0, TWO_PI, config.sample_points)
    n = x0.size
    states = dense_sol(ts)[:n, :]
    amplitude = float(np.max(np.linalg.norm(states - equilibrium[:, None], axis=0)))
    h0 = H.value(x0)
    energies = np.array([H.value(states[:, k]) for k in range(ts.size)])
    drift = float(np.max(np.abs(energies - h0)))
    return amplitude, drift


def _shoot(H, equilibrium, x0, lam, config):
    field = gradient_field(H, lam)
    result = flow(
        field,
        x0,
        TWO_PI,
        rtol=config.integrator_rtol,
        atol=config.integrator_atol,
        domain_bound=config.domain_bound,
        dense=True,
    )
    defect = result.endpoint - x0
    dlam = (TWO_PI / lam) * field(result.endpoint)
    return defect, result.monodromy, dlam, result.solution


def correct_orbit(H: PolynomialHamiltonian, guess: PeriodicOrbit,
                  config: ContinuationConfig = DEFAULT_CONFIG,
                  equilibrium=None, constraint=None) -> PeriodicOrbit:
    """Gauss-Newton correction of the 2*pi shooting system.

    The bordered system is {shooting defect, phase anchor, one scalar
    constraint}; by default the constraint pins the distance from the
    equilibrium at the guess amplitude, while branch stepping passes a
    pseudo-arclength row instead.
    """
    n = H.dim
    equilibrium = np.zeros(n) if equilibrium is None else np.asarray(equilibrium, dtype=float)
    x0 = np.asarray(guess.x0, dtype=float).copy()
    lam = float(guess.lam)
    if constraint is None:
        target = float(guess.amplitude)
        if target <= 0.0:
            raise ValueError("guess amplitude must be positive")

        def constraint(x, lam_):
            r = np.linalg.norm(x - equilibrium)
            row = np.zeros(n + 1)
            if r > 0.0:
                row[:n] = (x - equilibrium) / r
            return r - target, row

    x_ref = x0.copy()
    f_ref = gradient_field(H, lam)(x_ref)
    if np.linalg.norm(f_ref) == 0.0:
        raise CorrectorError("phase anchor sits at an equilibrium", residual=np.inf)

    residual = math.inf
    dense = None
    for _ in range(config.max_corrector_iters):
        if not (config.lambda_min / 10.0 < lam < config.lambda_max * 10.0):
            raise CorrectorError(f"lambda {lam:g} left the trust window", residual=residual)
        defect, monodromy, dlam, dense = _shoot(H, equilibrium, x0, lam, config)
        phase = float(f_ref @ (x0 - x_ref))
        cval, crow = constraint(x0, lam)
        F = np.concatenate([defect, [phase, cval]])
        residual = float(np.linalg.norm(defect))
        if residual <= config.corrector_tol and abs(phase) <= config.corrector_tol and \
                abs(cval) <= config.corrector_tol:
            amplitude, drift = _orbit_diagnostics(H, equilibrium, x0, lam, config, dense)
            return PeriodicOrbit(
                x0=x0, lam=lam, amplitude=amplitude, residual=residual, energy_drift=drift
            )
        jac = np.zeros((n + 2, n + 1))
        jac[:n, :n] = monodromy - np.eye(n)
        jac[:n, n] = dlam
        jac[n, :n] = f_ref
        jac[n + 1, :] = crow
        step, *_ = np.linalg.lstsq(jac, -F, rcond=None)
        x0 = x0 + step[:n]
        lam = lam + step[n]
    raise CorrectorError(
        f"no convergence in {config.max_corrector_iters} iterations", residual=residual
    )


def seed_from_linearization(A, beta0: float, amplitude: float,
                            equilibrium=None) -> PeriodicOrbit:
    """Predictor on the eigendirection of i*beta0, at the linear level 1/beta0."""
    A = as_symmetric(A)
    if amplitude <= 0.0:
        raise ValueError("amplitude must be positive")
    n = A.shape[0]
    equilibrium = np.zeros(n) if equilibrium is None else np.asarray(equilibrium, dtype=float)
    M = standard_symplectic(n // 2) @ A
    # a geometric eigenvector always exists; the SVD null vector of the shifted
    # matrix stays machine-accurate even when i*beta0 is defective
    shifted = M.astype(complex) - 1j * beta0 * np.eye(n)
    _, s, Vh = np.linalg.svd(shifted)
    if s[-1] > 1e-6 * s[0]:
        raise EigenvalueNotFoundError(f"i*{beta0} is not in the spectrum")
    v = Vh[-1].conj()
    direction = v.real
    if np.linalg.norm(direction) < 1e-8:
        direction = v.imag
    direction = direction / np.linalg.norm(direction)
    return PeriodicOrbit(
        x0=equilibrium + amplitude * direction,
        lam=1.0 / beta0,
        amplitude=amplitude,
        residual=math.inf,
        energy_drift=math.inf,
    )


def _arclength_constraint(tangent, z_pred, n):
    def constraint(x, lam_):
        z = np.concatenate([x, [lam_]])
        return float(tangent @ (z - z_pred)), tangent

    return constraint


def continue_branch(H: PolynomialHamiltonian, seed: PeriodicOrbit,
                    config: ContinuationConfig = DEFAULT_CONFIG,
                    equilibrium=None, beta0: float | None = None) -> Branch:
    """Pseudo-arclength continuation in (x0, lambda) from a linearization seed.

    The step halves on corrector failure and grows by ``growth`` after
    ``growth_after`` consecutive successes.  Termination is recorded as one of
    step_budget / domain_boundary / corrector_failure / amplitude_target.
    """
    n = H.dim
    equilibrium = np.zeros(n) if equilibrium is None else np.asarray(equilibrium, dtype=float)
    origin = (tuple(float(v) for v in equilibrium), float(beta0 if beta0 is not None else seed.lam))

    try:
        first = correct_orbit(H, seed, config, equilibrium)
    except (CorrectorError, IntegrationError):
        return Branch(orbits=(), origin=origin, termination="corrector_failure")
    orbits = [first]

    # second anchor slightly farther out, still amplitude-pinned
    second_guess = replace(
        seed,
        x0=equilibrium + (first.x0 - equilibrium) * (1.0 + config.initial_step / max(first.amplitude, 1e-12)),
        lam=first.lam,
        amplitude=first.amplitude + config.initial_step,
    )
    try:
        second = correct_orbit(H, second_guess, config, equilibrium)
        orbits.append(second)
    except (CorrectorError, IntegrationError):
        return Branch(orbits=tuple(orbits), origin=origin, termination="corrector_failure")

    h = config.initial_step
    streak = 0
    termination = "step_budget"
    for _ in range(config.max_steps):
        current, previous = orbits[-1], orbits[-2]
        if current.amplitude >= config.amplitude_cap or (
            config.amplitude_target is not None
            and current.amplitude >= config.amplitude_target
        ):
            termination = "amplitude_target"
            break
        if not (config.lambda_min < current.lam < config.lambda_max):
            termination = "domain_boundary"
            break
        assert current.lam > 0.0, "lambda reached the boundary of the admissible window"

        z_now = np.concatenate([current.x0, [current.lam]])
        z_prev = np.concatenate([previous.x0, [previous.lam]])
        tangent = z_now - z_prev
        norm_t = np.linalg.norm(tangent)
        if norm_t == 0.0:
            termination = "corrector_failure"
            break
        tangent = tangent / norm_t

        stepped = False
        while h >= config.min_step:
            z_pred = z_now + h * tangent
            guess = PeriodicOrbit(
                x0=z_pred[:n],
                lam=float(z_pred[n]),
                amplitude=max(current.amplitude, config.seed_amplitude),
                residual=math.inf,
                energy_drift=math.inf,
            )
            try:
                nxt = correct_orbit(
                    H, guess, config, equilibrium,
                    constraint=_arclength_constraint(tangent, z_pred, n),
                )
            except (CorrectorError, IntegrationError, ValueError):
                h *= 0.5
                streak = 0
                continue
            orbits.append(nxt)
            streak += 1
            if streak >= config.growth_after:
                h = min(h * config.growth, config.max_step)
                streak = 0
            stepped = True
            break
        if not stepped:
            termination = "corrector_failure"
            break
    return Branch(orbits=tuple(orbits), origin=origin, termination=termination)


def verify_period_limit(branch: Branch, beta0: float, epsilon: float, delta: float) -> bool:
    """True iff every branch orbit with amplitude < delta has its unscaled
    period 2*pi*lambda within epsilon of 2*pi/beta0."""
    if not branch.orbits:
        raise ValueError("branch is empty")
    for orbit in branch.orbits:
        if orbit.amplitude < delta:
            if abs(TWO_PI * orbit.lam - TWO_PI / beta0) >= epsilon:
                return False
    return True


def minimal_period_estimate(orbit: PeriodicOrbit, H: PolynomialHamiltonian,
                            config: ContinuationConfig = DEFAULT_CONFIG,
                            k_max: int = 32) -> float:
    """Smallest T = 2*pi/k at which the orbit returns to x0, else 2*pi."""
    if orbit.amplitude <= 0.0:
        raise ValueError("orbit must be nonstationary")
    field = gradient_field(H, orbit.lam)
    result = flow(
        field,
        orbit.x0,
        TWO_PI,
        rtol=config.integrator_rtol,
        atol=config.integrator_atol,
        domain_bound=config.domain_bound,
        dense=True,
    )
    n = orbit.x0.size
    for k in range(k_max, 1, -1):
        point = result.solution(TWO_PI / k)[:n]
        if np.linalg.norm(point - orbit.x0) <= 10.0 * config.corrector_tol:
            return TWO_PI / k
    return TWO_PI
