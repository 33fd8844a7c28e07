"""Catalogue blocks for spectrum {+-i*beta}, assembly, block counts, decomposition.

A frequency beta contributes indecomposable blocks of two kinds: odd
half-dimension blocks built from an anti-diagonal quadratic form plus a
nearest-neighbour coupling, and even half-dimension blocks built from a
rotation pairing plus a two-step coupling.  Each carries a sign epsilon.
``structural_decomposition`` recovers the multiset {(half_dim, epsilon)} of
any Hamiltonian matrix at a given frequency; its sign extraction is pinned by
round-trip tests against the constructors and by the Morse-jump cross check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DecompositionError, StructureError
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_matrix,
    half_dimension,
    is_hamiltonian,
    standard_symplectic,
)
from .spectral import jordan_partition


@dataclass(frozen=True)
class BlockSpec:
    """Catalogue coordinates of one indecomposable block."""

    beta: float
    half_dim: int
    epsilon: int

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if self.half_dim < 1:
            raise ValueError("half_dim must be a positive integer")
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")

    @property
    def dim(self) -> int:
        return 2 * self.half_dim


@dataclass(frozen=True)
class NormalForm:
    """An ordered list of catalogue blocks plus an opaque leftover part.

    ``other_part``, when present, is a Hamiltonian matrix carrying spectrum
    away from the catalogued frequencies; it is assembled verbatim and never
    synthesized here.
    """

    blocks: tuple[BlockSpec, ...]
    other_part: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "blocks", canonical_block_order(self.blocks))
        if self.other_part is not None:
            other = as_matrix(self.other_part, "other_part")
            half_dimension(other, "other_part")
            if not is_hamiltonian(other):
                raise StructureError("other_part must be a Hamiltonian matrix")
            object.__setattr__(self, "other_part", other)
        if not self.blocks and self.other_part is None:
            raise ValueError("normal form needs at least one block or an other_part")

    @property
    def half_dims(self) -> tuple[int, ...]:
        dims = [b.half_dim for b in self.blocks]
        if self.other_part is not None:
            dims.append(self.other_part.shape[0] // 2)
        return tuple(dims)

    @property
    def dim(self) -> int:
        return 2 * sum(self.half_dims)


@dataclass(frozen=True)
class BlockCounts:
    """Counts of odd blocks at one frequency, split by (half_dim+1)/2 parity and sign."""

    o_plus: int
    o_minus: int
    e_plus: int
    e_minus: int

    @property
    def kappa(self) -> int:
        return self.o_plus - self.o_minus - self.e_plus + self.e_minus

    @property
    def total(self) -> int:
        return self.o_plus + self.o_minus + self.e_plus + self.e_minus


def canonical_block_order(blocks) -> tuple[BlockSpec, ...]:
    return tuple(sorted(blocks, key=lambda b: (-b.beta, -b.half_dim, -b.epsilon)))


def odd_block_hessian(half_dim: int, beta: float, epsilon: int, coupling: float = 1.0) -> np.ndarray:
    """Quadratic-form Hessian behind the odd catalogue block.

    ``coupling`` scales the nearest-neighbour x_i y_{i+1} terms; 1.0 gives the
    block itself, and the determinant stays beta^(2*half_dim) along the whole
    [0, 1] path.
    """
    n = half_dim
    if n < 1 or n % 2 == 0:
        raise ValueError("odd blocks need an odd positive half_dim")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    P = np.zeros((n, n))
    for i in range(1, (n - 1) // 2 + 1):
        value = -epsilon * beta * (-1.0) ** (i + 1)
        P[i - 1, n - i] = value
        P[n - i, i - 1] = value
    mid = (n + 1) // 2
    P[mid - 1, mid - 1] = epsilon * beta * (-1.0) ** (n // 2 + 1)
    U = np.zeros((n, n))
    for i in range(1, n):
        U[i - 1, i] = coupling
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = P
    A[n:, n:] = P
    A[:n, n:] = U
    A[n:, :n] = U.T
    return A


def even_block_hessian(half_dim: int, beta: float, epsilon: int, coupling: float = 1.0) -> np.ndarray:
    """Quadratic-form Hessian behind the even catalogue block.

    ``coupling`` scales the two-step couplings and the epsilon terms together;
    the determinant stays beta^(2*half_dim) along the whole [0, 1] path.
    """
    n = half_dim
    if n < 2 or n % 2 == 1:
        raise ValueError("even blocks need an even positive half_dim")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    K = np.zeros((n, n))
    for i in range(1, n // 2 + 1):
        K[2 * i - 2, 2 * i - 1] = beta
        K[2 * i - 1, 2 * i - 2] = -beta
    for i in range(1, n - 1):
        K[i - 1, i + 1] += coupling
    Dx = np.zeros((n, n))
    Dx[n - 2, n - 2] = -epsilon * coupling
    Dx[n - 1, n - 1] = -epsilon * coupling
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = Dx
    A[:n, n:] = K
    A[n:, :n] = K.T
    return A


def block_hessian(spec: BlockSpec) -> np.ndarray:
    if spec.half_dim % 2 == 1:
        return odd_block_hessian(spec.half_dim, spec.beta, spec.epsilon)
    return even_block_hessian(spec.half_dim, spec.beta, spec.epsilon)


def odd_block(half_dim: int, beta: float, epsilon: int) -> np.ndarray:
    """Indecomposable Hamiltonian block with odd half_dim and spectrum {+-i*beta}."""
    A = odd_block_hessian(half_dim, beta, epsilon)
    return standard_symplectic(half_dim) @ A


def even_block(half_dim: int, beta: float, epsilon: int) -> np.ndarray:
    """Indecomposable Hamiltonian block with even half_dim and spectrum {+-i*beta}."""
    A = even_block_hessian(half_dim, beta, epsilon)
    return standard_symplectic(half_dim) @ A


def block_matrix(spec: BlockSpec) -> np.ndarray:
    return standard_symplectic(spec.half_dim) @ block_hessian(spec)


def interleave_permutation(half_dims) -> np.ndarray:
    """Permutation P mapping stacked per-block (x, y) coordinates to the
    interleaved layout (all x's first, then all y's): A_out = P A_in P^T.

    P carries the stacked symplectic structure diag(J_1, ..., J_s) onto the
    standard J of the full dimension, so conjugating by it preserves the
    Hamiltonian property.
    """
    half_dims = list(half_dims)
    if not half_dims or any(n < 1 for n in half_dims):
        raise ValueError("half_dims must be positive integers")
    N = sum(half_dims)
    P = np.zeros((2 * N, 2 * N))
    ds = 0
    offset = 0
    for n in half_dims:
        for i in range(n):
            P[offset + i, ds + i] = 1.0          # x part
            P[N + offset + i, ds + n + i] = 1.0  # y part
        ds += 2 * n
        offset += n
    return P


def assemble_hessian(nf: NormalForm, layout: str = "interleaved") -> np.ndarray:
    """Hessian of the assembled normal form, in the requested layout."""
    hessians = [block_hessian(b) for b in nf.blocks]
    if nf.other_part is not None:
        other = nf.other_part
        hessians.append(-standard_symplectic(other.shape[0] // 2) @ other)
    A = scipy.linalg.block_diag(*hessians)
    if layout == "direct_sum":
        return A
    if layout == "interleaved":
        P = interleave_permutation(nf.half_dims)
        return P @ A @ P.T
    raise ValueError(f"unknown layout {layout!r}")


def assemble_normal_form(nf: NormalForm, layout: str = "interleaved") -> np.ndarray:
    """Assembled Hamiltonian matrix.

    ``interleaved`` (default) groups all x coordinates first and all y
    coordinates second, so the result is Hamiltonian for the standard J of the
    full dimension.  ``direct_sum`` stacks the blocks verbatim; it is
    Hamiltonian for the stacked block-diagonal symplectic structure and is the
    natural layout for per-block computations.
    """
    A = assemble_hessian(nf, layout="direct_sum")
    if layout == "direct_sum":
        J = scipy.linalg.block_diag(*[standard_symplectic(n) for n in nf.half_dims])
        return J @ A
    if layout == "interleaved":
        P = interleave_permutation(nf.half_dims)
        N = sum(nf.half_dims)
        return standard_symplectic(N) @ (P @ A @ P.T)
    raise ValueError(f"unknown layout {layout!r}")


def block_counts(source, beta: float, tol: TolerancePolicy = DEFAULT_TOL) -> BlockCounts:
    """Count odd blocks at the given frequency.

    ``source`` is a :class:`NormalForm` or an iterable of :class:`BlockSpec`.
    Blocks of even half-dimension never enter the counts; an absent frequency
    yields all zeros.
    """
    blocks = source.blocks if isinstance(source, NormalForm) else tuple(source)
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    band = tol.zero_band(beta)
    o_plus = o_minus = e_plus = e_minus = 0
    for b in blocks:
        if abs(b.beta - beta) > band or b.half_dim % 2 == 0:
            continue
        odd_level = ((b.half_dim + 1) // 2) % 2 == 1
        if odd_level:
            if b.epsilon > 0:
                o_plus += 1
            else:
                o_minus += 1
        else:
            if b.epsilon > 0:
                e_plus += 1
            else:
                e_minus += 1
    return BlockCounts(o_plus, o_minus, e_plus, e_minus)


# --- sign characteristic extraction ---------------------------------------
#
# On the generalized eigenspace E of +i*beta the Hermitian form
# K(u, v) = conj(u)^T (-iJ) v is nondegenerate and T = (M - i*beta) is
# K-skew-adjoint.  The Hermitian moment forms
#
#     G_k = i^(k-1) * K restricted against T^(k-1)
#
# have congruence-invariant signatures that mix the per-size sign sums
# triangularly; `_chain_sign_sums` inverts that mixing.  The parity factor
# below converts a canonical-chain contribution of a size-n block to its
# footprint in sig(G_k); `_sign_to_epsilon` converts the resulting chain sign
# into the catalogue epsilon (calibrated once against the constructors).


def _chain_factor(n: int, k: int) -> int:
    # contribution sign of a size-n chain with invariant +1 to sig(G_k); n = k mod 2
    if n % 2 == 1:
        exponent = (k - 1) // 2 + (n + k) // 2 - 1
    else:
        exponent = k // 2 + (n + k) // 2 - 1
    return -1 if exponent % 2 else 1


def _sign_to_epsilon(n: int, sign: int) -> int:
    # catalogue epsilon of a size-n block from its chain sign (calibrated
    # against the constructors; round-trip tests pin this table)
    if n % 2 == 1:
        return -sign
    return sign if (n // 2) % 2 == 1 else -sign


def _invariant_subspace(M: np.ndarray, beta: float, expected_dim: int, tol: TolerancePolicy):
    """Orthonormal basis of the generalized eigenspace of +i*beta via sorted Schur.

    The selection radius is data-driven: halfway between the expected_dim
    eigenvalues nearest to i*beta and the first one beyond them.
    """
    target = 1j * beta
    dist = np.sort(np.abs(np.linalg.eigvals(M) - target))
    if expected_dim >= dist.size:
        radius = np.inf
    else:
        radius = 0.5 * (dist[expected_dim - 1] + dist[expected_dim])
        if dist[expected_dim - 1] >= radius:
            raise DecompositionError(
                f"no eigenvalue gap separates the cluster at beta={beta}"
            )
    _, Z, sdim = scipy.linalg.schur(
        M.astype(complex), output="complex", sort=lambda z: bool(abs(z - target) < radius)
    )
    if sdim != expected_dim:
        raise DecompositionError(
            f"invariant subspace at beta={beta} has dimension {sdim}, expected {expected_dim}"
        )
    return Z[:, :sdim]


def _signature_with_gap(G: np.ndarray, expected_rank: int):
    """Signature of the top ``expected_rank`` eigenvalues, plus the rank gap."""
    w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    w = w[np.argsort(-np.abs(w))]
    if expected_rank > w.size:
        raise DecompositionError("expected rank exceeds form dimension")
    kept = w[:expected_rank]
    dropped = w[expected_rank:]
    gap = np.inf
    if expected_rank and dropped.size:
        bottom = abs(dropped[0])
        gap = np.inf if bottom == 0.0 else abs(kept[-1]) / bottom
    sig = int(np.count_nonzero(kept > 0) - np.count_nonzero(kept < 0))
    return sig, float(gap)


def _chain_sign_sums(partition, signatures):
    """Solve the triangular mixing for the per-size sums of chain signs."""
    sizes = sorted(set(partition), reverse=True)
    counts = {n: partition.count(n) for n in sizes}
    sums: dict[int, int] = {}
    for n in sizes:
        acc = signatures[n]
        for m in sizes:
            if m > n and (m - n) % 2 == 0:
                acc -= _chain_factor(m, n) * sums[m]
        sums[n] = acc * _chain_factor(n, n)
    return sums, counts


def structural_decomposition(
    M, beta: float, tol: TolerancePolicy = DEFAULT_TOL
) -> list[BlockSpec]:
    """Catalogue blocks {(half_dim, epsilon)} of M at frequency beta.

    Sizes come from the Jordan partition; signs from the signatures of the
    Hermitian moment forms on the generalized eigenspace.  The output is
    invariant under symplectic conjugation of M.
    """
    M = as_matrix(M)
    N = half_dimension(M)
    if 2 * N > 64:
        raise ValueError("decomposition supported up to dimension 64")
    if not is_hamiltonian(M, tol):
        raise StructureError("structural_decomposition expects a Hamiltonian matrix")
    if beta <= 0.0:
        raise ValueError("beta must be positive")

    partition = list(jordan_partition(M, beta, tol))
    d = sum(partition)
    E = _invariant_subspace(M, beta, d, tol)

    T_sub = E.conj().T @ M @ E - 1j * beta * np.eye(d)
    J = standard_symplectic(N)
    K_E = E.conj().T @ (-1j * J) @ E
    K_E = 0.5 * (K_E + K_E.conj().T)

    sizes = sorted(set(partition), reverse=True)
    counts = {n: partition.count(n) for n in sizes}
    signatures: dict[int, int] = {}
    gaps: dict[int, float] = {}
    power = np.eye(d, dtype=complex)
    for k in range(1, max(sizes) + 1):
        if k > 1:
            power = power @ T_sub
        expected_rank = sum(counts[n] * (n - k + 1) for n in sizes if n >= k)
        G = (1j) ** (k - 1) * K_E @ power
        sig, gap = _signature_with_gap(G, expected_rank)
        signatures[k] = sig
        gaps[k] = gap
    if min(gaps.values(), default=np.inf) < 1.0e2:
        raise DecompositionError(
            f"moment-form rank gap too small at beta={beta}", rank_gaps=gaps
        )

    sums, _ = _chain_sign_sums(partition, signatures)

    blocks: list[BlockSpec] = []
    for n in sizes:
        total, signed = counts[n], sums[n]
        if abs(signed) > total or (total + signed) % 2 != 0:
            raise DecompositionError(
                f"sign sum {signed} incompatible with {total} blocks of size {n}",
                rank_gaps=gaps,
            )
        plus = (total + signed) // 2
        minus = (total - signed) // 2
        blocks.extend([BlockSpec(beta, n, _sign_to_epsilon(n, +1))] * plus)
        blocks.extend([BlockSpec(beta, n, _sign_to_epsilon(n, -1))] * minus)
    return list(canonical_block_order(blocks))
