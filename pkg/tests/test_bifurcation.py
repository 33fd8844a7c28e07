import numpy as np
import pytest

from hambif import (
    BlockSpec,
    DegeneracyError,
    NormalForm,
    assemble_hessian,
    bifurcation_index,
    brouwer_nondegenerate,
    brouwer_planar,
    check_classical_assumptions,
    check_main_condition,
    choose_mu,
    eta_coordinate,
    even_block_hessian,
    gamma_block,
    gamma_jump,
    lambda_set,
    morse_index,
    nonresonance_and_branch_count,
    odd_block_hessian,
    random_symplectic,
    standard_symplectic,
    t_matrix,
)
from hambif.errors import PlanarDegreeError, SplittingError

from conftest import random_normal_form


def oscillators(*betas):
    """Hessian whose linearization has simple frequencies at the given betas."""
    return assemble_hessian(NormalForm(tuple(BlockSpec(b, 1, -1) for b in betas)))


class TestTMatrix:
    def test_closed_form_eigenvalues(self):
        T = t_matrix(1, 0.5, np.eye(2))
        assert np.allclose(np.sort(np.linalg.eigvalsh(T)), [-1.5, -1.5, 0.5, 0.5])

    def test_level_rescaling_identity(self, rng):
        A = rng.uniform(-1, 1, (4, 4))
        A = 0.5 * (A + A.T)
        assert np.array_equal(t_matrix(3, 2.4, A), t_matrix(1, 2.4 / 3, A))

    def test_degenerate_at_characteristic_level(self):
        assert abs(np.linalg.det(t_matrix(1, 1.0 / 0.7, 0.7 * np.eye(2)))) < 1e-9

    def test_symmetric(self, rng):
        A = rng.uniform(-1, 1, (6, 6))
        A = 0.5 * (A + A.T)
        T = t_matrix(2, 1.7, A)
        assert np.array_equal(T, T.T)


class TestLambdaSet:
    def test_two_frequencies(self):
        ls = lambda_set(oscillators(1.0, 2.0), 2.5)
        assert np.allclose(ls.points, [0.5, 1.0, 1.5, 2.0, 2.5])

    def test_single_frequency(self):
        ls = lambda_set(np.eye(2), 3.0)
        assert np.allclose(ls.points, [1.0, 2.0, 3.0])

    def test_no_imaginary_spectrum(self):
        ls = lambda_set(np.diag([1.0, -1.0]), 5.0)
        assert ls.points == ()

    def test_sources_recorded(self):
        ls = lambda_set(oscillators(1.0, 2.0), 2.5)
        betas = sorted(round(b, 6) for b, _ in ls.source_betas)
        assert betas == [1.0, 2.0]
        for beta, ms in ls.source_betas:
            assert list(ms) == list(range(1, len(ms) + 1))


class TestChooseMu:
    def test_single_frequency(self):
        ls = lambda_set(np.eye(2), 3.0)
        assert choose_mu(1.0, ls) == pytest.approx(0.5)

    def test_two_frequencies(self):
        ls = lambda_set(oscillators(1.0, 2.0), 3.0)
        assert choose_mu(1.0, ls) == pytest.approx(0.25)

    def test_dense_grid(self):
        ls = lambda_set(oscillators(1.0, 10.0), 3.0)
        assert choose_mu(1.0, ls) == pytest.approx(0.05)

    def test_rejects_off_grid(self):
        ls = lambda_set(np.eye(2), 3.0)
        with pytest.raises(ValueError):
            choose_mu(1.37, ls)

    def test_computed_beyond_truncation(self):
        # nearest neighbour of lambda0=3 is 4, beyond lambda_max: still exact
        ls = lambda_set(np.eye(2), 3.0)
        assert choose_mu(3.0, ls) == pytest.approx(0.5)


class TestGammaJump:
    def test_oscillator(self):
        assert gamma_jump(np.eye(2), 1.0) == 2

    @pytest.mark.parametrize("n", [1, 3, 5, 7])
    @pytest.mark.parametrize("eps", [1, -1])
    def test_odd_blocks_closed_form(self, n, eps):
        A = odd_block_hessian(n, 1.0, eps)
        assert gamma_jump(A, 1.0) == 2 * (-1) ** (((n + 1) // 2) % 2) * eps

    @pytest.mark.parametrize("n", [2, 4, 6])
    @pytest.mark.parametrize("eps", [1, -1])
    def test_even_blocks_vanish(self, n, eps):
        assert gamma_jump(even_block_hessian(n, 1.0, eps), 1.0) == 0

    def test_always_even(self, rng):
        for trial in range(15):
            nf = random_normal_form(rng, max_total_half_dim=5)
            A = assemble_hessian(nf)
            for beta in sorted({b.beta for b in nf.blocks}):
                assert gamma_jump(A, beta) % 2 == 0

    def test_higher_index_resonance(self):
        # levels of T_2 around 1/beta0 = 1 resonate only through beta = 2
        A = oscillators(1.0, 2.0)
        assert gamma_jump(A, 1.0, j=2) == 2  # beta=2 block seen by the j=2 family
        assert gamma_jump(oscillators(1.0), 1.0, j=2) == 0


class TestGammaBlock:
    @pytest.mark.parametrize(
        "n,eps,value",
        [(5, -1, 2), (3, 1, 2), (4, 1, 0), (4, -1, 0), (1, -1, 2), (1, 1, -2), (7, -1, -2)],
    )
    def test_closed_form(self, n, eps, value):
        assert gamma_block(BlockSpec(1.0, n, eps)) == value

    def test_five_group_values(self):
        groups = [
            BlockSpec(1.0, 1, +1),   # level odd, eps +
            BlockSpec(1.0, 1, -1),   # level odd, eps -
            BlockSpec(1.0, 3, +1),   # level even, eps +
            BlockSpec(1.0, 3, -1),   # level even, eps -
            BlockSpec(1.0, 2, +1),   # even half_dim
        ]
        assert [gamma_block(b) for b in groups] == [-2, 2, 2, -2, 0]

    def test_matches_morse_route(self):
        for n in (1, 3, 5):
            for eps in (1, -1):
                A = odd_block_hessian(n, 1.0, eps)
                assert gamma_block(BlockSpec(1.0, n, eps)) == 2 * (morse_index(-A) - n)


class TestBrouwer:
    def test_identity(self):
        assert brouwer_nondegenerate(np.eye(4)) == 1

    def test_saddle(self):
        assert brouwer_nondegenerate(np.diag([1.0, -1.0])) == -1

    def test_worked_example_hessian(self):
        nf = NormalForm((BlockSpec(1.0, 5, -1), BlockSpec(1.0, 3, +1), BlockSpec(1.0, 2, +1)))
        assert brouwer_nondegenerate(assemble_hessian(nf)) == 1

    def test_degenerate_raises(self):
        with pytest.raises(DegeneracyError):
            brouwer_nondegenerate(np.diag([1.0, 0.0]))

    def test_planar_identity(self):
        assert brouwer_planar(lambda p: p, (0.0, 0.0), 0.8) == 1

    def test_planar_squaring(self):
        field = lambda p: np.array([p[0] ** 2 - p[1] ** 2, 2.0 * p[0] * p[1]])
        assert brouwer_planar(field, (0.0, 0.0), 1.0) == 2

    def test_planar_reflection(self):
        assert brouwer_planar(lambda p: np.array([p[0], -p[1]]), (0.0, 0.0), 1.0) == -1

    def test_planar_vanishing_field(self):
        with pytest.raises(PlanarDegreeError):
            brouwer_planar(lambda p: np.zeros(2), (0.0, 0.0), 1.0)


class TestEtaAndIndex:
    def test_eta_fundamental(self):
        assert eta_coordinate(np.eye(2), 1, 1.0, 1) == 2

    def test_eta_off_resonance(self):
        assert eta_coordinate(np.eye(2), 1, 1.0, 2) == 0

    def test_eta_linearity_in_brouwer(self):
        assert eta_coordinate(np.eye(2), -1, 1.0, 1) == -2

    def test_index_oscillator(self):
        bif = bifurcation_index(np.eye(2), 1, 1.0, j_max=5)
        assert dict(bif.entries) == {1: 2}
        assert not bif.truncated

    def test_index_two_frequencies(self):
        A = oscillators(1.0, 2.0)
        bif = bifurcation_index(A, 1, 1.0, j_max=5)
        assert dict(bif.entries) == {1: 2, 2: 2}

    def test_zero_brouwer_gives_trivial(self):
        bif = bifurcation_index(oscillators(1.0, 2.0), 0, 1.0, j_max=4)
        assert bif.is_trivial

    def test_truncation_flag(self):
        A = oscillators(1.0, 5.0)
        bif = bifurcation_index(A, 1, 1.0, j_max=2)
        assert bif.truncated
        full = bifurcation_index(A, 1, 1.0)  # default j_max covers everything
        assert not full.truncated
        assert dict(full.entries)[5] != 0


class TestMainCondition:
    def test_worked_example(self):
        nf = NormalForm((BlockSpec(1.0, 5, -1), BlockSpec(1.0, 3, +1), BlockSpec(1.0, 2, +1)))
        A = assemble_hessian(nf)
        report = check_main_condition(A, brouwer_nondegenerate(A), 1.0)
        assert report.kappa == -2
        assert report.gamma == 4
        assert report.brouwer == 1
        assert report.condition_holds is True
        assert report.routes_agree is True

    def test_cancelling_pair_fails(self):
        nf = NormalForm((BlockSpec(1.0, 1, +1), BlockSpec(1.0, 1, -1)))
        A = assemble_hessian(nf)
        report = check_main_condition(A, brouwer_nondegenerate(A), 1.0)
        assert report.kappa == 0 and report.gamma == 0
        assert report.condition_holds is False

    def test_positive_definite_always_holds(self, rng):
        for trial in range(8):
            dim = 2 * int(rng.integers(1, 4))
            Q = rng.normal(size=(dim, dim))
            A = Q @ Q.T + 0.3 * np.eye(dim)
            from hambif import imaginary_spectrum

            M = standard_symplectic(dim // 2) @ A
            for ev in imaginary_spectrum(M):
                report = check_main_condition(A, brouwer_nondegenerate(A), ev.beta)
                assert report.condition_holds is True
                assert report.gamma == 2 * report.counts.o_minus > 0

    def test_unknown_brouwer_is_undetermined(self):
        report = check_main_condition(np.eye(2), None, 1.0)
        assert report.condition_holds is None
        assert report.gamma == 2


class TestCrossRouteIdentity:
    def test_component_level(self, rng):
        # the full 100-case sweep lives in the acceptance suite
        from conftest import conjugated_pair

        for trial in range(20):
            nf = random_normal_form(rng, max_total_half_dim=6)
            Mc, Ac = conjugated_pair(nf, seed=900 + trial, scale=0.5)
            for beta in sorted({b.beta for b in nf.blocks}):
                from hambif import block_counts

                kappa = block_counts(nf, beta).kappa
                assert gamma_jump(Ac, beta) == -2 * kappa


class TestSymplecticInvariance:
    def test_morse_index_of_t_matrix(self, rng):
        for trial in range(25):
            nf = random_normal_form(rng, max_total_half_dim=5)
            A = assemble_hessian(nf)
            N = A.shape[0] // 2
            S = random_symplectic(N, seed=700 + trial, scale=0.5)
            betas = sorted({b.beta for b in nf.blocks})
            lam = 0.37 / max(betas)  # safely off every level m/beta
            assert morse_index(t_matrix(1, lam, S.T @ A @ S)) == morse_index(t_matrix(1, lam, A))


class TestAdditivity:
    def test_morse_sum_over_blocks(self):
        blocks = (BlockSpec(1.0, 3, +1), BlockSpec(1.0, 1, -1), BlockSpec(1.0, 2, -1))
        nf = NormalForm(blocks)
        A = assemble_hessian(nf)
        betas = [1.0]
        from hambif import isolation_radius

        mu = isolation_radius(1.0, betas)
        for lam in (1.0 - mu, 1.0 + mu):
            total = morse_index(t_matrix(1, lam, A))
            parts = sum(
                morse_index(t_matrix(1, lam, odd_block_hessian(b.half_dim, b.beta, b.epsilon)
                                     if b.half_dim % 2
                                     else even_block_hessian(b.half_dim, b.beta, b.epsilon)))
                for b in blocks
            )
            assert total == parts

    def test_side_of_jump_values(self):
        for n in (1, 3, 5):
            for eps in (1, -1):
                A = odd_block_hessian(n, 2.0, eps)
                low = morse_index(t_matrix(1, (1 / 2.0) * 0.7, A))
                high = morse_index(t_matrix(1, (1 / 2.0) * 1.3, A))
                assert low == 2 * n
                assert high == 2 * morse_index(-A)


class TestDegeneracyLocus:
    def test_determinant_collapses_on_levels(self, rng):
        for trial in range(6):
            nf = random_normal_form(rng, max_total_half_dim=5)
            A = assemble_hessian(nf)
            betas = sorted({b.beta for b in nf.blocks})
            on = [abs(np.linalg.det(t_matrix(1, 1.0 / b, A))) for b in betas]
            from hambif import isolation_radius

            off = []
            for b in betas:
                mu = isolation_radius(1.0 / b, betas)
                off.append(abs(np.linalg.det(t_matrix(1, 1.0 / b + mu, A))))
            scale = float(np.exp(np.mean(np.log(off))))
            assert max(on) < 1e-9 * scale or max(on) < 1e-9 * max(off)
            assert min(off) > 1e-6 * scale * 1e-3  # loose guard at module level


class TestClassicalAssumptions:
    def test_positive_definite_identity(self):
        report = check_classical_assumptions(np.eye(4))
        assert report.positive_definite.holds is True
        assert report.positive_definite.certified_betas == (1.0,)

    def test_irrational_pair_nonresonant(self):
        A = oscillators(1.0, np.sqrt(2.0))
        report = check_classical_assumptions(A)
        assert report.nonresonant_pair.holds is True
        assert len(report.nonresonant_pair.certified_betas) == 2

    def test_resonant_balanced_signature_fails(self):
        # frequencies {1, 1} with opposite signs: nondegenerate, signature 0
        nf = NormalForm((BlockSpec(1.0, 1, +1), BlockSpec(1.0, 1, -1)))
        A = assemble_hessian(nf)
        report = check_classical_assumptions(A)
        assert report.signature_resonant.holds is False

    def test_commensurate_definite_case_satisfies_a2(self):
        A = oscillators(1.0, 2.0)
        report = check_classical_assumptions(A)
        assert report.signature_resonant.holds is True
        assert len(report.signature_resonant.certified_betas) == 2

    def test_split_hypotheses(self):
        # E1 = first oscillator plane, E2 = second, frequencies 1 and 2
        A = np.diag([1.0, 2.0, 1.0, 2.0])
        E1 = np.zeros((4, 2)); E1[0, 0] = 1.0; E1[2, 1] = 1.0
        E2 = np.zeros((4, 2)); E2[1, 0] = 1.0; E2[3, 1] = 1.0
        report = check_classical_assumptions(A, split=(E1, E2))
        assert report.split_definite.holds is True
        assert report.split_definite.certified_betas == (1.0,)
        assert report.split_signature.holds is True

    def test_split_skipped_without_bases(self):
        report = check_classical_assumptions(np.eye(4))
        assert report.split_definite.holds is None

    def test_invalid_split_rejected(self):
        A = np.diag([1.0, 2.0, 1.0, 2.0])
        E1 = np.zeros((4, 2)); E1[0, 0] = 1.0; E1[1, 1] = 1.0  # not invariant
        E2 = np.zeros((4, 2)); E2[2, 0] = 1.0; E2[3, 1] = 1.0
        with pytest.raises(SplittingError):
            check_classical_assumptions(A, split=(E1, E2))


class TestNonresonance:
    def test_integer_ratio_pair(self):
        report = nonresonance_and_branch_count(oscillators(1.0, 2.0))
        flags = {round(b, 6): f for b, f in report.flags}
        assert flags == {2.0: True, 1.0: False}
        assert report.lower_bound == 1

    def test_irrational_pair(self):
        report = nonresonance_and_branch_count(oscillators(1.0, np.sqrt(2.0)))
        assert all(f for _, f in report.flags)
        assert report.lower_bound == 2

    def test_single_frequency(self):
        report = nonresonance_and_branch_count(np.eye(2))
        assert report.flags[0][1] is True
        assert report.lower_bound == 1
