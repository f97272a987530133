"""Galerkin matrix representation, Schur certificates, invertibility."""

import numpy as np
import pytest

from locframes import (
    BijectivityError,
    IndexSet,
    InvalidInputError,
    LinearOperator,
    SeqSpaceSpec,
    Weight,
    analysis,
    bounded_equiv_check,
    canonical_dual,
    compose_rule_check,
    galerkin_matrix,
    galerkin_pseudoinverse,
    gram,
    kappa_factorization_probe,
    make_gabor_frame,
    make_onb,
    make_test_operator,
    matrixrep_norm_bound,
    operator_from_matrix,
    operator_norm_bound,
    roundtrip_check,
    schur_certificate,
)
from locframes.galerkin import certificate_probe_norm
from locframes.linalg import generalized_condition_number


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


class TestLinearOperator:
    def test_closure_materializes_by_columns(self):
        kernel = np.arange(16, dtype=float).reshape(4, 4)
        op = LinearOperator(lambda f: kernel @ f, (4, 4))
        assert np.allclose(op.dense(), kernel)

    def test_linearity_residual(self, rng):
        op = LinearOperator.from_matrix(random_matrix(rng, 8))
        assert op.linearity_residual() <= 1e-12

    def test_dimension_check(self):
        op = LinearOperator.identity(4)
        with pytest.raises(Exception, match="domain"):
            op.apply(np.ones(5))


class TestGalerkinAssembly:
    def test_identity_on_onb(self):
        onb = make_onb(8)
        gm = galerkin_matrix(LinearOperator.identity(8), onb, onb)
        assert np.allclose(gm.entries, np.eye(8))

    def test_identity_against_dual_is_cross_gram(self, suite_frames):
        frame = suite_frames["gabor16"]
        dual = canonical_dual(frame)
        gm = galerkin_matrix(LinearOperator.identity(16), frame, dual)
        assert np.allclose(gm.entries, gram(frame, dual), atol=1e-12)

    def test_diagonal_operator_on_onb(self, rng):
        onb = make_onb(6)
        d = rng.standard_normal(6)
        gm = galerkin_matrix(np.diag(d), onb, onb)
        assert np.allclose(gm.entries, np.diag(d))

    def test_closure_assembly_matches_dense(self, suite_frames, rng):
        frame = suite_frames["translates"]
        kernel = random_matrix(rng, 64)
        closure = LinearOperator(lambda f: kernel @ f, (64, 64))
        direct = galerkin_matrix(kernel, frame, frame)
        probed = galerkin_matrix(closure, frame, frame)
        assert np.allclose(direct.entries, probed.entries, atol=1e-12)

    def test_factorization_against_unit_sequences(self, suite_frames, rng):
        # entries act on unit sequences exactly like analysis o O o synthesis
        frame = suite_frames["gabor16"]
        op = random_matrix(rng, 16)
        gm = galerkin_matrix(op, frame, frame)
        from locframes import synthesis

        for l in (0, 7, 23):
            e = np.zeros(frame.size)
            e[l] = 1.0
            column = analysis(frame, op @ synthesis(frame, e))
            assert np.allclose(gm.entries[:, l], column, atol=1e-12)

    def test_reproduction_residual(self, suite_frames, rng):
        frame = suite_frames["gabor16"]
        gm = galerkin_matrix(random_matrix(rng, 16), frame, frame)
        assert gm.reproduction_residual() <= 1e-12


class TestOperatorFromMatrix:
    def test_identity_matrix_with_dual_pair_reconstructs(self, suite_frames, rng):
        frame = suite_frames["gabor64"]
        dual = canonical_dual(frame)
        op = operator_from_matrix(np.eye(frame.size), frame, dual)
        f = random_matrix(rng, 64, 1)[:, 0]
        assert np.linalg.norm(op.apply(f) - f) <= 1e-10 * np.linalg.norm(f)

    def test_zero_matrix(self, suite_frames):
        frame = suite_frames["gabor16"]
        op = operator_from_matrix(np.zeros((frame.size, frame.size)), frame, frame)
        assert np.allclose(op.dense(), 0.0)

    def test_onb_frames_reproduce_matrix(self, rng):
        onb = make_onb(8)
        m = random_matrix(rng, 8)
        op = operator_from_matrix(m, onb, onb)
        assert np.allclose(op.dense(), m, atol=1e-12)


class TestRoundtripAndComposition:
    def test_onb_roundtrip_exact(self, rng):
        onb = make_onb(8)
        assert roundtrip_check(random_matrix(rng, 8), onb, onb) <= 1e-12

    def test_gabor_pair_roundtrip(self, suite_frames, rng):
        frame = suite_frames["gabor64"]
        tra = suite_frames["translates"]
        assert roundtrip_check(random_matrix(rng, 64), frame, tra) <= 1e-10

    def test_rank_one_roundtrip(self, suite_frames, rng):
        frame = suite_frames["gabor64"]
        f = random_matrix(rng, 64, 1)[:, 0]
        g = random_matrix(rng, 64, 1)[:, 0]
        assert roundtrip_check(np.outer(f, np.conj(g)), frame, frame) <= 1e-10

    def test_composition_identity_case(self):
        onb = make_onb(8)
        eye = LinearOperator.identity(8)
        assert compose_rule_check(eye, eye, onb, onb, onb) == pytest.approx(0.0, abs=1e-14)

    def test_composition_mixed_frames(self, suite_frames, rng):
        res = compose_rule_check(
            random_matrix(rng, 64),
            random_matrix(rng, 64),
            suite_frames["gabor64"],
            suite_frames["translates"],
            suite_frames["ponb"],
        )
        assert res <= 1e-10

    def test_composition_rank_deficient_middle_frame(self, rng):
        from locframes import Frame, NotAFrameError

        deficient = Frame(np.eye(8)[:, :5] @ np.eye(5), IndexSet.ring(5), "thin")
        onb = make_onb(8)
        with pytest.raises(NotAFrameError):
            compose_rule_check(random_matrix(rng, 8), random_matrix(rng, 8),
                               onb, onb, deficient)


class TestNormBounds:
    def test_identity_onb_bound_is_one(self):
        onb = make_onb(16)
        w = Weight.ones(16)
        spaces = (SeqSpaceSpec(1, w), SeqSpaceSpec(1, w))
        out = matrixrep_norm_bound(LinearOperator.identity(16), onb, onb, onb, spaces)
        assert out["bound"] == pytest.approx(1.0)
        assert out["measured"] <= 1.0 + 1e-10

    def test_homogeneity_under_scaling(self, suite_frames):
        frame = suite_frames["gabor16"]
        w = Weight.ones(frame.size)
        spaces = (SeqSpaceSpec(np.inf, w), SeqSpaceSpec(np.inf, w))
        op = make_test_operator("identity_minus_kernel", 16, theta=0.4)
        one = matrixrep_norm_bound(op, frame, frame, frame, spaces)
        scaled = matrixrep_norm_bound(
            LinearOperator.from_matrix(3.0 * op.dense()), frame, frame, frame, spaces
        )
        assert scaled["bound"] == pytest.approx(3 * one["bound"])
        assert scaled["measured"] == pytest.approx(3 * one["measured"])

    @pytest.mark.parametrize("p", [1, np.inf])
    def test_measured_below_bound_on_decaying_operators(self, suite_frames, rng, p):
        gab = suite_frames["gabor64"]
        tra = suite_frames["translates"]
        ponb = suite_frames["ponb"]
        w = Weight.ones(64)
        spaces = (SeqSpaceSpec(p, w), SeqSpaceSpec(p, w))
        iset = IndexSet.ring(64)
        d = iset.distance_matrix()
        for _ in range(25):
            op = random_matrix(rng, 64) * (1 + d) ** -2.0
            out = matrixrep_norm_bound(op, gab, tra, ponb, spaces, probes=20)
            assert out["measured"] <= out["bound"] * (1 + 1e-8)

    def test_localization_warning_tag(self, suite_frames):
        from locframes import MatrixAlgebraSpec

        n = 64
        window = (1.0 + IndexSet.ring(n).distance_to_origin()) ** -0.5
        window /= np.linalg.norm(window)
        rough = make_gabor_frame(n, 8, 4, window)
        w = Weight.ones(n)
        spaces = (SeqSpaceSpec(1, w), SeqSpaceSpec(1, w))
        out = matrixrep_norm_bound(
            LinearOperator.identity(n), rough, rough, rough, spaces,
            localization=MatrixAlgebraSpec("jaffard", 5.0),
        )
        assert "warning" in out

    def test_mirrored_operator_bound(self, suite_frames, rng):
        frame = suite_frames["gabor64"]
        tra = suite_frames["translates"]
        w = Weight.ones(64)
        spaces = (SeqSpaceSpec(1, w), SeqSpaceSpec(1, w))
        gm = galerkin_matrix(random_matrix(rng, 64), frame, tra)
        out = operator_norm_bound(gm, frame, tra, suite_frames["ponb"], spaces)
        assert out["measured"] <= out["bound"] * (1 + 1e-8)

    def test_bounded_equiv_identity(self, suite_frames):
        frame = suite_frames["gabor16"]
        w = Weight.ones(frame.size)
        spaces = (SeqSpaceSpec(1, w), SeqSpaceSpec(1, w))
        out = bounded_equiv_check(LinearOperator.identity(16), frame, frame, spaces)
        assert out["consistent"]

    def test_bounded_equiv_zero_operator(self, suite_frames):
        frame = suite_frames["gabor16"]
        w = Weight.ones(frame.size)
        spaces = (SeqSpaceSpec(np.inf, w), SeqSpaceSpec(np.inf, w))
        out = bounded_equiv_check(
            LinearOperator.from_matrix(np.zeros((16, 16))), frame, frame, spaces
        )
        assert out["matrix_norm"] == 0.0
        assert out["operator_norm_measured"] == 0.0

    def test_bounded_equiv_large_column_scales_both(self, suite_frames, rng):
        frame = suite_frames["gabor16"]
        w = Weight.ones(frame.size)
        spaces = (SeqSpaceSpec(1, w), SeqSpaceSpec(1, w))
        op = random_matrix(rng, 16)
        op[:, 3] *= 100
        out = bounded_equiv_check(op, frame, frame, spaces)
        assert out["consistent"]
        assert out["matrix_norm"] > 50
        assert out["operator_norm_measured"] > 5


class TestSchurCertificates:
    def test_identity_inf_inf(self):
        w = Weight.ones(8)
        cert = schur_certificate(np.eye(8), "inf_inf", weights=(w, w))
        assert cert.certified_bound == pytest.approx(1.0)

    def test_row_sums_certify_sup_norm(self, rng):
        w = Weight.ones(12)
        m = random_matrix(rng, 12)
        m *= 2.0 / np.abs(m).sum(axis=1).max()
        cert = schur_certificate(m, "inf_inf", weights=(w, w))
        assert cert.certified_bound <= 2.0 + 1e-12
        measured = certificate_probe_norm(m, cert, probes=200)
        assert measured <= cert.certified_bound * (1 + 1e-8)

    def test_identity_two_two(self):
        w = Weight.ones(8)
        cert = schur_certificate(np.eye(8), "two_two", weights=(w, w))
        assert cert.details["svd_ground_truth"] == pytest.approx(1.0)
        assert all(v == pytest.approx(1.0)
                   for v in cert.details["diagonal_roots"].values())
        assert 1.0 <= cert.certified_bound <= 8 ** (1 / 40) + 1e-12

    @pytest.mark.parametrize("case", ["inf_inf", "one_inf", "one_p", "two_two"])
    def test_probe_norms_never_exceed_bounds(self, rng, case):
        iset = IndexSet.ring(24)
        d = iset.distance_matrix()
        w1 = Weight.ones(24)
        w2 = Weight.polynomial(0.5, iset)
        for _ in range(50):
            m = random_matrix(rng, 24) * (1 + d) ** -2.5
            cert = schur_certificate(m, case, p=2.0, weights=(w1, w2))
            measured = certificate_probe_norm(m, cert, probes=40)
            assert measured <= cert.certified_bound * (1 + 1e-8)
            if case == "two_two":
                assert cert.details["svd_ground_truth"] <= \
                    cert.certified_bound * (1 + 1e-8)

    def test_inf_one_absolute_sum_and_greedy(self, rng):
        w = Weight.ones(10)
        m = random_matrix(rng, 10)
        cert = schur_certificate(m, "inf_one", weights=(w, w))
        assert cert.certified_bound == pytest.approx(np.abs(m).sum())
        assert cert.details["greedy_subset_quantity"] <= cert.certified_bound
        measured = certificate_probe_norm(m, cert, probes=100)
        assert measured <= cert.certified_bound * (1 + 1e-8)

    def test_inf_zero_reports_tail(self, rng):
        iset = IndexSet.line(16)
        d = iset.distance_matrix()
        m = (1.0 + d) ** -2.0
        w = Weight.ones(16)
        cert = schur_certificate(m, "inf_zero", weights=(w, w))
        assert "tail_row_sum_mean" in cert.details

    def test_unknown_case_rejected(self):
        w = Weight.ones(4)
        with pytest.raises(InvalidInputError):
            schur_certificate(np.eye(4), "two_one", weights=(w, w))

    def test_galerkin_matrix_carries_weights(self, suite_frames):
        frame = suite_frames["gabor16"]
        w = Weight.ones(frame.size)
        gm = galerkin_matrix(
            LinearOperator.identity(16), frame, frame,
            domain_space=SeqSpaceSpec(np.inf, w),
            codomain_space=SeqSpaceSpec(np.inf, w),
        )
        cert = schur_certificate(gm, "inf_inf")
        assert cert.certified_bound > 0


class TestPseudoInverseAndKappa:
    def test_identity_onb(self):
        onb = make_onb(8)
        gm = galerkin_matrix(LinearOperator.identity(8), onb, onb)
        assert np.allclose(galerkin_pseudoinverse(gm, onb, onb), np.eye(8))

    def test_redundant_frame_gives_projection(self, suite_frames):
        frame = suite_frames["gabor64"]
        gm = galerkin_matrix(LinearOperator.identity(64), frame, frame)
        dag = galerkin_pseudoinverse(gm, frame, frame)
        proj = dag @ gm.entries
        assert np.linalg.norm(proj @ proj - proj, 2) <= 1e-9
        assert np.allclose(proj, gram(canonical_dual(frame), frame), atol=1e-9)

    def test_scaling(self, suite_frames):
        frame = suite_frames["gabor16"]
        gm2 = galerkin_matrix(
            LinearOperator.from_matrix(2 * np.eye(16)), frame, frame
        )
        gm1 = galerkin_matrix(LinearOperator.identity(16), frame, frame)
        assert np.allclose(
            galerkin_pseudoinverse(gm2, frame, frame),
            0.5 * galerkin_pseudoinverse(gm1, frame, frame),
            atol=1e-10,
        )

    def test_singular_operator_rejected(self, suite_frames):
        frame = suite_frames["gabor16"]
        gm = galerkin_matrix(np.diag([1.0] * 15 + [0.0]), frame, frame)
        with pytest.raises(BijectivityError):
            galerkin_pseudoinverse(gm, frame, frame)

    def test_bijectivity_on_analysis_range(self, suite_frames, rng):
        frame = suite_frames["gabor64"]
        op = make_test_operator("identity_minus_kernel", 64, theta=0.5)
        gm = galerkin_matrix(op, frame, frame)
        dag = galerkin_pseudoinverse(gm, frame, frame)
        for _ in range(10):
            f = random_matrix(rng, 64, 1)[:, 0]
            c = analysis(canonical_dual(frame), f)
            assert np.linalg.norm(dag @ (gm.entries @ c) - c) <= 1e-9 * np.linalg.norm(c)

    def test_kappa_identity_with_onb(self):
        onb = make_onb(8)
        out = kappa_factorization_probe(LinearOperator.identity(8), onb, onb)
        assert out["lhs"] == pytest.approx(1.0)
        assert out["rhs"] == pytest.approx(1.0)

    def test_kappa_onb_equals_operator_condition(self, rng):
        onb = make_onb(8)
        op = random_matrix(rng, 8) + 4 * np.eye(8)
        out = kappa_factorization_probe(op, onb, onb)
        assert out["lhs"] == pytest.approx(out["rhs"], rel=1e-10)
        assert out["lhs"] == pytest.approx(generalized_condition_number(op), rel=1e-10)

    def test_kappa_redundant_frames_submultiplicative(self, suite_frames, rng):
        gab = suite_frames["gabor64"]
        tra = suite_frames["translates"]
        spectrum = np.diag(np.arange(1.0, 65.0))
        out = kappa_factorization_probe(spectrum, gab, tra)
        assert out["submultiplicative"]
        assert out["ratio"] <= 1 + 1e-8

    def test_kappa_projection_grams_can_violate_product(self, suite_frames):
        # against the canonical dual both Gram factors are orthogonal
        # projections with kappa 1, and the compressed operator's kappa
        # may exceed kappa(O): the probe must report, not fail
        frame = suite_frames["gabor16"]
        op = make_test_operator("identity_minus_kernel", 16, theta=0.5)
        out = kappa_factorization_probe(op, frame, canonical_dual(frame))
        assert out["rhs"] == pytest.approx(
            generalized_condition_number(op.dense()), rel=1e-8
        )
        assert "submultiplicative" in out

    def test_kappa_singular_operator_rejected(self, suite_frames):
        frame = suite_frames["gabor16"]
        with pytest.raises(BijectivityError):
            kappa_factorization_probe(np.diag([1.0] * 15 + [0.0]), frame, frame)
