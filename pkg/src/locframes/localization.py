"""Localization certificates, coorbit norms, duality, and inclusion at finite scale."""

import math
from dataclasses import dataclass, field

import numpy as np

from .algebras import (
    FIT_MARGIN,
    DecayFit,
    MatrixAlgebraSpec,
    algebra_product_constant,
    admissible_weight_check,
    decay_fit,
    jaffard_norm,
    schur_weighted_norm,
    shell_maxima,
)
from .errors import ContractError, InsufficientDataError, NotLocalizedError
from .frames import Frame, analysis, canonical_dual, frame_bounds, gram, synthesis
from .indexing import IndexSet
from .linalg import pseudo_inverse
from .opnorms import weighted_operator_norm
from .weights import (
    DEFAULT_SCHEDULE,
    InclusionReport,
    SeqSpaceSpec,
    dual_pairing,
    seq_norm,
    seq_space_included,
)

NORM_BOUNDED_FLOOR = 1e-6
DUALITY_RESIDUAL_TOL = 1e-8
DUAL_EXPONENT_DROP = 0.5


@dataclass
class LocalizationReport:
    """Algebra-membership certificate for a frame pair."""

    algebra: MatrixAlgebraSpec
    cross_gram_norm: float
    member: bool
    fit: DecayFit
    pair: tuple
    norms: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "algebra": self.algebra.to_dict(),
            "cross_gram_norm": self.cross_gram_norm,
            "member": self.member,
            "decay_fit": self.fit.to_dict(),
            "pair": list(self.pair),
            "norms": self.norms,
        }


def localization_report(left: Frame, right: Frame, alg: MatrixAlgebraSpec):
    """Evaluate the algebra norm and decay of the cross-Gram of two frames.

    Membership needs the algebra norm under the algebra's cap and a fitted
    decay exponent not more than a small margin below s.  A Gram whose
    off-diagonal mass dies before four shells (e.g. the identity) counts
    as superpolynomially localized.
    """
    g = gram(left, right)
    rows, cols = left.index_set, right.index_set
    norms = {
        "jaffard": jaffard_norm(g, alg.s, rows, cols),
        "schur_weighted": schur_weighted_norm(g, alg.s, rows, cols),
    }
    try:
        fit = decay_fit(g, rows, cols)
    except InsufficientDataError:
        fit = DecayFit(math.inf, 0.0, shell_maxima(g, rows, cols))
    norm = norms[alg.kind]
    decay_ok = fit.superpolynomial or fit.fitted_exponent >= alg.s - FIT_MARGIN
    return LocalizationReport(
        algebra=alg,
        cross_gram_norm=norm,
        member=bool(norm <= alg.membership_threshold and decay_ok),
        fit=fit,
        pair=(left.name, right.name),
        norms=norms,
    )


@dataclass
class DualLocalizationResult:
    primal: LocalizationReport
    dual: LocalizationReport
    cross: LocalizationReport
    exponent_drop_flagged: bool

    def reports(self):
        return (self.primal, self.dual, self.cross)

    def to_dict(self):
        return {
            "primal": self.primal.to_dict(),
            "dual": self.dual.to_dict(),
            "cross": self.cross.to_dict(),
            "exponent_drop_flagged": self.exponent_drop_flagged,
        }


def dual_localization_check(frame: Frame, alg: MatrixAlgebraSpec):
    """Probe whether localization survives canonical dualization.

    Requires the frame to be intrinsically a member; flags the result
    when the dual Gram's fitted exponent drops more than 0.5 below the
    primal one (empirical spectral-invariance probe).
    """
    primal = localization_report(frame, frame, alg)
    if not primal.member:
        raise NotLocalizedError(
            f"{frame.name} is not intrinsically localized for {alg.kind}(s={alg.s})",
            report=primal,
        )
    dual = canonical_dual(frame)
    rep_dual = localization_report(dual, dual, alg)
    rep_cross = localization_report(frame, dual, alg)
    flagged = rep_dual.fit.fitted_exponent < primal.fit.fitted_exponent - DUAL_EXPONENT_DROP
    return DualLocalizationResult(primal, rep_dual, rep_cross, bool(flagged))


def _duality_residual(phi: Frame, phi_dual: Frame):
    if phi.vectors.shape != phi_dual.vectors.shape:
        return math.inf
    recon = phi.vectors @ np.conj(phi_dual.vectors.T)
    return float(np.linalg.norm(recon - np.eye(phi.ambient_dim), 2))


@dataclass
class TransitivityReport:
    hypothesis_norms: tuple
    conclusion_norm: float
    constant: float
    holds: bool
    duality_residual: float

    def to_dict(self):
        return {
            "hypothesis_norms": list(self.hypothesis_norms),
            "conclusion_norm": self.conclusion_norm,
            "constant": self.constant,
            "holds": self.holds,
            "duality_residual": self.duality_residual,
        }


def transitivity_check(psi, phi, phi_dual, xi, alg: MatrixAlgebraSpec):
    """Numerical check that localization propagates through a dual pair.

    The conclusion cross-Gram factors exactly through the two hypothesis
    Grams, so its algebra norm is bounded by their product times the
    finite-scale algebra constant.
    """
    res = _duality_residual(phi, phi_dual)
    if res > DUALITY_RESIDUAL_TOL:
        raise ContractError(
            f"{phi_dual.name} is not a dual of {phi.name} (residual {res:.3e})"
        )
    n1 = alg.norm(gram(psi, phi), psi.index_set, phi.index_set)
    n2 = alg.norm(gram(phi_dual, xi), phi_dual.index_set, xi.index_set)
    nc = alg.norm(gram(psi, xi), psi.index_set, xi.index_set)
    if alg.kind == "jaffard":
        const = algebra_product_constant(alg, psi.index_set, phi.index_set)
    else:
        const = float(2.0**alg.s)
    holds = nc <= const * n1 * n2 * (1 + 1e-12)
    return TransitivityReport((n1, n2), nc, const, bool(holds), res)


# -- coorbit machinery -------------------------------------------------------


class CoorbitSpec:
    """A frame together with the sequence space that grades it.

    When an algebra is supplied the weight must be admissible for it.
    """

    def __init__(self, frame: Frame, space: SeqSpaceSpec, algebra=None):
        if len(space.weight) != frame.size:
            space = space.on(frame.index_set)
        self.frame = frame
        self.space = space
        self.algebra = algebra
        if algebra is not None:
            chk = admissible_weight_check(algebra, space.weight, frame.index_set)
            if not chk["admissible"]:
                raise ContractError(
                    f"weight not admissible for {algebra.kind}(s={algebra.s})"
                )


def coorbit_norm(f, spec: CoorbitSpec):
    """||f|| = weighted sequence norm of the dual-frame coefficients."""
    dual = canonical_dual(spec.frame)
    return seq_norm(analysis(dual, f), spec.space)


def coorbit_pairing(f, h, spec: CoorbitSpec):
    """<C~ f, C h>; consistent with the ambient inner product."""
    dual = canonical_dual(spec.frame)
    return dual_pairing(analysis(dual, f), analysis(spec.frame, h))


def equivalence_constants(frame: Frame, space: SeqSpaceSpec):
    """Sandwich constants between ||C f||_{p,w} and the coorbit norm.

    lower = 1 / ||G_dual||, upper = ||G||, with exact weighted operator
    norms for p in {1, inf} and interpolation upper bounds in between.
    """
    space = space.on(frame.index_set)
    dual = canonical_dual(frame)
    g_primal = gram(frame, frame)
    g_dual = gram(dual, dual)
    upper = weighted_operator_norm(g_primal, space.effective_p, space.weight, exact_l2=False)
    dual_norm = weighted_operator_norm(g_dual, space.effective_p, space.weight, exact_l2=False)
    return 1.0 / dual_norm, upper


@dataclass
class CoorbitInclusionReport:
    included: bool
    seq_certificate: InclusionReport
    witness_kind: str = "none"
    schedule_ratios: list = field(default_factory=list)
    frame_ratios: list = field(default_factory=list)
    witness_vector: object = None
    monotone: bool = True

    def to_dict(self):
        return {
            "included": self.included,
            "seq_certificate": self.seq_certificate.to_dict(),
            "witness_kind": self.witness_kind,
            "schedule_ratios": [{"size": n, "ratio": r} for n, r in self.schedule_ratios],
            "frame_ratios": [{"size": n, "ratio": r} for n, r in self.frame_ratios],
            "monotone": self.monotone,
        }


def _seq_witness_ratios(a, b, schedule, spike):
    out = []
    for n in schedule:
        iset = IndexSet.line(n)
        sa, sb = a.on(iset), b.on(iset)
        if spike:
            k = int(np.argmax(sb.weight.values / sa.weight.values))
            c = np.zeros(n)
            c[k] = 1.0
        else:
            c = np.ones(n)
        out.append((n, seq_norm(c, sb) / seq_norm(c, sa)))
    return out


def coorbit_inclusion(frame: Frame, a: SeqSpaceSpec, b: SeqSpaceSpec,
                      schedule=DEFAULT_SCHEDULE):
    """Finite-scale realization of the inclusion equivalence.

    The verdict mirrors the sequence-space test.  For a non-inclusion an
    indicator-type witness is pushed through synthesis and its coorbit
    norm ratios are tracked along nested index truncations.
    """
    if frame.min_vector_norm() < NORM_BOUNDED_FLOOR:
        raise ContractError("frame is not norm-bounded below")
    seq_rep = seq_space_included(a, b, schedule)
    if seq_rep.included:
        return CoorbitInclusionReport(True, seq_rep)

    spike = a.effective_p <= b.effective_p
    ratios = _seq_witness_ratios(a, b, schedule, spike)

    af, bf = a.on(frame.index_set), b.on(frame.index_set)
    spec_a = CoorbitSpec(frame, af)
    spec_b = CoorbitSpec(frame, bf)
    frame_ratios = []
    witness = None
    sub = [n for n in schedule if n <= frame.size]
    if not sub or sub[-1] != frame.size:
        sub.append(frame.size)
    for n in sub:
        c = np.zeros(frame.size)
        if spike:
            ratio_w = bf.weight.values[:n] / af.weight.values[:n]
            c[int(np.argmax(ratio_w))] = 1.0
        else:
            c[:n] = 1.0
        witness = synthesis(frame, c)
        na, nb = coorbit_norm(witness, spec_a), coorbit_norm(witness, spec_b)
        frame_ratios.append((n, nb / na if na > 0 else math.inf))
    seq_vals = [r for _, r in ratios]
    monotone = all(x < y * (1 + 1e-12) for x, y in zip(seq_vals, seq_vals[1:]))
    return CoorbitInclusionReport(
        False,
        seq_rep,
        witness_kind="spike" if spike else "indicator",
        schedule_ratios=ratios,
        frame_ratios=frame_ratios,
        witness_vector=witness,
        monotone=monotone,
    )


def min_synthesis_norm(f, frame: Frame, space: SeqSpaceSpec):
    """Smallest coefficient norm representing f, exact for p = 2.

    For p = 2 the weighted least-norm solution is computed through the
    pseudo-inverse; other exponents return the canonical-dual
    coefficient norm as a certified upper bound.
    """
    frame_bounds(frame)
    space = space.on(frame.index_set)
    f = np.asarray(f, dtype=complex)
    if space.effective_p == 2.0:
        w = space.weight.values
        u = pseudo_inverse(frame.vectors / w[None, :]) @ f
        c = u / w
        return {"value": seq_norm(c, space), "kind": "exact", "coefficients": c}
    c = analysis(canonical_dual(frame), f)
    return {"value": seq_norm(c, space), "kind": "bound", "coefficients": c}
