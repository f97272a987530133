"""Projection / finite-section solver and frame-Galerkin solve for O f = g."""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InvalidInputError
from .frames import Frame, analysis, synthesis
from .galerkin import LinearOperator, as_operator, galerkin_matrix
from .indexing import IndexSet
from .linalg import generalized_condition_number, pseudo_inverse

PROJECTION_TOL = 1e-10
DEFAULT_TOL = 1e-8
STAGNATION_WINDOW = 50
HERMITIAN_TOL = 1e-8


# -- subframe projections -----------------------------------------------------


def subframe_projection(frame: Frame, subset):
    """Orthogonal projection onto the span of a subfamily.

    Built as P f = sum_{k in subset} <f, psi_k> dual_k with the dual
    computed inside the span through the pseudo-inverse of the
    restricted frame operator; idempotent and self-adjoint.
    """
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise InvalidInputError("projection needs a nonempty index subset")
    v = frame.vectors[:, subset]
    s = v @ np.conj(v.T)
    dual = pseudo_inverse(0.5 * (s + np.conj(s.T))) @ v
    p = dual @ np.conj(v.T)
    p = 0.5 * (p + np.conj(p.T))
    op = LinearOperator.from_matrix(p, name=f"P[{frame.name}:{subset.size}]")
    op.subframe_dual = dual
    return op


class ProjectionSchedule:
    """Nested index subsets K_1 c K_2 c ... c K with per-level duals.

    ``centered`` grows blocks doubling in size around the middle index;
    ``energy_greedy`` orders indices by decreasing analysis energy of a
    pilot vector.  Per-level subframe bounds are recorded and a flag is
    raised when their ratio exceeds ``ratio_cap`` at any level.
    """

    def __init__(self, frame: Frame, selection="centered", pilot=None,
                 start=8, ratio_cap=1e8, levels=None, n_levels=None):
        self.frame = frame
        self.selection = selection
        k = frame.size
        if levels is not None:
            self.levels = [np.asarray(lv, dtype=int) for lv in levels]
        else:
            if n_levels is not None:
                if n_levels < 1:
                    raise InvalidInputError("need at least one level")
                sizes = sorted({max(1, round(k * 2.0 ** -(n_levels - 1 - i)))
                                for i in range(n_levels)})
            else:
                sizes = []
                m = min(start, k)
                while m < k:
                    sizes.append(m)
                    m *= 2
                sizes.append(k)
            order = self._ordering(selection, pilot)
            self.levels = [np.sort(order[:m]) for m in sizes]
        self._validate()
        self.duals = {}
        self.subframe_bounds = []
        self.uniformity_flag = False
        for lv in self.levels:
            s = frame.vectors[:, lv] @ np.conj(frame.vectors[:, lv].T)
            w = np.linalg.eigvalsh(0.5 * (s + np.conj(s.T)))
            pos = w[w > PROJECTION_TOL * max(w[-1], 1e-300)]
            c_n, d_n = float(pos[0]), float(pos[-1])
            self.subframe_bounds.append((c_n, d_n))
            if d_n / c_n > ratio_cap:
                self.uniformity_flag = True

    def _ordering(self, selection, pilot):
        k = self.frame.size
        if selection == "centered":
            center = k // 2
            return np.argsort(np.abs(np.arange(k) - center), kind="stable")
        if selection == "energy_greedy":
            if pilot is None:
                raise InvalidInputError("energy_greedy needs a pilot vector")
            coeff = analysis(self.frame, pilot)
            return np.argsort(-np.abs(coeff), kind="stable")
        raise InvalidInputError(f"unknown selection {selection!r}")

    def _validate(self):
        k = self.frame.size
        prev = set()
        for lv in self.levels:
            cur = set(lv.tolist())
            if not prev < cur and prev != set():
                raise InvalidInputError("schedule levels must be strictly nested")
            if prev == cur:
                raise InvalidInputError("schedule levels must grow strictly")
            prev = cur
        if prev != set(range(k)):
            raise InvalidInputError("final level must cover the full index set")

    def projection(self, i):
        if i not in self.duals:
            self.duals[i] = subframe_projection(self.frame, self.levels[i])
        return self.duals[i]


# -- reports ------------------------------------------------------------------


@dataclass
class LevelRecord:
    size: int
    residual: float
    error: float = None
    inverse_norm: float = None
    iterations: int = 0
    kappa_dagger: float = None
    singular: bool = False

    def to_dict(self):
        return {
            "N": self.size,
            "residual": self.residual,
            "error": self.error,
            "inverse_norm": self.inverse_norm,
            "iterations": self.iterations,
            "kappa_dagger": self.kappa_dagger,
            "singular": self.singular,
        }


@dataclass
class SolveReport:
    method: str
    converged: bool
    levels: list = field(default_factory=list)
    contraction_norm: float = None
    contraction_sufficient: bool = None
    sup_inverse_norm: float = None
    uniformity_flag: bool = False
    stabilized_at: int = None
    message: str = ""

    def to_dict(self):
        return {
            "method": self.method,
            "converged": self.converged,
            "levels": [lv.to_dict() for lv in self.levels],
            "contraction_norm": self.contraction_norm,
            "contraction_sufficient": self.contraction_sufficient,
            "sup_inverse_norm": self.sup_inverse_norm,
            "uniformity_flag": self.uniformity_flag,
            "stabilized_at": self.stabilized_at,
            "message": self.message,
        }


# -- iterative kernels --------------------------------------------------------


@dataclass
class IterationResult:
    c: np.ndarray
    iterations: int
    converged: bool
    residuals: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    normal_equations: bool = False
    rate_estimate: float = None


def _hermitian_defect(m):
    return float(
        np.linalg.norm(m - np.conj(m.T), 2) / max(np.linalg.norm(m, 2), 1e-300)
    )


def cg_solve(m, b, tol=1e-10, max_iter=None, normal_equations=False,
             track_energy=False):
    """Conjugate gradients for Hermitian positive semidefinite systems.

    ``b`` must lie in the range (project through the Gram projection
    first); an unreachable right side surfaces as a contract error.
    With ``normal_equations`` the iteration runs on M* M instead, which
    lifts the Hermitian requirement.
    """
    m = np.asarray(m, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if normal_equations:
        m2 = np.conj(m.T) @ m
        res = cg_solve(m2, np.conj(m.T) @ b, tol=tol, max_iter=max_iter,
                       track_energy=track_energy)
        res.normal_equations = True
        return res
    if _hermitian_defect(m) > HERMITIAN_TOL:
        raise ContractError(
            "matrix is not Hermitian; set normal_equations=True to fall back"
        )
    k = m.shape[0]
    if max_iter is None:
        max_iter = 10 * k
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return IterationResult(np.zeros(k, dtype=complex), 0, True, [0.0])
    x = np.zeros(k, dtype=complex)
    r = b.copy()
    p = r.copy()
    rs = np.real(np.vdot(r, r))
    residuals = [1.0]
    energies = []
    best = 1.0
    since_best = 0
    it = 0
    for it in range(1, max_iter + 1):
        mp = m @ p
        denom = np.real(np.vdot(p, mp))
        if denom <= 0:
            break
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * mp
        rs_new = np.real(np.vdot(r, r))
        residuals.append(math.sqrt(rs_new) / bnorm)
        if track_energy:
            energies.append(float(np.real(np.vdot(x, m @ x)) / 2
                                  - np.real(np.vdot(b, x))))
        if residuals[-1] <= tol:
            return IterationResult(x, it, True, residuals, energies)
        if residuals[-1] < best * (1 - 1e-12):
            best, since_best = residuals[-1], 0
        else:
            since_best += 1
            if since_best >= STAGNATION_WINDOW:
                break
        p = r + (rs_new / rs) * p
        rs = rs_new
    # stalled: distinguish an unreachable right side from slow progress
    best = np.linalg.lstsq(m, b, rcond=None)[0]
    floor = np.linalg.norm(m @ best - b) / bnorm
    if floor > 10 * tol:
        raise ContractError(
            f"right side has a component outside the range (floor {floor:.3e})"
        )
    return IterationResult(x, it, residuals[-1] <= tol, residuals, energies)


def richardson_solve(m, b, relaxation, tol=1e-10, max_iter=None):
    """Damped Richardson iteration c <- c + relaxation (b - M c).

    The contraction factor on the range is estimated by power iteration
    and a warning is emitted when it is not < 1; runaway residuals mark
    the result diverged instead of looping to ``max_iter``.
    """
    m = np.asarray(m, dtype=complex)
    b = np.asarray(b, dtype=complex)
    k = m.shape[0]
    if max_iter is None:
        max_iter = 10 * k
    rng = np.random.default_rng(1)
    v = m @ (rng.standard_normal(k) + 1j * rng.standard_normal(k))
    rho = 0.0
    nv = np.linalg.norm(v)
    if nv > 0:
        v /= nv
        for _ in range(60):
            v = v - relaxation * (m @ v)
            rho = np.linalg.norm(v)
            if rho == 0:
                break
            v /= rho
    if rho >= 1:
        warnings.warn(
            f"estimated contraction factor {rho:.3f} >= 1; iteration may diverge",
            stacklevel=2,
        )
    bnorm = max(np.linalg.norm(b), 1e-300)
    x = np.zeros(k, dtype=complex)
    residuals = []
    updates = 0
    while updates <= max_iter:
        r = b - m @ x
        rel = np.linalg.norm(r) / bnorm
        residuals.append(rel)
        if rel <= tol:
            return IterationResult(x, updates, True, residuals, rate_estimate=rho)
        if rel > 10 * residuals[0]:
            res = IterationResult(x, updates, False, residuals, rate_estimate=rho)
            res.diverged = True
            return res
        x = x + relaxation * r
        updates += 1
    res = IterationResult(x, max_iter, False, residuals, rate_estimate=rho)
    res.diverged = False
    return res


# -- finite sections ----------------------------------------------------------


def _solve_level(a_dense, proj, y, method, tol):
    p = proj.dense()
    a_c = p @ a_dense @ p
    rhs = p @ y
    its = 0
    if method == "cg":
        try:
            res = cg_solve(a_c, rhs, tol=tol * 1e-2,
                           normal_equations=_hermitian_defect(a_c) > HERMITIAN_TOL)
            x, its = res.c, res.iterations
        except ContractError:
            return None, 0, True
    elif method == "richardson":
        s = np.linalg.svd(a_c, compute_uv=False)
        smax = s[0] if s[0] > 0 else 1.0
        pos = s[s > PROJECTION_TOL * smax]
        lam = 2.0 / (pos[0] + pos[-1]) if pos.size else 1.0
        res = richardson_solve(a_c, rhs, lam, tol=tol * 1e-2)
        if getattr(res, "diverged", False):
            return None, res.iterations, True
        x, its = res.c, res.iterations
    else:
        x = pseudo_inverse(a_c) @ rhs
    return x, its, False


def finite_section_solve(a, y, schedule: ProjectionSchedule, method="direct",
                         tol=DEFAULT_TOL, reference=None, threads=1):
    """Solve P_N A P_N x = P_N y over a nested projection schedule.

    Per level the compressed system is solved by the chosen method;
    residuals, errors against a dense reference solution, inverse-norm
    estimates and generalized condition numbers are recorded.  A level
    whose compressed system is numerically singular is flagged and the
    schedule continues.
    """
    a = as_operator(a)
    y = np.asarray(y, dtype=complex)
    n = a.shape[0]
    if a.shape[0] != a.shape[1] or y.shape != (n,):
        raise InvalidInputError("finite sections need a square system")
    dense = a.dense()
    contraction = float(np.linalg.norm(np.eye(n) - dense, 2))
    if reference is None:
        try:
            reference = np.linalg.solve(dense, y)
        except np.linalg.LinAlgError:
            reference = None
    report = SolveReport(
        method=method,
        converged=False,
        contraction_norm=contraction,
        contraction_sufficient=bool(contraction < 1),
        uniformity_flag=schedule.uniformity_flag,
    )

    def run_level(i):
        proj = schedule.projection(i)
        p = proj.dense()
        a_c = p @ dense @ p
        s = np.linalg.svd(a_c, compute_uv=False)
        smax = s[0] if s.size else 0.0
        pos = s[s > PROJECTION_TOL * max(smax, 1e-300)]
        rank = pos.size
        dim = int(np.round(np.real(np.trace(p))))
        singular_system = rank < dim
        x, its, failed = _solve_level(dense, proj, y, method, tol)
        rec = LevelRecord(size=len(schedule.levels[i]), residual=math.inf,
                          singular=bool(singular_system or failed))
        if pos.size:
            rec.inverse_norm = float(1.0 / pos[-1])
            rec.kappa_dagger = float(pos[0] / pos[-1])
        rec.iterations = its
        if x is not None:
            rec.residual = float(np.linalg.norm(dense @ x - y))
            if reference is not None:
                rec.error = float(np.linalg.norm(x - reference))
        return x, rec

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_level, range(len(schedule.levels))))
    else:
        results = [run_level(i) for i in range(len(schedule.levels))]
    solutions = [x for x, _ in results]
    report.levels = [rec for _, rec in results]
    inv_norms = [r.inverse_norm for r in report.levels if r.inverse_norm is not None]
    report.sup_inverse_norm = max(inv_norms) if inv_norms else None

    final = solutions[-1]
    ynorm = max(np.linalg.norm(y), 1e-300)
    # a compressed solution whose ambient residual blows past the first
    # level's marks a divergent projection method even if deeper levels
    # recover; see the uniform-inverse condition in the report
    finite_res = [lv.residual for lv in report.levels if math.isfinite(lv.residual)]
    blew_up = bool(finite_res and max(finite_res) > 10 * max(finite_res[0], ynorm))
    if final is not None and not report.levels[-1].singular:
        rel = report.levels[-1].residual / ynorm
        report.converged = bool(rel <= tol and not blew_up)
    # first level whose solution the next level no longer moves: where the
    # schedule could have stopped early
    report.stabilized_at = None
    for i in range(1, len(solutions)):
        if solutions[i] is None or solutions[i - 1] is None:
            continue
        gap = np.linalg.norm(solutions[i] - solutions[i - 1])
        if gap <= math.sqrt(tol) * max(np.linalg.norm(solutions[i]), 1e-300):
            report.stabilized_at = report.levels[i].size
            break
    if not report.converged:
        report.message = "finite sections did not stabilize below tolerance"
    return report, final


# -- frame-Galerkin -----------------------------------------------------------


def frame_galerkin_solve(op, g, phi: Frame, method="cg", tol=DEFAULT_TOL):
    """Solve O f = g through the frame system matrix M(phi,phi)(O).

    The right side C_phi g lies in the range of the analysis operator,
    where the singular system matrix is uniquely solvable; the ambient
    solution is synthesized from the range solution.  The final check
    compares ||O f - g|| against the requested tolerance.
    """
    op = as_operator(op)
    g = np.asarray(g, dtype=complex)
    m = galerkin_matrix(op, phi, phi).entries
    b = analysis(phi, g)
    singular = phi.size > phi.ambient_dim
    iterations = 0
    normal_eq = False
    if method == "cg":
        hermitian = _hermitian_defect(m) <= HERMITIAN_TOL
        res = cg_solve(m, b, tol=min(tol * 1e-2, 1e-10),
                       normal_equations=not hermitian)
        c, iterations = res.c, res.iterations
        normal_eq = res.normal_equations
        stalled = not res.converged
    elif method == "richardson":
        s = np.linalg.svd(m, compute_uv=False)
        pos = s[s > PROJECTION_TOL * max(s[0], 1e-300)]
        res = richardson_solve(m, b, 2.0 / (pos[0] + pos[-1]),
                               tol=min(tol * 1e-2, 1e-10))
        c, iterations = res.c, res.iterations
        stalled = getattr(res, "diverged", False) or not res.converged
    elif method == "direct":
        c = pseudo_inverse(m) @ b
        stalled = False
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    f = synthesis(phi, c)
    residual = float(np.linalg.norm(op.apply(f) - g))
    rel = residual / max(np.linalg.norm(g), 1e-300)
    level = LevelRecord(size=phi.size, residual=residual,
                        iterations=iterations,
                        kappa_dagger=generalized_condition_number(m))
    report = SolveReport(
        method=method,
        converged=bool(rel <= tol and not stalled),
        levels=[level],
        message="" if rel <= tol else
        f"ambient residual {rel:.3e} above tolerance {tol:.1e}",
    )
    if singular:
        report.message = (report.message + " " if report.message else "") + \
            "system matrix singular by redundancy; solved on the analysis range"
    if normal_eq:
        report.message = (report.message + " " if report.message else "") + \
            "non-Hermitian system matrix; CG ran on the normal equations"
    return f, report


# -- synthetic operators ------------------------------------------------------


def make_test_operator(kind, n, **params):
    """Synthetic operators exercising the solver paths.

    identity_minus_kernel: I - theta T with T a row-normalized,
    polynomially decaying circulant (||I - A|| = theta exactly).
    helmholtz_toy: symmetric kernel with a log-like diagonal singularity
    and quadratic off-diagonal decay.  diagonal: explicit spectrum.
    """
    if n < 4:
        raise InvalidInputError("operators need n >= 4")
    iset = IndexSet.ring(n)
    d = iset.distance_matrix()
    if kind == "identity_minus_kernel":
        theta = float(params.get("theta", 0.5))
        exponent = float(params.get("exponent", 3.0))
        if exponent < 2:
            raise InvalidInputError("kernel decay exponent must be >= 2")
        t = (1.0 + d) ** (-exponent)
        t /= t.sum(axis=1, keepdims=True)
        if theta >= 1:
            warnings.warn(f"theta = {theta} >= 1: operator may be singular",
                          stacklevel=2)
        return LinearOperator.from_matrix(np.eye(n) - theta * t,
                                          name=f"I-{theta}T")
    if kind == "helmholtz_toy":
        deff = np.maximum(d, 0.5)
        kern = -np.log(np.sin(np.pi * deff / n)) / n
        kern = kern * (1.0 + d) ** (-2.0)
        kern = 0.5 * (kern + kern.T)
        return LinearOperator.from_matrix(kern, name="helmholtz_toy")
    if kind == "diagonal":
        spectrum = np.asarray(params["spectrum"], dtype=complex)
        if spectrum.shape != (n,):
            raise InvalidInputError("spectrum length must equal n")
        return LinearOperator.from_matrix(np.diag(spectrum), name="diagonal")
    raise InvalidInputError(f"unknown operator kind {kind!r}")
