"""Spectral certification of H(S), rank scans and the prescribed-solid-angle solver."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .core import (
    ConfSimplexError,
    Geometry,
    LineSearchFailure,
    NotConverged,
    as_radii,
    solid_angles,
)
from .functionals import dihedral_angles, fd_jacobian, grad_S, hessian_S, is_realizable, map_i

log = logging.getLogger(__name__)

RANK_RTOL = 1e-8
KERNEL_ANGLE_TOL = 1e-4

EUCLIDEAN_RANGE = (0.1, 10.0)
HYPERBOLIC_RANGE = (0.1, 3.0)

# Fixed probes checked ahead of every sweep.  The second sits just inside the
# realizable cone: a fourth ball tangent to three unit balls needs radius
# above 1 / (3 + 2 sqrt 3) ~ 0.1547 in E^3 and above ~0.11274 in H^3.
EUCLIDEAN_PROBES = ((1.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 0.155))
HYPERBOLIC_PROBES = ((1.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 0.114))


@dataclass
class HessianReport:
    eigenvalues: tuple[float, ...]
    rank: int
    kernel_basis: list[np.ndarray]
    classification: str
    tolerance_used: float
    reference_angle: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "rank": self.rank,
            "kernel_basis": [[float(x) for x in v] for v in self.kernel_basis],
            "classification": self.classification,
            "tolerance_used": self.tolerance_used,
            "reference_angle": self.reference_angle,
        }


def analyze_hessian(
    hess: np.ndarray,
    reference_vector: Sequence[float] | None = None,
    tol: float = RANK_RTOL,
) -> HessianReport:
    """Eigen-analysis of a symmetric matrix with a relative rank tolerance.

    An eigenvalue counts toward the rank when ``|lambda| > tol * max|lambda|``.
    If ``reference_vector`` is given, its angle (radians) to the kernel is
    reported; it is pi/2 when the kernel is trivial.
    """
    hess = np.asarray(hess, dtype=float)
    evals, evecs = np.linalg.eigh(0.5 * (hess + hess.T))
    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    cut = tol * scale
    nonzero = np.abs(evals) > cut if scale > 0 else np.zeros(len(evals), dtype=bool)
    rank = int(nonzero.sum())
    kernel = [evecs[:, k] for k in range(len(evals)) if not nonzero[k]]

    n = len(evals)
    neg = evals < -cut
    pos = evals > cut
    if rank == 0:
        classification = "other"
    elif neg.sum() == n:
        classification = "negative_definite"
    elif pos.any() and neg.any():
        classification = "indefinite"
    elif rank == 3 and neg.sum() == 3 and n == 4:
        classification = "negative_semidefinite_rank3"
    else:
        classification = "other"

    angle = None
    if reference_vector is not None:
        v = np.asarray(reference_vector, dtype=float)
        v = v / np.linalg.norm(v)
        if kernel:
            basis = np.column_stack(kernel)
            inside = basis @ (basis.T @ v)
            angle = float(np.arctan2(np.linalg.norm(v - inside), np.linalg.norm(inside)))
        else:
            angle = float(np.pi / 2)
    return HessianReport(tuple(float(x) for x in evals), rank, kernel, classification, tol, angle)


def random_radii(seed: int, n: int, radii_range: tuple[float, float] = EUCLIDEAN_RANGE) -> np.ndarray:
    """``n`` radius quadruples with i.i.d. log-uniform components, shape (n, 4)."""
    lo, hi = radii_range
    if not 0 < lo < hi:
        raise ValueError(f"radii range must satisfy 0 < lo < hi, got {radii_range}")
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, 4)))


def random_conformal_radii(
    seed: int,
    n: int,
    radii_range: tuple[float, float],
    g: Geometry | str,
) -> tuple[np.ndarray, int]:
    """First ``n`` log-uniform draws whose conformal lengths are realizable in ``g``.

    Returns the accepted radii and the number of rejected draws.  Not every
    positive quadruple is realizable: in E^3 the condition is
    ``(sum 1/r)^2 > 2 sum 1/r^2``.
    """
    lo, hi = radii_range
    if not 0 < lo < hi:
        raise ValueError(f"radii range must satisfy 0 < lo < hi, got {radii_range}")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    rejected = 0
    while len(accepted) < n:
        r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=4))
        if is_realizable(map_i(r), g):
            accepted.append(r)
        else:
            rejected += 1
    return np.array(accepted).reshape(n, 4), rejected


@dataclass
class SampleRecord:
    index: int
    radii: tuple[float, ...]
    passed: bool
    report: HessianReport | None = None
    margin: float | None = None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "radii": list(self.radii),
            "passed": self.passed,
            "margin": self.margin,
            "error": self.error,
            "report": self.report.to_dict() if self.report is not None else None,
        }


@dataclass
class SweepReport:
    geometry: Geometry
    samples: int
    seed: int
    radii_range: tuple[float, float]
    tolerance: float
    rejected: int
    worst_margin: float
    worst_kernel_angle: float | None
    failures: list[SampleRecord] = field(default_factory=list)
    records: list[SampleRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, include_records: bool = False) -> dict[str, Any]:
        out = {
            "geometry": self.geometry.value,
            "samples": self.samples,
            "seed": self.seed,
            "radii_range": list(self.radii_range),
            "tolerance": self.tolerance,
            "rejected_draws": self.rejected,
            "worst_margin": self.worst_margin,
            "worst_kernel_angle": self.worst_kernel_angle,
            "passed": self.passed,
            "failures": [f.to_dict() for f in self.failures],
        }
        if include_records:
            out["records"] = [r.to_dict() for r in self.records]
        return out


def _check_sample(index: int, r: np.ndarray, g: Geometry, tol: float, angle_tol: float) -> SampleRecord:
    try:
        hess = hessian_S(r, g)
    except ConfSimplexError as exc:
        return SampleRecord(index, tuple(float(x) for x in r), False, error=f"{type(exc).__name__}: {exc}")
    if g is Geometry.EUCLIDEAN:
        rep = analyze_hessian(hess, reference_vector=r, tol=tol)
        ev = rep.eigenvalues
        scale = max(abs(x) for x in ev)
        margin = ev[2] / scale
        ok = (
            rep.classification == "negative_semidefinite_rank3"
            and len(rep.kernel_basis) == 1
            and rep.reference_angle < angle_tol
        )
    else:
        rep = analyze_hessian(hess, tol=tol)
        ev = rep.eigenvalues
        scale = max(abs(x) for x in ev)
        margin = ev[-1] / scale
        ok = rep.classification == "negative_definite"
    return SampleRecord(index, tuple(float(x) for x in r), ok, rep, float(margin))


def _sweep(
    g: Geometry,
    probes: Sequence[Sequence[float]],
    n: int,
    seed: int,
    radii_range: tuple[float, float],
    tol: float,
    angle_tol: float,
    workers: int,
) -> SweepReport:
    radii, rejected = random_conformal_radii(seed, n, radii_range, g)
    todo = [np.asarray(p, dtype=float) for p in probes] + list(radii)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda a: _check_sample(a[0], a[1], g, tol, angle_tol), enumerate(todo)))
    else:
        records = [_check_sample(k, r, g, tol, angle_tol) for k, r in enumerate(todo)]
    failures = sorted((rec for rec in records if not rec.passed), key=lambda rec: rec.index)
    margins = [rec.margin for rec in records if rec.margin is not None]
    angles = [rec.report.reference_angle for rec in records if rec.report and rec.report.reference_angle is not None]
    for rec in failures:
        log.warning("sample %d failed: radii=%s %s", rec.index, rec.radii, rec.error or rec.report.classification)
    return SweepReport(
        geometry=g,
        samples=len(records),
        seed=seed,
        radii_range=tuple(radii_range),
        tolerance=tol,
        rejected=rejected,
        worst_margin=max(margins) if margins else float("nan"),
        worst_kernel_angle=max(angles) if angles else None,
        failures=failures,
        records=records,
    )


def verify_lemma_1_2(
    n: int = 1000,
    seed: int = 42,
    radii_range: tuple[float, float] = EUCLIDEAN_RANGE,
    tol: float = RANK_RTOL,
    kernel_angle_tol: float = KERNEL_ANGLE_TOL,
    probes: Sequence[Sequence[float]] = EUCLIDEAN_PROBES,
    workers: int = 1,
) -> SweepReport:
    """Euclidean sweep: H(S) negative semidefinite of rank 3 with kernel along r.

    Each sample passes when three eigenvalues are below ``-tol * max|lambda|``,
    the fourth is within that band, and the kernel lies within
    ``kernel_angle_tol`` radians of r.  ``worst_margin`` is the largest
    third eigenvalue relative to ``max|lambda|``.  Fixed probes come first
    in the records; failures never abort the sweep.
    """
    return _sweep(Geometry.EUCLIDEAN, probes, n, seed, radii_range, tol, kernel_angle_tol, workers)


def verify_lemma_3_2(
    n: int = 500,
    seed: int = 7,
    radii_range: tuple[float, float] = HYPERBOLIC_RANGE,
    tol: float = RANK_RTOL,
    probes: Sequence[Sequence[float]] = HYPERBOLIC_PROBES,
    workers: int = 1,
) -> SweepReport:
    """Hyperbolic sweep: all four eigenvalues of H(S) below ``-tol * max|lambda|``.

    ``worst_margin`` is the largest eigenvalue relative to ``max|lambda|``.
    """
    return _sweep(Geometry.HYPERBOLIC, probes, n, seed, radii_range, tol, KERNEL_ANGLE_TOL, workers)


def path_rank_scan(
    r_from: Sequence[float],
    r_to: Sequence[float],
    steps: int,
    g: Geometry | str,
    tol: float = RANK_RTOL,
) -> list[tuple[float, int, tuple[float, ...]]]:
    """Rank of H(S) along the segment ``(1 - t) r_from + t r_to``.

    Returns ``(t, rank, eigenvalues)`` rows at ``steps + 1`` equally spaced
    values of t, or a single row when the endpoints coincide.
    """
    g = Geometry.parse(g)
    a = as_radii(r_from)
    b = as_radii(r_to)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    ts = [0.0] if np.array_equal(a, b) else np.linspace(0.0, 1.0, steps + 1)
    rows = []
    for t in ts:
        rep = analyze_hessian(hessian_S((1 - t) * a + t * b, g), tol=tol)
        rows.append((float(t), rep.rank, rep.eigenvalues))
    return rows


@dataclass
class SolveResult:
    radii: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    path: list[np.ndarray] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": [float(x) for x in self.radii],
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "path": None if self.path is None else [[float(x) for x in p] for p in self.path],
        }


def _residual(r: np.ndarray, target: np.ndarray, g: Geometry) -> np.ndarray | None:
    if np.any(r <= 0):
        return None
    try:
        return solid_angles(dihedral_angles(map_i(r), g)) - target
    except ConfSimplexError:
        return None


def _jacobian(r: np.ndarray, g: Geometry) -> np.ndarray:
    # the solver needs a descent direction, not a certificate: symmetrize without the asymmetry gate
    jac = fd_jacobian(lambda x: solid_angles(dihedral_angles(map_i(x), g)), r)
    return 0.5 * (jac + jac.T)


def _along(r: np.ndarray, step: np.ndarray, lam: float, total: float, g: Geometry, curvature: bool) -> np.ndarray:
    """Trial point ``lam`` of the way along a Newton step.

    With ``curvature`` the trial moves on the straight line in ``k = 1/r``
    with the same tangent, ``k - lam * step / r**2``; in E^3 it is then
    rescaled onto ``sum(r) = total``, which leaves the solid angles alone.
    """
    if not curvature:
        return r + lam * step
    k = 1.0 / r - lam * step / r ** 2
    if np.any(k <= 0):
        return -np.ones_like(r)
    trial = 1.0 / k
    return trial * (total / trial.sum()) if g is Geometry.EUCLIDEAN else trial


def _damped_newton(
    target: np.ndarray,
    g: Geometry,
    r: np.ndarray,
    res: np.ndarray,
    tol: float,
    max_iterations: int,
    max_halvings: int,
    polish: int,
    trace: bool,
    curvature: bool,
) -> SolveResult:
    total = float(r.sum())
    path = [r.copy()] if trace else None

    def result(converged: bool, it: int) -> SolveResult:
        return SolveResult(r.copy(), float(np.max(np.abs(res))), it, converged, path)

    def newton_step(it: int) -> np.ndarray:
        try:
            hess = _jacobian(r, g)
        except ConfSimplexError as exc:
            raise NotConverged(f"Jacobian failed at iteration {it + 1}: {exc}", result(False, it)) from exc
        if g is Geometry.EUCLIDEAN:
            kkt = np.zeros((5, 5))
            kkt[:4, :4] = hess
            kkt[:4, 4] = kkt[4, :4] = 1.0
            rhs = np.append(-res, total - r.sum())
            return np.linalg.solve(kkt, rhs)[:4]
        return np.linalg.solve(hess, -res)

    it = 0
    while it < max_iterations:
        if np.max(np.abs(res)) < tol:
            # A few undamped polishing steps: the residual test alone leaves
            # the radii error scaled by 1/|smallest eigenvalue|.
            for _ in range(polish):
                if it >= max_iterations:
                    break
                trial = _along(r, newton_step(it), 1.0, total, g, curvature)
                trial_res = _residual(trial, target, g)
                if trial_res is None or np.linalg.norm(trial_res) >= np.linalg.norm(res):
                    break
                r, res = trial, trial_res
                it += 1
                if trace:
                    path.append(r.copy())
            return result(True, it)
        step = newton_step(it)
        merit = np.linalg.norm(res)
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = _along(r, step, lam, total, g, curvature)
            trial_res = _residual(trial, target, g)
            if trial_res is not None:
                trial_merit = np.linalg.norm(trial_res)
                # strict test too: for tiny lam the Armijo factor rounds to 1
                if trial_merit < merit and trial_merit <= (1 - 1e-4 * lam) * merit:
                    break
            lam *= 0.5
        else:
            raise LineSearchFailure(
                f"damping underflowed at iteration {it + 1} with residual {np.max(np.abs(res)):.3e}",
                result(False, it),
            )
        log.debug("iteration %d: step %.3g, residual %.3e", it + 1, lam, np.max(np.abs(trial_res)))
        r, res = trial, trial_res
        it += 1
        if trace:
            path.append(r.copy())
    if np.max(np.abs(res)) < tol:
        return result(True, max_iterations)
    raise NotConverged(
        f"no convergence after {max_iterations} iterations, residual {np.max(np.abs(res)):.3e}",
        result(False, max_iterations),
    )


def solve_prescribed_solid_angles(
    target: Sequence[float],
    g: Geometry | str,
    start: Sequence[float] = (1.0, 1.0, 1.0, 1.0),
    tol: float = 1e-10,
    max_iterations: int = 100,
    max_halvings: int = 60,
    polish: int = 2,
    trace: bool = False,
) -> SolveResult:
    """Find radii whose solid angles equal ``target`` by damped Newton.

    H(S) is the Jacobian of ``r -> (S_1, ..., S_4)``.  In E^3 the solid angles
    are scale invariant, so the constraint ``sum(r) = sum(start)`` is
    appended as a bordered (Lagrange) row, keeping the system symmetric.
    Steps are halved until ``|F|_2`` drops by the Armijo factor and the
    iterate stays realizable.  Once ``max|F| < tol``, up to ``polish`` more
    full steps are taken while they keep reducing the residual.

    Damping along straight lines in r can stall next to the realizability
    boundary (needle-like solutions), so a failed run is repeated from
    ``start`` with the same Newton steps damped along straight lines in the
    curvatures ``1/r``.  In E^3 the realizable curvatures form a convex
    cone, so those trial points cannot cut across the boundary.

    Raises NotConverged (or its subclass LineSearchFailure) carrying the
    best iterate of the two runs in ``exc.result``.
    """
    g = Geometry.parse(g)
    target = np.asarray(target, dtype=float)
    if target.shape != (4,):
        raise ValueError(f"target: expected 4 solid angles, got shape {target.shape}")
    r = as_radii(start).copy()
    res = _residual(r, target, g)
    if res is None:
        raise ValueError(f"start: radii {r.tolist()} are not realizable in {g.value} geometry")
    args = (target, g, r, res, tol, max_iterations, max_halvings, polish, trace)
    try:
        return _damped_newton(*args, curvature=False)
    except NotConverged as first:
        log.info("Newton in radii failed (%s); retrying with damping in curvatures", first)
        try:
            return _damped_newton(*args, curvature=True)
        except NotConverged as second:
            if second.result.residual_norm < first.result.residual_norm:
                raise
            raise first from None
