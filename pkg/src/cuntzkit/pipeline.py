"""Stage runner behind the command line.

A :class:`Workbench` holds the objects built for one system at one
truncation and builds them lazily, so a stage (or a single check in a
convergence study) pulls in exactly what it needs.  Every stage is a list of
named sub-checks returning :class:`~cuntzkit.verify.VerificationReport`.
"""

from __future__ import annotations

import json
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from . import cuntz as cz
from . import discretize as dz
from . import dynamics as dyn
from . import export
from . import symbolic as sym
from . import verify as vf
from .config import ExperimentConfig, validate_stages
from .dynamics import SystemKind
from .exact import ExactMatrix
from .verify import CheckRecord, VerificationReport

GENERATION_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# test functions per system kind


def _prefix_value(words, N: int) -> np.ndarray:
    """``x = sum_k (w_k - 1) N^{-k}`` for an ``(m, L)`` array of prefixes."""
    words = np.asarray(words)
    scale = float(N) ** -np.arange(1, words.shape[1] + 1)
    return (words - 1) @ scale


def generation_test_function(sys):
    """Indicator whose conditional expectations probe generation of the sigma-algebra."""
    N = sys.N
    if sys.kind is SystemKind.FULL_SHIFT:
        return lambda W: (_prefix_value(W, N) < 1 / 3).astype(float)
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        # chi_{X x [0, 1/2)}
        return lambda P: (np.asarray(P[1]) < 0.5).astype(float)
    return lambda t: (np.asarray(t) % 1.0 < 1 / 3).astype(float)


def test_functions(sys) -> list:
    if sys.kind is SystemKind.FULL_SHIFT:
        return [
            lambda w: 1 if tuple(w)[:2] == (1, 2) else 0,
            lambda w: sum(int(s) for s in tuple(w)[:3]),
        ]
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        return [
            dz.SeparableFunction(lambda w: 1 if tuple(w)[:1] == (1,) else 0, dz.TrigPolynomial({1: 1.0})),
            dz.SeparableFunction(lambda w: 1.0, dz.TrigPolynomial({-1: 0.5, 2: 0.25})),
        ]
    return [dz.TrigPolynomial({1: 1.0}), dz.TrigPolynomial({-2: 1.0, 3: 0.5})]


def transfer_pairs(sys) -> list:
    if sys.kind is SystemKind.FULL_SHIFT:
        return [
            (lambda w: 1 if tuple(w)[:1] == (1,) else 0, lambda w: sum(int(s) for s in tuple(w)[:3])),
            (lambda w: int(tuple(w)[0]) ** 2, lambda w: 1 if tuple(w)[:2] == (2, 1) else 0),
        ]
    e = lambda k: (lambda t: np.exp(2j * np.pi * k * np.asarray(t)))
    return [(e(1), e(-2)), (lambda t: np.cos(2 * np.pi * np.asarray(t)), e(3))]


def module_tests(sys) -> list:
    if sys.kind is SystemKind.FULL_SHIFT:
        return [lambda w: 1, lambda w: sum(int(s) for s in tuple(w)[:3])]
    return [lambda t: np.exp(2j * np.pi * np.asarray(t)), lambda t: 1 + 0.5 * np.cos(4 * np.pi * np.asarray(t))]


def norm_samples(sys) -> list:
    return [
        lambda t: (np.asarray(t) % 1.0 < 1 / 8).astype(float),
        lambda t: np.ones_like(np.asarray(t, dtype=float)),
        lambda t: np.cos(2 * np.pi * np.asarray(t)),
    ]


def _rotation(N: int, exact: bool):
    """A rotation in the (1, 2) plane, rational on the exact path."""
    if exact:
        c, s = Fraction(3, 5), Fraction(4, 5)
        zero, one = Fraction(0), Fraction(1)
    else:
        c, s = float(np.cos(np.pi / 3)), float(np.sin(np.pi / 3))
        zero, one = 0.0, 1.0
    U = [[one if i == j else zero for j in range(N)] for i in range(N)]
    U[0][0], U[0][1], U[1][0], U[1][1] = c, -s, s, c
    return U


def _function_twist(sys):
    N = sys.N
    if sys.kind is SystemKind.FULL_SHIFT:
        # m_2 = +-1 according to the first letter
        ms = [lambda w: 1 for _ in range(N)]
        ms[1] = lambda w: 1 - 2 * (tuple(w)[0] == 1)
        return ms
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        return None
    ms = [dz.TrigPolynomial({0: 1.0}) for _ in range(N)]
    ms[1] = dz.TrigPolynomial({1: 1.0})
    return ms


# ---------------------------------------------------------------------------
# workbench


@dataclass
class Workbench:
    config: ExperimentConfig
    size: int
    nodes: int | None = None
    tolerance_scale: float = 1.0
    seed: int | None = None
    out_dir: Path | None = None

    def __post_init__(self):
        self.sys = self.config.system
        self.nodes = self.nodes or self.config.nodes
        self.seed = self.config.seed if self.seed is None else self.seed

    # tolerances ------------------------------------------------------------
    def tol(self, path: str) -> float:
        return self.config.tolerances[path] * self.tolerance_scale

    def family_tol(self, family: cz.CuntzFamily) -> float:
        if family.exact:
            return self.tol("exact")
        if self.sys.kind is SystemKind.BLASCHKE_COVER:
            return self.tol("quadrature")
        return self.tol("closed_form")

    # objects ----------------------------------------------------------------
    @cached_property
    def decomp(self):
        return dyn.decompose(self.sys)

    @cached_property
    def bases(self):
        sys, K, N = self.sys, self.size, self.sys.N
        if sys.kind is SystemKind.FULL_SHIFT:
            out = self.config.codomain or K + 1
            return dz.CylinderBasis(N, K), dz.CylinderBasis(N, out)
        if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
            modes = self.config.codomain or 4
            return dz.TensorBasis(dz.CylinderBasis(N, K), modes), dz.TensorBasis(dz.CylinderBasis(N, K + 1), modes)
        factor = 4 if sys.kind is SystemKind.BLASCHKE_COVER else N
        out = self.config.codomain or factor * K
        return dz.fourier_basis(sys, K, self.nodes), dz.fourier_basis(sys, out, self.nodes)

    @cached_property
    def grid(self):
        """Sample points for pointwise identities (shift words two letters deeper than the basis)."""
        if self.sys.kind is SystemKind.FULL_SHIFT:
            return cz.sample_grid(self.sys, depth=self.size + 2)
        return cz.sample_grid(self.sys)

    @cached_property
    def sections(self) -> cz.CuntzFamily:
        b_in, b_out = self.bases
        return cz.cuntz_from_sections(self.sys, self.decomp, b_in, b_out)

    @cached_property
    def composition(self):
        b_in, b_out = self.bases
        return dz.composition_operator(self.sys, b_in, b_out, on_spillover="record")

    @cached_property
    def polar(self):
        return dz.polar_decompose(self.composition)

    @cached_property
    def transfer(self):
        return cz.transfer(self.sys, self.decomp, self.polar.S)

    @cached_property
    def module_basis(self):
        return cz.module_basis_from_sections(self.sys, self.decomp, self.transfer)

    @cached_property
    def lifted(self) -> cz.CuntzFamily:
        return cz.lift_to_cuntz(self.module_basis, self.polar.S)

    @cached_property
    def scalar_twist(self) -> cz.CuntzFamily:
        S = self.sections
        return cz.twist_family(S, _rotation(self.sys.N, S.exact))

    @cached_property
    def function_twist(self):
        ms = _function_twist(self.sys)
        return None if ms is None else cz.twist_family(self.sections, ms)

    def export_family(self, family: cz.CuntzFamily, label: str):
        if self.out_dir is None or "bin" not in self.config.formats:
            return
        path = self.out_dir / "families" / f"{label}-{self.size}"
        export.write_family(path, family, tolerances=self.config.tolerances, seed=self.seed)


def _renamed(report: VerificationReport, prefix: str) -> VerificationReport:
    for r in report.checks:
        r.name = f"{prefix}.{r.name}"
    return report


def _flag(name: str, ok: bool, context: dict | None = None) -> CheckRecord:
    """Boolean outcome as an exact defect (0 when it holds)."""
    return CheckRecord(name, 0.0 if ok else 1.0, 0.0, context=context or {}, exact=True)


# ---------------------------------------------------------------------------
# stage checks


def _decompose_checks(wb: Workbench) -> VerificationReport:
    sys, d = wb.sys, wb.decomp
    rep = VerificationReport()
    ctx = {"system": sys.kind.value, "breaks": [float(b) for b in d.breaks] if d.breaks is not None else None}
    if sys.kind.is_circle:
        y = (np.arange(512) + 0.5) / 512
        inv = 0.0
        for psi in d.sections:
            back = np.asarray(dyn.evaluate_map(sys, np.asarray(psi(y), dtype=float)), dtype=float)
            dist = np.abs((back - y + 0.5) % 1.0 - 0.5)
            inv = max(inv, float(dist.max()))
        rep.add(vf._record("sections.right_inverse", inv, wb.tol("closed_form"), context=ctx))
        total = sum(np.asarray(u(y), dtype=float) for u in d.weights)
        if sys.kind is not SystemKind.WEIGHTED_CIRCLE_MONOMIAL:
            # the reference measure is invariant, so the weights add up to one
            rep.add(vf._record("weights.sum_to_one", float(np.abs(total - 1).max()), wb.tol("closed_form"), context={**ctx, "grid": 512}))
        else:
            w = np.asarray(d.density(y), dtype=float)
            rep.add(vf._record("weights.density", float(np.abs(total - w).max()), wb.tol("closed_form"), context={**ctx, "grid": 512}))
    return rep


def _generation_checks(wb: Workbench) -> VerificationReport:
    sys = wb.sys
    depths = wb.config.checks.generation_depths
    f = generation_test_function(sys)
    if sys.kind is SystemKind.FULL_SHIFT:
        res = min(max(depths) + 4, 14 if sys.N == 2 else 10)
        return vf.check_generation(sys, wb.decomp, depths, f, resolution=max(res, max(depths)))
    if sys.kind is SystemKind.PRODUCT_SHIFT_ROTATION:
        return vf.check_generation(sys, wb.decomp, depths, f, expect_generating=False)
    return vf.check_generation(sys, wb.decomp, depths, f)


def _sections_checks(wb: Workbench) -> VerificationReport:
    F = wb.sections
    wb.export_family(F, "sections")
    return vf.check_cuntz(F, wb.family_tol(F))


def _polar_checks(wb: Workbench) -> VerificationReport:
    sys, P, C = wb.sys, wb.polar, wb.composition
    exact = C.exact
    ctx = {"system": sys.kind.value, "spillover": C.meta.get("spillover"), "domain": C.domain.describe(), "codomain": C.codomain.describe()}
    rep = VerificationReport()
    recon_tol = wb.tol("exact") if exact else 1e-9 * wb.tolerance_scale
    rep.add(vf._record("polar.reconstruction", P.reconstruction, recon_tol, exact and P.reconstruction == 0.0, context=ctx))
    lo, hi = dz.singular_bounds(C)
    rep.add(CheckRecord("polar.lower_bound", lo, 0.0, context={**ctx, "upper": hi}, bound="lower"))
    if sys.kind.is_circle:
        # a_phi = M_h with h^2 = sum_i u_i, compared at operator level
        b = C.domain
        w_sqrt = lambda x: np.sqrt(np.asarray(wb.decomp.density(x), dtype=float))
        D = dz.compress(dz.Multiplication(P.h) - dz.Multiplication(w_sqrt), b, b)
        rep.add(vf._record("polar.a_phi", float(np.linalg.norm(D, 2)), wb.tol("closed_form"), context=ctx))
        rho = sys.density
        if rho is not None and _density_averages_out(rho, sys.N):
            target = lambda x: np.asarray(rho(x), dtype=float) ** -0.5
            D = dz.compress(dz.Multiplication(P.h) - dz.Multiplication(target), b, b)
            grid = (np.arange(4096) + 0.5) / 4096
            pointwise = float(np.abs(np.asarray(P.h(grid)) - target(grid)).max())
            rep.add(vf._record("polar.a_phi_vs_density", float(np.linalg.norm(D, 2)), wb.tol("quadrature"), context={**ctx, "pointwise": pointwise}))
    elif exact:
        A = P.a.entries
        D = A - ExactMatrix.identity(A.shape[0], A.n)
        val = 0.0 if D.is_zero() else float(np.linalg.norm(D.to_numpy(), 2))
        rep.add(vf._record("polar.a_phi", val, wb.tol("exact"), True, context=ctx))
    return rep


def _density_averages_out(rho, N: int) -> bool:
    """``sum_i rho(psi_i y) = N`` (no harmonics at multiples of ``N``), so ``h = rho^{-1/2}``."""
    coeffs = [(k, a) for k, a in enumerate(rho.cos, 1)] + [(k, b) for k, b in enumerate(rho.sin, 1)]
    return all(k % N or not c for k, c in coeffs)


def _transfer_checks(wb: Workbench) -> VerificationReport:
    T = wb.transfer
    tol = wb.tol("exact") if T.S_phi.exact else wb.tol("closed_form")
    return vf.check_transfer_identities(T, transfer_pairs(wb.sys), tol=tol, grid=wb.grid)


def _module_checks(wb: Workbench) -> VerificationReport:
    T = wb.transfer
    tol = wb.tol("exact") if T.S_phi.exact else wb.tol("quadrature")
    return vf.check_module_basis(wb.module_basis, T, module_tests(wb.sys), tol, grid=wb.grid)


def _lifted_checks(wb: Workbench) -> VerificationReport:
    L, F = wb.lifted, wb.sections
    wb.export_family(L, "lifted")
    tol = wb.family_tol(L)
    rep = _renamed(vf.check_cuntz(L, tol).extend(vf.check_implements(L, wb.sys, test_functions(wb.sys), tol)), "lifted")
    diff, exact = cz.family_difference(F, L)
    rep.add(vf._record("lifted.matches_sections", diff, tol, exact, context={"system": wb.sys.kind.value}))
    return rep


def _norm_checks(wb: Workbench) -> VerificationReport:
    if not wb.sys.kind.is_circle:
        return VerificationReport()
    return vf.check_norm_equivalence(wb.transfer, norm_samples(wb.sys), tol=wb.tol("closed_form"))


def _implements_checks(wb: Workbench) -> VerificationReport:
    F = wb.sections
    return vf.check_implements(F, wb.sys, test_functions(wb.sys), wb.family_tol(F))


def _left_inverse_checks(wb: Workbench) -> VerificationReport:
    F = wb.sections
    return vf.check_left_inverses(F, wb.sys, test_functions(wb.sys), wb.family_tol(F))


def _injectivity_checks(wb: Workbench) -> VerificationReport:
    F = wb.sections
    Ts = vf.random_test_operators(F, wb.config.checks.trials, wb.seed)
    rep = vf.check_injectivity_identity(F, Ts, wb.family_tol(F))
    for r in rep.checks:
        r.context["seed"] = wb.seed
    return rep


def _intertwiner_checks(wb: Workbench) -> VerificationReport:
    F = wb.sections
    fs = test_functions(wb.sys)
    rep = vf.check_intertwiner(F.isometries[0], F, fs, wb.family_tol(F), name="intertwiner.S_1")
    # the inclusion does not intertwine; a lower bound of 1/2 on the defect
    return rep.extend(vf.check_intertwiner("identity", F, fs, 0.5, name="intertwiner.identity_control", expect_member=False))


def _ergodic_checks(wb: Workbench) -> VerificationReport:
    sys, chk = wb.sys, wb.config.checks
    rep = VerificationReport()
    if sys.kind is SystemKind.FULL_SHIFT or sys.kind.is_circle:
        depth = chk.fixed_space_depth or (6 if sys.kind is SystemKind.FULL_SHIFT else wb.size)
        dim = vf.fixed_space_masa(sys, wb.decomp, depth)
        rep.add(CheckRecord("ergodic.fixed_space", dim, 1, context={"system": sys.kind.value, "depth": depth}, bound="equal", is_dimension=True, exact=sys.kind is SystemKind.FULL_SHIFT))
    if sys.kind is SystemKind.FULL_SHIFT:
        d = chk.commutant_depth
        dim = vf.word_projection_commutant(sys, wb.decomp, d)
        rep.add(CheckRecord("ergodic.word_commutant", dim, sys.N**d, context={"system": sys.kind.value, "depth": d}, bound="equal", is_dimension=True, exact=True))
    return rep


def _pairing_checks(wb: Workbench) -> VerificationReport:
    S = wb.sections
    trials, seed = wb.config.checks.trials, wb.seed
    tol = wb.family_tol(S)
    rep = VerificationReport()
    Q = wb.scalar_twist
    rep.extend(_renamed(vf.compare_extensions(S, Q, trials, seed, tol=tol, expect_equal=True), "scalar_twist"))
    rep.extend(_renamed(vf.check_pairing_unitary(S, Q, tol), "scalar_twist"))
    Qf = wb.function_twist
    if Qf is not None:
        rep.extend(_renamed(vf.compare_extensions(S, Qf, trials, seed, tol=tol, expect_equal=False), "function_twist"))
        rep.extend(_renamed(vf.check_pairing_unitary(S, Qf, tol), "function_twist"))
    if "build-transfer" in wb.config.stages:
        rep.extend(_renamed(vf.check_pairing_unitary(S, wb.lifted, wb.family_tol(wb.lifted)), "lifted"))
    return rep


_SYMBOLIC_CACHE: dict = {}


def _symbolic_checks(wb: Workbench) -> VerificationReport:
    N = wb.sys.N
    key = (N, wb.config.checks.samples, wb.seed)
    if key not in _SYMBOLIC_CACHE:
        _SYMBOLIC_CACHE[key] = sym.symbolic_suite(N, samples=wb.config.checks.samples, seed=wb.seed)
    rep = VerificationReport()
    for name, (ok, ctx) in _SYMBOLIC_CACHE[key].items():
        rep.add(_flag(name, ok, {"N": N, "detail": ctx}))
    return rep


STAGE_CHECKS: dict[str, list[tuple[str, Callable]]] = {
    "decompose": [("check_decomposition", _decompose_checks), ("check_generation", _generation_checks)],
    "build-sections": [("check_cuntz", _sections_checks)],
    "build-polar": [("check_polar", _polar_checks)],
    "build-transfer": [
        ("check_transfer", _transfer_checks),
        ("check_module_basis", _module_checks),
        ("check_lifted", _lifted_checks),
        ("check_norm_equivalence", _norm_checks),
    ],
    "verify-all": [
        ("check_implements", _implements_checks),
        ("check_left_inverses", _left_inverse_checks),
        ("check_injectivity_identity", _injectivity_checks),
        ("check_intertwiner", _intertwiner_checks),
        ("check_ergodic", _ergodic_checks),
    ],
    "pairing-study": [("check_pairing", _pairing_checks)],
    "symbolic-suite": [("check_symbolic", _symbolic_checks)],
}


def _run_check(name: str, fn: Callable, wb: Workbench) -> VerificationReport:
    try:
        return fn(wb)
    except Exception as exc:  # a failing construction becomes a failing record
        ctx = {"error": f"{type(exc).__name__}: {exc}", "where": traceback.extract_tb(exc.__traceback__)[-1].name}
        return VerificationReport().add(CheckRecord(f"{name}.error", 1.0, 0.0, context=ctx))


def run_stage(stage: str, wb: Workbench) -> VerificationReport:
    rep = VerificationReport()
    for name, fn in STAGE_CHECKS[stage]:
        rep.extend(_run_check(name, fn, wb))
    return rep


def _scale_note(tolerance_scale: float) -> dict:
    return {} if tolerance_scale == 1.0 else {"tolerance_scale": tolerance_scale}


# ---------------------------------------------------------------------------
# runs and studies


@dataclass
class StageResult:
    stage: str
    size: int
    report: VerificationReport

    @property
    def ok(self) -> bool:
        return self.report.ok


@dataclass
class RunResult:
    config: ExperimentConfig
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def summary_rows(self) -> list:
        rows = []
        for r in self.results:
            failed = [c.name for c in r.report.checks if not c.ok]
            rows.append({"stage": r.stage, "truncation": r.size, "checks": len(r.report.checks), "failed": failed, "ok": r.ok})
        return rows

    def summary_table(self) -> str:
        rows = [("stage", "truncation", "checks", "failed", "status")]
        for r in self.summary_rows():
            rows.append((r["stage"], str(r["truncation"]), str(r["checks"]), ", ".join(r["failed"]) or "-", "ok" if r["ok"] else "FAIL"))
        widths = [max(len(row[k]) for row in rows) for k in range(len(rows[0]))]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def run(config: ExperimentConfig, *, out_dir=None, seed: int | None = None, tolerance_scale: float = 1.0, write: bool = True) -> RunResult:
    """Execute every stage at every truncation; reports go to ``out_dir``."""
    validate_stages(config.stages, config.system)
    out = Path(out_dir if out_dir is not None else config.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    result = RunResult(config)
    for size in config.sizes:
        wb = Workbench(config, size, tolerance_scale=tolerance_scale, seed=seed, out_dir=out if write else None)
        for stage in config.stages:
            rep = run_stage(stage, wb)
            for r in rep.checks:
                r.context.update(_scale_note(tolerance_scale))
            result.results.append(StageResult(stage, size, rep))
            if write:
                write_report(out, stage, size, rep, config.formats)
    if write:
        meta = {"config": config.name, "seed": config.seed if seed is None else seed, "ok": result.ok, "stages": result.summary_rows()}
        (out / "summary.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (out / "summary.txt").write_text(result.summary_table() + "\n")
    return result


def write_report(out: Path, stage: str, size: int, rep: VerificationReport, formats=("json", "txt")):
    stem = out / f"{stage}-{size}"
    if "json" in formats:
        stem.with_suffix(".json").write_text(rep.to_json() + "\n")
    if "txt" in formats:
        stem.with_suffix(".txt").write_text(rep.to_table() + "\n")


def find_check(name: str) -> tuple[str, str]:
    """Stage and sub-check for a check name (``check_cuntz``) or record name (``implements``)."""
    for stage, checks in STAGE_CHECKS.items():
        for cname, _ in checks:
            if cname == name:
                return stage, cname
    raise KeyError(f"unknown check {name!r}; available: {', '.join(c for v in STAGE_CHECKS.values() for c, _ in v)}")


@dataclass
class StudyResult:
    check: str
    parameter: str
    rows: list  # (value, defect, records)

    @property
    def defects(self) -> list:
        return [d for _, d, _ in self.rows]

    def nonincreasing(self, floor: float = GENERATION_FLOOR) -> bool:
        ds = self.defects
        return all(b <= max(a, floor) for a, b in zip(ds[:-1], ds[1:]))

    def table(self) -> str:
        head = f"{self.parameter:>10}  defect"
        lines = [head] + [f"{v:>10}  {d:.3e}" for v, d, _ in self.rows]
        lines.append(f"nonincreasing: {'yes' if self.nonincreasing() else 'no'}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {"check": self.check, "parameter": self.parameter, "rows": [{"value": v, "defect": d, "records": recs} for v, d, recs in self.rows]},
            indent=2,
            sort_keys=True,
            default=vf._json_default,
        )


def convergence_study(
    config: ExperimentConfig,
    check: str,
    *,
    parameter: str = "size",
    values=None,
    seed: int | None = None,
    tolerance_scale: float = 1.0,
) -> StudyResult:
    """Defect of one check across truncation sizes (or quadrature node counts).

    The defect is the largest value among the check's upper-bound records.
    """
    stage, cname = find_check(check)
    fn = dict(STAGE_CHECKS[stage])[cname]
    if parameter not in ("size", "nodes"):
        raise ValueError("parameter is 'size' or 'nodes'")
    if values is None:
        values = config.sizes if parameter == "size" else (config.nodes,)
    rows = []
    for v in values:
        if parameter == "size":
            wb = Workbench(config, int(v), tolerance_scale=tolerance_scale, seed=seed)
        else:
            wb = Workbench(config, config.sizes[-1], nodes=int(v), tolerance_scale=tolerance_scale, seed=seed)
        rep = _run_check(cname, fn, wb)
        ups = [r.value for r in rep.checks if r.bound == "upper"]
        rows.append((int(v), max(ups) if ups else 0.0, rep.to_records()))
    return StudyResult(check, parameter, rows)
