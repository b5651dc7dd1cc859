"""Execute queued checks against a workspace and write deterministic reports.

Reports carry computation results only, never timestamps or machine facts,
and are serialized with sorted keys, so identical inputs on identical
versions give byte-identical files. Run metadata that cannot be
deterministic (wall time, interpreter, argv) goes to a sidecar that is
excluded from that guarantee. All files are written atomically: a temp file
in the target directory, then a rename.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from .algebra import RATIONALS, AlgebraPresentation
from .complexes import PerfectComplex, homology_dims
from .cotangent import de_rham_cohomology
from .dsl import (
    FOLIATION_KINDS,
    CheckCommand,
    Declaration,
    MatesBlock,
    TangentQuery,
    Workspace,
)
from .errors import FolwerkError
from .foliation import verify_foliation
from .graded_mixed import check_quasi_free, verify_mixed
from .mates import check_bc_unit, mate_left, mate_right, normalize, paste_squares
from .poly import Gen, Polynomial
from .pushforward import check_functor_of_points, f_plus, tangent_at_point
from .windows import DEFAULT_REWRITE_BUDGET, DEFAULT_WINDOW, Window, budget

REPORT_SCHEMA = "folwerk-report/1"
RUN_SCHEMA = "folwerk-run/1"
SIDECAR_NAME = "run_meta.json"


def point_test_algebras() -> list[AlgebraPresentation]:
    """The fixed six finite test algebras for point-set comparisons.

    Dimensions over the rationals are 1, 2, 2, 2, 3, 4: the ground field,
    the dual numbers, the split quadratic, the Gaussian quadratic, third
    order jets, and a four dimensional square-zero plane.
    """
    out = [RATIONALS]

    def add(name: str, gnames: tuple[str, ...], rels) -> None:
        gg = tuple(Gen(n) for n in gnames)
        out.append(AlgebraPresentation(name, RATIONALS, gg, tuple(rels(gg))))

    add("dual", ("e",), lambda g: [Polynomial.gen(g, 0) ** 2])
    add("split", ("s",), lambda g: [Polynomial.gen(g, 0) ** 2 - Polynomial.gen(g, 0)])
    add("gauss", ("i",), lambda g: [Polynomial.gen(g, 0) ** 2 + Polynomial.one(g)])
    add("jet3", ("j",), lambda g: [Polynomial.gen(g, 0) ** 3])
    add("fat", ("a", "b"), lambda g: [Polynomial.gen(g, 0) ** 2, Polynomial.gen(g, 1) ** 2])
    return out


# -- outcomes ---------------------------------------------------------------------


@dataclass
class CheckOutcome:
    index: int
    target: str
    kind: str
    passed: bool
    report: dict

    def failing_conditions(self) -> list[str]:
        return [c["name"] for c in self.report["conditions"] if not c["passed"]]


@dataclass
class RunResult:
    outcomes: list[CheckOutcome]

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _cond(name: str, passed: bool, detail: str | None = None) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _table(dims: dict[int, int]) -> str:
    inner = ", ".join(f"{k}: {v}" for k, v in sorted(dims.items()))
    return "{" + inner + "}"


def _str_keys(dims: dict[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(dims.items())}


def _nonzero(dims: dict[int, int]) -> dict[int, int]:
    return {k: v for k, v in dims.items() if v != 0}


def _table_cond(name: str, got: dict[int, int], want: dict[int, int]) -> dict:
    got, want = _nonzero(got), _nonzero(want)
    return _cond(name, got == want, f"got {_table(got)}, want {_table(want)}")


# -- per-kind check handlers ---------------------------------------------------------

_MISSING_DIM_RANGE = (1, 2, 3, 4)  # free ranks exercised by the direct image law


def _check_algebra(decl, cmd, win, trace, conditions, result, provenance):
    b: AlgebraPresentation = decl.obj
    try:
        b.validate()
        conditions.append(_cond("well_formed", True))
    except FolwerkError as e:
        conditions.append(_cond("well_formed", False, str(e)))
    result["generators"] = [g.name for g in b.own_gens]
    result["relations"] = [repr(r) for r in b.own_relations]
    result["zero_algebra"] = b.is_zero_algebra
    result["dimension"] = b.dim() if b.is_finite_dimensional else None


def _check_map(decl, cmd, win, trace, conditions, result, provenance):
    m = decl.obj
    try:
        m.validate()
        conditions.append(_cond("well_formed", True))
    except FolwerkError as e:
        conditions.append(_cond("well_formed", False, str(e)))
    result["images"] = {g.name: repr(p) for g, p in zip(m.source.gens, m.images)}
    ffm = decl.extra.get("finite_free")
    if ffm is not None:
        result["rank"] = ffm.rank
        result["basis"] = [repr(b) for b in ffm.basis]
        for r in _MISSING_DIM_RANGE:
            img = f_plus(PerfectComplex.free(ffm.target, r, 0), ffm)
            conditions.append(
                _cond(
                    f"direct_image_rank[{r}]",
                    img.terms == {0: r * ffm.rank},
                    f"terms {_table(img.terms)}",
                )
            )


def _check_gmmap(decl, cmd, win, trace, conditions, result, provenance):
    m = decl.obj
    try:
        m.map.validate()
        m.validate_mixed()
        conditions.append(_cond("well_formed", True))
    except FolwerkError as e:
        conditions.append(_cond("well_formed", False, str(e)))
    result["images"] = {
        g.name: repr(p) for g, p in zip(m.source.algebra.gens, m.map.images)
    }


def _mixed_conditions(rep, conditions):
    for c in rep.checks:
        conditions.append(_cond(f"identity[{c.name}]", c.passed, c.failing_monomial))


def _check_derham(decl, cmd, win, trace, conditions, result, provenance):
    dr = decl.obj
    _mixed_conditions(verify_mixed(dr.mixed, win), conditions)
    result["forms"] = dr.as_dict()
    if dr.model is not dr.source:
        provenance.append("strict model via Koszul resolution")
    if cmd.cohomology is not None:
        got = de_rham_cohomology(dr, win).dims
        conditions.append(_table_cond("total_cohomology", got, cmd.cohomology))
        result["cohomology"] = _str_keys(_nonzero(got))


def _check_mixed(decl, cmd, win, trace, conditions, result, provenance):
    gm = decl.obj
    _mixed_conditions(verify_mixed(gm, win), conditions)
    result["mixed_generators"] = [g.name for g in gm.mixed_gens]


def _check_pushgm(decl, cmd, win, trace, conditions, result, provenance):
    gm = decl.obj
    _mixed_conditions(verify_mixed(gm, win), conditions)
    conditions.append(
        _cond("quasi_free", check_quasi_free(gm, weight_bound=win.weight))
    )
    result["weight_ranks"] = {
        str(w): _str_keys(gm.weight_piece(w).terms) for w in range(win.weight + 1)
    }
    if gm.action is not None:
        result["acts_through"] = gm.action.name


def _check_foliation(decl, cmd, win, trace, conditions, result, provenance):
    fol = decl.obj
    rep = verify_foliation(fol, win)
    for c in rep.conditions:
        conditions.append(_cond(c.name, c.passed, c.detail))
    _mixed_conditions(rep.mixed, conditions)
    result["cotangent_terms"] = _str_keys(fol.cotangent.terms)
    if decl.kind == "pushfol":
        result["scheme"] = fol.weil.as_dict()
    if cmd.homology is not None:
        got = homology_dims(fol.cotangent, win)
        conditions.append(_table_cond("cotangent_homology", got, cmd.homology))
        result["cotangent_homology"] = _str_keys(_nonzero(got))


def _check_points(decl, cmd, win, trace, conditions, result, provenance):
    w = decl.obj
    result["scheme"] = w.as_dict()
    reports = []
    for k, t in enumerate(point_test_algebras()):
        rep = check_functor_of_points(w, t, samples=3, seed=k)
        conditions.append(_cond(f"points[{t.name}]", rep.passed))
        reports.append(rep.as_dict())
    result["points"] = reports


def _check_tangentat(decl, cmd, win, trace, conditions, result, provenance):
    q: TangentQuery = decl.obj
    rep = tangent_at_point(q.argument, q.point, win)
    conditions.append(
        _cond(
            "tangent_sections",
            rep.passed,
            f"left {_table(rep.left)}, right {_table(rep.right)}",
        )
    )
    result["tangent"] = rep.as_dict()
    result["point"] = {
        g.name: repr(v) for g, v in zip(q.point.source.gens, q.point.images)
    }


def _check_complex(decl, cmd, win, trace, conditions, result, provenance):
    cx = decl.obj
    result["terms"] = _str_keys(cx.terms)
    if cmd.homology is not None:
        got = homology_dims(cx, win)
        conditions.append(_table_cond("homology", got, cmd.homology))
        result["homology"] = _str_keys(_nonzero(got))


def _check_mates(decl, cmd, win, trace, conditions, result, provenance):
    blk: MatesBlock = decl.obj
    ctx = blk.context
    bud = budget(DEFAULT_REWRITE_BUDGET)
    entries = []
    for op, args, line in blk.demands:
        if op == "bc":
            rep = check_bc_unit(ctx, args[0], budget=bud, want_trace=trace)
            conditions.append(_cond(f"bc[{args[0]}]", rep.passed))
            entries.append({"demand": "bc", **rep.as_dict()})
        elif op == "roundtrip":
            term = ctx.generator(args[0])
            tr_back: list | None = [] if trace else None
            back = normalize(ctx, mate_right(ctx, mate_left(ctx, term)), bud, tr_back)
            straight = normalize(ctx, term, bud)
            conditions.append(_cond(f"roundtrip[{args[0]}]", back == straight))
            entry = {
                "demand": "roundtrip",
                "square": args[0],
                "round_trip": ctx.render(back),
                "normal_form": ctx.render(straight),
            }
            if tr_back is not None:
                entry["trace"] = tr_back
            entries.append(entry)
        else:
            rep = paste_squares(ctx, args[0], args[1], budget=bud)
            conditions.append(
                _cond(f"paste[{args[0]},{args[1]}]", rep.mate_compatible)
            )
            entries.append(
                {"demand": "paste", "top": args[0], "bottom": args[1], **rep.as_dict()}
            )
    result["demands"] = entries


_HANDLERS = {
    "algebra": _check_algebra,
    "map": _check_map,
    "derham": _check_derham,
    "mixed": _check_mixed,
    "gmmap": _check_gmmap,
    "pushgm": _check_pushgm,
    "weilres": _check_points,
    "mapsch": _check_points,
    "tangentat": _check_tangentat,
    "complex": _check_complex,
    "fplus": _check_complex,
    "mates": _check_mates,
}
for _k in FOLIATION_KINDS:
    _HANDLERS[_k] = _check_foliation


def execute_check(
    ws: Workspace,
    cmd: CheckCommand,
    index: int,
    *,
    window: Window | None = None,
    trace: bool = False,
) -> CheckOutcome:
    """Run one check command and assemble its report dictionary."""
    decl: Declaration = ws.declarations[cmd.name]
    win = window or decl.window or DEFAULT_WINDOW
    conditions: list[dict] = []
    result: dict = {}
    provenance: list[str] = []
    _HANDLERS[decl.kind](decl, cmd, win, trace, conditions, result, provenance)
    passed = all(c["passed"] for c in conditions)
    report = {
        "schema": REPORT_SCHEMA,
        "check": index,
        "target": cmd.name,
        "kind": decl.kind,
        "inputs": list(decl.inputs),
        "window": win.as_dict(),
        "passed": passed,
        "conditions": conditions,
        "result": result,
        "provenance": provenance,
    }
    return CheckOutcome(index, cmd.name, decl.kind, passed, report)


# -- file output -----------------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _write_atomic(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".folwerk-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_reports(
    json_dir: str,
    outcomes: list[CheckOutcome],
    source_name: str,
    window: Window | None,
    elapsed: float,
) -> None:
    os.makedirs(json_dir, exist_ok=True)
    for out in outcomes:
        path = os.path.join(json_dir, f"{out.index:03d}_{out.target}.json")
        _write_atomic(path, _dump(out.report))
    summary = {
        "schema": RUN_SCHEMA,
        "source": source_name,
        "version": __version__,
        "window_override": window.as_dict() if window else None,
        "checks": [
            {"check": o.index, "target": o.target, "kind": o.kind, "passed": o.passed}
            for o in outcomes
        ],
        "passed": all(o.passed for o in outcomes),
    }
    _write_atomic(os.path.join(json_dir, "summary.json"), _dump(summary))
    # wall-clock facts live here and only here
    sidecar = {
        "schema": "folwerk-run-meta/1",
        "elapsed_seconds": round(elapsed, 6),
        "unix_time": time.time(),
        "python": sys.version.split()[0],
    }
    _write_atomic(os.path.join(json_dir, SIDECAR_NAME), _dump(sidecar))


# -- the driver ----------------------------------------------------------------------


def run(
    ws: Workspace,
    commands: list[CheckCommand] | None = None,
    *,
    json_dir: str | None = None,
    trace: bool = False,
    window: Window | None = None,
    parallel: bool = False,
    source_name: str = "",
) -> RunResult:
    """Execute check commands in order and optionally write report files.

    Failing checks are ordinary outcomes; errors raised by the underlying
    operations propagate, annotated with the index and target of the check
    that hit them.
    """
    if commands is None:
        commands = ws.checks
    started = time.monotonic()

    def one(pair):
        i, cmd = pair
        try:
            return execute_check(ws, cmd, i, window=window, trace=trace)
        except FolwerkError as e:
            e.check_index = i
            e.check_target = cmd.name
            raise

    numbered = list(enumerate(commands))
    if parallel and len(numbered) > 1:
        outcomes = []
        with ThreadPoolExecutor(max_workers=min(8, len(numbered))) as pool:
            futures = [pool.submit(one, pair) for pair in numbered]
            errors = []
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except FolwerkError as e:
                    errors.append(e)
            if errors:
                raise min(errors, key=lambda e: e.check_index)
        outcomes.sort(key=lambda o: o.index)
    else:
        outcomes = [one(pair) for pair in numbered]

    if json_dir is not None:
        _write_reports(
            json_dir, outcomes, source_name, window, time.monotonic() - started
        )
    return RunResult(outcomes)
