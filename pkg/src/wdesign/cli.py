"""Command-line surface: problem files in, human and machine reports out.

Problem files are JSON documents with ``model``, ``estimation_space``,
``system`` / ``weight_matrix``, ``criterion`` and ``search`` sections; see
the README for the full schema.  All numeric output is rendered to 12
significant digits, so reports are diff-stable across runs for a fixed file
and seed.  Exit status: 0 success/pass, 1 certification failure, 2 input
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import criteria, search
from .errors import DomainError, ParseError, SingularWeightError, SpaceError, WdesignError
from .estimable import (
    EstimableSystem,
    info_matrix_for_system,
    system_from_weight_matrix_sqrt,
    validate_system,
)
from .instances import random_instance
from .linalg import SymMatrix, eig_sym
from .model import (
    DesignSpec,
    EstimationSpace,
    estimation_space,
    infeasible_columns,
    information_matrix,
)
from .weighting import (
    check_weight_dominance,
    make_weight_matrix,
    secondary_weights,
    weight_matrix_from_system,
    weighted_info_matrix,
)

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_INPUT = 2

#: Rank cutoff for matrices typed into files as 12-digit decimals.
FILE_RANK_RTOL = 1e-9

CERT_KINDS = ("theorem1", "theorem2", "theorem3", "theorem4", "aopt", "eopt")


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _fmt_vector(vec) -> str:
    return "[" + ", ".join(_fmt(x) for x in np.asarray(vec).ravel()) + "]"


def _fmt_matrix(mat, indent: str = "  ") -> str:
    rows = np.atleast_2d(np.asarray(mat, dtype=float))
    return "\n".join(indent + _fmt_vector(row) for row in rows)


def _round12(obj):
    """Recursively render numerics to 12 significant digits for reports."""
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round12(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(_fmt(obj))
    return obj


# ---------------------------------------------------------------------------
# problem files


@dataclass(eq=False)
class Problem:
    """In-memory form of a problem file."""

    spec: DesignSpec
    space: EstimationSpace
    system: EstimableSystem | None = None
    weight_raw: SymMatrix | None = None
    weight: object | None = None  # WeightMatrix when the raw W sits inside E
    criterion: str | None = None
    search: dict | None = None

    def __eq__(self, other):
        if not isinstance(other, Problem):
            return NotImplemented
        if self.spec != other.spec or self.criterion != other.criterion:
            return False
        if (self.space.kind, self.space.v) != (other.space.kind, other.space.v):
            return False
        if not np.array_equal(self.space.projector.entries, other.space.projector.entries):
            return False
        if (self.system is None) != (other.system is None):
            return False
        if self.system is not None and not (
            np.array_equal(self.system.Q, other.system.Q)
            and np.array_equal(self.system.b, other.system.b)
        ):
            return False
        if (self.weight_raw is None) != (other.weight_raw is None):
            return False
        if self.weight_raw is not None and not np.array_equal(
            self.weight_raw.entries, other.weight_raw.entries
        ):
            return False
        return self.search == other.search


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ParseError(f"missing required field '{key}' in section '{where}'")
    return section[key]


def _matrix_from(rows, where: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ParseError(f"'{where}' must be a row-major rectangular array")
    return arr


def _parse_model(data: dict) -> DesignSpec:
    model = data.get("model")
    if not isinstance(model, dict):
        raise ParseError("missing required section 'model'")
    v = int(_require(model, "v", "model"))
    if "assignment" in model:
        assignment = tuple(int(t) for t in model["assignment"])
    elif "replications" in model:
        reps = [int(r) for r in model["replications"]]
        if len(reps) != v:
            raise ParseError("'replications' must list one count per treatment")
        assignment = tuple(t for t, r in enumerate(reps, start=1) for _ in range(r))
    else:
        raise ParseError("section 'model' needs 'assignment' or 'replications'")
    if "n" in model and int(model["n"]) != len(assignment):
        raise ParseError(
            f"model says n={model['n']} but the assignment lists {len(assignment)} units"
        )
    nuisance = model.get("nuisance", "intercept")
    if isinstance(nuisance, str):
        kind, sizes, ell = nuisance, None, None
    elif isinstance(nuisance, dict):
        kind = _require(nuisance, "kind", "model.nuisance")
        sizes = tuple(int(s) for s in nuisance["sizes"]) if "sizes" in nuisance else None
        ell = _matrix_from(nuisance["L"], "model.nuisance.L") if "L" in nuisance else None
    else:
        raise ParseError("'nuisance' must be a string or an object with a 'kind'")
    try:
        return DesignSpec(v, assignment, kind, sizes, ell)
    except ValueError as exc:
        raise ParseError(f"invalid model: {exc}") from exc


def _parse_space(data: dict, spec: DesignSpec) -> EstimationSpace:
    section = data.get("estimation_space")
    if section is None:
        kind = "contrasts" if spec.nuisance_kind in ("intercept", "blocks") else "full"
        return estimation_space(kind, spec.v)
    kind = _require(section, "kind", "estimation_space")
    basis = None
    if kind == "explicit":
        basis = _matrix_from(_require(section, "basis", "estimation_space"),
                             "estimation_space.basis")
    try:
        return estimation_space(kind, spec.v, basis)
    except ValueError as exc:
        raise ParseError(f"invalid estimation space: {exc}") from exc


def _pairwise_columns(v: int) -> np.ndarray:
    cols = []
    for i in range(v):
        for j in range(i + 1, v):
            q = np.zeros(v)
            q[i], q[j] = -1.0, 1.0
            cols.append(q / np.sqrt(2.0))
    return np.column_stack(cols)


def _vs_control_columns(v: int, k: int) -> np.ndarray:
    if k < 1 or k > v - 1:
        raise ParseError(f"vs_control needs 1 <= k <= v-1, got k={k}")
    cols = []
    for t in range(1, k + 1):
        q = np.zeros(v)
        q[0], q[t] = -1.0, 1.0
        cols.append(q / np.sqrt(2.0))
    return np.column_stack(cols)


def _parse_system(data: dict, spec: DesignSpec) -> EstimableSystem | None:
    section = data.get("system")
    if section is None:
        return None
    if "generator" in section:
        gen = section["generator"]
        if gen == "pairwise":
            q = _pairwise_columns(spec.v)
        elif gen == "vs_control":
            q = _vs_control_columns(spec.v, int(section.get("k", spec.v - 1)))
        elif gen == "single":
            q = _matrix_from(_require(section, "q", "system"), "system.q")
        else:
            raise ParseError(f"unknown system generator {gen!r}")
    else:
        q = _matrix_from(_require(section, "Q", "system"), "system.Q")
    if q.shape[0] != spec.v:
        raise ParseError(f"system matrix must have v={spec.v} rows, got {q.shape[0]}")
    if section.get("normalize", False):
        norms = np.linalg.norm(q, axis=0)
        if np.any(norms == 0.0):
            raise ParseError("cannot normalize a zero column")
        q = q / norms
    b = [float(x) for x in section["b"]] if "b" in section else None
    try:
        return EstimableSystem(q, b)
    except ValueError as exc:
        raise ParseError(f"invalid system: {exc}") from exc


def _parse_weight(data: dict, spec: DesignSpec, space: EstimationSpace):
    section = data.get("weight_matrix")
    if section is None:
        return None, None
    w = _matrix_from(_require(section, "W", "weight_matrix"), "weight_matrix.W")
    if w.shape != (spec.v, spec.v):
        raise ParseError(f"W must be {spec.v} x {spec.v}, got {w.shape}")
    try:
        raw = SymMatrix(w, FILE_RANK_RTOL)
    except ValueError as exc:
        raise ParseError(f"invalid weight matrix: {exc}") from exc
    try:
        return raw, make_weight_matrix(raw, space)
    except DomainError as exc:
        raise ParseError(f"invalid weight matrix: {exc}") from exc
    except SpaceError:
        # Kept raw: a positive definite W outside E still certifies theorem2.
        return raw, None


def parse_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ParseError("problem file must hold a JSON object")
    spec = _parse_model(data)
    space = _parse_space(data, spec)
    system = _parse_system(data, spec)
    weight_raw, weight = _parse_weight(data, spec, space)
    criterion = None
    if "criterion" in data:
        criterion = str(_require(data["criterion"], "name", "criterion")).upper()
        if criterion not in criteria.POSITIVE_SPECTRUM_CRITERIA:
            raise ParseError(f"unknown criterion {criterion!r}")
    search_section = None
    if "search" in data:
        raw = data["search"]
        search_section = {
            "seed": int(raw.get("seed", 0)),
            "restarts": int(raw.get("restarts", 20)),
            "max_passes": int(raw.get("max_passes", 100)),
        }
    return Problem(spec, space, system, weight_raw, weight, criterion, search_section)


def load_problem(path: str) -> tuple[Problem, str]:
    """Parse a problem file; returns the problem and the input digest."""
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    digest = "sha256:" + hashlib.sha256(blob).hexdigest()
    try:
        data = json.loads(blob.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_problem(data), digest


def serialize_problem(problem: Problem) -> dict:
    """Canonical JSON form; parsing it back yields an identical problem."""
    model = {
        "v": problem.spec.v,
        "n": problem.spec.n,
        "assignment": list(problem.spec.assignment),
    }
    if problem.spec.nuisance_kind == "intercept":
        model["nuisance"] = {"kind": "intercept"}
    elif problem.spec.nuisance_kind == "blocks":
        model["nuisance"] = {"kind": "blocks", "sizes": list(problem.spec.block_sizes)}
    else:
        model["nuisance"] = {"kind": "explicit", "L": problem.spec.L.tolist()}
    out = {"model": model, "estimation_space": {"kind": problem.space.kind}}
    if problem.space.kind == "explicit":
        out["estimation_space"]["basis"] = problem.space.projector.entries.tolist()
    if problem.system is not None:
        out["system"] = {
            "Q": problem.system.Q.tolist(),
            "b": problem.system.b.tolist(),
        }
    if problem.weight_raw is not None:
        out["weight_matrix"] = {"W": problem.weight_raw.entries.tolist()}
    if problem.criterion is not None:
        out["criterion"] = {"name": problem.criterion}
    if problem.search is not None:
        out["search"] = dict(problem.search)
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass(eq=False)
class Report:
    """Command echo, input digest, numeric results, pass/fail, wall time."""

    command: str
    input_digest: str
    results: dict = field(default_factory=dict)
    passed: bool | None = None
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "results": _round12(self.results),
            "pass": self.passed,
            "wall_time_s": float(f"{self.wall_time_s:.6f}"),
        }

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")


def _target_of(problem: Problem):
    """The unique target of a command that needs one."""
    if problem.system is not None and problem.weight_raw is not None:
        raise ParseError("give exactly one of 'system' and 'weight_matrix', not both")
    if problem.system is not None:
        return problem.system
    if problem.weight_raw is not None:
        if problem.weight is None:
            raise ParseError(
                "the weight matrix does not sit inside the estimation space; "
                "only 'certify --which theorem2' can use it"
            )
        return problem.weight
    raise ParseError("this command needs a 'system' or a 'weight_matrix' section")


# ---------------------------------------------------------------------------
# commands


def cmd_info(problem: Problem, digest: str) -> tuple[Report, int]:
    c = information_matrix(problem.spec)
    s = eig_sym(c)
    results = {
        "v": problem.spec.v,
        "n": problem.spec.n,
        "replications": problem.spec.replications().tolist(),
        "information_matrix": c.entries,
        "spectrum": s.eigenvalues,
        "rank": s.numeric_rank,
        "estimation_space": {"kind": problem.space.kind, "dim": problem.space.dim},
    }
    lines = [
        f"model: v={problem.spec.v}, n={problem.spec.n}, "
        f"nuisance={problem.spec.nuisance_kind}",
        "information matrix C:",
        _fmt_matrix(c.entries),
        f"spectrum: {_fmt_vector(s.eigenvalues)}",
        f"rank: {s.numeric_rank}",
        f"estimation space: {problem.space.kind} (dim {problem.space.dim})",
    ]
    if problem.system is not None:
        bad = infeasible_columns(c, problem.system.Q * np.sqrt(problem.system.b))
        results["system"] = {
            "s": problem.system.s,
            "rank": problem.system.r,
            "normalized": problem.system.normalized,
            "feasible": not bad,
            "infeasible_columns": list(bad),
            "in_estimation_space": validate_system(problem.system, problem.space),
        }
        lines.append(
            f"system: s={problem.system.s}, rank={problem.system.r}, "
            f"normalized={problem.system.normalized}, feasible={not bad}"
        )
        if bad:
            lines.append(f"  infeasible columns: {list(bad)}")
    if problem.weight_raw is not None:
        bad = infeasible_columns(c, problem.weight_raw.entries)
        results["weight_matrix"] = {
            "rank": eig_sym(problem.weight_raw).numeric_rank,
            "in_estimation_space": problem.weight is not None,
            "feasible": not bad,
        }
        lines.append(
            f"weight matrix: rank={results['weight_matrix']['rank']}, "
            f"in_estimation_space={problem.weight is not None}, feasible={not bad}"
        )
    print("\n".join(lines))
    return Report("info", digest, results), EXIT_OK


def _criterion_block(value) -> dict:
    return {
        "value": value.value,
        "positive_value": value.positive_value,
        "spectrum": value.spectrum_used,
        "rank": value.rank_used,
        "dim": value.dim,
        "singular": value.rank_used < value.dim,
    }


def cmd_criterion(problem: Problem, digest: str) -> tuple[Report, int]:
    if problem.criterion is None:
        raise ParseError("this command needs a 'criterion' section")
    target = _target_of(problem)
    name = problem.criterion
    c = information_matrix(problem.spec)
    if isinstance(target, EstimableSystem):
        n = info_matrix_for_system(c, target)
        system_value = criteria.criterion_value(n, name)
        w = weight_matrix_from_system(target, problem.space)
        weighted_value = criteria.criterion_value(weighted_info_matrix(c, w), name)
    else:
        weighted_value = criteria.criterion_value(weighted_info_matrix(c, target), name)
        dual = system_from_weight_matrix_sqrt(target)
        system_value = criteria.criterion_value(info_matrix_for_system(c, dual), name)
    deviation = abs(system_value.positive_value - weighted_value.positive_value)
    deviation /= max(1.0, abs(system_value.positive_value))
    results = {
        "criterion": name,
        "route_system": _criterion_block(system_value),
        "route_weighted": _criterion_block(weighted_value),
        "deviation": deviation,
    }
    lines = [f"criterion {name} (larger is better)"]
    for label, cv in (("system route (N_Q)", system_value),
                      ("weighted route (C_W)", weighted_value)):
        note = ""
        if cv.rank_used < cv.dim:
            note = (f"  [singular: rank {cv.rank_used} of {cv.dim}; "
                    f"positive-spectrum value {_fmt(cv.positive_value)}]")
        lines.append(f"  {label}: {_fmt(cv.value)}{note}")
    lines.append(f"  deviation of the two routes: {_fmt(deviation)}")
    print("\n".join(lines))
    return Report("criterion", digest, results), EXIT_OK


def cmd_weights(problem: Problem, digest: str, queries) -> tuple[Report, int]:
    if problem.system is None:
        raise ParseError("the weights command needs a 'system' section")
    vectors = [_parse_query(q, problem.spec.v) for q in queries]
    report = secondary_weights(problem.system, vectors)
    strict = check_weight_dominance(problem.system)
    w = report.weight_matrix
    records = []
    lines = [
        f"system: s={problem.system.s}, rank={problem.system.r}, "
        f"normalized={problem.system.normalized}",
        "scaled weight matrix W = Q~ Q~':",
        _fmt_matrix(w.matrix.entries),
        "element reading: diagonal (i,i) = weight carried by parameter i; "
        "off-diagonal (i,j) < 0 flags interest in the comparison of i and j, "
        "> 0 in their combined effect",
        "functions:",
    ]
    for idx, rec in enumerate(report.records):
        entry = {
            "q": rec.q,
            "primary": rec.primary,
            "secondary": rec.secondary,
            "in_span": rec.in_span,
        }
        if idx < problem.system.s:
            entry["dominance_strict"] = strict[idx]
            lines.append(
                f"  column {idx + 1}: primary={_fmt(rec.primary)} "
                f"secondary={_fmt(rec.secondary)}"
                + ("  (strictly above primary)" if strict[idx] else "")
            )
        else:
            shown = "outside span (zero weight)" if rec.secondary is None else _fmt(rec.secondary)
            lines.append(f"  query {_fmt_vector(rec.q)}: secondary={shown}")
        records.append(entry)
    annotations = {
        "diagonal": w.matrix.entries.diagonal(),
        "comparisons": [
            {"i": i + 1, "j": j + 1, "value": float(w.matrix.entries[i, j])}
            for i in range(w.v)
            for j in range(i + 1, w.v)
            if abs(w.matrix.entries[i, j]) > 1e-12
        ],
    }
    results = {
        "weight_matrix": w.matrix.entries,
        "rank": w.d,
        "records": records,
        "annotations": annotations,
        "in_estimation_space": validate_system(problem.system, problem.space),
    }
    print("\n".join(lines))
    return Report("weights", digest, results), EXIT_OK


def _parse_query(text: str, v: int) -> np.ndarray:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ParseError(f"cannot parse query vector {text!r}: {exc}") from exc
    if vec.shape != (v,):
        raise ParseError(f"query vector needs {v} entries, got {vec.size}")
    return vec


def _file_certifications(problem: Problem, which: str, strict: bool):
    """Certification runners applicable to the file's own instance."""
    runs = []
    spec, space = problem.spec, problem.space

    if which in ("theorem1", "all") and problem.system is not None:
        if problem.system.r == space.dim:
            runs.append(("theorem1", lambda: criteria.certify_theorem1(
                spec, problem.system, space)))
        elif strict:
            raise ParseError(
                f"theorem1 needs a system of rank dim(E)={space.dim}; this one has "
                f"rank {problem.system.r} (certify theorem3 instead)"
            )
    elif which == "theorem1" and strict:
        raise ParseError("theorem1 certification needs a 'system' section")

    if which in ("theorem3", "all") and problem.system is not None:
        runs.append(("theorem3", lambda: criteria.certify_theorem3(
            spec, problem.system, space)))
    elif which == "theorem3" and strict:
        raise ParseError("theorem3 certification needs a 'system' section")

    if which in ("theorem2", "all") and problem.weight_raw is not None:
        ws = eig_sym(problem.weight_raw)
        if ws.numeric_rank == problem.weight_raw.dim:
            runs.append(("theorem2", lambda: criteria.certify_theorem2(
                spec, problem.weight_raw, space)))
        elif strict:
            raise ParseError(
                "theorem2 needs a positive definite weight matrix; this one is "
                "singular (certify theorem4 instead)"
            )
    elif which == "theorem2" and strict:
        raise ParseError("theorem2 certification needs a 'weight_matrix' section")

    weight_kinds = [k for k in ("theorem4", "aopt", "eopt") if which in (k, "all")]
    if weight_kinds:
        w = problem.weight
        if w is None and problem.system is not None and which == "all":
            w = weight_matrix_from_system(problem.system, space)
        if w is not None:
            for kind in weight_kinds:
                if kind == "theorem4":
                    runs.append(("theorem4", lambda w=w: criteria.certify_theorem4(spec, w)))
                elif kind == "aopt":
                    runs.append(("aopt", lambda w=w: criteria.a_opt_interpretation_check(spec, w)))
                else:
                    runs.append(("eopt", lambda w=w: criteria.e_opt_interpretation_check(spec, w)))
        elif strict:
            raise ParseError(
                f"{which} certification needs a weight matrix inside the estimation space"
            )
    return runs


def _random_certification(kind: str, rng):
    spec, space, target = random_instance(rng, kind)
    if kind == "theorem1":
        return criteria.certify_theorem1(spec, target, space)
    if kind == "theorem2":
        return criteria.certify_theorem2(spec, target, space)
    if kind == "theorem3":
        return criteria.certify_theorem3(spec, target, space)
    if kind == "theorem4":
        return criteria.certify_theorem4(spec, target)
    if kind == "aopt":
        return criteria.a_opt_interpretation_check(
            spec, target, seed=int(rng.integers(0, 2**31)))
    return criteria.e_opt_interpretation_check(spec, target)


def cmd_certify(problem: Problem, digest: str, which: str, trials: int,
                seed: int) -> tuple[Report, int]:
    if which not in CERT_KINDS + ("all",):
        raise ParseError(f"unknown certification {which!r}")
    kinds = CERT_KINDS if which == "all" else (which,)
    lines = []
    summary = {}
    all_passed = True

    file_runs = _file_certifications(problem, which, strict=(which != "all"))
    for name, run in file_runs:
        try:
            report = run()
        except SingularWeightError as exc:
            raise ParseError(str(exc)) from exc
        all_passed &= report.passed
        summary[f"file_{name}"] = {
            "passed": report.passed,
            "deviation": report.deviation,
            "tolerance": report.tolerance,
        }
        lines.append(
            f"{name} on the file instance: "
            f"{'pass' if report.passed else 'FAIL'} (deviation {_fmt(report.deviation)})"
        )

    root = np.random.SeedSequence(seed)
    kind_sequences = dict(zip(CERT_KINDS, root.spawn(len(CERT_KINDS))))
    for kind in kinds:
        failures = []
        worst = 0.0
        for index, child in enumerate(kind_sequences[kind].spawn(trials)):
            rng = np.random.default_rng(child)
            report = _random_certification(kind, rng)
            worst = max(worst, report.deviation)
            if not report.passed:
                failures.append({"trial": index, "seed": [seed, kind, index],
                                 "deviation": report.deviation})
        passed = not failures
        all_passed &= passed
        summary[kind] = {
            "trials": trials,
            "passed": passed,
            "max_deviation": worst,
            "failures": failures,
        }
        lines.append(
            f"{kind}: {trials} randomized instances, "
            f"{'pass' if passed else f'{len(failures)} FAILURES'} "
            f"(max deviation {_fmt(worst)})"
        )
        for failure in failures:
            lines.append(f"  trial {failure['trial']} (seed {failure['seed']}): "
                         f"deviation {_fmt(failure['deviation'])}")
    print("\n".join(lines))
    report = Report("certify", digest, {"which": which, "seed": seed, **summary},
                    passed=all_passed)
    return report, EXIT_OK if all_passed else EXIT_CERT_FAIL


def cmd_search(problem: Problem, digest: str, both_routes: bool) -> tuple[Report, int]:
    if problem.search is None:
        raise ParseError("the search command needs a 'search' section")
    if problem.criterion is None:
        raise ParseError("the search command needs a 'criterion' section")
    target = _target_of(problem)
    sp = search.SearchProblem(
        v=problem.spec.v,
        n=problem.spec.n,
        criterion=problem.criterion,
        target=target,
        space=problem.space,
        nuisance_kind=problem.spec.nuisance_kind,
        block_sizes=problem.spec.block_sizes,
        L=problem.spec.L,
        seed=problem.search["seed"],
        restarts=problem.search["restarts"],
        max_passes=problem.search["max_passes"],
    )
    enumerable = search.enumeration_size(sp) <= search.ENUMERATION_LIMIT
    result = search.enumerate_optimal(sp) if enumerable else search.exchange_search(sp)
    best = result.best_design
    results = {
        "criterion": problem.criterion,
        "method": "enumeration" if result.enumerated else "exchange",
        "best_assignment": list(best.assignment),
        "best_replications": best.replications().tolist(),
        "best_value": result.best_value.value,
        "spectrum": result.best_value.spectrum_used,
        "trace": list(result.trace),
    }
    lines = [
        f"search: {results['method']} over v={sp.v}, n={sp.n}, "
        f"criterion {problem.criterion}",
        f"best assignment: {list(best.assignment)}",
        f"best replications: {best.replications().tolist()}",
        f"best value: {_fmt(result.best_value.value)}",
        f"trace: {_fmt_vector(result.trace)}",
    ]
    if result.enumerated:
        results["optimal_assignments"] = [list(a) for a in result.optimal_assignments]
        lines.append(f"tied optima: {len(result.optimal_assignments)}")
    passed = None
    if both_routes:
        if not enumerable:
            raise ParseError("--both-routes needs an enumerable instance")
        check = search.argmax_equivalence_check(sp)
        passed = check.passed
        results["argmax_equivalence"] = {
            "passed": check.passed,
            "value_system_route": check.value_system_route,
            "value_weighted_route": check.value_weighted_route,
            "optima_system_route": [list(a) for a in check.optima_system_route],
            "optima_weighted_route": [list(a) for a in check.optima_weighted_route],
        }
        lines.append(
            "argmax equivalence of the two routes: "
            f"{'pass' if check.passed else 'FAIL'} "
            f"({_fmt(check.value_system_route)} vs {_fmt(check.value_weighted_route)}, "
            f"{len(check.optima_system_route)} vs {len(check.optima_weighted_route)} optima)"
        )
    print("\n".join(lines))
    code = EXIT_OK if passed in (None, True) else EXIT_CERT_FAIL
    return Report("search", digest, results, passed=passed), code


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wdesign",
        description="Information matrices, weighted optimality criteria, "
                    "weight analysis and optimal exact design search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--file", required=True, help="problem file (JSON)")
        p.add_argument("--out", help="write the machine-readable report here")

    common(sub.add_parser("info", help="model, information matrix, feasibility"))
    common(sub.add_parser("criterion", help="criterion value via both routes"))
    p = sub.add_parser("weights", help="primary/secondary weight report")
    common(p)
    p.add_argument("--query", action="append", default=[],
                   help="extra coefficient vector, comma separated (repeatable)")
    p = sub.add_parser("certify", help="spectral-equivalence certifications")
    common(p)
    p.add_argument("--which", default="all", choices=CERT_KINDS + ("all",))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("search", help="optimal exact design search")
    common(p)
    p.add_argument("--both-routes", action="store_true",
                   help="also enumerate via the weighted route and compare argmaxes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        problem, digest = load_problem(args.file)
        if args.command == "info":
            report, code = cmd_info(problem, digest)
        elif args.command == "criterion":
            report, code = cmd_criterion(problem, digest)
        elif args.command == "weights":
            report, code = cmd_weights(problem, digest, args.query)
        elif args.command == "certify":
            report, code = cmd_certify(problem, digest, args.which, args.trials, args.seed)
        else:
            report, code = cmd_search(problem, digest, args.both_routes)
    except (WdesignError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.wall_time_s = time.perf_counter() - started
    if args.out:
        report.write(args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
