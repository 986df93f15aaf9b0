"""Scenario execution: materialize traces, run the requested pipelines in a
fixed order, check pinned expectations, and write deterministic artifacts.

Artifacts per run directory:
  reports.json               everything, including the verdict map and exit code
  trace_<source>.csv         one per materialized trace
  solve_<kind>.json          one per solver invocation
  witness_scan.json          when the falsify run executes

Exit codes: 0 all verdicts pass and no expectation violated, 2 any fail
verdict or violated expectation, 3 inconclusive degradations only, 1 is
reserved for configuration errors and raised out of this module as
ConfigurationError / InputError for the CLI to translate.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .certificates import (
    check_acf_mapping,
    check_asmk,
    check_banach_rate,
    check_c5,
    check_cyclic,
    check_f_psi_contraction,
    check_p_controls_d,
    consecutive_contraction_report,
)
from .errors import ConfigurationError
from .gallery import Expectation, gallery_names, get_entry
from .reports import CertificateReport, Verdict
from .scenario import Scenario, build_scenario, load_scenario_file
from .solvers import (
    certify_cauchy,
    even_collapse_diagnostic,
    extract_noncauchy_witness,
    solve_best_proximity,
    solve_common_fixed_point,
    solve_fixed_point,
)
from .spaces import sample_pairs
from .traces import (
    AlternatingSchedule,
    IterationTrace,
    alternating_trace,
    cyclic_even_trace,
    picard_trace,
    sequence_trace,
)

_RUN_ORDER = ("iterate", "certify", "cyclic", "alternate", "falsify")


@dataclass
class RunResult:
    name: str
    exit_code: int
    verdicts: dict[str, str]
    violations: list[dict]
    out_dir: str
    artifacts: list[str] = field(default_factory=list)


def _default_steps(scn: Scenario) -> int:
    # enough points for the band checkers plus a little settling room
    return scn.budget.index_horizon + scn.budget.nu_horizon + 32


def _default_source(scn: Scenario) -> str:
    return "sequence" if (scn.sequence and scn.map_t is None) else "picard"


def _point_param(scn: Scenario, params: dict, key: str):
    coords = params.get(key, [1.0] * scn.space.dimension)
    if not isinstance(coords, (list, tuple)) or len(coords) != scn.space.dimension:
        raise ConfigurationError(
            f"{key}: expected {scn.space.dimension} coordinate(s), got {coords!r}")
    return scn.space.point(*(float(c) for c in coords))


def _trace_for(scn: Scenario, source: str, cache: dict[str, IterationTrace]) -> IterationTrace:
    if source in cache:
        return cache[source]
    if source == "picard":
        if scn.map_t is None:
            raise ConfigurationError("maps.T: a picard trace needs a map T")
        params = scn.run_params("iterate")
        steps = int(params.get("steps", _default_steps(scn)))
        tr = picard_trace(scn.map_t, _point_param(scn, params, "x0"), steps,
                          premetric=scn.premetric)
    elif source == "sequence":
        if scn.sequence is None:
            raise ConfigurationError("sequence: a sequence trace needs a named sequence")
        params = scn.run_params("iterate")
        steps = int(params.get("steps", _default_steps(scn)))
        tr = sequence_trace(scn.sequence, scn.space, steps + 1,
                            premetric=scn.premetric)
    elif source == "alternating":
        if scn.map_t is None or scn.map_s is None:
            raise ConfigurationError("maps.S: an alternating trace needs both maps")
        params = scn.run_params("alternate")
        steps = int(params.get("steps", _default_steps(scn)))
        schedule = AlternatingSchedule(scn.map_t, scn.map_s)
        tr = alternating_trace(schedule, _point_param(scn, params, "seed"), steps,
                               premetric=scn.premetric)
    else:
        raise ConfigurationError(f"unknown trace source {source!r}")
    cache[source] = tr
    return tr


class _Sink:
    """Collects verdicts, run payloads and artifact files for one scenario."""

    def __init__(self, out_dir: str) -> None:
        self.out_dir = out_dir
        self.verdicts: dict[str, str] = {}
        self.runs: dict[str, dict] = {}
        self.artifacts: list[str] = []

    def verdict(self, run: str, report: CertificateReport, prefix: str = "") -> None:
        key = f"{run}.{prefix}{report.condition_id}"
        if key in self.verdicts:
            raise ConfigurationError(f"duplicate verdict key {key}")
        self.verdicts[key] = report.verdict.value

    def value(self, key: str, value: str) -> None:
        if key in self.verdicts:
            raise ConfigurationError(f"duplicate verdict key {key}")
        self.verdicts[key] = value

    def write(self, name: str, text: str) -> None:
        with open(os.path.join(self.out_dir, name), "w", encoding="utf-8") as fh:
            fh.write(text)
        self.artifacts.append(name)

    def write_json(self, name: str, obj) -> None:
        self.write(name, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _run_iterate(scn: Scenario, cache: dict, sink: _Sink) -> None:
    params = scn.run_params("iterate")
    source = _default_source(scn)
    tr = _trace_for(scn, source, cache)
    payload: dict = {"source": source, "points": len(tr), "status": tr.status}
    if scn.map_t is not None:
        res = solve_fixed_point(
            scn.map_t,
            _point_param(scn, params, "x0"),
            tol=float(params.get("tol", 1e-9)),
            max_steps=int(params.get("max_steps", 10_000)),
            premetric=scn.premetric,
        )
        sink.value("iterate.solve", "converged" if res.converged else "not_converged")
        sink.write_json("solve_fixed_point.json", res.to_json_obj())
        payload["solve"] = res.to_json_obj()
    sink.runs["iterate"] = payload


def _run_certify(scn: Scenario, cache: dict, sink: _Sink) -> None:
    params = scn.run_params("certify")
    source = params.get("source", _default_source(scn))
    route = params.get("route", "tau")
    tol = float(params.get("tol", 1e-6))
    tr = _trace_for(scn, source, cache)

    cert = certify_cauchy(tr, route, scn.budget, tol)
    for rep in cert.hypotheses:
        sink.verdict("certify", rep)
    sink.verdict("certify", cert.diagnostic)
    sink.value("certify.overall", cert.overall.value)
    payload: dict = {"source": source, "certificate": cert.to_json_obj(),
                     "additional": []}

    def extra(rep: CertificateReport, prefix: str = "") -> None:
        sink.verdict("certify", rep, prefix)
        payload["additional"].append(rep.to_json())

    if route == "tau":
        # the one-shift band check already ran; add the pairwise strict check
        # so the sequence-level family is complete on this trace
        extra(check_c5(tr, tr.premetric, scn.budget))
    if scn.map_t is not None:
        for rep in check_acf_mapping(scn.map_t, scn.space, scn.budget,
                                     scn.region, scn.seed):
            extra(rep)
        extra(check_banach_rate(scn.map_t, scn.space, scn.budget,
                                scn.region, scn.seed))
    if scn.premetric.kind != "metric":
        extra(check_p_controls_d(scn.premetric, scn.space,
                                 [(tr, tr.companion_shift())]))
    if scn.asmk_variants:
        shift = tr.companion_shift()
        for variant in scn.asmk_variants:
            for rep in check_asmk(tr, shift, tr.premetric, scn.f_gauge,
                                  scn.family, scn.budget, variant):
                extra(rep, prefix=f"{variant}.")
    sink.runs["certify"] = payload


def _run_cyclic(scn: Scenario, cache: dict, sink: _Sink) -> None:
    params = scn.run_params("cyclic")
    if "x0" not in params:
        raise ConfigurationError("cyclic.x0: starting point required")
    x0 = _point_param(scn, params, "x0")
    setting = scn.setting

    membership = check_cyclic(scn.map_t, setting,
                              sample_count=int(params.get("samples", 64)),
                              seed=scn.seed)
    sink.verdict("cyclic", membership)

    tr = cyclic_even_trace(
        scn.map_t, setting, x0, int(params.get("pairs", 40)),
        premetric=scn.premetric if scn.premetric.kind == "shifted_cyclic" else None,
    )
    cache["cyclic_even"] = tr

    res = solve_best_proximity(scn.map_t, setting, x0,
                               tol=float(params.get("tol", 1e-8)),
                               max_pairs=int(params.get("max_pairs", 10_000)))
    sink.value("cyclic.solve", "converged" if res.converged else "not_converged")
    sink.write_json("solve_best_proximity.json", res.to_json_obj())

    collapse = even_collapse_diagnostic(tr, setting,
                                        tol=float(params.get("collapse_tol", 1e-6)))
    sink.verdict("cyclic", collapse)

    cert = certify_cauchy(tr, "mixed", scn.budget,
                          float(params.get("cert_tol", 1e-6)))
    for rep in cert.hypotheses:
        sink.verdict("cyclic", rep)
    sink.verdict("cyclic", cert.diagnostic)
    sink.value("cyclic.overall", cert.overall.value)

    sink.runs["cyclic"] = {
        "membership": membership.to_json(),
        "solve": res.to_json_obj(),
        "collapse": collapse.to_json(),
        "certificate": cert.to_json_obj(),
    }


def _run_alternate(scn: Scenario, cache: dict, sink: _Sink) -> None:
    params = scn.run_params("alternate")
    schedule = AlternatingSchedule(scn.map_t, scn.map_s)
    tr = _trace_for(scn, "alternating", cache)

    res = solve_common_fixed_point(
        schedule,
        _point_param(scn, params, "seed"),
        tol=float(params.get("tol", 1e-9)),
        max_steps=int(params.get("max_steps", 10_000)),
        premetric=scn.premetric,
    )
    sink.value("alternate.solve", "converged" if res.converged else "not_converged")
    sink.write_json("solve_common_fixed_point.json", res.to_json_obj())
    payload: dict = {"solve": res.to_json_obj()}

    if scn.f_gauge is not None and scn.psi is not None:
        rng = np.random.default_rng(scn.seed)
        sample = sample_pairs(scn.space, scn.region,
                              int(params.get("fpsi_pairs", 200)), rng)
        fpsi = check_f_psi_contraction(
            scn.map_t, scn.map_s, scn.premetric, scn.f_gauge, scn.psi, sample,
            psi_variant=params.get("psi_variant", "standard"),
        )
        sink.verdict("alternate", fpsi)
        payload["fpsi"] = fpsi.to_json()
        ineq = consecutive_contraction_report(tr, scn.f_gauge, scn.psi)
        sink.verdict("alternate", ineq)
        payload["ineqfp"] = ineq.to_json()
    sink.runs["alternate"] = payload


def _run_falsify(scn: Scenario, cache: dict, sink: _Sink) -> None:
    params = scn.run_params("falsify")
    source = params.get("source", scn.run_params("certify").get(
        "source", _default_source(scn)))
    tr = _trace_for(scn, source, cache)
    scan = extract_noncauchy_witness(
        tr,
        eps=float(params.get("eps", 0.5)),
        gap_tol=float(params.get("gap_tol", 1e-2)),
    )
    sink.value("falsify.scan", scan.status)
    sink.write_json("witness_scan.json", scan.to_json_obj())
    sink.runs["falsify"] = {"source": source, "scan": scan.to_json_obj()}


_RUNNERS = {
    "iterate": _run_iterate,
    "certify": _run_certify,
    "cyclic": _run_cyclic,
    "alternate": _run_alternate,
    "falsify": _run_falsify,
}


def _exit_code(verdicts: dict[str, str], violations: list[dict], strict: bool) -> int:
    values = set(verdicts.values())
    if Verdict.FAIL.value in values or violations:
        return 2
    if Verdict.INCONCLUSIVE.value in values:
        return 2 if strict else 3
    return 0


def run_scenario_doc(
    doc: dict,
    out_dir: str,
    seed: int | None = None,
    budget_scale: float | None = None,
    expectations: tuple[Expectation, ...] = (),
    strict: bool = False,
) -> RunResult:
    """Execute one scenario document.  Configuration problems raise
    ConfigurationError; everything else lands in the artifacts."""
    scn = build_scenario(doc)
    if seed is not None:
        scn = dataclasses.replace(scn, seed=int(seed))
    if budget_scale is not None:
        scn = dataclasses.replace(scn, budget=scn.budget.scaled(budget_scale))

    os.makedirs(out_dir, exist_ok=True)
    sink = _Sink(out_dir)
    cache: dict[str, IterationTrace] = {}

    for run in _RUN_ORDER:
        if run in scn.runs:
            _RUNNERS[run](scn, cache, sink)

    for source in sorted(cache):
        sink.write(f"trace_{source}.csv", cache[source].to_csv())

    violations = []
    for exp in expectations:
        actual = sink.verdicts.get(exp.path)
        if actual != exp.expected:
            violations.append({
                "path": exp.path,
                "expected": exp.expected,
                "actual": actual,
                "basis": exp.basis,
            })

    exit_code = _exit_code(sink.verdicts, violations, strict)
    sink.write_json("reports.json", {
        "scenario": scn.name,
        "seed": scn.seed,
        "budget": scn.budget.to_json(),
        "runs": sink.runs,
        "verdicts": sink.verdicts,
        "violations": violations,
        "exit_code": exit_code,
    })
    return RunResult(
        name=scn.name,
        exit_code=exit_code,
        verdicts=sink.verdicts,
        violations=violations,
        out_dir=out_dir,
        artifacts=sorted(sink.artifacts),
    )


def run_scenario(
    source: str,
    out_dir: str,
    seed: int | None = None,
    budget_scale: float | None = None,
    strict: bool = False,
) -> RunResult:
    """Run a gallery entry (by name) or a scenario file (by path).

    Gallery entries bring their pinned expectations along; violations count
    against the exit code like fail verdicts do.
    """
    if source in gallery_names():
        entry = get_entry(source)
        return run_scenario_doc(entry.doc, out_dir, seed=seed,
                                budget_scale=budget_scale,
                                expectations=entry.expectations, strict=strict)
    doc = load_scenario_file(source)
    return run_scenario_doc(doc, out_dir, seed=seed, budget_scale=budget_scale,
                            strict=strict)
