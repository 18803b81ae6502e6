"""Render a :class:`~intent_assure.loop.ScenarioResult` as text tables or JSON.

Every number printed here is read from the result; nothing is recomputed.
"""

from __future__ import annotations

import json

from .health import RESOURCE_KPIS
from .loop import ScenarioResult

FORMATS = ("text", "json")


def _num(x, digits: int = 2) -> str:
    if isinstance(x, str):
        return x
    if float(x).is_integer():
        return str(int(x))
    return f"{x:.{digits}f}"


def _table(headers: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    line = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    out = [line, "| " + " | ".join(h.ljust(w) for h, w in zip(headers, widths)) + " |", line]
    for r in rows:
        out.append("| " + " | ".join(c.ljust(w) for c, w in zip(r, widths)) + " |")
    out.append(line)
    return out


def _policy_rows(records: list[dict]) -> list[list[str]]:
    return [[r["policy"], r["feedback"]] for r in records]


def policy_table(result: ScenarioResult) -> list[str]:
    lines = ["Policies and execution feedback", ""]
    lines += _table(["Fulfillment policy", "Feedback"], _policy_rows(result.fulfillment))
    for i, ep in enumerate(result.assurance, 1):
        status = "completed" if ep["completed"] else f"abandoned: {ep.get('error', '')}"
        lines += ["", f"Assurance episode {i}: {ep['action']} {ep['resource']} ({status})"]
        lines += _table(["Assurance policy", "Feedback"], _policy_rows(ep["policies"]))
    if not result.assurance:
        lines += ["", "No assurance policies were needed."]
    return lines


def analysis_table(result: ScenarioResult) -> list[str]:
    if not result.assurance:
        return []
    ep = result.assurance[0]
    actions = [a["name"] for a in ep["ranking"]]
    headers = ["", *RESOURCE_KPIS, "h_r", "h_sw", "h_a", "h_s", *actions]
    rows = []
    for row in ep["analysis"]:
        h = row["health"]
        affected = row["name"] == ep["resource"]
        marks = []
        for a in ep["ranking"]:
            if not affected:
                marks.append("n/a")
            else:
                marks.append("✓" if a["name"] == ep["action"] else "✗")
        rows.append([row["name"], *(_num(row["metrics"][k]) for k in RESOURCE_KPIS), *(str(h[k]) for k in ("h_r", "h_sw", "h_a", "h_s")), *marks])
        pens = [f"P={_num(a['weight'])}x|{_num(row['gradient'])}|={_num(a['penalty'])}" if affected else "n/a" for a in ep["ranking"]]
        rows.append(["  delta (level)", *(_num(row["metric_delta"][k]) for k in RESOURCE_KPIS), "", "", "", f"grad={_num(row['gradient'])}", *pens])
    return ["Assurance analysis at drift detection", ""] + _table(headers, rows)


def kpi_table(result: ScenarioResult) -> list[str]:
    target = result.kpis.get("target")
    if not target:
        return []
    t1, t2 = result.kpis.get("t1"), result.kpis.get("t2")
    first = result.assurance[0] if result.assurance else None

    def health(snap):
        return "-" if snap is None else f"{_num(snap['k_Hs_pct'])}%"

    def avail(snap):
        return "-" if snap is None else snap["k_As_display"]

    def grad(snap, kpi):
        if snap is None:
            return "-"
        return _num(snap["drift"]["gradient"][kpi])

    rows = [
        ["Health k_Hs", health(target), health(t1), grad(t1, "k_Hs"), health(t2)],
        ["Availability k_As", avail(target), avail(t1), grad(t1, "k_As"), avail(t2)],
    ]
    lines = ["Service KPIs", ""]
    lines += _table(["KPI", "Target", "Operational t1", "Gradient t1", "Operational t2"], rows)
    a = result.availability
    lines += [
        "",
        f"action downtime: {_num(a['action_downtime_s'])} s"
        + (f" ({first['action']})" if first else ""),
        (
            f"probe downtime t_down: {_num(a['t_down_s'])} s over {_num(a['t_planned_s'] / 3600)} h planned"
            f" (budget {_num(a['max_downtime_s'])} s)"
        ),
        f"availability: {a['display']} ({a['availability']!r}), intent health: {a['intent_health']}",
    ]
    return lines


def timing_table(result: ScenarioResult) -> list[str]:
    t = result.timings
    f, s = t["fulfillment"], t["assurance"]
    rows = [
        ["Number of generated policies", str(f["policies"]), str(s["policies"])],
        ["Simulated testbed time (s)", _num(f["testbed_s"]), _num(s["testbed_s"])],
    ]
    if "planner_latency_s" in f:
        rows.append(["Planner latency, wall clock (s)", _num(f["planner_latency_s"], 3), _num(s["planner_latency_s"], 3)])
    return ["Execution times", ""] + _table(["Policy generation", "Fulfillment", "Assurance"], rows)


def render_text(result: ScenarioResult) -> str:
    header = [
        f"scenario: {result.name}   seed: {result.seed}   planner: {result.planner}",
        f"intent: {result.intent}",
        f"formal: {json.dumps(result.formal)}",
        f"type: {result.intent_type}   final phase: {result.phase}",
    ]
    if result.diagnostic:
        header.append(f"diagnostic: {result.diagnostic}")
    if not result.validation.get("ok", False) and result.validation.get("violations"):
        header.append("validation: " + "; ".join(v["message"] for v in result.validation["violations"]))
    sections = [header, policy_table(result), analysis_table(result), kpi_table(result), timing_table(result)]
    drifts = [d for d in result.drift_trace if not d["is_zero_drift"]]
    sections.append(
        [f"drift checks: {len(result.drift_trace)}, with drift: {len(drifts)}"]
        + [f"  t={_num(d['time'])} s  k_Hs={_num(d['k_Hs_pct'])}%  distance={_num(d['distance'], 4)}" for d in drifts]
    )
    return "\n\n".join("\n".join(s) for s in sections if s) + "\n"


def render_json(result: ScenarioResult) -> str:
    return json.dumps(result.to_dict(), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def emit_report(result: ScenarioResult, fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(result)
    if fmt == "json":
        return render_json(result)
    raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")


def load_result(text: str) -> ScenarioResult:
    return ScenarioResult.from_dict(json.loads(text))
