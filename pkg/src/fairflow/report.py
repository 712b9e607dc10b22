"""Analysis reports: a JSON document, with a text view derived from it."""

from __future__ import annotations

import json
from fractions import Fraction

from . import __version__
from .quantitative import MetricValue, render_decimal


def fraction_json(value: Fraction) -> dict:
    return {"exact": str(value), "decimal": render_decimal(value)}


def metric_json(metric: MetricValue, u_names: list[str] | None = None, per_u: bool = False) -> dict:
    out = {**fraction_json(metric.exact), "backend": metric.backend}
    if metric.count is not None:
        out["count"] = metric.count
    if per_u and metric.per_u:
        names = u_names or []
        out["perU"] = [{"u": dict(zip(names, u)) if names else list(u), "spread": str(s)}
                       for u, s in metric.per_u]
    return out


class Report:
    def __init__(self, command: str, config: dict, timings: bool = True):
        self.data: dict = {"tool": "fairflow", "version": __version__, "command": command,
                           "config": config, "results": {}}
        self._timings = timings
        if timings:
            self.data["timings"] = {}

    def add(self, key: str, value) -> None:
        self.data["results"][key] = value

    def time(self, key: str, seconds: float) -> None:
        if self._timings:
            self.data["timings"][key] = round(seconds, 6)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"fairflow {self.data['version']} {self.data['command']}"]
        cfg = self.data["config"]
        for key in ("program", "model", "restriction", "condition"):
            if key in cfg:
                lines.append(f"  {key}: {cfg[key]}")
        if "paths" in cfg:
            lines.append(f"  paths: {', '.join(cfg['paths']) or '(none)'}")
        for key, value in self.data["results"].items():
            lines.extend(_text_item(key, value))
        for key, secs in self.data.get("timings", {}).items():
            lines.append(f"  time {key}: {secs:.3f}s")
        return "\n".join(lines) + "\n"


def _text_item(key: str, value) -> list[str]:
    if isinstance(value, dict) and "exact" in value:
        extra = f"  (count {value['count']})" if "count" in value else ""
        return [f"{key} = {value['exact']} ~ {value['decimal']}  [{value['backend']}]{extra}"]
    if isinstance(value, dict) and "holds" in value:
        lines = [f"{key}: {'HOLDS' if value['holds'] else 'VIOLATED'}  [{value.get('backend', '')}]"]
        if value.get("witness") is not None:
            lines.append(f"  witness: {json.dumps(value['witness'])}")
        if value.get("caveat"):
            lines.append(f"  note: {value['caveat']}")
        return lines
    if isinstance(value, dict) and "rows" in value and "maxGap" in value:
        lines = [f"{key}: max gap {value['maxGap']}"]
        for g, row in value["rows"].items():
            cells = "  ".join(f"Pr[d={d}]={p}" for d, p in row.items())
            lines.append(f"  group {g}: {cells}")
        return lines
    if isinstance(value, list) and value and "status" in value[0]:
        width = max(len(row["golden"]) for row in value)
        return [f"{row['status']}  {row['golden']:<{width}}  got {row['got']}  expected {row['expected']}"
                for row in value]
    if isinstance(value, list):
        lines = [f"{key}:"]
        for row in value:
            lines.append("  " + "  ".join(f"{k}={v}" for k, v in row.items()))
        return lines
    return [f"{key}: {json.dumps(value)}"]
