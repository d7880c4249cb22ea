"""Experiment sweeps over selfish fraction or node count, and result reporting.

Sweep cells share one precomputed mobility/traffic environment per (axis
value, seed), so comparing protocols never recomputes contact traces. Output
is a CSV (with per-cell mean/stddev aggregate rows), a JSON mirror, and
plot-ready per-metric series files; all byte-stable for identical inputs.
"""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass, replace

from .config import PROTOCOLS, ScenarioConfig
from .engine import environment_key, prepare_environment, run
from .metrics import UNDEFINED, MetricsReport

CSV_HEADER = ("protocol,axis,axis_value,seed,delivery_probability,avg_delay_s,"
              "overhead_ratio,packets_dropped,packets_created,packets_delivered,"
              "relay_transmissions")

AXES = ("selfish", "nodes")

DEFAULT_SELFISH_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8)
DEFAULT_NODE_VALUES = tuple(range(20, 101, 10))
DEFAULT_SEEDS = tuple(range(1, 11))


@dataclass(frozen=True)
class SweepRow:
    protocol: str
    axis: str
    axis_value: float
    seed: int
    metrics: MetricsReport

    def csv_fields(self) -> list[str]:
        m = self.metrics
        overhead = UNDEFINED if m.overhead_ratio is None else repr(m.overhead_ratio)
        return [self.protocol, self.axis, _render_axis(self.axis, self.axis_value),
                str(self.seed), repr(m.delivery_probability), repr(m.avg_delivery_delay),
                overhead, str(m.packets_dropped), str(m.packets_created),
                str(m.packets_delivered), str(m.relay_transmissions)]


def _render_axis(axis: str, value: float) -> str:
    return str(int(value)) if axis == "nodes" else repr(float(value))


def apply_axis(base: ScenarioConfig, axis: str, value: float,
               protocol: str, seed: int) -> ScenarioConfig:
    if axis == "selfish":
        return replace(base, selfish_fraction=float(value), protocol=protocol, rng_seed=seed)
    if axis == "nodes":
        return replace(base, n_terminal_nodes=int(value), protocol=protocol, rng_seed=seed)
    raise ValueError(f"unknown sweep axis {axis!r}, expected one of {AXES}")


def sweep(base: ScenarioConfig, axis: str, values, protocols, seeds,
          backend: str | None = None) -> list[SweepRow]:
    """Run the full (protocol x axis value x seed) grid deterministically."""
    for proto in protocols:
        if proto not in PROTOCOLS:
            raise ValueError(f"unknown protocol {proto!r}")
    if not seeds:
        raise ValueError("sweep needs at least one seed")

    rows = []
    for value in values:
        env_cache = {}
        for seed in seeds:
            probe = apply_axis(base, axis, value, protocols[0], seed)
            env_cache[seed] = prepare_environment(probe, backend=backend)
        for protocol in protocols:
            for seed in seeds:
                cfg = apply_axis(base, axis, value, protocol, seed)
                assert environment_key(cfg) == environment_key(
                    apply_axis(base, axis, value, protocols[0], seed))
                result = run(cfg, backend=backend, env=env_cache[seed])
                rows.append(SweepRow(protocol, axis, float(value), seed, result.metrics))
    rows.sort(key=lambda r: (r.protocol, r.axis_value, r.seed))
    return rows


def aggregate(rows: list[SweepRow]) -> list[dict]:
    """Mean and stddev per (protocol, axis_value) cell, in row order."""
    groups: dict[tuple[str, float], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.protocol, row.axis_value), []).append(row)

    out = []
    for (protocol, value) in sorted(groups):
        cell = groups[(protocol, value)]
        axis = cell[0].axis

        def column(getter):
            return [getter(r.metrics) for r in cell]

        def stats(values):
            defined = [v for v in values if v is not None]
            if not defined:
                return None, None
            mean = statistics.fmean(defined)
            sd = statistics.stdev(defined) if len(defined) > 1 else 0.0
            return mean, sd

        fields = {
            "delivery_probability": stats(column(lambda m: m.delivery_probability)),
            "avg_delay_s": stats(column(lambda m: m.avg_delivery_delay)),
            "overhead_ratio": stats(column(lambda m: m.overhead_ratio)),
            "packets_dropped": stats(column(lambda m: float(m.packets_dropped))),
            "packets_created": stats(column(lambda m: float(m.packets_created))),
            "packets_delivered": stats(column(lambda m: float(m.packets_delivered))),
            "relay_transmissions": stats(column(lambda m: float(m.relay_transmissions))),
        }
        out.append({
            "protocol": protocol,
            "axis": axis,
            "axis_value": value,
            "n": len(cell),
            "mean": {k: v[0] for k, v in fields.items()},
            "stddev": {k: v[1] for k, v in fields.items()},
        })
    return out


def rows_to_csv(rows: list[SweepRow], aggregates: list[dict]) -> str:
    """Data rows sorted by (protocol, axis_value, seed); each cell followed by
    its mean and stddev rows."""
    agg_index = {(a["protocol"], a["axis_value"]): a for a in aggregates}
    lines = [CSV_HEADER]
    current_cell = None
    ordered = sorted(rows, key=lambda r: (r.protocol, r.axis_value, r.seed))

    def emit_aggregates(cell):
        agg = agg_index[cell]
        for kind in ("mean", "stddev"):
            values = agg[kind]
            rendered = []
            for key in ("delivery_probability", "avg_delay_s", "overhead_ratio"):
                v = values[key]
                rendered.append(UNDEFINED if v is None else repr(v))
            for key in ("packets_dropped", "packets_created", "packets_delivered",
                        "relay_transmissions"):
                v = values[key]
                rendered.append(UNDEFINED if v is None else repr(v))
            lines.append(",".join([agg["protocol"], agg["axis"],
                                   _render_axis(agg["axis"], agg["axis_value"]),
                                   kind] + rendered))

    for row in ordered:
        cell = (row.protocol, row.axis_value)
        if current_cell is not None and cell != current_cell:
            emit_aggregates(current_cell)
        current_cell = cell
        lines.append(",".join(row.csv_fields()))
    if current_cell is not None:
        emit_aggregates(current_cell)
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[SweepRow], aggregates: list[dict]) -> str:
    payload = {
        "header": CSV_HEADER.split(","),
        "rows": [
            {
                "protocol": r.protocol,
                "axis": r.axis,
                "axis_value": r.axis_value,
                "seed": r.seed,
                **r.metrics.as_dict(),
            }
            for r in sorted(rows, key=lambda x: (x.protocol, x.axis_value, x.seed))
        ],
        "aggregates": aggregates,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


SERIES_METRICS = {
    "delivery_probability": ("delivery_probability", 1.0),
    "avg_delay_min": ("avg_delay_s", 1.0 / 60.0),   # delay plots in minutes
    "overhead_ratio": ("overhead_ratio", 1.0),
    "packets_dropped": ("packets_dropped", 1.0),
}


def series_files(aggregates: list[dict]) -> dict[str, str]:
    """Per-metric, per-protocol plot series: x, y, stderr columns."""
    out: dict[str, str] = {}
    protocols = sorted({a["protocol"] for a in aggregates})
    for metric, (source, scale) in SERIES_METRICS.items():
        for protocol in protocols:
            lines = ["x,y,stderr"]
            for agg in aggregates:
                if agg["protocol"] != protocol:
                    continue
                mean = agg["mean"][source]
                sd = agg["stddev"][source]
                if mean is None:
                    lines.append(f"{_render_axis(agg['axis'], agg['axis_value'])},{UNDEFINED},{UNDEFINED}")
                    continue
                stderr = (sd or 0.0) / (agg["n"] ** 0.5) * scale
                lines.append(f"{_render_axis(agg['axis'], agg['axis_value'])},"
                             f"{mean * scale!r},{stderr!r}")
            out[f"series_{metric}__{protocol}.csv"] = "\n".join(lines) + "\n"
    return out


def write_report(rows: list[SweepRow], out_dir: str, formats=("csv", "json")) -> list[str]:
    """Write CSV/JSON/series artifacts; returns the paths written."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise RuntimeError(f"output directory {out_dir!r} is not writable: {exc}") from exc

    aggregates = aggregate(rows)
    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, "results.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rows_to_csv(rows, aggregates))
        written.append(path)
    if "json" in formats:
        path = os.path.join(out_dir, "results.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rows_to_json(rows, aggregates))
        written.append(path)
    series_dir = os.path.join(out_dir, "series")
    os.makedirs(series_dir, exist_ok=True)
    for name, content in series_files(aggregates).items():
        path = os.path.join(series_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        written.append(path)
    return written


def load_rows(path: str) -> list[SweepRow]:
    """Rehydrate sweep rows from a results.json produced by write_report."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = []
    for entry in payload["rows"]:
        metrics = MetricsReport(
            delivery_probability=entry["delivery_probability"],
            avg_delivery_delay=entry["avg_delivery_delay"],
            overhead_ratio=entry["overhead_ratio"],
            packets_dropped=entry["packets_dropped"],
            packets_created=entry["packets_created"],
            packets_delivered=entry["packets_delivered"],
            relay_transmissions=entry["relay_transmissions"],
        )
        rows.append(SweepRow(entry["protocol"], entry["axis"], entry["axis_value"],
                             entry["seed"], metrics))
    return rows
