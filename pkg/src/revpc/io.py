"""Datasets, graphs, separating sets, metrics and run configuration on disk.

Reals are written with ``repr`` (shortest round-trip form) so every file
reads back to the identical value and reruns produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .discovery import SepsetTable
from .graph import Dag, MixedGraph, dag_from_mixed, format_edges, parse_edges
from .linalg import DataMatrix
from .metrics import METRICS_COLUMNS, GraphMetrics, format_metric
from .simgen import SimConfig, WeightedDag

EDGES_FILE = "cpdag.txt"
SEPSETS_FILE = "sepsets.json"
METRICS_FILE = "metrics.csv"
ORDER_PREFIX = "# order:"


class DatasetError(ValueError):
    pass


def read_csv_dataset(path) -> DataMatrix:
    """Read a header + numeric body CSV, reporting the line and column of any bad cell."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise DatasetError(f"{path}: file is empty")
        names = [h.strip() for h in header]
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise DatasetError(f"{path}: line {line} has {len(row)} cells, expected {len(names)}")
            vals = []
            for col, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: line {line}, column {col} ({names[col]}): cannot parse {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DatasetError(
                        f"{path}: line {line}, column {col} ({names[col]}): non-finite value {cell!r}"
                    )
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return DataMatrix(np.array(rows, dtype=float), names)


def write_csv_dataset(data: DataMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(data.names) + "\n")
        for row in data.values.tolist():
            fh.write(",".join(map(repr, row)) + "\n")


def write_edges(g: MixedGraph | Dag, path, weights=None) -> None:
    Path(path).write_text(format_edges(g, weights))


def read_edges(path) -> MixedGraph:
    return parse_edges(Path(path).read_text())[0]


def read_dag(path) -> Dag:
    return dag_from_mixed(read_edges(path))


def write_weighted_dag(wdag: WeightedDag, path) -> None:
    # the generation order rides along as a comment, which plain edge readers skip
    order = f"{ORDER_PREFIX} {' '.join(map(str, wdag.order))}\n"
    Path(path).write_text(format_edges(wdag.dag, wdag.weights) + order)


def read_weighted_dag(path) -> WeightedDag:
    text = Path(path).read_text()
    g, weights = parse_edges(text)
    dag = dag_from_mixed(g)
    order = dag.order
    for line in text.splitlines():
        if line.startswith(ORDER_PREFIX):
            order = tuple(int(x) for x in line[len(ORDER_PREFIX):].split())
    if sorted(order) != list(range(dag.n)):
        raise ValueError(f"{path}: order line is not a permutation of 0..{dag.n - 1}")
    pos = {v: r for r, v in enumerate(order)}
    if any(pos[a] > pos[b] for a, b in dag.edges):
        raise ValueError(f"{path}: order line is not topological")
    return WeightedDag(dag, weights, order)


def sepsets_to_json(sepsets: SepsetTable) -> dict[str, list[list[int]]]:
    return {f"{i},{j}": [sorted(k) for k in sets] for (i, j), sets in sepsets.items()}


def sepsets_from_json(obj: dict, n: int) -> SepsetTable:
    table = SepsetTable(n)
    for key, sets in obj.items():
        i, j = (int(x) for x in key.split(","))
        for k in sets:
            table.add(i, j, k)
    return table


def append_metrics_rows(path, rows: list[dict]) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        extra = [k for k in rows[0] if k not in METRICS_COLUMNS] if rows else []
        if new:
            writer.writerow([*METRICS_COLUMNS, *extra])
        for row in rows:
            writer.writerow([format_metric(row.get(c)) for c in (*METRICS_COLUMNS, *extra)])


def metrics_row(metrics: GraphMetrics, **info) -> dict:
    row = dict(info)
    row.update(asdict(metrics))
    return row


def write_result(
    graph: MixedGraph,
    sepsets: SepsetTable,
    metrics: GraphMetrics | None,
    out_dir,
    **info,
) -> list[Path]:
    """Write the CPDAG edge list and sepsets JSON, and append a metrics row if given.

    ``info`` supplies the run columns of the metrics row (run_id, algo, n, ...).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / EDGES_FILE, out / SEPSETS_FILE]
    write_edges(graph, written[0])
    written[1].write_text(json.dumps(sepsets_to_json(sepsets), indent=1, sort_keys=True) + "\n")
    if metrics is not None:
        append_metrics_rows(out / METRICS_FILE, [metrics_row(metrics, **info)])
        written.append(out / METRICS_FILE)
    return written


@dataclass
class RunConfig:
    """Everything needed to repeat a discovery run. Exactly one data source is set."""

    algo: str = "pc"
    stable: bool = False
    alpha: float = 1e-3
    batch_size: int = 64
    out: str = "out"
    seed: int = 0
    input: str | None = None
    oracle: str | None = None
    sim: SimConfig | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.sim, dict):
            self.sim = SimConfig(**self.sim)
        sources = sum(x is not None for x in (self.input, self.oracle, self.sim))
        if sources != 1:
            raise ValueError("exactly one of input, oracle or sim must be given")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))
