import json

import numpy as np
import pytest

from revpc.citest import OracleSource
from revpc.discovery import discover, AlgoConfig
from revpc.graph import Dag, MixedGraph, cpdag_of
from revpc.io import (
    DatasetError,
    RunConfig,
    read_csv_dataset,
    read_edges,
    read_weighted_dag,
    sepsets_from_json,
    sepsets_to_json,
    write_csv_dataset,
    write_edges,
    write_result,
    write_weighted_dag,
)
from revpc.metrics import GraphMetrics
from revpc.simgen import SimConfig, simulate


def test_read_well_formed(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n1,2\n3.5,-4e-3\n0,1\n")
    d = read_csv_dataset(p)
    assert (d.N, d.n, d.names) == (3, 2, ["a", "b"])
    assert d.values[1, 1] == -4e-3


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "empty"),
        ("a,b\n", "no data rows"),
        ("a,b\n1,2\n3\n", "line 3 has 1 cells"),
        ("a,b\n1,x\n", "line 2, column 1 \\(b\\): cannot parse 'x'"),
        ("a,b\n1,2\nNaN,1\n", "line 3, column 0 \\(a\\): non-finite value 'NaN'"),
    ],
)
def test_read_errors_give_coordinates(tmp_path, text, match):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DatasetError, match=match):
        read_csv_dataset(p)


def test_dataset_round_trip_bit_identical(tmp_path):
    _, data = simulate(SimConfig(n=5, density=0.5, N=200, seed=1))
    write_csv_dataset(data, tmp_path / "d.csv")
    back = read_csv_dataset(tmp_path / "d.csv")
    assert np.array_equal(back.values, data.values)
    assert back.names == data.names == [f"x{k}" for k in range(5)]


def test_weighted_dag_round_trip(tmp_path):
    wdag, _ = simulate(SimConfig(n=7, density=0.5, N=10, seed=2))
    write_weighted_dag(wdag, tmp_path / "t.txt")
    assert read_weighted_dag(tmp_path / "t.txt") == wdag


def test_edges_round_trip(tmp_path):
    g = cpdag_of(Dag.from_edges(4, [(0, 2), (1, 2), (2, 3), (0, 1)]))
    write_edges(g, tmp_path / "g.txt")
    assert read_edges(tmp_path / "g.txt") == g


def test_write_result_empty_graph(tmp_path):
    from revpc.discovery import SepsetTable

    write_result(MixedGraph(3), SepsetTable(3), None, tmp_path)
    assert (tmp_path / "cpdag.txt").read_text() == "nodes: 3\n"
    assert json.loads((tmp_path / "sepsets.json").read_text()) == {}
    assert not (tmp_path / "metrics.csv").exists()


def test_write_result_four_node_example(tmp_path):
    dag = Dag.from_edges(4, [(0, 1), (1, 2), (1, 3), (0, 3)])
    cpdag, skel = discover(OracleSource(dag), AlgoConfig(variant="pc_reverse"))
    m = GraphMetrics(tpr=1.0, fpr=0.0, shd=0, ci_tests=skel.counter.total)
    write_result(cpdag, skel.sepsets, m, tmp_path, run_id=1, algo="pc-reverse", n=4, d="", N="", alpha="")
    write_result(cpdag, skel.sepsets, m, tmp_path, run_id=2, algo="pc-reverse", n=4, d="", N="", alpha="")
    seps = json.loads((tmp_path / "sepsets.json").read_text())
    assert any(1 in k for k in seps["0,2"])
    assert sepsets_from_json(seps, 4) == skel.sepsets
    assert sepsets_to_json(skel.sepsets) == seps
    lines = (tmp_path / "metrics.csv").read_text().splitlines()
    assert lines[0].startswith("run_id,algo,n,d,N,alpha,tpr,fpr,shd,ci_tests")
    assert len(lines) == 3 and lines[1].startswith("1,pc-reverse,4")
    assert read_edges(tmp_path / "cpdag.txt") == cpdag


def test_run_config_round_trip():
    cfg = RunConfig(algo="pc_reverse", sim=SimConfig(n=5, density=0.2), seed=3)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    cfg2 = RunConfig(input="data.csv")
    assert RunConfig.from_json(cfg2.to_json()) == cfg2
    with pytest.raises(ValueError):
        RunConfig()
    with pytest.raises(ValueError):
        RunConfig(input="a.csv", sim=SimConfig(n=3, density=0.1))
