"""Test counts and separating sets of forward and reverse PC on a four-node DAG.

    python scripts/four_node_example.py
"""

from revpc.citest import OracleSource
from revpc.discovery import orient_cpdag, pc_skeleton, reverse_skeleton
from revpc.graph import Dag, format_edges

DAG = Dag.from_edges(4, [(0, 1), (1, 2), (1, 3), (0, 3)])


def main():
    src = OracleSource(DAG)
    for name, search in (("pc", pc_skeleton), ("pc-reverse", reverse_skeleton)):
        res = search(src)
        print(f"{name}: {res.counter.total} CI tests, per stage {dict(sorted(res.counter.per_stage.items()))}")
        for (i, j), sets in res.sepsets.items():
            print(f"  {i} _||_ {j} | {sorted(sets[0])} (removed at stage {res.deletion_stage[(i, j)]})")
        print("  " + format_edges(orient_cpdag(res)).replace("\n", "\n  ").rstrip())


if __name__ == "__main__":
    main()
