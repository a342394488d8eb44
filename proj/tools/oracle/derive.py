#!/usr/bin/env python3
"""Independent recomputation of the corpus-derived reference values.

Shares no code with the C++ library: reads the bundled CSV and transcript
files directly and prints one JSON document. The acceptance suite freezes
this output; `--check FILE` compares a fresh run against the frozen copy.
"""
import argparse
import collections
import csv
import json
import pathlib
import re
import sys

SENTINEL = "i'm ready to move to the next stage"
CURSOR = re.compile(r"^\W*current stage and iteration\W*:\s*\**\s*(\d+)-(\d+)", re.I | re.M)


def screening(root):
    def rows(name):
        with open(root / "screening" / name, newline="", encoding="utf-8") as f:
            return list(csv.DictReader(f))

    full, subset = rows("full.csv"), rows("subset.csv")
    by_id = {r["exp_id"]: r for r in full}
    mismatches = [r["exp_id"] for r in subset if by_id.get(r["exp_id"]) != r]
    counts = collections.Counter(r["linker"] for r in full)
    return {
        "rows": len(full),
        "unique_exp_ids": len(by_id),
        "per_linker": dict(sorted(counts.items(), key=lambda kv: -kv[1])),
        "subset_rows": len(subset),
        "subset_mismatches": mismatches,
    }


def campaigns(root):
    with open(root / "navigator" / "index.csv", newline="", encoding="utf-8") as f:
        index = list(csv.DictReader(f))
    out = collections.OrderedDict()
    for row in index:
        text = (root / row["file"]).read_text(encoding="utf-8")
        found = CURSOR.findall(text)
        c = out.setdefault(row["campaign"], {"cursors": [], "index_agrees": True, "advances": []})
        cursor = f"{found[0][0]}-{found[0][1]}" if len(found) == 1 else None
        c["cursors"].append(cursor)
        c["index_agrees"] &= cursor == row["cursor"]
    for key, c in out.items():
        per_stage = collections.Counter(int(x.split("-")[0]) for x in c["cursors"])
        c["per_stage"] = [per_stage[s] for s in sorted(per_stage)]
        c["total"] = len(c["cursors"])
        pairs = zip(c["cursors"], c["cursors"][1:])
        c["advances"] = [f"{a}->{b}" for a, b in pairs if a.split("-")[0] != b.split("-")[0]]
    return out


def truncated_tenths(num, den):
    return (1000 * num) // den


def rubric(root):
    with open(root / "rubric" / "h_scores.csv", newline="", encoding="utf-8") as f:
        scores = list(csv.DictReader(f))
    tasks = 3 * sum(1 for _ in (root / "navigator" / "H").glob("turn_*.txt"))
    sums = {k: sum(int(r[k]) for r in scores) for k in ("relevance", "progress", "helpfulness")}
    total = sum(sums.values())
    half_up = {k: (2000 * v // tasks + 1) // 2 for k, v in sums.items()}
    return {
        "task_count": tasks,
        "sums": sums,
        "total_sum": total,
        "percent_tenths_truncated": {k: truncated_tenths(v, tasks) for k, v in sums.items()},
        "percent_tenths_half_up": half_up,
        "total_percent_tenths_truncated": truncated_tenths(total, 3 * tasks),
    }


def derive(root):
    c = campaigns(root)
    return {
        "screening": screening(root),
        "campaigns": {k: {kk: v[kk] for kk in ("per_stage", "total", "advances", "index_agrees")} for k, v in c.items()},
        "all_cursors_parsed": all(x is not None for v in c.values() for x in v["cursors"]),
        "turns": sum(v["total"] for v in c.values()),
        "rubric": rubric(root),
    }


def main():
    p = argparse.ArgumentParser()
    p.add_argument("corpus", type=pathlib.Path)
    p.add_argument("--check", type=pathlib.Path, help="frozen JSON to compare against")
    a = p.parse_args()
    values = derive(a.corpus)
    if a.check is None:
        json.dump(values, sys.stdout, indent=2)
        print()
        return 0
    frozen = json.loads(a.check.read_text(encoding="utf-8"))
    if frozen != values:
        print("oracle output differs from", a.check, file=sys.stderr)
        json.dump(values, sys.stderr, indent=2)
        return 1
    print("oracle values match", a.check)
    return 0


if __name__ == "__main__":
    sys.exit(main())
