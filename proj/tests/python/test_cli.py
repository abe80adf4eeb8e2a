"""End-to-end checks of the command-line tool (path in CVARLAB_BIN)."""

import json
import os
import subprocess
import sys
import tempfile

BIN = os.environ["CVARLAB_BIN"]


def run(*args, expect=0):
    proc = subprocess.run([BIN, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        raise AssertionError(
            f"{args}: exit {proc.returncode} (expected {expect})\n{proc.stdout}\n{proc.stderr}"
        )
    return proc


def test_gen_validate_solve_evaluate(tmp):
    model = os.path.join(tmp, "model.json")
    run("gen", "--domain", "gridworld", "--rows", "5", "--cols", "5", "--seed", "1", "--out", model)
    run("validate", "--model", model)

    solution = os.path.join(tmp, "solution.json")
    run("solve", "--model", model, "--solver", "viq", "--atoms", "7", "--alpha0", "0.1",
        "--epsilon", "1e-6", "--out", solution)
    with open(solution) as f:
        sol = json.load(f)
    assert sol["solver"] == "viq"
    assert len(sol["grid"]) == 7
    assert len(sol["value"]) == 25

    csv = os.path.join(tmp, "eval.csv")
    trace_json = os.path.join(tmp, "eval.json")
    run("evaluate", "--model", model, "--solution", solution, "--s0", "4", "--alpha", "0.1",
        "--alpha", "1.0", "--out", csv, "--eval-json", trace_json)
    lines = open(csv).read().strip().splitlines()
    assert lines[0].startswith("domain,m,n,solver,N,alpha0,s0,alpha,approx,exact_cvar,exact_var")
    assert len(lines) == 3
    # at alpha=1 the approximate and exact values coincide with the expectation
    row = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert abs(float(row["approx"]) - float(row["exact_cvar"])) < 1e-3

    records = json.load(open(trace_json))
    assert len(records) == 2
    assert {"alpha", "cvar", "var", "trace"} <= set(records[0])
    assert all(len(t) == 3 for t in records[0]["trace"])

    mc_json = os.path.join(tmp, "mc.json")
    run("evaluate", "--model", model, "--solution", solution, "--s0", "4", "--alpha", "0.5",
        "--evaluator", "mc", "--samples", "20000", "--mc-seed", "3",
        "--mc-histogram", mc_json, "--out", os.path.join(tmp, "mc.csv"))
    hist = json.load(open(mc_json))
    assert len(hist) == 1
    assert abs(sum(hist[0]["probs"]) - 1.0) < 1e-9
    assert hist[0]["completed"] == 20000


def test_solver_choice_changes_payload(tmp):
    model = os.path.join(tmp, "model.json")
    run("gen", "--domain", "river", "--rows", "10", "--cols", "3", "--out", model)
    vili = os.path.join(tmp, "vili.json")
    viq = os.path.join(tmp, "viq.json")
    run("solve", "--model", model, "--solver", "vili", "--atoms", "7", "--alpha0", "0.1", "--out", vili)
    run("solve", "--model", model, "--solver", "viq", "--atoms", "7", "--alpha0", "0.1", "--out", viq)
    a = json.load(open(vili))
    b = json.load(open(viq))
    assert "xi" in a and "var" in b
    diff = max(
        abs(a["value"][s][k] - b["value"][s][k])
        for s in range(len(a["value"]))
        for k in range(7)
    )
    assert diff < 1e-4


def test_iteration_budget_exits_3(tmp):
    model = os.path.join(tmp, "model.json")
    run("gen", "--domain", "gridworld", "--rows", "5", "--cols", "5", "--seed", "1", "--out", model)
    run("solve", "--model", model, "--solver", "viq", "--max-iterations", "1", expect=3)


def test_malformed_model_exits_2(tmp):
    bad = os.path.join(tmp, "bad.json")
    with open(bad, "w") as f:
        json.dump({
            "states": 2, "actions": 1, "goals": [1],
            "transitions": [{"s": 0, "a": 0, "next": [[1, 0.5]]},
                             {"s": 1, "a": 0, "next": [[1, 1.0]]}],
            "costs": [{"s": 0, "a": 0, "c": 1}],
        }, f)
    run("validate", "--model", bad, expect=2)
    run("solve", "--model", bad, "--solver", "viq", expect=2)


def test_sweep_is_deterministic(tmp):
    model = os.path.join(tmp, "model.json")
    run("gen", "--domain", "gridworld", "--rows", "5", "--cols", "5", "--seed", "7", "--out", model)
    out1 = os.path.join(tmp, "sweep1.csv")
    out2 = os.path.join(tmp, "sweep2.csv")
    args = ["sweep", "--model", model, "--s0", "4", "--solver", "viq", "--atoms", "7",
            "--atoms", "13", "--alpha0", "0.1", "--epsilon", "1e-4"]
    run(*args, "--out", out1)
    run(*args, "--out", out2)
    b1 = open(out1, "rb").read()
    assert b1 == open(out2, "rb").read()

    lines = open(out1).read().strip().splitlines()
    assert len(lines) == 1 + 7 + 13  # header plus one row per atom per config
    header = lines[0].split(",")
    norm_idx = header.index("normalized")
    for line in lines[1:]:
        assert float(line.split(",")[norm_idx]) <= 1.0 + 0.05


def main():
    with tempfile.TemporaryDirectory() as tmp:
        for name, fn in sorted(globals().items()):
            if name.startswith("test_"):
                fn(tmp)
                print(f"ok {name}")
    print("cli end-to-end tests passed")


if __name__ == "__main__":
    sys.exit(main())
