#!/usr/bin/env python3
"""End-to-end checks for the bench and histcheck executables."""
import csv
import os
import subprocess
import sys
import tempfile

BENCH, HISTCHECK = sys.argv[1], sys.argv[2]
HEADER = ("structure,mode,threads,S,R_or_fixedRange,insertPct,removePct,lookupPct,"
          "rangePct,run,opsPerUs,updateOpsPerUs,rangeOpsPerUs,rangeThroughputScaled,"
          "baseNodes,traversedPerRQ,avgItemsPerRQ,seed").split(",")
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args):
    return subprocess.run(list(args), capture_output=True, text=True, timeout=120)


with tempfile.TemporaryDirectory() as tmp:
    out = os.path.join(tmp, "mix.csv")
    r = run(BENCH, "--structure", "catree", "--threads", "2", "--key-range", "10000",
            "--max-range", "100", "--mix", "20,55,25", "--warmup-runs", "1",
            "--warmup-seconds", "0.1", "--measure-runs", "2", "--seconds", "0.2",
            "--seed", "7", "--csv", out)
    check(r.returncode == 0, "mix run exits 0: " + r.stderr.strip()[-200:])
    with open(out, newline="") as f:
        rows = list(csv.reader(f))
    check(rows[0] == HEADER, "CSV header")
    check(len(rows) == 3, "one row per measured run")
    for i, row in enumerate(rows[1:]):
        rec = dict(zip(HEADER, row))
        check(rec["structure"] == "catree" and rec["mode"] == "mix", "row %d labels" % i)
        check(rec["run"] == str(i), "row %d run index" % i)
        check([rec[k] for k in ("insertPct", "removePct", "lookupPct", "rangePct")]
              == ["10", "10", "55", "25"], "row %d mix" % i)
        check(float(rec["opsPerUs"]) > 0, "row %d positive throughput" % i)
        check(float(rec["rangeThroughputScaled"]) == 0, "row %d no scaled range in mix" % i)
        check(rec["seed"] == "7", "row %d seed" % i)

    out = os.path.join(tmp, "duty.csv")
    r = run(BENCH, "--structure", "coarse", "--mode", "split-duty", "--threads", "2",
            "--key-range", "10000", "--fixed-range", "64", "--warmup-runs", "0",
            "--measure-runs", "1", "--seconds", "0.2", "--csv", out)
    check(r.returncode == 0, "split-duty run exits 0: " + r.stderr.strip()[-200:])
    with open(out, newline="") as f:
        rec = dict(zip(HEADER, list(csv.reader(f))[1]))
    check(rec["mode"] == "split-duty" and rec["R_or_fixedRange"] == "64", "split-duty row")
    check(float(rec["rangeThroughputScaled"]) > 0, "split-duty scaled range throughput")

    r = run(BENCH, "--mode", "split-duty", "--threads", "3", "--seconds", "0.1")
    check(r.returncode == 2, "odd thread count in split-duty is rejected")
    r = run(BENCH, "--mix", "50,50,50", "--seconds", "0.1")
    check(r.returncode == 2, "mix not summing to 100 is rejected")
    r = run(BENCH, "--warmup-runs", "0", "--measure-runs", "1", "--seconds", "0.05",
            "--key-range", "1000", "--csv", os.path.join(tmp, "missing", "x.csv"))
    check(r.returncode == 3, "unwritable CSV path exits 3")

    good = os.path.join(tmp, "good.tsv")
    with open(good, "w") as f:
        f.write("0\tinsert\t5\t0\t10\t0\n"
                "1\tlookup\t5\t20\t30\t1\n"
                "1\trange\t0,9\t40\t50\t5\n")
    r = run(HISTCHECK, good)
    check(r.returncode == 0, "histcheck accepts a linearizable history")

    bad = os.path.join(tmp, "bad.tsv")
    with open(bad, "w") as f:
        f.write("0\tinsert\t5\t0\t10\t0\n"
                "1\tlookup\t5\t20\t30\t0\n")
    r = run(HISTCHECK, bad)
    check(r.returncode == 1, "histcheck rejects a stale read")

    malformed = os.path.join(tmp, "malformed.tsv")
    with open(malformed, "w") as f:
        f.write("0\tinsert\n")
    r = run(HISTCHECK, malformed)
    check(r.returncode == 2, "histcheck reports malformed input")

sys.exit(1 if failures else 0)
