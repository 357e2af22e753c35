"""Exit codes and report round trip of the p4green command-line tool."""

import pathlib
import subprocess
import sys
import tempfile

EXIT = {"ok": 0, "usage": 2, "file": 3, "parse": 4, "validation": 5, "report_mismatch": 7}

cli, scenarios = sys.argv[1], pathlib.Path(sys.argv[2])
failures = []


def expect(name, code, *args):
    r = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    status = "ok" if r.returncode == code else "FAILED"
    print(f"{status}: {name}: exit {r.returncode} (want {code})")
    if r.returncode != code:
        failures.append(name)
        print(r.stdout[-400:], r.stderr[-400:])
    return r


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    (tmp / "broken.scenario").write_text("{ not json")

    expect("no subcommand", EXIT["usage"])
    expect("unknown option", EXIT["usage"], "run", scenarios / "fig3.scenario", "--bogus")
    expect("validate good", EXIT["ok"], "validate", scenarios / "fig3.scenario")
    expect("validate overflow", EXIT["validation"], "validate", scenarios / "bad.scenario")
    expect("validate missing", EXIT["file"], "validate", tmp / "missing.scenario")
    expect("validate malformed", EXIT["parse"], "validate", tmp / "broken.scenario")
    expect("report missing dir", EXIT["file"], "report", tmp / "nowhere")

    out = tmp / "run"
    r = expect("run", EXIT["ok"], "run", scenarios / "fig3.scenario", "--until", "20", "--out", out)
    summary = (out / "summary.txt").read_text()
    if r.stdout != summary:
        failures.append("run prints summary.txt")
    r = expect("report", EXIT["ok"], "report", out)
    if r.stdout != summary:
        failures.append("report re-derives summary.txt")
    expect("compare", EXIT["ok"], "compare", scenarios / "fig3.scenario", "--until", "20")

    (out / "summary.txt").write_text(summary.replace("seed=1", "seed=2"))
    expect("report detects edits", EXIT["report_mismatch"], "report", out)
    with open(out / "flows.csv", "a") as f:
        f.write("1,2\n")
    expect("report on corrupt csv", EXIT["parse"], "report", out)

sys.exit(1 if failures else 0)
