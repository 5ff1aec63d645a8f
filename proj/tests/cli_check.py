#!/usr/bin/env python3
"""Runs the CLI over a fixed command list: exit codes, schema validation,
CSV headers, and byte-identical reruns."""

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

CLI = sys.argv[1]
ROOT = Path(sys.argv[2])
SCHEMAS = ROOT / "docs" / "schemas"

registry = Registry()
schemas = {}
for p in SCHEMAS.glob("*.json"):
    doc = json.loads(p.read_text())
    registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
    schemas[p.stem] = doc

failures = []


def run(args, env=None):
    e = dict(os.environ)
    e.pop("CESARO_HORIZON", None)
    e.update(env or {})
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=e)


def check(name, args, code=0, fmt=None, header=None, env=None, stderr_has=None):
    r = run(args, env)
    if r.returncode != code:
        failures.append(f"{name}: exit {r.returncode}, wanted {code}\n{r.stderr}")
        return r
    if stderr_has and stderr_has not in r.stderr:
        failures.append(f"{name}: stderr lacks {stderr_has!r}: {r.stderr!r}")
    if fmt == "json":
        try:
            doc = json.loads(r.stdout)
        except json.JSONDecodeError as ex:
            failures.append(f"{name}: not JSON ({ex})")
            return r
        tag = doc.get("schema")
        schema = schemas.get(tag)
        if schema is None:
            failures.append(f"{name}: no schema for tag {tag!r}")
        else:
            v = jsonschema.Draft202012Validator(schema, registry=registry)
            errs = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
            for err in errs[:3]:
                failures.append(f"{name}: {list(err.path)}: {err.message}")
    if fmt == "csv":
        first = r.stdout.split("\n", 1)[0]
        if first != header:
            failures.append(f"{name}: CSV header {first!r}, wanted {header!r}")
    again = run(args, env)
    if again.stdout != r.stdout:
        failures.append(f"{name}: output differs between identical runs")
    return r


seq = str(ROOT / "demo" / "sequence.json")
for err in jsonschema.Draft202012Validator(schemas["sequence-input"], registry=registry).iter_errors(
        json.loads(Path(seq).read_text())):
    failures.append(f"demo sequence: {err.message}")
H = ["--horizon", "200000"]

# eval
check("eval residue", ["eval", "residue(0 mod 7)", *H], fmt="json")
r = check("eval blocks", ["eval", "blocks(2^(n-1))", *H], fmt="json")
if r.returncode == 0 and json.loads(r.stdout)["verdict"] != "no-limit":
    failures.append("eval blocks: verdict is not no-limit")
check("eval csv", ["eval", "squares", "--format", "csv", *H], fmt="csv", header="N,count,nu_N")
check("eval parse error", ["eval", "("], code=2, stderr_has="^")
check("eval semantic error", ["eval", "residue(3 mod 2)"], code=2)
check("eval bad flag", ["eval", "squares", "--format", "xml"], code=2)
check("eval bad tol", ["eval", "squares", "--tol", "abc"], code=2)
check("eval unknown predicate", ["eval", "predicate(x)"], code=2)
r = check("eval env horizon", ["eval", "evens"], fmt="json", env={"CESARO_HORIZON": "5000"})
if r.returncode == 0 and json.loads(r.stdout)["horizon"] != 5000:
    failures.append("CESARO_HORIZON not honored")
r = check("eval flag beats env", ["eval", "evens", "--horizon", "3000"], fmt="json", env={"CESARO_HORIZON": "5000"})
if r.returncode == 0 and json.loads(r.stdout)["horizon"] != 3000:
    failures.append("--horizon did not override CESARO_HORIZON")

# examples
check("examples all", ["examples", "all"], fmt="json")
check("examples all csv", ["examples", "all", "--format", "csv"], fmt="csv",
      header="name,expected_upper,expected_lower,method,upper_estimate,lower_estimate,passed")
check("examples one", ["examples", "B∩C"], fmt="json")
check("examples anomaly", ["examples", "anomaly"], fmt="json")
check("examples anomaly csv", ["examples", "anomaly", "--format", "csv"], fmt="csv",
      header="m,nu_at_square,nu_before_next_square")
check("examples dk", ["examples", "dk"], fmt="json")
check("examples dk csv", ["examples", "dk", "--format", "csv"], fmt="csv", header="k,charge,expected,nu_at_horizon")
check("examples names", ["examples", "names"], fmt="json")
check("examples unknown", ["examples", "no-such-example"], code=4)
# tightened tolerance makes the profile-checked entries fail
check("examples strict", ["examples", "blocks-geometric", "--tol", "1/1000000000", *H], code=5)

# nullmod
r = check("nullmod odds", ["nullmod", "residue(1 mod 2)", "--target", "1/2"], fmt="json")
if r.returncode == 0 and json.loads(r.stdout)["removed_prefix"] != [1]:
    failures.append("nullmod odds: F is not {1}")
check("nullmod csv", ["nullmod", "residue(1 mod 2)", "--target", "1/2", "--horizon", "1000", "--format", "csv"],
      fmt="csv", header="N,in_A,in_Aprime,in_F,nu_N_Aprime")
check("nullmod auto", ["nullmod", "blocks(2^(n-1))", *H], fmt="json")
check("nullmod bad target", ["nullmod", "evens", "--target", "3/2"], code=3)

# chain
r = check("chain certify", ["chain", "certify", "--eps", "0.05", "dk-partial-unions"], fmt="json")
if r.returncode == 0 and not json.loads(r.stdout)["found"]:
    failures.append("chain certify: no certificate")
check("chain certify exprs", ["chain", "certify", "--eps", "0.01", "residue(0 mod 4)", "residue(0 mod 2)"], fmt="json")
check("chain certify csv", ["chain", "certify", "residue-cumulative:5", "--format", "csv", *H], fmt="csv",
      header="element,N,count,nu_N")
check("chain certify fails", ["chain", "certify", "--eps", "1/1000000000", "residue-cumulative:10"], code=5)
check("chain without charges", ["chain", "certify", "blocks(2^(n-1))"], code=3)
check("chain order violation", ["chain", "certify", "evens", "residue(0 mod 4)"], code=3)
check("chain densify", ["chain", "densify", "--eps", "1/4", "residue(0 mod 3)"], fmt="json")
check("chain densify csv", ["chain", "densify", "--eps", "1/4", "residue(0 mod 3)", "--format", "csv"], fmt="csv",
      header="index,expr,charge")

# field / classify
check("field", ["field", "evens", "residue(0 mod 3)", "squares"], fmt="json")
check("field csv", ["field", "evens", "--format", "csv"], fmt="csv", header="pattern,expr,charge")
r = check("classify dk", ["classify", "dk:20"], fmt="json")
if r.returncode == 0 and json.loads(r.stdout)["kind"] != "MeasureSpace":
    failures.append("classify dk: not a measure space")
r = check("classify singletons", ["classify", "singletons:20"], fmt="json")
if r.returncode == 0 and json.loads(r.stdout)["kind"] != "ChargeOnly":
    failures.append("classify singletons: not charge-only")
check("classify csv", ["classify", "evens", "odds", "--format", "csv"], fmt="csv", header="parts,tail_mass")
check("classify overlap", ["classify", "evens", "residue(0 mod 3)"], code=3)

# kp
r = check("kp norm", ["kp", "norm", "--p", "1", seq], fmt="json")
if r.returncode == 0 and json.loads(r.stdout)["norm"] != "4/3":
    failures.append("kp norm: expected exact 4/3")
check("kp norm csv", ["kp", "norm", "--p", "2", seq, "--format", "csv"], fmt="csv", header="p,pth_power,norm_approx")
check("kp tail anomaly", ["kp", "tail", "anomaly", "--p", "1", "--eps", "0.1"], fmt="json")
check("kp tail seq", ["kp", "tail", seq, "--p", "1"], fmt="json")
check("kp missing file", ["kp", "norm", "does-not-exist.json"], code=3)
with tempfile.TemporaryDirectory() as d:
    good = Path(d) / "g.json"
    good.write_text(json.dumps({"terms": [{"coef": "3", "set": "evens"}]}))
    check("kp integral", ["kp", "integral", str(good)], fmt="json")
    check("kp integral csv", ["kp", "integral", str(good), "--format", "csv"], fmt="csv", header="N,nu_N_h")
    bad = Path(d) / "b.json"
    bad.write_text("{ not json")
    check("kp bad json", ["kp", "norm", str(bad)], code=2)
    badset = Path(d) / "s.json"
    badset.write_text(json.dumps({"terms": [{"coef": "1", "set": "residue(("}]}))
    check("kp bad set", ["kp", "norm", str(badset)], code=2)
    out = Path(d) / "out.json"
    check("out file", ["eval", "evens", "--out", str(out), *H])
    try:
        json.loads(out.read_text())
    except (OSError, json.JSONDecodeError) as ex:
        failures.append(f"--out: {ex}")

# props
r = check("props", ["props", "--cases", "300", "--seed", "7"], fmt="json")
if r.returncode == 0:
    d = json.loads(r.stdout)
    if d["cases"] != 300 or not d["passed"]:
        failures.append("props: wrong case count or failures")
    other = run(["props", "--cases", "300", "--seed", "8"])
    if other.stdout == r.stdout:
        failures.append("props: seed has no effect")
check("props csv", ["props", "--cases", "20", "--format", "csv"], fmt="csv", header="case,evaluated,ok")

for f in failures:
    print("FAIL", f)
print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
