"""The pair (k0, s) for the example problems shipped in fixtures/.

These numbers do not change under a change of defining equations or of
target coordinates; the test suite checks that on random changes.
"""
from pathlib import Path

from crdeg import analyze
from crdeg.io import parse_problem

here = Path(__file__).resolve().parent.parent / "fixtures"
for path in sorted(here.glob("*.json")):
    prob = parse_problem(path)
    if prob.map is None:
        continue
    rep, probe, *_ = analyze(prob.map)
    print(f"{path.stem:16} k0={rep.k0}  s={rep.s}  dims={rep.dims}  {probe.verdict}")
