"""Smoke test for the opcover_py extension.

Install first:  pip install --no-build-isolation ./crates/python
Run:            python python/smoke_test.py [--full]
"""

import json
import sys

import opcover_py as oc


def check(label, ok):
    print(("PASS " if ok else "FAIL ") + label)
    return ok


def main():
    full = "--full" in sys.argv
    results = []

    t2 = oc.Algebra.t2()
    results.append(check("T2 has dimension 3", t2.dim == 3))
    ident = t2.identity_cover()
    results.append(check("identity cover of T2 is M2", ident.structure() == "M2"))

    diag = oc.Cover.named("diag")
    results.append(check("diag cover is M2⊕ℂ²", diag.structure() == "M2⊕ℂ²"))
    sh = diag.shilov()
    results.append(check("diag Shilov blocks are the two scalars", sh["blocks"] == [1, 2] and sh["decisive"]))
    results.append(check("diag cover is not essential", not diag.is_essential()))
    results.append(check("envelope of diag is the identity cover", diag.envelope().equivalent(ident)))

    chi1, chi2 = oc.Cover.named("chi1"), oc.Cover.named("chi2")
    results.append(check("chi1 ∨ chi2 ≡ diag", chi1.join(chi2).equivalent(diag)))
    results.append(check("chi1 ∧ chi2 ≡ identity", chi1.meet(chi2).equivalent(ident)))
    results.append(check("chi1 ≤ diag", chi1.below(diag) and not diag.below(chi1)))

    sign = oc.System.named("t2_sign")
    results.append(check("sign action lifts to diag", oc.admissible(sign, diag)["admissible"]))
    tr = oc.trivialize(sign, ident)
    results.append(check("trivialization on T2", tr["passed"] and tr["tensor_dim"] == 6))

    # hand-built cover: a ↦ a ⊕ a11 ⊕ a22 written out explicitly
    e11 = [[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]]
    e22 = [[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]]
    e12 = [[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
    mine = oc.Cover("mine", t2, [2, 1, 1], [e11, e22, e12])
    results.append(check("explicit cover equals bundled diag", mine.equivalent(diag)))

    m2 = [[[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]]
    transpose = [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[0, 1], [0, 0]], [[0, 0], [0, 1]]]
    half = [[[0.5 * x for x in row] for row in m] for m in m2]
    rep = oc.cb_check([2], m2, [2], transpose, kind="cc")
    results.append(check("transpose on M2 is not completely contractive", rep["verdict"] == "NotCC"))
    rep = oc.cb_check([2], m2, [2], half, kind="cc")
    results.append(check("half identity is completely contractive", rep["verdict"] == "CompletelyContractive"))

    schur = oc.Cover.named("schur")
    swap = oc.System.named("swap")
    adm = oc.admissible(swap, schur)
    results.append(check("swap does not lift to the Schur cover", not adm["admissible"] and adm["element"] == 1))
    cp = oc.crossed_product(swap, oc.Cover.named("a4_identity"))
    results.append(check("crossed product has dim 16", cp["dim"] == 16 and cp["diagonal_type"] == "M2⊕M2"))

    rep = oc.run_scenario(oc.bundled_scenario("t2_covers"))
    results.append(check("bundled t2_covers scenario passes", rep["status"] == "pass"))
    empty = oc.run_scenario(json.dumps({"name": "empty"}))
    results.append(check("empty scenario passes", empty["status"] == "pass" and empty["results"] == []))
    try:
        oc.run_scenario('{"name": "x", "bogus": 1}')
        results.append(check("schema errors raise ValueError", False))
    except ValueError:
        results.append(check("schema errors raise ValueError", True))

    if full:
        pr = oc.partial_recovery(swap, schur)
        results.append(check("partial crossed product dim 38, recovered", pr["dim"] == 38 and pr["recovered"]))
        rep = oc.paper_suite()
        results.append(check("paper suite passes", rep["status"] == "pass"))

    print(f"{sum(results)}/{len(results)} passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
