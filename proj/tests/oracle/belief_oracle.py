#!/usr/bin/env python3
"""Brute-force Bayes oracle for the finite belief worlds.

Reads every corpus/beliefs/*.bw file with its own parser, enumerates states
with exact fractions, fits grouped answers by Newton's method in high
precision, and writes golden.json plus the expected CLI report for each
world that ships a script.
"""
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

mpmath.mp.dps = 60
UNDEF = "undef"


def tokenize(line):
    out, cur = [], ""
    for ch in line:
        if ch.isspace():
            if cur:
                out.append(cur)
            cur = ""
        elif ch in "{}:;[],=":
            if cur:
                out.append(cur)
            cur = ""
            out.append(ch)
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def parse(text):
    w = {"states": [], "actions": [], "obs": [], "prior": None, "t": {}, "questions": [], "answers": {}}
    for raw in text.splitlines():
        t = tokenize(raw.split("#")[0])
        if not t:
            continue
        kw = t[0]
        if kw in ("states", "actions", "observations"):
            w[{"observations": "obs"}.get(kw, kw)] = t[1:]
        elif kw == "prior":
            if t[1:] == ["uniform"]:
                w["prior"] = "uniform"
            elif t[1] == "weights":
                ws = [Fraction(x) for x in t[2:]]
                w["prior"] = [x / sum(ws) for x in ws]
            else:
                w["prior"] = [Fraction(x) for x in t[1:]]
        elif kw == "t":
            s, a, arrow, n, v = t[1:]
            assert arrow == "->"
            w["t"][(s, a)] = (n, v)
        elif kw == "question":
            body = t[3:-1]
            blocks, i = [], 0
            while i < len(body):
                name = body[i]
                assert body[i + 1] == ":"
                i += 2
                members = []
                while i < len(body) and body[i] != ";":
                    members.append(body[i])
                    i += 1
                i += 1
                blocks.append((name, members))
            w["questions"].append((t[1], blocks))
        elif kw == "answer":
            w["answers"][t[1]] = t[2:]
    n = len(w["states"])
    if w["prior"] in (None, "uniform"):
        w["prior"] = [Fraction(1, n)] * n
    w["P"] = dict(zip(w["states"], w["prior"]))
    if not w["questions"]:
        w["questions"] = [("state", [(s, [s]) for s in w["states"]])]
    return w


def f1(w, s, a):
    return w["t"].get((s, a), (s, UNDEF))


def block_mass(w, q):
    return [sum(w["P"][s] for s in members) for _, members in q[1]]


def answer0(w, q):
    spec = w["answers"].get(q[0], ["prior"])
    names = [b for b, _ in q[1]]
    if spec == ["prior"]:
        return block_mass(w, q)
    if spec[0] == "=":
        return [Fraction(int(b == spec[1])) for b in names]
    if spec == ["dontknow"] or "[" in spec:
        return None
    vals, i = {}, 1
    while i < len(spec) - 1:
        vals[spec[i]] = Fraction(spec[i + 2])
        i += 4 if spec[i + 3] == ";" else 3
    return [vals.get(b, Fraction(0)) for b in names]


def observations(w):
    return w["obs"] + [UNDEF]


def weights_single(w, q, ans):
    mass = block_mass(w, q)
    out = {}
    for (_, members), a, m in zip(q[1], ans, mass):
        for s in members:
            out[s] = w["P"][s] * a / m
    return out


def mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def fit_pair(w, qb, qc, ab, ac):
    """Joint over B x C cells: diag(x) M diag(y) with the given marginals."""
    nb, nc = len(qb[1]), len(qc[1])
    pb, pc = block_mass(w, qb), block_mass(w, qc)
    cell = [[sum(w["P"][s] for s in set(mb) & set(mc)) for _, mc in qc[1]] for _, mb in qb[1]]
    ab, ac = [mp(x) for x in ab], [mp(x) for x in ac]
    M = [[ab[r] * ac[s] * mp(cell[r][s]) / (mp(pb[r]) * mp(pc[s])) for s in range(nc)] for r in range(nb)]
    rows = [r for r in range(nb) if ab[r] > 0]
    cols = [s for s in range(nc) if ac[s] > 0]
    u = {r: mpmath.mpf(0) for r in rows}
    v = {s: mpmath.mpf(0) for s in cols}
    free = [("r", r) for r in rows] + [("c", s) for s in cols[:-1]]
    for _ in range(200):
        J = {(r, s): M[r][s] * mpmath.e ** (u[r] + v[s]) for r in rows for s in cols}
        res = [sum(J[r, s] for s in cols) - ab[r] for r in rows] + [sum(J[r, s] for r in rows) - ac[s] for s in cols[:-1]]
        if max(abs(x) for x in res) < mpmath.mpf(10) ** -45:
            break
        jac = mpmath.matrix(len(res), len(free))
        for i, (kind, idx) in enumerate([("r", r) for r in rows] + [("c", s) for s in cols[:-1]]):
            for j, (fk, fi) in enumerate(free):
                if kind == "r":
                    jac[i, j] = sum(J[idx, s] for s in cols) if fk == "r" and fi == idx else (J[idx, fi] if fk == "c" else 0)
                else:
                    jac[i, j] = sum(J[r, idx] for r in rows) if fk == "c" and fi == idx else (J[fi, idx] if fk == "r" else 0)
        step = mpmath.lu_solve(jac, mpmath.matrix(res))
        for j, (fk, fi) in enumerate(free):
            if fk == "r":
                u[fi] -= step[j]
            else:
                v[fi] -= step[j]
    else:
        raise RuntimeError("scaling did not converge")
    out = {}
    for r, (_, mb) in enumerate(qb[1]):
        for s, (_, mc) in enumerate(qc[1]):
            members = set(mb) & set(mc)
            if not members:
                continue
            j = M[r][s] * mpmath.e ** (u[r] + v[s]) if r in u and s in v else mpmath.mpf(0)
            for st in members:
                out[st] = j * mp(w["P"][st]) / mp(cell[r][s])
    return out


def group_weights(w, answers):
    qs = w["questions"]
    if len(qs) == 1:
        q = qs[0]
        mass = block_mass(w, q)
        return {s: mp(w["P"][s]) * mp(a) / mp(m) for (_, members), a, m in zip(q[1], answers[0], mass) for s in members}
    assert len(qs) == 2
    return fit_pair(w, qs[0], qs[1], answers[0], answers[1])


def marginals(w, q, weights):
    return [sum(weights.get(s, 0) for s in members) for _, members in q[1]]


def branch(w, weights, a):
    out = []
    for v in observations(w):
        nxt = {}
        for s, x in weights.items():
            n, o = f1(w, s, a)
            if o == v:
                nxt[n] = nxt.get(n, 0) + x
        p = sum(nxt.values())
        if p == 0:
            continue
        out.append({"observation": v, "p": p, "answers": {q[0]: [m / p for m in marginals(w, q, nxt)] for q in w["questions"]}})
    return out


def fl(x):
    return float(x)


def random_exact(rng, k, positive):
    xs = [rng.randint(1 if positive else 0, 20) for _ in range(k)]
    if sum(xs) == 0:
        xs[0] = 1
    return [Fraction(x, sum(xs)) for x in xs]


def update_cases(w, rng):
    cases = []
    for q in w["questions"]:
        k = len(q[1])
        answers = [block_mass(w, q)] + [[Fraction(int(i == j)) for i in range(k)] for j in range(k)]
        answers += [random_exact(rng, k, False) for _ in range(2)]
        for ans in answers:
            weights = weights_single(w, q, ans)
            for a in w["actions"]:
                pred = {v: Fraction(0) for v in observations(w)}
                for s, x in weights.items():
                    pred[f1(w, s, a)[1]] += x
                for v in observations(w):
                    for n in w["questions"]:
                        case = {"question": q[0], "answer": [fl(x) for x in ans], "action": a, "observation": v,
                                "target": n[0], "predict": [fl(pred[o]) for o in observations(w)], "p": fl(pred[v])}
                        if pred[v] == 0:
                            case["impossible"] = True
                        else:
                            nxt = {}
                            for s, x in weights.items():
                                ns, o = f1(w, s, a)
                                if o == v:
                                    nxt[ns] = nxt.get(ns, 0) + x
                            case["posterior"] = [fl(m / pred[v]) for m in marginals(w, n, nxt)]
                        cases.append(case)
    return cases


def branch_cases(w, rng):
    qs = w["questions"]
    groups = []
    a0 = [answer0(w, q) for q in qs]
    if all(x is not None for x in a0):
        groups.append(a0)
    groups.append([block_mass(w, q) for q in qs])
    for _ in range(3):
        groups.append([random_exact(rng, len(q[1]), True) for q in qs])
    groups.append([[Fraction(int(i == 0)) for i in range(len(q[1]))] for q in qs])
    cases = []
    for g in groups:
        weights = group_weights(w, g)
        for a in w["actions"]:
            cases.append({"answers": {q[0]: [fl(x) for x in ans] for q, ans in zip(qs, g)}, "action": a,
                          "branches": [{"observation": b["observation"], "p": fl(b["p"]),
                                        "answers": {k: [fl(x) for x in v] for k, v in b["answers"].items()}}
                                       for b in branch(w, weights, a)]})
    return cases


def replay(w, script):
    qs = w["questions"]
    g = [answer0(w, q) for q in qs]
    rep = {"questions": [q[0] for q in qs],
           "initial": {q[0]: {b: [fl(x), fl(x)] for (b, _), x in zip(q[1], ans)} for q, ans in zip(qs, g)},
           "steps": []}
    for t, (a, v) in enumerate(script, 1):
        brs = branch(w, group_weights(w, g), a)
        taken = [b for b in brs if b["observation"] == v]
        if not taken:
            raise ValueError(f"step {t}: impossible observation {v}")
        b = taken[0]
        rep["steps"].append({"t": t, "action": a, "observation": v, "p": [fl(b["p"])] * 2,
                             "outcomes": {x["observation"]: [fl(x["p"])] * 2 for x in brs},
                             "answers": {q[0]: {bn: [fl(x)] * 2 for (bn, _), x in zip(q[1], b["answers"][q[0]])} for q in qs}})
        g = [b["answers"][q[0]] for q in qs]
    return rep


def read_script(path):
    out = []
    for raw in path.read_text().splitlines():
        t = raw.split("#")[0].split()
        if t:
            out.append((t[0], t[1]))
    return out


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "corpus/beliefs")
    golden = {}
    for path in sorted(root.glob("*.bw")):
        w = parse(path.read_text())
        rng = random.Random(path.name)
        golden[path.name] = {"updates": update_cases(w, rng), "branches": branch_cases(w, rng)}
        script = path.with_suffix(".script")
        if script.exists():
            rep = replay(w, read_script(script))
            path.with_suffix(".report.json").write_text(json.dumps(rep, indent=2) + "\n")
    (root / "golden.json").write_text(json.dumps(golden, indent=1) + "\n")


if __name__ == "__main__":
    main()
