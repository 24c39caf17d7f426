#!/usr/bin/env python3
"""Writes a synthetic arithmetic multiple-choice set in the dataset format.

usage: make_mcq_fixture.py OUT.jsonl [--seed N]
"""
import argparse
import json
import math
import random

SUBJECTS = [("elementary", 33), ("high_school", 33), ("college", 34)]


def elementary(rng):
    a, b = rng.randint(2, 99), rng.randint(2, 99)
    op = rng.choice("+-*")
    return f"{a} {op} {b}"


def high_school(rng):
    a, b, c = rng.randint(2, 30), rng.randint(2, 30), rng.randint(2, 9)
    form = rng.randrange(3)
    if form == 0:
        return f"({a} + {b}) * {c}"
    if form == 1:
        return f"{a}^2 - {b} * {c}"
    return f"({a} * {b}) / {c}"


def college(rng):
    a, b = rng.randint(2, 400), rng.randint(2, 12)
    form = rng.randrange(3)
    if form == 0:
        return f"sqrt({a}) + {b}"
    if form == 1:
        return f"ln({a}) * {b}"
    return f"{b}^3 / (1 + {a})"


def evaluate(expr):
    py = expr.replace("^", "**").replace("sqrt", "math.sqrt").replace("ln", "math.log")
    return eval(py, {"math": math})


def fmt(v):
    return f"{v:.10g}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    gens = {"elementary": elementary, "high_school": high_school, "college": college}
    n = 0
    with open(args.out, "w") as f:
        for subject, count in SUBJECTS:
            for _ in range(count):
                n += 1
                expr = gens[subject](rng)
                gold = evaluate(expr)
                values = {fmt(gold)}
                while len(values) < 4:
                    values.add(fmt(gold + rng.choice([-1, 1]) * rng.randint(1, 12) * (1 if abs(gold) < 50 else 3)))
                wrong = [v for v in values if v != fmt(gold)]
                rng.shuffle(wrong)
                slot = rng.randrange(4)
                opts = wrong[:slot] + [fmt(gold)] + wrong[slot:]
                letters = "ABCD"
                item = {
                    "id": f"math-{n:03d}",
                    "question": f"What is {expr}?",
                    "options": dict(zip(letters, opts)),
                    "answer": letters[slot],
                    "subject": subject,
                }
                f.write(json.dumps(item) + "\n")


if __name__ == "__main__":
    main()
