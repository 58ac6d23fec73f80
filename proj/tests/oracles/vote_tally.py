#!/usr/bin/env python3
# Copyright (C) 2026 The claimstage Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent voting oracle. Writes two committed fixtures:

  tests/fixtures/fusion_20posts.json   per-model Top-10 lists for 20 posts, weights, and the
                                       fused lists an exhaustive tally produces.
  tests/fixtures/vote_abc/             a 10-post corpus with three score files where model A
                                       ranks the gold claim in its Top-10 on posts 1-6, B on 4-9
                                       and C on 7-10, plus the expected fused lists and S@10.

Rerun only when the fixture design changes; the C++ tests compare against the frozen output.
"""
import csv
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "fixtures")


def tally(lists, weights):
    """lists: model -> [ids in rank order]. Points weight * (11 - rank)."""
    points, supporters = {}, {}
    for model, ids in lists.items():
        for rank, fc in enumerate(ids, start=1):
            points[fc] = points.get(fc, 0.0) + weights[model] * (11 - rank)
            supporters[fc] = supporters.get(fc, 0) + 1
    # exhaustive pairwise ordering: count how many candidates beat each one
    def beats(a, b):
        if points[a] != points[b]:
            return points[a] > points[b]
        if supporters[a] != supporters[b]:
            return supporters[a] > supporters[b]
        return a < b
    ids = list(points)
    position = {a: sum(beats(b, a) for b in ids if b != a) for a in ids}
    ordered = sorted(ids, key=lambda a: position[a])
    return ordered[:10]


def rerank(scores, candidates):
    return [fc for fc, _ in sorted(((fc, scores[fc]) for fc in candidates), key=lambda e: (-e[1], e[0]))[:10]]


def fusion_20posts():
    rng = random.Random(20240611)
    models = ["alpha", "beta", "gamma"]
    # Weights chosen so some point totals tie exactly (0.25 * 8 == 0.5 * 4).
    weights = {"alpha": 0.5, "beta": 0.25, "gamma": 0.25}
    posts = []
    for post in range(1, 21):
        pool = rng.sample(range(100, 140), 20)
        lists = {m: rng.sample(pool, 10) for m in models}
        posts.append({"post_id": post, "lists": lists, "expected": tally(lists, weights)})
    with open(os.path.join(FIXTURES, "fusion_20posts.json"), "w") as f:
        json.dump({"weights": weights, "posts": posts}, f, indent=1)
        f.write("\n")


def vote_abc():
    rng = random.Random(7)
    out = os.path.join(FIXTURES, "vote_abc")
    os.makedirs(out, exist_ok=True)
    posts = list(range(1, 11))
    pool = list(range(500, 540))
    gold = {p: pool[(p * 7) % len(pool)] for p in posts}
    correct = {"A": set(range(1, 7)), "B": set(range(4, 10)), "C": set(range(7, 11))}

    scores = {}  # model -> post -> fc -> score
    for model, good in correct.items():
        scores[model] = {}
        for p in posts:
            others = [fc for fc in pool if fc != gold[p]]
            rng.shuffle(others)
            s = {}
            top = others[:10]
            if p in good:
                rank = rng.randrange(1, 11)
                top = others[:9]
                top.insert(rank - 1, gold[p])
            for r, fc in enumerate(top, start=1):
                s[fc] = round(1.0 - r * 0.05, 4)
            for fc in pool:
                if fc not in s:
                    s[fc] = round(0.3 * rng.random(), 4)
            scores[model][p] = s
        with open(os.path.join(out, "scores_%s.tsv" % model), "w", newline="") as f:
            w = csv.writer(f, delimiter="\t", lineterminator="\n")
            w.writerow(["post_id", "fact_check_id", "score"])
            for p in posts:
                for fc in pool:
                    w.writerow([p, fc, scores[model][p][fc]])

    weights = {m: 1.0 for m in correct}
    fused = {}
    per_model_hits = {}
    for m in correct:
        per_model_hits[m] = sum(gold[p] in rerank(scores[m][p], pool) for p in posts) / len(posts)
    hits = 0
    for p in posts:
        lists = {m: rerank(scores[m][p], pool) for m in correct}
        fused[p] = tally(lists, weights)
        hits += gold[p] in fused[p]

    with open(os.path.join(out, "fact_checks.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["fact_check_id", "claim", "instances", "title"])
        for fc in pool:
            w.writerow([fc, "('claim number %d', 'claim number %d', [('eng', 1.0)])" % (fc, fc), "[]", ""])
    with open(os.path.join(out, "posts.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["post_id", "instances", "ocr", "verdicts", "text"])
        for p in posts:
            w.writerow([p, "[]", "[]", "[]", "('post number %d', 'post number %d', [('eng', 1.0)])" % (p, p)])
    with open(os.path.join(out, "pairs.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["post_id", "fact_check_id"])
        for p in posts:
            w.writerow([p, gold[p]])
    with open(os.path.join(out, "tasks.json"), "w") as f:
        json.dump({"monolingual": {"eng": {"posts_train": [], "posts_dev": posts, "fact_checks": pool}}}, f)
        f.write("\n")
    config = {
        "track": "monolingual",
        "plan": "OT",
        "embedder": {"kind": "baseline", "hash_dim": 4096},
        "k": 40,
        "rerankers": [{"kind": "score_file", "model": m, "path": "scores_%s.tsv" % m} for m in correct],
        "fusion": {"scheme": "borda", "weights": weights},
        "paths": {"fact_checks": "fact_checks.csv", "posts": "posts.csv", "pairs": "pairs.csv",
                  "tasks": "tasks.json", "out": "runs"},
    }
    with open(os.path.join(out, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")
    with open(os.path.join(out, "expected.json"), "w") as f:
        json.dump({"fused": {str(p): ids for p, ids in fused.items()},
                   "model_s_at_10": per_model_hits,
                   "voting_s_at_10": hits / len(posts)}, f, indent=1)
        f.write("\n")
    print("vote_abc: per-model", per_model_hits, "voting", hits / len(posts))


if __name__ == "__main__":
    fusion_20posts()
    vote_abc()
