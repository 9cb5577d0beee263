#!/usr/bin/env python3
"""Generate the bundled smoke fixture under data/fixture/.

30 claims, 200 documents (one gold document per claim plus distractors) and
canned generations for the mock provider. For the planted subset every
generation quotes a sentence of the claim's gold document verbatim, so the
mock judge finds an entailment; the other generations only use words that
occur nowhere in the corpus. Claims share vocabulary with distractors but
barely with their gold documents, so claim-only retrieval misses the gold
document unless the generation carries it.

Usage: make_fixture.py [OUT_DIR]
"""

import json
import random
import sys
from pathlib import Path

SEED = 20240611
N_CLAIMS = 30
N_DOCS = 200
N_PLANTED = 12
REPEATS = 8

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aou"


def pseudo_words(rng, count, syllables, taken):
    out = []
    while len(out) < count:
        w = "".join(rng.choice(CONSONANTS) + rng.choice(VOWELS) for _ in range(syllables))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def sentence(words):
    s = " ".join(words)
    return s[0].upper() + s[1:] + "."


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "fixture"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)
    taken = set()
    topic = pseudo_words(rng, 40, 3, taken)      # shared by claims and distractors
    unique = pseudo_words(rng, 30 * 8, 3, taken)  # gold-document vocabulary, 8 per claim
    common = pseudo_words(rng, 60, 2, taken)      # background for all documents
    foreign = pseudo_words(rng, 80, 4, taken)     # generation filler, absent from the corpus
    labels = ["SUPPORTS", "REFUTES", "NOT ENOUGH INFO"]

    planted = sorted(rng.sample(range(N_CLAIMS), N_PLANTED))
    claims, docs, canned = [], [], []
    gold_sentences = {}
    for i in range(N_CLAIMS):
        cw = rng.sample(topic, 5)
        claim = f"the {cw[0]} {cw[1]} was {cw[2]} by the {cw[3]} of {cw[4]} in case {i}"
        claim = claim[0].upper() + claim[1:] + "."
        own = unique[i * 8:(i + 1) * 8]
        key = sentence(["the"] + own[:5] + ["was", "recorded"])
        body = [key,
                sentence(own[5:] + rng.sample(common, 4) + [cw[0]]),
                sentence(rng.sample(common, 7))]
        gold_sentences[i] = key
        docs.append({"doc_id": f"d{i:03d}", "title": own[0].capitalize(), "text": " ".join(body)})
        claims.append({"id": f"c{i:02d}", "claim": claim, "label": labels[i % 3], "evidence": [{"doc_id": f"d{i:03d}"}]})

    for j in range(N_CLAIMS, N_DOCS):
        t = rng.sample(topic, 4)
        body = [sentence(t[:2] + rng.sample(common, 5)),
                sentence(t[2:] + rng.sample(common, 6)),
                sentence(rng.sample(common, 6))]
        docs.append({"doc_id": f"d{j:03d}", "title": t[0].capitalize(), "text": " ".join(body)})

    for i, c in enumerate(claims):
        texts = []
        for r in range(REPEATS):
            parts = [sentence(rng.sample(foreign, 6)), sentence(rng.sample(foreign, 7))]
            if r % 4 == 0:
                parts.insert(0, c["claim"])  # a reproduction the filter must drop
            if i in planted:
                parts.insert(1 + (r % 2), gold_sentences[i])
            texts.append(" ".join(parts))
        canned.append({"claim": c["claim"], "texts": texts})

    order = list(range(N_DOCS))
    rng.shuffle(order)
    write_jsonl(out / "claims.jsonl", claims)
    write_jsonl(out / "corpus.jsonl", [docs[k] for k in order])
    write_jsonl(out / "generations.jsonl", canned)
    (out / "planted.json").write_text(json.dumps({"planted": [claims[i]["id"] for i in planted]}, indent=2) + "\n")
    config = {
        "dataset": "fever",
        "method": "query2doc",
        "model_id": "mock-generator",
        "judge_model_id": "mock-judge",
        "repeats": REPEATS,
        "k": 5,
        "n": 5,
        "seed": 7,
        "claims_path": "claims.jsonl",
        "corpus_path": "corpus.jsonl",
        "significance_unit": "claim",
        "max_in_flight": 4,
        "mock": {"enabled": True, "canned_path": "generations.jsonl"},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")


if __name__ == "__main__":
    main()
