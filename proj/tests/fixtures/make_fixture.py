#!/usr/bin/env python3
"""Regenerates the bundled fixture corpus (scores.jsonl, metadata.jsonl).

The output is deterministic. Run from any directory:
    python3 tests/fixtures/make_fixture.py
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
RNG = random.Random(20240508)

WORDS = """
analysis approach association baseline behaviour biomarker cell change
clinical cohort comparison condition context control cross data design
development difference disease distribution dynamics effect environment
estimate evidence exposure factor field framework function gene growth
health impact increase individual information intervention level marker
measure mechanism method model network observation outcome participant
pattern performance period policy population practice pressure process
programme protein quality rate region relationship response result risk
role sample scale sector signal site species structure study support
surface system technique temperature theory treatment trend trial value
variation water across among between during within under using over
significant novel robust large small early late higher lower specific
regional national local urban rural chronic acute primary secondary
""".split()

UNITS = [("4", "A"), ("7", "B"), ("11", "B")]
JOURNALS = ["The Lancet", "Journal of Applied Ecology", "Physical Review B",
            "Social Science Review", "Nature Communications"]
HEADINGS = ["Background", "Methods", "Results", "Conclusions"]
LICENSE = ("This is an open access article under the CC BY license "
           "(http://creativecommons.org/licenses/by/4.0/).")

# Per-group probability of the planted phrases: low (scores 1-2), 3, 4.
SHOW_P = {1: 0.06, 2: 0.06, 3: 0.20, 4: 0.50}
FUNDED_P = {1: 0.30, 2: 0.30, 3: 0.08, 4: 0.05}


def sentence(n_min=9, n_max=15):
    words = [RNG.choice(WORDS) for _ in range(RNG.randint(n_min, n_max))]
    return " ".join(words).capitalize() + "."


def abstract_body(score):
    sents = [sentence() for _ in range(RNG.randint(5, 7))]
    if RNG.random() < SHOW_P[score]:
        sents.insert(1, "Here we show that " + sentence(5, 9).lower())
    if RNG.random() < FUNDED_P[score]:
        sents.append("This work was funded by the " + RNG.choice(WORDS) + " council.")
    return sents


def decorate(sents, style):
    if style == "structured":
        labelled = []
        for i, s in enumerate(sents):
            if i in (0, 2, 4):
                labelled.append(HEADINGS[i // 2] + ": " + s)
            elif i == len(sents) - 1:
                labelled.append(HEADINGS[-1] + ": " + s)
            else:
                labelled.append(s)
        text = " ".join(labelled)
    else:
        text = " ".join(sents)
    if style == "elsevier":
        text = "Abstract: " + text + " © 2019 Elsevier Ltd. All rights reserved."
    elif style == "open":
        text = text + " " + LICENSE
    return text


def main():
    scores, metadata = [], []
    serial = 0

    def add_article(unit, panel, score, submitters, *, doi=True, title=None,
                    journal=None, body=None, style=None, score_doi=None):
        nonlocal serial
        serial += 1
        mid = f"M{serial:05d}"
        doi_value = f"10.4242/fx.{serial:05d}" if doi else None
        title = title or sentence(4, 8)[:-1]
        journal = journal or RNG.choice(JOURNALS)
        text = body if body is not None else decorate(
            abstract_body(max(score, 1)),
            style or RNG.choice(["plain", "plain", "structured", "elsevier", "open"]))
        metadata.append({"id": mid, "doi": doi_value, "title": title, "journal": journal,
                         "abstract": text,
                         "keywords": [RNG.choice(WORDS), RNG.choice(WORDS) + " " + RNG.choice(WORDS)]})
        for k, (sub, sc) in enumerate(submitters):
            rec = {"id": f"R{serial:05d}-{k}", "title": title, "journal": journal,
                   "unit": unit, "panel": panel, "score": sc, "submitter": sub}
            if doi_value is not None:
                shown = score_doi if score_doi else doi_value
                # Exercise DOI normalization: case and surrounding whitespace.
                if k % 2 == 1:
                    shown = " " + shown.upper() + " "
                rec["doi"] = shown
            scores.append(rec)

    for unit, panel in UNITS:
        for _ in range(190):
            score = RNG.choices([1, 2, 3, 4], weights=[1, 2, 4, 3])[0]
            add_article(unit, panel, score, [(f"HEI-{RNG.randint(1, 40):02d}", score)],
                        doi=RNG.random() > 0.1)
        # Multiply-submitted articles: median of the submitted scores.
        for combo in ([2, 3, 4], [3, 4], [4, 4], [1, 3], [3, 3, 4], [1, 2]):
            for _ in range(3):
                subs = [(f"HEI-{i + 41}", sc) for i, sc in enumerate(combo)]
                add_article(unit, panel, combo[0], subs, doi=RNG.random() > 0.3)
        # Out-of-scope and short documents.
        for _ in range(6):
            add_article(unit, panel, 0, [("HEI-90", 0)])
        for _ in range(4):
            add_article(unit, panel, 3, [("HEI-91", 3)], body=sentence() + " " + sentence())

    # A generic title matched only by title/journal: flagged suspicious.
    add_article("4", "A", 3, [("HEI-92", 3)], doi=False, title="Comment", journal="The Lancet")
    # Score records with no metadata at all.
    for i in range(3):
        scores.append({"id": f"ORPHAN-{i}", "doi": f"10.9999/missing.{i}", "title": "Lost",
                       "journal": "Nowhere", "unit": "7", "panel": "B", "score": 2,
                       "submitter": "HEI-93"})
    # Unclassified record.
    add_article("", "", 3, [("HEI-94", 3)])

    scores.sort(key=lambda r: r["id"])
    metadata.sort(key=lambda r: r["id"])
    with open(HERE / "scores.jsonl", "w", encoding="utf-8") as f:
        for r in scores:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")
    with open(HERE / "metadata.jsonl", "w", encoding="utf-8") as f:
        for r in metadata:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
