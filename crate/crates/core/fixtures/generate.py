#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpus fixtures.

Produces `hate_speech.csv` (490 rows), `misinformation.jsonl` (499 rows) and
`bot_scores.tsv` next to this script, plus
`language_sentences.txt` (200 stopword-only sentences). Output is deterministic.
"""

import csv
import json
import random
import re
from pathlib import Path

HERE = Path(__file__).resolve().parent
HATE_ROWS = 490
MISINFO_ROWS = 499

EN_OPENERS = ["the", "this", "i think the", "we know that the", "they said the"]
ES_OPENERS = ["el", "la", "yo creo que el", "ellos dicen que la", "es que el"]
EN_SUBJECTS = ["team", "weather", "new policy", "match", "city", "show", "report"]
ES_SUBJECTS = ["equipo", "tiempo", "partido", "ciudad", "programa", "informe"]
EN_POS = ["good", "great", "wonderful", "excellent", "nice"]
EN_NEG = ["bad", "terrible", "awful", "stupid", "disgusting"]
ES_POS = ["bueno", "excelente", "feliz"]
ES_NEG = ["malo", "triste", "peligroso", "falso"]
BOOSTERS_EN = ["very", "really", "extremely"]
BOOSTERS_ES = ["muy", "tan"]

EN_CLAIMS = [
    "drinking hot water cures the virus",
    "the vaccine changes your dna",
    "5g towers spread the disease",
    "masks reduce oxygen to dangerous levels",
    "garlic is a proven cure",
    "the outbreak was planned years ago",
]
ES_CLAIMS = [
    "el agua caliente cura el virus",
    "la vacuna cambia el adn",
    "las antenas 5g propagan la enfermedad",
    "el ajo es una cura probada",
]
TRUE_EN = [
    "washing hands with soap reduces the risk of infection",
    "the health ministry published new guidance today",
    "vaccines went through clinical trials before approval",
]
TRUE_ES = [
    "lavarse las manos con jabón reduce el riesgo de infección",
    "el ministerio de salud publicó nuevas recomendaciones",
]


def sentence(rng, lang, harmful=False):
    if lang == "es":
        opener, subject = rng.choice(ES_OPENERS), rng.choice(ES_SUBJECTS)
        words = ES_NEG if harmful or rng.random() < 0.4 else ES_POS
        booster = rng.choice(BOOSTERS_ES) + " " if rng.random() < 0.3 else ""
        neg = "no " if rng.random() < 0.15 else ""
        text = f"{opener} {subject} es {neg}{booster}{rng.choice(words)}"
    elif lang == "en":
        opener, subject = rng.choice(EN_OPENERS), rng.choice(EN_SUBJECTS)
        words = EN_NEG if harmful or rng.random() < 0.4 else EN_POS
        booster = rng.choice(BOOSTERS_EN) + " " if rng.random() < 0.3 else ""
        neg = "not " if rng.random() < 0.15 else ""
        adj = rng.choice(words)
        if rng.random() < 0.1:
            adj = adj.upper()
        text = f"{opener} {subject} is {neg}{booster}{adj}"
    else:
        # no stopwords from either list
        text = f"{rng.choice(['wow', 'lol', 'omg'])} #{rng.choice(EN_SUBJECTS).replace(' ', '')}"
        if rng.random() < 0.5:
            text += f" {rng.choice(EN_POS + EN_NEG)}"
    if rng.random() < 0.2:
        text += "!" * rng.randint(1, 4)
    return text


def pick_lang(rng):
    r = rng.random()
    return "en" if r < 0.6 else ("es" if r < 0.9 else "none")


def bot_fields(rng, authors):
    """Either a dataset bot score, or an author handle scored by the fixture."""
    handle = f"user_{rng.randint(1, 120):03d}"
    if rng.random() < 0.7:
        return round(rng.random(), 3), handle
    authors.add(handle)
    return None, handle


def hate_rows(rng, authors):
    rows = []
    for i in range(HATE_ROWS):
        r = rng.random()
        label = "racism" if r < 0.2 else ("sexism" if r < 0.42 else "none")
        lang = pick_lang(rng)
        text = sentence(rng, lang, harmful=label != "none")
        if label != "none":
            text = f"[synthetic {label} sample {i}] {text}"
        score, author = bot_fields(rng, authors)
        hint = "es" if lang == "es" and rng.random() < 0.2 else ""
        rows.append({
            "source_id": str(100000 + i),
            "text": text,
            "label": label,
            "verified": "true" if rng.random() < 0.15 else "false",
            "bot_score": "" if score is None else f"{score}",
            "language_hint": hint,
            "author": author,
        })
    return rows


def misinfo_rows(rng, authors):
    rows = []
    for i in range(MISINFO_ROWS):
        r = rng.random()
        label = "false" if r < 0.4 else ("partially_false" if r < 0.6 else "true")
        lang = "es" if rng.random() < 0.3 else "en"
        if label == "true":
            claim = rng.choice(TRUE_ES if lang == "es" else TRUE_EN)
        else:
            claim = rng.choice(ES_CLAIMS if lang == "es" else EN_CLAIMS)
        text = f"{claim}. {sentence(rng, lang)}"
        score, author = bot_fields(rng, authors)
        row = {"source_id": f"mi-{i:04d}", "text": text, "label": label, "author": author}
        if label != "true" or rng.random() < 0.3:
            row["fact_check_url"] = f"https://factcheck.example.org/claims/{i:04d}"
        if rng.random() < 0.2:
            row["verified"] = True
        if score is not None:
            row["bot_score"] = score
        if rng.random() < 0.1:
            row["language_hint"] = lang
        rows.append(row)
    return rows


def main():
    rng = random.Random(989)
    authors = set()
    hate = hate_rows(rng, authors)
    misinfo = misinfo_rows(rng, authors)

    with open(HERE / "hate_speech.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=list(hate[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(hate)
    with open(HERE / "misinformation.jsonl", "w", encoding="utf-8") as f:
        for row in misinfo:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    with open(HERE / "bot_scores.tsv", "w", encoding="utf-8") as f:
        f.write("# handle\tscore\n")
        for handle in sorted(authors):
            f.write(f"{handle}\t{round(rng.random(), 3)}\n")

    write_language_sentences(random.Random(200))


def stopwords(name):
    src = (HERE.parent / "src" / "annotate" / "language.rs").read_text(encoding="utf-8")
    body = re.search(name + r": &\[&str\] = &\[(.*?)\];", src, re.S).group(1)
    return re.findall(r'"([^"]+)"', body)


def write_language_sentences(rng):
    en, es = stopwords("ENGLISH_STOPWORDS"), stopwords("SPANISH_STOPWORDS")
    lines = []
    for i in range(200):
        n_en, n_es = rng.randint(0, 6), rng.randint(0, 6)
        if i % 10 == 0:
            n_es = n_en
        if n_en + n_es == 0:
            n_en = 1
        words = [rng.choice(en) for _ in range(n_en)] + [rng.choice(es) for _ in range(n_es)]
        rng.shuffle(words)
        if rng.random() < 0.3:
            words[0] = words[0].capitalize()
        lines.append(" ".join(words) + rng.choice(["", ".", "!", "?"]))
    with open(HERE / "language_sentences.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
