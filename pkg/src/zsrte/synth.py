"""Templated toy corpus generator for desk-scale end-to-end runs.

Sentences are filled-in templates with known entity slots, so gold spans come
for free. The held-out relation set paraphrases training relations with
shared content words, giving a semantics-driven selector something to
transfer at toy scale.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Instance, RelationLabel, Triplet
from .errors import ConfigError


class GenerationError(RuntimeError):
    """Entity vocabulary exhausted while sampling without replacement."""


@dataclass(frozen=True)
class Template:
    relation: str
    pattern: str          # contains exactly one {head} and one {tail} word
    heads: tuple[str, ...]
    tails: tuple[str, ...]

    def __post_init__(self):
        tokens = self.pattern.split()
        if tokens.count("{head}") != 1 or tokens.count("{tail}") != 1:
            raise ConfigError(
                f"template for {self.relation!r} must contain exactly one "
                "{head} and one {tail} slot"
            )


# small and reused across every relation so entity identity carries no
# relation signal; one multi-word name keeps multi-word spans exercised
_PEOPLE = ("Alice", "Bob", "Carol", "Maria Lopez")


_COUNTRIES = ("France", "Japan", "Brazil", "Canada", "Kenya", "Norway")
_COMPANIES = ("Acme", "Globex", "Initech", "Stark Industries")
_CITIES = ("Paris", "Oslo", "Lagos", "Boston", "Lima", "Cairo")
_PARTIES = ("Greens", "Liberals", "Labour", "Whigs")
_BOOKS = ("Dune", "Hamlet", "Beloved", "Ulysses")
_INSTRUMENTS = ("piano", "violin", "cello", "trumpet")


def default_templates() -> tuple[list[Template], list[Template]]:
    """(training templates, held-out paraphrase templates).

    Every relation's content words appear verbatim in its sentences, and each
    relation comes in two sentence shapes of different lengths. Candidates are
    then only separable by matching relation words against sentence words, a
    position-free signal that carries over to the held-out paraphrases (the
    same content words, reordered).
    """
    train = [
        Template("citizen of country", "{head} is a citizen of the country {tail} .",
                 _PEOPLE, _COUNTRIES),
        Template("citizen of country", "the country {tail} lists {head} as a citizen .",
                 _PEOPLE, _COUNTRIES),
        Template("worker of company", "{head} is a worker of the company {tail} .",
                 _PEOPLE, _COMPANIES),
        Template("worker of company", "the company {tail} hired {head} as a worker .",
                 _PEOPLE, _COMPANIES),
        Template("native of city", "{head} is a native of the city {tail} .",
                 _PEOPLE, _CITIES),
        Template("native of city", "the city {tail} claims {head} as a native .",
                 _PEOPLE, _CITIES),
        Template("member of party", "{head} is a member of the party {tail} .",
                 _PEOPLE, _PARTIES),
        Template("member of party", "the party {tail} counts {head} as a member .",
                 _PEOPLE, _PARTIES),
        Template("author of book", "{head} is the author of the book {tail} .",
                 _PEOPLE, _BOOKS),
        Template("author of book", "the book {tail} names {head} as the author .",
                 _PEOPLE, _BOOKS),
        Template("player of instrument", "{head} is a player of the instrument {tail} .",
                 _PEOPLE, _INSTRUMENTS),
        Template("player of instrument", "the instrument {tail} suits {head} as a player .",
                 _PEOPLE, _INSTRUMENTS),
    ]
    zeroshot = [
        Template("country of citizen", "{head} is a citizen of the country {tail} .",
                 _PEOPLE, _COUNTRIES),
        Template("country of citizen", "the country {tail} lists {head} as a citizen .",
                 _PEOPLE, _COUNTRIES),
        Template("book of author", "{head} is the author of the book {tail} .",
                 _PEOPLE, _BOOKS),
        Template("book of author", "the book {tail} names {head} as the author .",
                 _PEOPLE, _BOOKS),
        Template("city of native", "{head} is a native of the city {tail} .",
                 _PEOPLE, _CITIES),
        Template("city of native", "the city {tail} claims {head} as a native .",
                 _PEOPLE, _CITIES),
        Template("party of member", "{head} is a member of the party {tail} .",
                 _PEOPLE, _PARTIES),
        Template("party of member", "the party {tail} counts {head} as a member .",
                 _PEOPLE, _PARTIES),
    ]
    return train, zeroshot


def _pick(rng: random.Random, vocab: Sequence[str], used: set[str], what: str) -> str:
    available = [v for v in vocab if v not in used]
    if not available:
        raise GenerationError(f"{what} vocabulary exhausted while sampling without replacement")
    choice = rng.choice(available)
    used.add(choice)
    return choice


def _fill(template: Template, rng: random.Random, used: set[str]):
    head = _pick(rng, template.heads, used, "head")
    tail = _pick(rng, template.tails, used, "tail")
    words: list[str] = []
    head_span = tail_span = None
    for token in template.pattern.split():
        if token == "{head}":
            parts = head.split()
            head_span = (len(words), len(words) + len(parts) - 1)
            words.extend(parts)
        elif token == "{tail}":
            parts = tail.split()
            tail_span = (len(words), len(words) + len(parts) - 1)
            words.extend(parts)
        else:
            words.append(token)
    return words, head_span, tail_span


def generate(
    templates: Sequence[Template],
    count: int,
    rng: random.Random,
    multi_fraction: float = 0.3,
) -> tuple[list[Instance], list[RelationLabel]]:
    """Generate `count` instances; a `multi_fraction` share composes two
    templates with distinct relations into one two-triplet sentence."""
    if count < 1:
        raise ConfigError("count must be at least 1")
    if len(templates) < 2:
        raise ConfigError("need at least 2 templates")
    labels = [RelationLabel(i, text) for i, text in enumerate(sorted({t.relation for t in templates}))]
    by_text = {lab.text: lab for lab in labels}

    instances = []
    for n in range(count):
        used: set[str] = set()
        make_multi = rng.random() < multi_fraction
        if make_multi:
            first, second = rng.sample(list(templates), 2)
            words, head1, tail1 = _fill(first, rng, used)
            offset = len(words)
            more, head2, tail2 = _fill(second, rng, used)
            words = words + more
            triplets = (
                Triplet(head1, tail1, by_text[first.relation]),
                Triplet(
                    (head2[0] + offset, head2[1] + offset),
                    (tail2[0] + offset, tail2[1] + offset),
                    by_text[second.relation],
                ),
            )
        else:
            template = rng.choice(list(templates))
            words, head, tail = _fill(template, rng, used)
            triplets = (Triplet(head, tail, by_text[template.relation]),)
        instances.append(Instance(id=f"synth-{n}", words=tuple(words), triplets=triplets))
    return instances, labels


def write_corpus(instances: Sequence[Instance], path: str | Path) -> None:
    """Emit the same JSONL schema the corpus loader ingests."""
    with Path(path).open("w", encoding="utf-8") as f:
        for inst in instances:
            record = {
                "id": inst.id,
                "tokens": list(inst.words),
                "triplets": [
                    {
                        "head": list(range(t.head[0], t.head[1] + 1)),
                        "tail": list(range(t.tail[0], t.tail[1] + 1)),
                        "label": t.relation.text,
                    }
                    for t in inst.triplets
                ],
            }
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
