"""Black-box fairness and robustness perturbers.

Fairness perturbations swap person names across demographic groups and
swap gendered noun phrases pairwise; robustness perturbations inject
typographical noise (keyboard neighbors, OCR confusions, typos, case
flips, misspellings, contractions, terminal punctuation).  Both leave the
gold fields untouched: the stability metric is the percentage of
predictions that survive the edit.

Everything is deterministic given (input, config, seed); each call builds
its own random generator, so concurrent use is safe.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from typing import Callable

from .errors import EmptyDataset, UidMismatch, ValidationError
from .metrics import GoldExample, Prediction

FAIRNESS_KINDS = ("fairness_race", "fairness_gender")
ROBUSTNESS_TRANSFORMS = (
    "contraction",
    "keyboard",
    "ocr",
    "punctuation",
    "spelling_error",
    "typos",
    "word_case",
)

# Edits touch at most this fraction of a text's words (always at least one),
# keeping perturbations local.
EDIT_BUDGET = 0.15
MIN_WORD_LEN = 4

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+|[^A-Za-z0-9']+")
_WORD_RE = re.compile(r"[A-Za-z0-9']")


@dataclass(frozen=True)
class FairnessLexicon:
    """Name lists per demographic group, gendered name lists, and
    woman/man term pairs."""

    name_groups: dict[str, tuple[str, ...]]
    gendered_names: dict[str, tuple[str, ...]]
    paired_terms: tuple[tuple[str, str], ...]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for group, names in self.name_groups.items():
            if not names:
                raise ValidationError(f"name group {group!r} is empty", field="name_groups")
            for name in names:
                low = name.lower()
                if low in seen:
                    raise ValidationError(
                        f"name {name!r} appears in both {seen[low]!r} and {group!r}",
                        field="name_groups",
                    )
                seen[low] = group
        used: set[str] = set()
        for woman, man in self.paired_terms:
            for term in (woman.lower(), man.lower()):
                if term in used:
                    raise ValidationError(
                        f"term {term!r} appears in more than one pair", field="paired_terms"
                    )
                used.add(term)

    @classmethod
    def from_dict(cls, doc: dict) -> "FairnessLexicon":
        return cls(
            name_groups={g: tuple(names) for g, names in doc["name_groups"].items()},
            gendered_names={g: tuple(names) for g, names in doc["gendered_names"].items()},
            paired_terms=tuple((w, m) for w, m in doc["paired_terms"]),
        )

    @classmethod
    def load(cls, path: str) -> "FairnessLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def group_of(self, token: str) -> str | None:
        low = token.lower()
        for group, names in self.name_groups.items():
            if low in (n.lower() for n in names):
                return group
        return None

    def gender_of_name(self, token: str) -> str | None:
        low = token.lower()
        for gender, names in self.gendered_names.items():
            if low in (n.lower() for n in names):
                return gender
        return None

    def pair_swap(self, token: str) -> str | None:
        low = token.lower()
        for woman, man in self.paired_terms:
            if low == woman.lower():
                return man
            if low == man.lower():
                return woman
        return None


@dataclass(frozen=True)
class Edit:
    original: str
    replacement: str
    position: str

    def to_list(self) -> list:
        return [self.original, self.replacement, self.position]


@dataclass(frozen=True)
class PerturbedExample:
    """A perturbed copy of an example.  The gold fields are byte-identical
    to the source; only input fields change."""

    uid: str
    input: dict
    gold: str | tuple[str, ...]
    applied_edits: tuple[Edit, ...]
    kind: str

    def to_dict(self) -> dict:
        gold = list(self.gold) if isinstance(self.gold, tuple) else self.gold
        return {
            "uid": self.uid,
            "input": dict(self.input),
            "gold": gold,
            "applied_edits": [e.to_list() for e in self.applied_edits],
            "kind": self.kind,
        }

    def as_gold_example(self) -> GoldExample:
        return GoldExample(uid=self.uid, input=self.input, gold=self.gold)


@dataclass
class SkipReport:
    not_applicable: int = 0
    ner_skipped: int = 0

    @property
    def total(self) -> int:
        return self.not_applicable + self.ner_skipped

    def to_dict(self) -> dict:
        return {"not_applicable": self.not_applicable, "ner_skipped": self.ner_skipped}


NerHook = Callable[[list[str]], set[int]]


def default_ner_hook(tokens: list[str]) -> set[int]:
    """Heuristic stand-in for a named-entity recognizer.

    Flags word tokens that sit inside a capitalized multi-token run that is
    not simply sentence-initial (e.g. both words of "Red Robin"), so a name
    that is part of a larger proper noun is left alone.
    """
    def is_cap_word(tok: str) -> bool:
        return bool(tok) and tok[0].isupper() and bool(_WORD_RE.match(tok[0]))

    def starts_sentence(idx: int) -> bool:
        for prev in range(idx - 1, -1, -1):
            chunk = tokens[prev]
            if _WORD_RE.match(chunk[0]):
                return False
            if any(ch in ".!?" for ch in chunk):
                return True
        return True  # very first word of the text

    word_idx = [i for i, tok in enumerate(tokens) if _WORD_RE.match(tok[0])]
    protected: set[int] = set()
    run: list[int] = []
    for pos, i in enumerate(word_idx):
        # adjacency means only non-word chunks without sentence breaks between
        adjacent = bool(run) and not starts_sentence(i)
        if is_cap_word(tokens[i]) and adjacent and is_cap_word(tokens[run[-1]]):
            run.append(i)
        elif is_cap_word(tokens[i]):
            if len(run) >= 2:
                protected.update(run)
            run = [i]
        else:
            if len(run) >= 2:
                protected.update(run)
            run = []
    if len(run) >= 2:
        protected.update(run)
    return protected


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def _match_case(original: str, replacement: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement[:1].lower() + replacement[1:]


def _string_fields(example: GoldExample) -> list[tuple[str, str]]:
    return [(k, v) for k, v in example.input.items() if isinstance(v, str)]


def perturb_fairness(
    example: GoldExample,
    lexicon: FairnessLexicon,
    kind: str,
    seed: int,
    ner_hook: NerHook = default_ner_hook,
    ner_scope: str = "span",
) -> PerturbedExample | None:
    """Swap demographic signal in the example's input text.

    ``kind='race'`` replaces every name found in a demographic group with a
    seeded-random name drawn from the other groups.  ``kind='gender'``
    swaps names to a statistically-other-gender name and swaps paired
    gendered terms (her -> his, sister -> brother).  Matching is
    whole-word; the replacement keeps the original's leading case.  Name
    matches inside spans the NER hook flags are skipped — span by span by
    default, or the whole example with ``ner_scope='example'``.

    Returns None when nothing in the example can be perturbed.
    """
    if kind not in ("race", "gender"):
        raise ValidationError(f"unknown fairness kind {kind!r}")
    rng = random.Random(f"{seed}:{example.uid}:{kind}")
    edits: list[Edit] = []
    new_input = dict(example.input)

    for field_name, text in _string_fields(example):
        tokens = _tokenize(text)
        protected = ner_hook(tokens)
        changed = False
        for i, tok in enumerate(tokens):
            if not _WORD_RE.match(tok[0]):
                continue
            replacement: str | None = None
            if kind == "race":
                group = lexicon.group_of(tok)
                if group is not None:
                    if i in protected:
                        if ner_scope == "example":
                            return None
                        continue
                    pool = [
                        name
                        for g, names in sorted(lexicon.name_groups.items())
                        if g != group
                        for name in names
                    ]
                    replacement = rng.choice(pool)
            else:
                gender = lexicon.gender_of_name(tok)
                if gender is not None:
                    if i in protected:
                        if ner_scope == "example":
                            return None
                        continue
                    other = "man" if gender == "woman" else "woman"
                    replacement = rng.choice(list(lexicon.gendered_names[other]))
                else:
                    swapped = lexicon.pair_swap(tok)
                    if swapped is not None:
                        replacement = swapped
            if replacement is not None:
                cased = _match_case(tok, replacement)
                edits.append(Edit(tok, cased, f"{field_name}[{i}]"))
                tokens[i] = cased
                changed = True
        if changed:
            new_input[field_name] = "".join(tokens)

    if not edits:
        return None
    return PerturbedExample(
        uid=example.uid,
        input=new_input,
        gold=example.gold,
        applied_edits=tuple(edits),
        kind=f"fairness_{kind}",
    )


# --- robustness transforms ----------------------------------------------------

_QWERTY_ROWS = ["qwertyuiop", "asdfghjkl", "zxcvbnm"]


def _qwerty_neighbors() -> dict[str, str]:
    out: dict[str, str] = {}
    for r, row in enumerate(_QWERTY_ROWS):
        for c, ch in enumerate(row):
            neigh = []
            if c > 0:
                neigh.append(row[c - 1])
            if c < len(row) - 1:
                neigh.append(row[c + 1])
            if r > 0 and c < len(_QWERTY_ROWS[r - 1]):
                neigh.append(_QWERTY_ROWS[r - 1][c])
            if r < len(_QWERTY_ROWS) - 1 and c < len(_QWERTY_ROWS[r + 1]):
                neigh.append(_QWERTY_ROWS[r + 1][c])
            out[ch] = "".join(neigh)
    return out


_KEYBOARD_NEIGHBORS = _qwerty_neighbors()

_OCR_CONFUSIONS = {
    "O": "0", "0": "O",
    "l": "1", "1": "l",
    "S": "5", "5": "S",
    "B": "8", "8": "B",
    "m": "rn",
}

_CONTRACTIONS = {
    "do not": "don't", "does not": "doesn't", "did not": "didn't",
    "is not": "isn't", "are not": "aren't", "was not": "wasn't",
    "were not": "weren't", "cannot": "can't", "could not": "couldn't",
    "will not": "won't", "would not": "wouldn't", "should not": "shouldn't",
    "have not": "haven't", "has not": "hasn't", "had not": "hadn't",
    "it is": "it's", "that is": "that's", "there is": "there's",
    "i am": "I'm", "you are": "you're", "they are": "they're", "we are": "we're",
}
_EXPANSIONS = {v.lower(): k for k, v in _CONTRACTIONS.items()}

_MISSPELLINGS = {
    "receive": "recieve", "believe": "beleive", "definitely": "definately",
    "separate": "seperate", "government": "goverment", "weird": "wierd",
    "because": "becuase", "restaurant": "restaraunt", "until": "untill",
    "which": "wich", "beautiful": "beatiful", "tomorrow": "tommorow",
    "friend": "freind", "really": "realy", "always": "allways",
    "business": "buisness", "probably": "probly", "different": "diffrent",
}


def _word_indices(tokens: list[str], eligible: Callable[[str], bool]) -> list[int]:
    return [i for i, t in enumerate(tokens) if _WORD_RE.match(t[0]) and eligible(t)]


def _budget(tokens: list[str], candidates: list[int], rng: random.Random) -> list[int]:
    word_count = sum(1 for t in tokens if _WORD_RE.match(t[0]))
    limit = max(1, int(EDIT_BUDGET * word_count))
    if len(candidates) <= limit:
        return sorted(candidates)
    return sorted(rng.sample(candidates, limit))


def _transform_text(transform_id: str, text: str, rng: random.Random) -> tuple[str, list[tuple[str, str, int]]] | None:
    """Apply one transform, returning (new_text, [(orig, repl, token_idx)])
    or None when nothing is eligible."""
    tokens = _tokenize(text)
    edits: list[tuple[str, str, int]] = []

    if transform_id == "contraction":
        lowered = text.lower()
        table = None
        for phrase in sorted(_CONTRACTIONS, key=len, reverse=True):
            if re.search(rf"\b{re.escape(phrase)}\b", lowered):
                table = ("contract", phrase, _CONTRACTIONS[phrase])
                break
        if table is None:
            for phrase in sorted(_EXPANSIONS, key=len, reverse=True):
                if re.search(rf"\b{re.escape(phrase)}\b", lowered):
                    table = ("expand", phrase, _EXPANSIONS[phrase])
                    break
        if table is None:
            return None
        _, phrase, replacement = table
        pattern = re.compile(rf"\b{re.escape(phrase)}\b", re.IGNORECASE)
        match = pattern.search(text)
        assert match is not None
        cased = _match_case(match.group(0), replacement)
        new_text = text[: match.start()] + cased + text[match.end():]
        return new_text, [(match.group(0), cased, 0)]

    if transform_id == "punctuation":
        stripped = text.rstrip()
        if stripped and stripped[-1] in ".!?":
            return stripped[:-1] + text[len(stripped):], [(stripped[-1], "", len(tokens) - 1)]
        if not stripped:
            return None
        return stripped + "." + text[len(stripped):], [("", ".", len(tokens) - 1)]

    if transform_id == "keyboard":
        def ok(tok: str) -> bool:
            return len(tok) >= MIN_WORD_LEN and any(ch.lower() in _KEYBOARD_NEIGHBORS for ch in tok)
        chosen = _budget(tokens, _word_indices(tokens, ok), rng)
        for i in chosen:
            tok = tokens[i]
            spots = [j for j, ch in enumerate(tok) if ch.lower() in _KEYBOARD_NEIGHBORS]
            j = rng.choice(spots)
            repl_ch = rng.choice(_KEYBOARD_NEIGHBORS[tok[j].lower()])
            if tok[j].isupper():
                repl_ch = repl_ch.upper()
            new_tok = tok[:j] + repl_ch + tok[j + 1:]
            edits.append((tok, new_tok, i))
            tokens[i] = new_tok

    elif transform_id == "ocr":
        def ok(tok: str) -> bool:
            return any(ch in _OCR_CONFUSIONS for ch in tok)
        chosen = _budget(tokens, _word_indices(tokens, ok), rng)
        for i in chosen:
            tok = tokens[i]
            spots = [j for j, ch in enumerate(tok) if ch in _OCR_CONFUSIONS]
            j = rng.choice(spots)
            new_tok = tok[:j] + _OCR_CONFUSIONS[tok[j]] + tok[j + 1:]
            edits.append((tok, new_tok, i))
            tokens[i] = new_tok

    elif transform_id == "spelling_error":
        def ok(tok: str) -> bool:
            return tok.lower() in _MISSPELLINGS
        chosen = _budget(tokens, _word_indices(tokens, ok), rng)
        for i in chosen:
            tok = tokens[i]
            new_tok = _match_case(tok, _MISSPELLINGS[tok.lower()])
            edits.append((tok, new_tok, i))
            tokens[i] = new_tok

    elif transform_id == "typos":
        def ok(tok: str) -> bool:
            return len(tok) >= MIN_WORD_LEN
        chosen = _budget(tokens, _word_indices(tokens, ok), rng)
        for i in chosen:
            tok = tokens[i]
            mode = rng.choice(("swap", "delete", "duplicate"))
            if mode == "swap":
                j = rng.randrange(len(tok) - 1)
                new_tok = tok[:j] + tok[j + 1] + tok[j] + tok[j + 2:]
            elif mode == "delete":
                j = rng.randrange(len(tok))
                new_tok = tok[:j] + tok[j + 1:]
            else:
                j = rng.randrange(len(tok))
                new_tok = tok[:j] + tok[j] + tok[j:]
            if new_tok == tok:  # swapping equal letters is a no-op
                j = rng.randrange(len(tok))
                new_tok = tok[:j] + tok[j] + tok[j:]
            edits.append((tok, new_tok, i))
            tokens[i] = new_tok

    elif transform_id == "word_case":
        def ok(tok: str) -> bool:
            return any(ch.isalpha() for ch in tok)
        chosen = _budget(tokens, _word_indices(tokens, ok), rng)
        for i in chosen:
            tok = tokens[i]
            new_tok = tok.swapcase()
            edits.append((tok, new_tok, i))
            tokens[i] = new_tok

    else:
        raise ValidationError(f"unknown robustness transform {transform_id!r}")

    if not edits:
        return None
    return "".join(tokens), edits


def perturb_robustness(
    example: GoldExample,
    transform_id: str,
    seed: int,
) -> PerturbedExample | None:
    """Apply exactly one typographical transform to the example's input
    text.  Returns None when no field has an eligible token."""
    if transform_id not in ROBUSTNESS_TRANSFORMS:
        raise ValidationError(f"unknown robustness transform {transform_id!r}")
    rng = random.Random(f"{seed}:{example.uid}:{transform_id}")
    edits: list[Edit] = []
    new_input = dict(example.input)
    for field_name, text in _string_fields(example):
        result = _transform_text(transform_id, text, rng)
        if result is None:
            continue
        new_text, field_edits = result
        new_input[field_name] = new_text
        edits.extend(
            Edit(orig, repl, f"{field_name}[{idx}]") for orig, repl, idx in field_edits
        )
    if not edits:
        return None
    return PerturbedExample(
        uid=example.uid,
        input=new_input,
        gold=example.gold,
        applied_edits=tuple(edits),
        kind=f"robustness:{transform_id}",
    )


def perturb_dataset(
    dataset: list[GoldExample],
    kinds: list[str],
    seed: int,
    lexicon: FairnessLexicon | None = None,
    ner_hook: NerHook = default_ner_hook,
    ner_scope: str = "span",
) -> tuple[list[PerturbedExample], SkipReport]:
    """Perturb every example with the first applicable kind, trying the
    given kinds in a per-example seeded-random order.

    ``kinds`` entries are ``fairness_race``, ``fairness_gender``, or
    ``robustness:<transform>``.  The output keeps dataset order and
    contains only the examples that were actually perturbed; the skip
    report accounts for the rest.
    """
    if not dataset:
        raise EmptyDataset("cannot perturb an empty dataset")
    for kind in kinds:
        if kind not in FAIRNESS_KINDS and not (
            kind.startswith("robustness:") and kind.split(":", 1)[1] in ROBUSTNESS_TRANSFORMS
        ):
            raise ValidationError(f"unknown perturbation kind {kind!r}")
        if kind in FAIRNESS_KINDS and lexicon is None:
            raise ValidationError(f"kind {kind!r} needs a fairness lexicon")

    out: list[PerturbedExample] = []
    report = SkipReport()
    for example in dataset:
        order = list(kinds)
        random.Random(f"{seed}:{example.uid}:order").shuffle(order)
        perturbed: PerturbedExample | None = None
        ner_blocked = False
        for kind in order:
            if kind in FAIRNESS_KINDS:
                assert lexicon is not None
                sub = kind.split("_", 1)[1]
                perturbed = perturb_fairness(
                    example, lexicon, sub, seed, ner_hook=ner_hook, ner_scope=ner_scope
                )
                if perturbed is None:
                    # classify the skip: would it have worked without NER?
                    unguarded = perturb_fairness(
                        example, lexicon, sub, seed, ner_hook=lambda toks: set()
                    )
                    if unguarded is not None:
                        ner_blocked = True
            else:
                perturbed = perturb_robustness(example, kind.split(":", 1)[1], seed)
            if perturbed is not None:
                break
        if perturbed is not None:
            out.append(perturbed)
        elif ner_blocked:
            report.ner_skipped += 1
        else:
            report.not_applicable += 1
    return out, report


def unchanged_fraction(
    original_preds: list[Prediction],
    perturbed_preds: list[Prediction],
) -> float:
    """Percentage of predictions identical before and after perturbation,
    in [0, 100].  Only perturbed examples are compared, so the two uid
    sets must match exactly."""
    if not original_preds and not perturbed_preds:
        raise EmptyDataset("no predictions to compare")
    orig = {p.uid: p.payload for p in original_preds}
    pert = {p.uid: p.payload for p in perturbed_preds}
    if set(orig) != set(pert):
        offender = sorted(set(orig).symmetric_difference(set(pert)))[0]
        raise UidMismatch(f"prediction uid sets differ, first offender: {offender!r}")
    unchanged = sum(1 for uid in orig if orig[uid] == pert[uid])
    return 100.0 * unchanged / len(orig)
