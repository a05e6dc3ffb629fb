"""Template explanations assembled from scoring intermediates.

Every explanation is the fixed template with seven parameters substituted,
no free-form generation:

    a  investor id          b  company id
    c  closest investor CI  d  collaborative score CB (2 decimals)
    e  closest company CC   f  content score CBS (2 decimals)
    g  first sentence of CC's description (CCB)

The full variant covers all three prongs (investor-investor similarity,
company-company similarity, company description). When the collaborative
side has nothing to say (gate closed, or the company has no previous
investors) the content_only variant drops the first prong rather than
rendering empty slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .score import ScoreBreakdown, Scorer

FULL_TEMPLATE = (
    'The investor "{a}" is similar to "{b}"\'s previous investor "{c}" '
    'with score of "{d}" based on their industry focus preferences. '
    'Also, the investor "{a}" has invested in a company named "{e}" '
    'with a match score of "{f}" with "{b}". '
    '"{e}" also "{g}" similar to "{b}".'
)

CONTENT_TEMPLATE = (
    'The investor "{a}" has invested in a company named "{e}" '
    'with a match score of "{f}" with "{b}". '
    '"{e}" also "{g}" similar to "{b}".'
)

VARIANTS = ("full", "content_only")

PARAMS_HEADER = "investor_id\tcompany_id\tvariant\ta\tb\tc\td\te\tf\tg"


class ExplainError(Exception):
    """Raised when a pair has nothing explainable or a slot is unrenderable."""


@dataclass(frozen=True)
class ExplanationParams:
    a: str
    b: str
    c: str
    d: str
    e: str
    f: str
    g: str


@dataclass(frozen=True)
class Explanation:
    text: str
    params: ExplanationParams
    variant: str


def extract_params(breakdown: ScoreBreakdown) -> ExplanationParams:
    """Template parameters straight off the breakdown; nothing recomputed."""
    if not breakdown.cc and not breakdown.ci:
        raise ExplainError(
            f"pair ({breakdown.investor_id}, {breakdown.company_id}) has neither "
            "a closest company nor a closest investor; nothing to explain"
        )
    return ExplanationParams(
        a=breakdown.investor_id,
        b=breakdown.company_id,
        c=breakdown.ci,
        d=format(breakdown.cb, ".2f"),
        e=breakdown.cc,
        f=format(breakdown.cbs, ".2f"),
        g=breakdown.ccb,
    )


def choose_variant(breakdown: ScoreBreakdown) -> str:
    """full when the collaborative prong is live, content_only otherwise."""
    if not breakdown.cc:
        raise ExplainError(
            f"pair ({breakdown.investor_id}, {breakdown.company_id}) has no "
            "closest company; the template cannot be filled"
        )
    if breakdown.gate_open and breakdown.ci:
        return "full"
    return "content_only"


def render(params: ExplanationParams, variant: str) -> Explanation:
    if variant == "full":
        for slot in ("c", "e"):
            if not getattr(params, slot):
                raise ExplainError(f"full variant requires param {slot} nonempty")
        text = FULL_TEMPLATE.format(**vars(params))
    elif variant == "content_only":
        if not params.e:
            raise ExplainError("content_only variant requires param e nonempty")
        text = CONTENT_TEMPLATE.format(
            a=params.a, b=params.b, e=params.e, f=params.f, g=params.g
        )
    else:
        raise ExplainError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return Explanation(text=text, params=params, variant=variant)


def explain_breakdown(breakdown: ScoreBreakdown) -> Explanation:
    return render(extract_params(breakdown), choose_variant(breakdown))


def explain_pair(scorer: Scorer, investor_id: str, company_id: str) -> Explanation:
    """Score the pair and explain it; the single entry point used by the CLI."""
    return explain_breakdown(scorer.score_pair(investor_id, company_id))


# ---------------------------------------------------------------------------
# Round-trip parsing. The templates are fixed, so a regex with backreferences
# for repeated slots inverts them exactly (for values not containing '"').

_FULL_RE = re.compile(
    r'^The investor "(?P<a>.*?)" is similar to "(?P<b>.*?)"\'s previous investor '
    r'"(?P<c>.*?)" with score of "(?P<d>.*?)" based on their industry focus '
    r'preferences\. Also, the investor "(?P=a)" has invested in a company named '
    r'"(?P<e>.*?)" with a match score of "(?P<f>.*?)" with "(?P=b)"\. '
    r'"(?P=e)" also "(?P<g>.*?)" similar to "(?P=b)"\.$',
    re.DOTALL,
)

_CONTENT_RE = re.compile(
    r'^The investor "(?P<a>.*?)" has invested in a company named "(?P<e>.*?)" '
    r'with a match score of "(?P<f>.*?)" with "(?P<b>.*?)"\. '
    r'"(?P=e)" also "(?P<g>.*?)" similar to "(?P=b)"\.$',
    re.DOTALL,
)


def parse_explanation(text: str) -> tuple[dict[str, str], str]:
    """Recover substituted slots from rendered text: (slots, variant)."""
    m = _FULL_RE.match(text)
    if m:
        return m.groupdict(), "full"
    m = _CONTENT_RE.match(text)
    if m:
        return m.groupdict(), "content_only"
    raise ExplainError("text does not match any explanation template")


# ---------------------------------------------------------------------------
# Params TSV (programmatic check output next to the prose)


def _tsv_safe(value: str) -> str:
    return value.replace("\t", " ").replace("\n", " ")


def write_params_tsv(path: str | Path, explanations: Iterable[Explanation]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(PARAMS_HEADER + "\n")
        for exp in explanations:
            p = exp.params
            fh.write(
                "\t".join(
                    _tsv_safe(v)
                    for v in (p.a, p.b, exp.variant, p.a, p.b, p.c, p.d, p.e, p.f, p.g)
                )
                + "\n"
            )
