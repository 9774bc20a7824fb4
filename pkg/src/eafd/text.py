"""Token and key normalization shared by extraction, retrieval, and grounding."""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Reviewers use these verification verbs interchangeably; collapsing the family
# onto one stem keeps canonical keys stable across phrasing variants. The table
# is deliberately closed: unknown words pass through untouched.
_VERB_ALIASES = {
    "verify": "verify",
    "verifies": "verify",
    "verified": "verify",
    "verifying": "verify",
    "verification": "verify",
    "check": "verify",
    "checks": "verify",
    "checked": "verify",
    "checking": "verify",
    "validate": "verify",
    "validates": "verify",
    "validated": "verify",
    "validating": "verify",
    "validation": "verify",
    "confirm": "verify",
    "confirms": "verify",
    "confirmed": "verify",
    "confirming": "verify",
    "confirmation": "verify",
}


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs of ``text``, in order, with verb aliasing."""
    return [_VERB_ALIASES.get(tok, tok) for tok in _TOKEN_RE.findall(text.lower())]


def normalize_key(text: str) -> str:
    """Canonical form of a goal or factor key: tokens joined with underscores.

    Lowercases, collapses whitespace and punctuation separators, and maps the
    verification-verb family onto a single stem, so that e.g. a "Checked
    supplier legitimacy" goal and a "verify_supplier_legitimacy" key normalize
    to the same string.
    """
    return "_".join(tokenize(text))


def key_tokens(key: str) -> set[str]:
    """Token set of a canonical key, for lexical overlap tests."""
    return set(tokenize(key))
