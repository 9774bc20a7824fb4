"""Canonical action templates: goals, information requests, and entity slots.

A template describes one recurring verification operation. Goals and request
texts may contain named ``{slot}`` placeholders that are filled from a case
record's ``entities`` map — this is how a precedent action like "contact
supplier X" becomes "contact supplier Y" for a new case without free
generation. The default registry covers the standard marketplace-review
vocabulary used by the bundled corpus generator; other corpora can load their
own registry from JSON (format ``templates-v1``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class ActionTemplate:
    canonical_key: str
    goal: str
    request: str
    slots: tuple[str, ...] = ()

    def fill(self, template: str, entities: dict) -> str:
        out = template
        for slot in self.slots:
            if slot in entities:
                out = out.replace("{" + slot + "}", str(entities[slot]))
        return out

    def slot_values(self, entities: dict) -> list[str]:
        return [str(entities[s]) for s in self.slots if s in entities]


class TemplateRegistry:
    def __init__(self, templates: list[ActionTemplate] = ()):
        self._templates = {t.canonical_key: t for t in templates}

    def get(self, canonical_key: str) -> ActionTemplate | None:
        return self._templates.get(canonical_key)

    def add(self, template: ActionTemplate) -> None:
        self._templates[template.canonical_key] = template

    def keys(self) -> list[str]:
        return sorted(self._templates)

    def to_json(self) -> str:
        payload = {
            "format": "templates-v1",
            "templates": [
                {"canonical_key": t.canonical_key, "goal": t.goal,
                 "request": t.request, "slots": list(t.slots)}
                for _, t in sorted(self._templates.items())
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TemplateRegistry":
        payload = json.loads(text)
        return cls([ActionTemplate(t["canonical_key"], t["goal"], t["request"],
                                   tuple(t.get("slots", ())))
                    for t in payload["templates"]])

    @classmethod
    def load(cls, path) -> "TemplateRegistry":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())


DEFAULT_TEMPLATES = TemplateRegistry([
    ActionTemplate(
        "review_complaint",
        "review the customer complaint and violation details",
        "Please provide the original complaint context and order details"),
    ActionTemplate(
        "recheck_complaint_evidence",
        "recheck complaint evidence and the violation basis",
        "Please provide the disputed order details for re-examination"),
    ActionTemplate(
        "review_inventory_records",
        "review inventory records and stock rotation logs",
        "Please provide inventory records and stock rotation logs"),
    ActionTemplate(
        "verify_warehouse_storage",
        "verify warehouse storage conditions via inspection report",
        "Please provide a third-party warehouse inspection report"),
    ActionTemplate(
        "contact_supplier",
        "contact supplier {supplier} for direct verification",
        "Please provide the supplier registration certificate for {supplier}",
        ("supplier",)),
    ActionTemplate(
        "verify_supplier_legitimacy",
        "verify supplier {supplier} legitimacy in the official registry",
        "Please provide the supplier registration certificate for {supplier}",
        ("supplier",)),
    ActionTemplate(
        "verify_invoice_authenticity",
        "verify invoice authenticity against purchase orders from {supplier}",
        "Please provide original purchase invoices from {supplier}",
        ("supplier",)),
    ActionTemplate(
        "verify_brand_authorization",
        "verify brand authorization for {brand}",
        "Please provide the brand authorization letter for {brand}",
        ("brand",)),
    ActionTemplate(
        "cross_reference_transactions",
        "cross reference transactions for order and payment consistency",
        "Please provide transaction records for the disputed period"),
    ActionTemplate(
        "defect_rate_analysis",
        "run a defect rate analysis across recent transactions",
        "Please provide sales volume and defect statistics"),
    ActionTemplate(
        "product_sample_inspection",
        "run a product sample inspection for authenticity markers",
        "Please provide product sample photographs"),
    ActionTemplate(
        "verify_listing_compliance",
        "verify listing compliance against policy requirements",
        "Please provide the listing history and compliance documentation"),
    ActionTemplate(
        "verify_violation_pattern",
        "verify the violation pattern across the order history",
        "Please provide order records for the review period"),
    ActionTemplate(
        "audit_order_history",
        "audit order history for repeated policy breaches",
        "Please provide the full order history for audit"),
    ActionTemplate(
        "review_prior_violations",
        "review prior violations recorded for the account",
        "Please provide context for previously recorded violations"),
    ActionTemplate(
        "returned_item_examination",
        "run a returned item examination against the complaint",
        "Please provide the returned item or photographs of it"),
])
