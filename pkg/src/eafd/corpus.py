"""Seeded synthetic corpus generation with exact statistical targets.

The generator produces a chronologically ordered stream of historical case
records over a small library of violation categories. Class quotas and
per-class action-count multisets are constructed exactly (then shuffled), so
the corpus hits its configured overturn fraction and per-class mean action
counts by construction rather than in expectation.

Overturned cases carry one conflicting checker factor fed by the category's
primary verification action plus a sample of supporting ones; upheld
rejections carry direct re-verification actions on the maker factor. A small
share of the overturned cases mark their primary (critical) action's evidence
as withheld: served as queries they are unresolvable from the visible record,
which is exactly the situation the request-more-information verdict exists
for, so that becomes their evaluation label.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import InvalidSpec
from .graph import Verdict
from .records import CaseRecord, parse_case_record
from .templates import DEFAULT_TEMPLATES, TemplateRegistry

# Evidence text per action key. Grounding matches an action when one evidence
# item covers its canonical-key tokens (plus entity tokens), so every template
# here spells its key's tokens out; the coverage test locks this in.
SUPPORT_CONTENT = {
    "contact_supplier": ("Supplier registration certificate for {entity}; registry record "
                         "active; direct supplier contact confirmed trading status."),
    "verify_supplier_legitimacy": ("Official registry lookup verified supplier {entity} "
                                   "legitimacy; registration active and in good standing."),
    "verify_brand_authorization": ("Brand authorization letter from {entity} verified; "
                                   "authorization scope covers the listed products."),
    "verify_invoice_authenticity": ("Invoice authenticity verified against purchase orders "
                                    "from {entity}; seals and numbering intact."),
    "review_inventory_records": ("Inventory review records show stock rotation logs "
                                 "consistent across the affected period."),
    "verify_warehouse_storage": ("Third-party warehouse inspection report confirming "
                                 "storage conditions within specification."),
    "cross_reference_transactions": ("Cross reference of transactions shows a consistent "
                                     "order and payment history."),
    "defect_rate_analysis": ("Defect rate analysis across recent transactions shows an "
                             "isolated anomaly well below threshold."),
    "product_sample_inspection": ("Product sample inspection confirmed authenticity "
                                  "markers and holographic seals."),
    "verify_listing_compliance": ("Listing compliance verified against policy "
                                  "requirements; category approvals on file."),
}

CONFIRM_CONTENT = {
    "recheck_complaint_evidence": ("Recheck of the complaint evidence upheld the original "
                                   "violation basis for the disputed order."),
    "verify_violation_pattern": ("Verification of the violation pattern across orders "
                                 "upheld the finding."),
    "audit_order_history": ("Audit of the order history found repeated policy breaches "
                            "in the period."),
    "review_prior_violations": ("Review of prior violations shows a repeated pattern "
                                "for this account."),
    "returned_item_examination": ("Returned item examination matched the complaint "
                                  "description in full."),
}

CONFIRM_POOL = tuple(sorted(CONFIRM_CONTENT))


@dataclass(frozen=True)
class CategoryProfile:
    category: str
    maker_factor: str
    maker_action: str
    primary_factor: str
    primary_action: str
    primary_critical: bool
    support_pool: tuple[str, ...]
    entity_slot: str | None
    entity_pool: tuple[str, ...]


CATEGORIES = (
    CategoryProfile(
        "PQ.EXPIRED_PRODUCTS", "expired_product_received", "review_complaint",
        "isolated_incident_confirmed", "contact_supplier", True,
        ("review_inventory_records", "verify_warehouse_storage", "defect_rate_analysis",
         "cross_reference_transactions", "verify_invoice_authenticity",
         "verify_listing_compliance", "product_sample_inspection"),
        "supplier", ("FreshFoods Ltd", "GreenHarvest Co", "Nordic Pantry AB",
                     "Solano Foods SA")),
    CategoryProfile(
        "IP.COUNTERFEIT_SUSPECTED", "counterfeit_item_suspected", "review_complaint",
        "authenticity_established", "verify_brand_authorization", True,
        ("product_sample_inspection", "verify_invoice_authenticity",
         "cross_reference_transactions", "review_inventory_records",
         "verify_listing_compliance", "defect_rate_analysis", "verify_warehouse_storage"),
        "brand", ("Lumina Audio", "TrailForge", "Casa Verde", "Aquilon Sports")),
    CategoryProfile(
        "POL.RESTRICTED_ITEM", "restricted_item_listed", "review_complaint",
        "listing_compliance_confirmed", "verify_listing_compliance", False,
        ("cross_reference_transactions", "review_inventory_records",
         "product_sample_inspection", "defect_rate_analysis",
         "verify_invoice_authenticity", "verify_warehouse_storage"),
        None, ()),
    CategoryProfile(
        "FIN.INVOICE_MISMATCH", "invoice_mismatch_found", "review_complaint",
        "supplier_relationship_confirmed", "verify_supplier_legitimacy", True,
        ("verify_invoice_authenticity", "cross_reference_transactions",
         "defect_rate_analysis", "review_inventory_records",
         "verify_warehouse_storage", "product_sample_inspection"),
        "supplier", ("Atlas Traders", "Meridian Supply", "Kowalski GmbH",
                     "Baystone Partners")),
    CategoryProfile(
        "LOG.LATE_SHIPMENT_CLAIMS", "shipment_claims_inconsistent", "review_complaint",
        "shipping_performance_confirmed", "cross_reference_transactions", False,
        ("review_inventory_records", "defect_rate_analysis", "verify_warehouse_storage",
         "verify_invoice_authenticity", "product_sample_inspection",
         "verify_listing_compliance"),
        None, ()),
)

DEFAULT_CATEGORY_POOL = tuple(p.category for p in CATEGORIES)
_PROFILES = {p.category: p for p in CATEGORIES}


@dataclass(frozen=True)
class CorpusSpec:
    n_cases: int
    overturn_ratio: float = 0.70
    mean_actions_overturn: float = 4.89
    mean_actions_nonoverturn: float = 2.00
    seed: int = 0
    category_pool: tuple[str, ...] = DEFAULT_CATEGORY_POOL
    precedent_linkage: float = 1.0
    rmi_share: float = 0.05  # share of overturned cases with withheld critical evidence
    start: str = "2025-01-06T00:00:00Z"

    def check(self) -> None:
        if self.n_cases < 10:
            raise InvalidSpec("n_cases must be >= 10")
        for name in ("overturn_ratio", "precedent_linkage", "rmi_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidSpec(f"{name} must be within [0, 1], got {value}")
        if self.mean_actions_overturn < 1 or self.mean_actions_nonoverturn < 1:
            raise InvalidSpec("mean action counts must be >= 1")
        unknown = set(self.category_pool) - set(_PROFILES)
        if unknown:
            raise InvalidSpec(f"unknown categories: {sorted(unknown)}")
        if not self.category_pool:
            raise InvalidSpec("category_pool must not be empty")


def corpus_templates() -> TemplateRegistry:
    """The action-template registry the generated corpus is written against."""
    return DEFAULT_TEMPLATES


def _quota_counts(rng: random.Random, k: int, mean: float, low: int, high: int) -> list[int]:
    """A shuffled multiset of k integers in [low, high] whose mean is exactly
    round(mean * k) / k; variance is stirred in without changing the sum."""
    if k == 0:
        return []
    total = min(high * k, max(low * k, round(mean * k)))
    base, rem = divmod(total, k)
    counts = [base + 1] * rem + [base] * (k - rem)
    for _ in range(2 * k):
        i, j = rng.randrange(k), rng.randrange(k)
        step = rng.randint(1, 2)
        if counts[i] - step >= low and counts[j] + step <= high:
            counts[i] -= step
            counts[j] += step
    rng.shuffle(counts)
    return counts


@dataclass
class _CaseDraft:
    index: int
    kind: str  # approve | reject | rmi
    category: CategoryProfile
    actions: int
    linked: bool = True
    entity: str | None = None
    evidence: list = field(default_factory=list)

    def add_evidence(self, source_type: str, content: str, ref: str) -> str:
        eid = f"e{len(self.evidence) + 1:02d}"
        self.evidence.append({"id": eid, "source_type": source_type,
                              "content": content, "source_ref": ref})
        return eid


def _fill(template: str, entity: str | None) -> str:
    return template.replace("{entity}", entity or "the supplier")


def _build_record(draft: _CaseDraft, timestamp: str, rng: random.Random) -> CaseRecord:
    profile = draft.category
    case_id = f"case-{draft.index:05d}"
    maker_factor = profile.maker_factor if draft.linked else \
        f"{profile.maker_factor}_variant_{draft.index}"
    display = maker_factor.replace("_", " ")

    complaint = draft.add_evidence(
        "chat_log",
        f"Customer complaint for order {1000 + draft.index} describing {display}.",
        f"ticket:{draft.index}/msg-1")
    photo = draft.add_evidence(
        "image_extract",
        f"Image extract from the complaint attachment for order {1000 + draft.index}.",
        f"ticket:{draft.index}/img-1")

    # makers see the account standing and the seller's response; both correlate
    # with how the re-review tends to land, which is what makes retrieved
    # precedents informative. Order and ticket numbers keep summaries distinct
    # per case the way real rationale text is.
    if draft.kind == "reject":
        context = ("account history shows prior policy flags and the response "
                   "offers no substantiating documentation")
    else:
        context = ("seller responded promptly with detailed operational "
                    "documentation disputing the violation")
    maker_analysis = (
        f"Order {1000 + draft.index}, ticket {7000 + draft.index}: {context}; "
        f"{display} established from the complaint under {profile.category} policy.\n"
        f"ACTION[{profile.maker_action}|supporting]{{{complaint},{photo}}}"
        f" => FACTOR[{maker_factor}|contradict]")

    withheld: list[str] = []
    if draft.kind in ("approve", "rmi"):
        checker_verdict = "approve"
        keys = [profile.primary_action] + rng.sample(
            profile.support_pool, min(draft.actions - 1, len(profile.support_pool)))
        statements = []
        for pos, key in enumerate(keys):
            content = _fill(SUPPORT_CONTENT[key], draft.entity)
            eid = draft.add_evidence("document", content, f"upload:{case_id}-{key}.pdf")
            if pos == 0 and draft.kind == "rmi":
                withheld.append(eid)
            crit = "critical" if pos == 0 and profile.primary_critical else "supporting"
            conflict = (f" ~> CONFLICTS[{maker_factor}|extends]" if pos == 0 else "")
            statements.append(
                f"ACTION[{key}|{crit}]{{{eid}}}"
                f" => FACTOR[{profile.primary_factor}|support]{conflict}")
        checker_analysis = (
            f"Re-review of the {profile.category} case found the operation compliant; "
            "the rejection is overturned.\n" + "\n".join(statements))
    else:
        checker_verdict = "reject"
        keys = rng.sample(CONFIRM_POOL, min(draft.actions, len(CONFIRM_POOL)))
        statements = []
        for key in keys:
            eid = draft.add_evidence("system_record", CONFIRM_CONTENT[key],
                                     f"tool:{case_id}-{key}")
            statements.append(
                f"ACTION[{key}|supporting]{{{eid}}}"
                f" => FACTOR[{maker_factor}|contradict]"
                f" ~> CONFLICTS[{maker_factor}|verifies]")
        if profile.primary_critical:
            # the checker also ran the category's decisive verification; it did
            # not exonerate the seller, but the record carries its output
            draft.add_evidence("document",
                               _fill(SUPPORT_CONTENT[profile.primary_action], draft.entity),
                               f"upload:{case_id}-neutral.pdf")
        checker_analysis = (
            f"Re-review of the {profile.category} case confirmed the violation; "
            "the rejection stands.\n" + "\n".join(statements))

    draft.add_evidence("seller_statement",
                       f"Seller statement disputing the {profile.category} decision "
                       f"for order {1000 + draft.index}.",
                       f"appeal:{draft.index}/stmt-1")

    payload = {
        "case_id": case_id,
        "violation_category": profile.category,
        "timestamp": timestamp,
        "evidence_items": draft.evidence,
        "maker_record": {"verdict": "reject", "analysis": maker_analysis},
        "checker_record": {"verdict": checker_verdict, "analysis": checker_analysis},
    }
    if draft.entity is not None:
        payload["entities"] = {profile.entity_slot: draft.entity}
    if withheld:
        payload["withheld_evidence"] = withheld
    import json
    return parse_case_record(json.dumps(payload))


def generate_corpus(spec: CorpusSpec) -> list[CaseRecord]:
    """Deterministic corpus for ``spec``: strictly increasing timestamps,
    exact overturn quota, exact per-class mean action counts."""
    spec.check()
    rng = random.Random(spec.seed)

    n_over = round(spec.overturn_ratio * spec.n_cases)
    n_rmi = round(spec.rmi_share * n_over)
    kinds = (["approve"] * (n_over - n_rmi) + ["rmi"] * n_rmi
             + ["reject"] * (spec.n_cases - n_over))
    rng.shuffle(kinds)

    max_support = 1 + min(len(p.support_pool) for p in CATEGORIES
                          if p.category in spec.category_pool)
    over_counts = _quota_counts(rng, n_over, spec.mean_actions_overturn, 1, max_support)
    non_counts = _quota_counts(rng, spec.n_cases - n_over, spec.mean_actions_nonoverturn,
                               1, len(CONFIRM_POOL))
    over_iter, non_iter = iter(over_counts), iter(non_counts)

    rmi_capable = [c for c in spec.category_pool if _PROFILES[c].primary_critical]
    if n_rmi and not rmi_capable:
        raise InvalidSpec("rmi_share > 0 requires a category with a critical "
                          "primary action in the pool")

    start = datetime.strptime(spec.start, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    linkage_tail = int(0.8 * spec.n_cases)
    records = []
    for i, kind in enumerate(kinds, start=1):
        category = _PROFILES[rng.choice(rmi_capable if kind == "rmi"
                                        else list(spec.category_pool))]
        actions = next(over_iter) if kind in ("approve", "rmi") else next(non_iter)
        linked = True
        if i - 1 >= linkage_tail and rng.random() > spec.precedent_linkage:
            linked = False
        entity = rng.choice(category.entity_pool) if category.entity_slot else None
        draft = _CaseDraft(i, kind, category, actions, linked, entity)
        timestamp = (start + timedelta(hours=7 * (i - 1))).strftime("%Y-%m-%dT%H:%M:%SZ")
        records.append(_build_record(draft, timestamp, rng))
    return records


def derive_labels(records: list[CaseRecord]) -> dict[str, Verdict]:
    """Evaluation labels: the checker verdict, except that a record whose
    critical verification evidence is withheld from the query view is labelled
    as a request-more-information case."""
    labels = {}
    for record in records:
        if record.checker_record is None:
            raise InvalidSpec(f"record {record.case_id!r} has no checker verdict to label")
        labels[record.case_id] = (Verdict.RMI if record.withheld_evidence
                                  else record.checker_record.verdict)
    return labels


def chronological_split(records: list[CaseRecord],
                        train_fraction: float = 0.8) -> tuple[list[CaseRecord], list[CaseRecord]]:
    ordered = sorted(records, key=lambda r: (r.timestamp, r.case_id))
    cut = int(train_fraction * len(ordered))
    return ordered[:cut], ordered[cut:]
