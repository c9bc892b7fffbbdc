"""Prompt templates and rendering.

Templates live as plain-text files (one per template, stem = template id)
either in the bundled `templates/` directory or in a user-supplied
directory. Rendering is pure substitution of single-brace placeholders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import MissingBinding, NoPeers, TargetInPeers, UnknownPlaceholder, UnknownTemplate

TEMPLATE_IDS = ("risk_query", "extraction", "aggregation", "contrastive", "baseline_final")

PLACEHOLDERS = frozenset(
    {
        "name",
        "ticker",
        "industry",
        "data",
        "question",
        "sub_sector",
        "target_company_name",
        "target_company_ticker",
        "peer_blocks",
    }
)

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER_RE.findall(self.body))


@dataclass(frozen=True)
class PromptInstance:
    template_id: str
    bindings: dict
    rendered: str


class TemplateSet:
    """The five templates, loaded from disk and validated."""

    def __init__(self, templates: dict[str, PromptTemplate]):
        missing = [t for t in TEMPLATE_IDS if t not in templates]
        if missing:
            raise UnknownTemplate(f"missing templates: {missing}")
        for tpl in templates.values():
            unknown = tpl.placeholders - PLACEHOLDERS
            if unknown:
                raise UnknownPlaceholder(
                    f"template {tpl.template_id!r} uses undeclared placeholders {sorted(unknown)}"
                )
        self._templates = dict(templates)

    @classmethod
    def load(cls, directory: Path | None = None) -> "TemplateSet":
        """Load *.txt templates from `directory`, or the bundled set when None."""
        templates = {}
        if directory is None:
            root = resources.files(__package__) / "templates"
            for entry in root.iterdir():
                if entry.name.endswith(".txt"):
                    templates[entry.name[: -len(".txt")]] = PromptTemplate(
                        template_id=entry.name[: -len(".txt")],
                        body=entry.read_text(encoding="utf-8").strip() + "\n",
                    )
        else:
            for path in sorted(Path(directory).glob("*.txt")):
                templates[path.stem] = PromptTemplate(
                    template_id=path.stem, body=path.read_text(encoding="utf-8").strip() + "\n"
                )
        return cls(templates)

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplate(f"unknown template {template_id!r}") from None

    def risk_query(self) -> str:
        """The fixed risk query used for retrieval and as {question} downstream."""
        return self._templates["risk_query"].body.strip()

    def render(self, template_id: str, bindings: dict) -> PromptInstance:
        """Substitute placeholders; bindings must cover the template exactly."""
        tpl = self.get(template_id)
        needed = tpl.placeholders
        provided = set(bindings)
        missing = needed - provided
        if missing:
            raise MissingBinding(f"template {template_id!r} missing bindings {sorted(missing)}")
        extra = provided - needed
        if extra:
            raise UnknownPlaceholder(
                f"bindings {sorted(extra)} are not placeholders of template {template_id!r}"
            )
        rendered = _PLACEHOLDER_RE.sub(lambda m: str(bindings[m.group(1)]), tpl.body)
        return PromptInstance(template_id=template_id, bindings=dict(bindings), rendered=rendered)


@lru_cache(maxsize=1)
def bundled_templates() -> TemplateSet:
    return TemplateSet.load(None)


def risk_query() -> str:
    return bundled_templates().risk_query()


def render(template_id: str, bindings: dict) -> PromptInstance:
    return bundled_templates().render(template_id, bindings)


@dataclass(frozen=True)
class RiskBlock:
    """One company's aggregated risk narrative for the contrastive prompt."""

    name: str
    ticker: str
    risk_text: str


def build_peer_blocks(target: RiskBlock, peers: list[RiskBlock]) -> str:
    """Target block first, then one block per peer in order, blank-line separated."""
    if not peers:
        raise NoPeers("at least one peer is required")
    if target.ticker in {p.ticker for p in peers}:
        raise TargetInPeers(f"target {target.ticker} appears in the peer list")
    return "\n\n".join(f"{b.name} ({b.ticker}): {b.risk_text}" for b in [target, *peers])
