"""Grading prompt templates: rendering under a token budget, rating parsing.

Token counts are whitespace word counts.  Model tokenizers count differently,
so the default budget (480 words) sits safely under the common 512-token
input limit; both numbers are configurable.  When a rendered prompt exceeds
the budget, only the context is truncated (from the end) -- the entry text
and the instructions are never cut.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import BudgetError, GradebenchError

DEFAULT_WORD_BUDGET = 480

# Verbatim equivalence check used when an extracted answer misses the key.
EQUIVALENCE_PROMPT = (
    'For the question "{question}" the correct answer is "{correct_answer}". '
    'Is "{answer}" an equally correct response to this question? Answer yes or no.'
)


def token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class PromptTemplate:
    """A grading prompt with {question}/{nugget} and {context} placeholders."""

    prompt_class: str
    template_text: str
    is_self_rated: bool
    target: str  # "question", "nugget", or "direct"

    def __post_init__(self):
        if self.target not in ("question", "nugget", "direct"):
            raise GradebenchError(f"unknown template target {self.target!r}")
        for placeholder in (self.entry_placeholder, "context"):
            if "{" + placeholder + "}" not in self.template_text:
                raise GradebenchError(
                    f"template {self.prompt_class} lacks a {{{placeholder}}} placeholder"
                )

    @property
    def entry_placeholder(self) -> str:
        return "nugget" if self.target == "nugget" else "question"

    @property
    def context_first(self) -> bool:
        return self.template_text.find("{context}") < self.template_text.find(
            "{" + self.entry_placeholder + "}"
        )

    @property
    def prompt_style(self) -> str:
        for line in self.template_text.splitlines():
            if line.strip():
                return line.strip()
        return ""

    def render(self, entry_text: str, context: str) -> str:
        return self.template_text.format(**{self.entry_placeholder: entry_text, "context": context})


def _context_prefix(context: str, n_words: int) -> str:
    """The shortest character prefix of context holding its first n words."""
    if n_words <= 0:
        return ""
    matches = list(re.finditer(r"\S+", context))
    if len(matches) <= n_words:
        return context
    return context[: matches[n_words - 1].end()]


def render_prompt(
    template: PromptTemplate,
    entry_text: str,
    context: str,
    budget: int = DEFAULT_WORD_BUDGET,
) -> str:
    """Substitute placeholders, truncating only the context to fit the budget."""
    base_tokens = token_count(template.render(entry_text, ""))
    if base_tokens > budget:
        raise BudgetError(
            f"budget of {budget} tokens cannot fit template "
            f"{template.prompt_class} with entry ({base_tokens} tokens before context)"
        )
    room = budget - base_tokens
    if token_count(context) > room:
        context = _context_prefix(context, room)
    rendered = template.render(entry_text, context)
    # Substitution can only merge tokens, never add them, but guard anyway.
    while token_count(rendered) > budget and context:
        context = _context_prefix(context, token_count(context) - 1)
        rendered = template.render(entry_text, context)
    return rendered


_RATING_PATTERN = re.compile(r"\b[0-5]\b")


def parse_self_rating_verbose(completion: str) -> tuple[int, bool]:
    """First standalone digit 0-5; (0, True) marks the no-digit fallback."""
    match = _RATING_PATTERN.search(completion)
    if match:
        return int(match.group()), False
    return 0, True


def parse_self_rating(completion: str) -> int:
    return parse_self_rating_verbose(completion)[0]


# ---------------------------------------------------------------------------
# Built-in template registry

_BUILTIN_SPECS = {
    "QuestionSelfRatedUnanswerablePromptWithChoices": ("question", True),
    "NuggetSelfRatedPrompt": ("nugget", True),
    "QuestionCompleteConciseUnanswerablePromptWithChoices": ("question", False),
    "NuggetExtractionPrompt": ("nugget", False),
    "DirectRelevancePrompt": ("direct", False),
}

SELF_RATED_QUESTION = "QuestionSelfRatedUnanswerablePromptWithChoices"
SELF_RATED_NUGGET = "NuggetSelfRatedPrompt"
EXTRACTION_QUESTION = "QuestionCompleteConciseUnanswerablePromptWithChoices"
EXTRACTION_NUGGET = "NuggetExtractionPrompt"
DIRECT_DEFAULT = "DirectRelevancePrompt"


def _read_builtin(name: str) -> str:
    return (resources.files("gradebench") / "templates" / f"{name}.txt").read_text(
        encoding="utf-8"
    )


def builtin_prompt_classes() -> list[str]:
    return sorted(_BUILTIN_SPECS)


def is_builtin_prompt_class(prompt_class: str) -> bool:
    return prompt_class in _BUILTIN_SPECS


def load_template(
    prompt_class: str,
    template_dir: Optional[str] = None,
    target: Optional[str] = None,
    is_self_rated: Optional[bool] = None,
) -> PromptTemplate:
    """Load a template by class name.

    A ``<prompt_class>.txt`` file in template_dir overrides (or extends) the
    built-in set; for classes outside the built-in set the caller must say
    what the template targets and whether its completions are self-ratings.
    """
    text = None
    if template_dir is not None:
        candidate = Path(template_dir) / f"{prompt_class}.txt"
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8")
    if prompt_class in _BUILTIN_SPECS:
        default_target, default_rated = _BUILTIN_SPECS[prompt_class]
        return PromptTemplate(
            prompt_class=prompt_class,
            template_text=text if text is not None else _read_builtin(prompt_class),
            is_self_rated=default_rated if is_self_rated is None else is_self_rated,
            target=default_target if target is None else target,
        )
    if text is None:
        raise GradebenchError(
            f"unknown prompt class {prompt_class!r} and no template file found"
            + (f" in {template_dir}" if template_dir else " (no --template-dir given)")
        )
    if target is None or is_self_rated is None:
        raise GradebenchError(
            f"custom prompt class {prompt_class!r} needs explicit target and self-rated flag"
        )
    return PromptTemplate(
        prompt_class=prompt_class, template_text=text, is_self_rated=is_self_rated, target=target
    )


def default_template_for(target: str, self_rated: bool = True) -> PromptTemplate:
    if target == "question":
        name = SELF_RATED_QUESTION if self_rated else EXTRACTION_QUESTION
    elif target == "nugget":
        name = SELF_RATED_NUGGET if self_rated else EXTRACTION_NUGGET
    elif target == "direct":
        name = DIRECT_DEFAULT
    else:
        raise GradebenchError(f"unknown target {target!r}")
    return load_template(name)
