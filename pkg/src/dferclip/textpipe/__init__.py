from .descriptions import (
    BASIC_EXPRESSIONS,
    EXTRA_EXPRESSIONS,
    ClassDescription,
    build_description,
    class_descriptions,
    ensemble_descriptions,
    expression_classes,
    load_descriptions,
)
from .prompts import (
    PromptSequence,
    PromptSpec,
    SlotKind,
    assemble_prompt,
    build_prompts,
    embed_prompts,
    prompt_texts,
)
from .vocab import CONTEXT_LENGTH, TokenSequence, Vocabulary, split_words, tokenize


def default_vocabulary(table: dict | None = None) -> Vocabulary:
    """Vocabulary over every shipped descriptor and class name."""
    table = table if table is not None else load_descriptions()
    texts = list(table) + [", ."]  # joiner punctuation added by build_description
    for phrases in table.values():
        texts.extend(phrases)
    return Vocabulary.build(texts)


__all__ = [
    "BASIC_EXPRESSIONS",
    "CONTEXT_LENGTH",
    "EXTRA_EXPRESSIONS",
    "ClassDescription",
    "PromptSequence",
    "PromptSpec",
    "SlotKind",
    "TokenSequence",
    "Vocabulary",
    "assemble_prompt",
    "build_description",
    "build_prompts",
    "class_descriptions",
    "default_vocabulary",
    "embed_prompts",
    "ensemble_descriptions",
    "expression_classes",
    "load_descriptions",
    "prompt_texts",
    "split_words",
    "tokenize",
]
