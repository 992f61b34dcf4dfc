"""
Segment text normalization.

Words are lowercased, punctuation is separated from words and the sequence
is wrapped in ``<s>``/``</s>`` sentinels. Switchboard transcription markup
({F uh, }, [ a + a ], -/, <laughter>) is either split into single characters
like any other text or kept as indivisible marker tokens.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Tuple

START = "<s>"
END = "</s>"
PUNCTUATION_CHARS = '.,?!;:"()'


class MarkupMode(str, Enum):
    """How transcription markup is tokenized."""

    SPLIT = "split"
    ATOMIC = "atomic"


_PUNCT = r'[.,?!;:"()]'
_WORD = r'[^\s.,?!;:"(){}\[\]<>+/]+'

_SPLIT_TOKEN = re.compile(rf"(?P<markup>[{{}}\[\]<>+/])|(?P<punct>{_PUNCT})|(?P<word>{_WORD})")

# Marker inventory: {D {F {C {E {A, <laughter>-style units, -/, [ ] + / }
_ATOMIC_TOKEN = re.compile(
    r"(?P<markup>\{[A-Za-z]|<[^<>\s]+>|-/|[\[\]+/{}<>])"
    rf"|(?P<punct>{_PUNCT})"
    rf"|(?P<word>{_WORD})"
)


@dataclass(frozen=True)
class TokenSequence:
    """Normalized tokens of one segment, sentinels included."""

    tokens: Tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) < 2 or self.tokens[0] != START or self.tokens[-1] != END:
            raise ValueError("TokenSequence must start with <s> and end with </s>")
        if START in self.tokens[1:] or END in self.tokens[:-1]:
            raise ValueError("Sentinels may only appear at the ends")

    @classmethod
    def wrap(cls, words) -> "TokenSequence":
        return cls((START, *words, END))

    @property
    def words(self) -> Tuple[str, ...]:
        """Tokens without sentinels."""
        return self.tokens[1:-1]

    def detokenize(self) -> str:
        return " ".join(self.words)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)


def normalize(raw_text: str, mode: MarkupMode = MarkupMode.SPLIT) -> TokenSequence:
    """
    Tokenize one segment.

    >>> normalize("Okay. /").tokens
    ('<s>', 'okay', '.', '/', '</s>')
    """
    pattern = _ATOMIC_TOKEN if MarkupMode(mode) is MarkupMode.ATOMIC else _SPLIT_TOKEN
    words = []
    for match in pattern.finditer(raw_text or ""):
        kind = match.lastgroup
        token = match.group(kind)
        # Marker units keep their case; {F and {f are different markers
        words.append(token.lower() if kind == "word" else token)

    # Sentinel lookalikes in the text must not break the sequence invariant
    words = [w for w in words if w not in (START, END)]
    return TokenSequence.wrap(words)
