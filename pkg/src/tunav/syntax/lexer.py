"""Hand-rolled lexer for `.tv` sources (UTF-8, `//` line comments)."""

from __future__ import annotations

from dataclasses import dataclass

from tunav.errors import ParseError
from tunav.syntax.ast import SourceSpan

KEYWORDS = {
    "spec",
    "proof",
    "axiom",
    "fn",
    "broadcast",
    "group",
    "use",
    "requires",
    "ensures",
    "assert",
    "by",
    "let",
    "forall",
    "exists",
    "true",
    "false",
    "sort",
    "const",
}

# Longest match first.
PUNCT = [
    "<==>",
    "==>",
    "::",
    "->",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "(",
    ")",
    "{",
    "}",
    "<",
    ">",
    "|",
    ",",
    ";",
    ":",
    ".",
    "!",
    "+",
    "-",
    "*",
    "%",
    "=",
]

TRIGGER_ATTR = "#[trigger]"
ALL_TRIGGERS_ATTR = "#![all_triggers]"


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | "punct" | "attr" | "eof"
    text: str
    start: int
    end: int
    line: int
    col: int


def tokenize(source: str, path: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line = 1
    line_start = 0

    def span_here(start: int, end: int) -> SourceSpan:
        return SourceSpan(path, start, end, line, start - line_start + 1)

    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if c in " \t\r":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        col = i - line_start + 1
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], i, j, line, col))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, i, j, line, col))
            i = j
            continue
        if c == "#":
            for attr in (ALL_TRIGGERS_ATTR, TRIGGER_ATTR):
                if source.startswith(attr, i):
                    tokens.append(Token("attr", attr, i, i + len(attr), line, col))
                    i += len(attr)
                    break
            else:
                raise ParseError("unknown attribute (expected #[trigger] or #![all_triggers])",
                                 span_here(i, i + 1))
            continue
        for p in PUNCT:
            if source.startswith(p, i):
                tokens.append(Token("punct", p, i, i + len(p), line, col))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", span_here(i, i + 1))

    tokens.append(Token("eof", "", n, n, line, n - line_start + 1))
    return tokens
