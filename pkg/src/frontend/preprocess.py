"""
The small preprocessor in front of the MiniC parser.

Comments are removed (line structure kept), directives are blanked,
conditional compilation is rejected,
`#define NAME <integer>` is recorded as an integer constant and other
object-like defines are expanded textually.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from errors import Diagnostic, error, warning

logger = logging.getLogger(__name__)

_DEFINE = re.compile(r"#\s*define\s+(?P<name>[A-Za-z_]\w*)(?P<params>\([^)]*\))?\s*(?P<body>.*)$")
_INTEGER = re.compile(r"^\(*\s*(?P<sign>[-+]?)\s*(?P<digits>0[xX][0-9a-fA-F]+|\d+)[uUlL]*\s*\)*$")
_WORD_OR_LITERAL = re.compile(r"\"(?:\\.|[^\"\\\n])*\"|'(?:\\.|[^'\\\n])*'|\b[A-Za-z_]\w*\b")
_CONDITIONAL = ("if", "ifdef", "ifndef", "elif", "else", "endif")


@dataclass
class PreprocessedSource:
    text: str
    defines: Dict[str, int] = field(default_factory=dict)
    expansions: Dict[str, str] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)


def _blank(text: str, keep_strings: bool) -> str:
    """Replace comments (and optionally literal contents) by spaces, keeping offsets."""
    out: List[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if text.startswith("//", i):
            end = text.find("\n", i)
            end = n if end < 0 else end
            out.append(" " * (end - i))
            i = end
        elif text.startswith("/*", i):
            end = text.find("*/", i + 2)
            end = n if end < 0 else end + 2
            out.append("".join(c if c == "\n" else " " for c in text[i:end]))
            i = end
        elif ch in "\"'":
            j = i + 1
            while j < n and text[j] != ch and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            j = min(j + 1, n)
            literal = text[i:j]
            if keep_strings:
                out.append(literal)
            else:
                out.append(ch + " " * max(len(literal) - 2, 0) + (ch if len(literal) > 1 else ""))
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def strip_comments(text: str) -> str:
    """Source with every comment replaced by blanks; offsets and newlines are kept."""
    return _blank(text, keep_strings=True)


def code_mask(text: str) -> str:
    """Like strip_comments, but string and character literal contents are blanked too."""
    return _blank(text, keep_strings=False)


def _integer_value(body: str, defines: Dict[str, int]) -> Optional[int]:
    match = _INTEGER.match(body)
    if match:
        digits = match.group("digits")
        value = int(digits, 8 if re.fullmatch(r"0\d+", digits) else 0)
        return -value if match.group("sign") == "-" else value
    stripped = body.strip().strip("()").strip()
    return defines.get(stripped)


def _expand(text: str, expansions: Dict[str, str]) -> str:
    if not expansions:
        return text

    def substitute(match: "re.Match[str]") -> str:
        word = match.group(0)
        return expansions.get(word, word)

    return _WORD_OR_LITERAL.sub(substitute, text)


def preprocess(source: str) -> PreprocessedSource:
    """
    Run the MiniC preprocessor.

    Args:
        source: C source text.

    Returns:
        PreprocessedSource whose text has exactly the input's line structure.
    """
    text = strip_comments(source.replace("\r\n", "\n").lstrip("\ufeff"))
    lines = text.split("\n")
    result = PreprocessedSource(text="")
    index = 0
    while index < len(lines):
        line = lines[index]
        if not line.lstrip().startswith("#"):
            lines[index] = _expand(line, result.expansions)
            index += 1
            continue

        first = index
        directive = line.rstrip()
        while directive.endswith("\\") and index + 1 < len(lines):
            index += 1
            directive = directive[:-1] + " " + lines[index].rstrip()
        for blanked in range(first, index + 1):
            lines[blanked] = ""
        index += 1
        _directive(directive.strip(), first + 1, result)

    result.text = "\n".join(lines)
    return result


def _directive(directive: str, line: int, result: PreprocessedSource) -> None:
    keyword = re.match(r"#\s*(\w*)", directive)
    name = keyword.group(1) if keyword else ""
    if name == "define":
        match = _DEFINE.match(directive)
        if match is None:
            result.diagnostics.append(warning(line, 1, "UnsupportedConstruct", "malformed #define ignored"))
            return
        macro, body = match.group("name"), match.group("body").strip()
        if match.group("params") is not None:
            result.diagnostics.append(
                warning(line, 1, "UnsupportedConstruct", f"function-like macro {macro} ignored")
            )
            return
        value = _integer_value(body, result.defines)
        if value is not None:
            result.defines[macro] = value
        else:
            result.expansions[macro] = _expand(body, result.expansions)
        logger.debug("define %s = %r", macro, value if value is not None else body)
    elif name == "undef":
        parts = directive.split()
        if len(parts) > 1:
            result.defines.pop(parts[1], None)
            result.expansions.pop(parts[1], None)
    elif name in _CONDITIONAL:
        result.diagnostics.append(
            error(
                line, 1, "UnsupportedConstruct", f"conditional compilation (#{name}) is not supported"
            )
        )
