"""A small textual DSL for declaring password composition policies.

Grammar (normative; files use the ".srn" extension, UTF-8):

    policy  := "policy" STRING "{" stmt* "}"
    stmt    := ( "min_length" INT
               | "max_length" INT
               | "require" CLASS ">=" INT
               | "ban" "dictionary" STRING
               | "ban" "substring" STRING
               | "ban" "exact" STRING ) ";"
    CLASS   := "lower" | "upper" | "digit" | "symbol"

"#" starts a comment running to end of line. Whitespace is insignificant.
STRING is double-quoted; \\ and \" escape a backslash and a quote, \n and
\t a newline and a tab. Statement kinds map one-to-one onto policy rules,
so compilation is trivially auditable.

Parsing is total: any input produces either an AST or a non-empty error
list, never an exception. On a statement-level error the parser
resynchronizes at the next ";" (or "}") so every error in the file is
reported in one run.
"""

from __future__ import annotations

from dataclasses import dataclass

from .policy import (
    CHAR_CLASSES,
    BanDictionary,
    BanExact,
    BanSubstring,
    CompositionPolicy,
    MaxLength,
    MinLength,
    PolicyConflict,
    RequireClass,
    Rule,
    validate_policy,
)

_KEYWORDS = frozenset(
    ["policy", "min_length", "max_length", "require", "ban", "dictionary", "substring", "exact"]
    + list(CHAR_CLASSES)
)

_PUNCT = {"{": "lbrace", "}": "rbrace", ";": "semi"}

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


@dataclass(frozen=True)
class ParseError:
    message: str
    line: int  # 1-based
    column: int  # 1-based

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"

    def to_json(self) -> dict:
        return {"message": self.message, "line": self.line, "column": self.column}


@dataclass(frozen=True)
class Statement:
    """One policy statement plus where it starts in the source."""

    kind: str  # a rule kind: min_length, max_length, require_class, ban_*
    args: tuple
    line: int
    column: int

    def signature(self) -> tuple:
        """Identity modulo source position, for round-trip comparisons."""
        return (self.kind, self.args)


@dataclass(frozen=True)
class PolicyAst:
    name: str
    statements: tuple[Statement, ...]

    def signature(self) -> tuple:
        return (self.name, tuple(s.signature() for s in self.statements))


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword, ident, string, int, lbrace, rbrace, semi, ge, error, eof
    value: str
    line: int
    column: int


def _tokenize(source: str) -> tuple[list[_Token], list[ParseError]]:
    tokens: list[_Token] = []
    errors: list[ParseError] = []
    line, col = 1, 1
    i, n = 0, len(source)

    def advance(ch: str):
        nonlocal line, col
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(ch)
            i += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, start_line, start_col))
            advance(ch)
            i += 1
            continue
        if ch == ">" and i + 1 < n and source[i + 1] == "=":
            tokens.append(_Token("ge", ">=", start_line, start_col))
            advance(">")
            advance("=")
            i += 2
            continue
        if ch == '"':
            advance(ch)
            i += 1
            buf: list[str] = []
            closed = False
            while i < n:
                ch = source[i]
                if ch == '"':
                    advance(ch)
                    i += 1
                    closed = True
                    break
                if ch == "\n":
                    break  # unterminated; resume lexing on the next line
                if ch == "\\" and i + 1 < n and source[i + 1] in _ESCAPES:
                    buf.append(_ESCAPES[source[i + 1]])
                    advance(source[i])
                    advance(source[i + 1])
                    i += 2
                    continue
                buf.append(ch)
                advance(ch)
                i += 1
            if not closed:
                errors.append(ParseError("unterminated string", start_line, start_col))
            tokens.append(_Token("string", "".join(buf), start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(_Token("int", text, start_line, start_col))
            for c in text:
                advance(c)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in _KEYWORDS else "ident"
            tokens.append(_Token(kind, text, start_line, start_col))
            for c in text:
                advance(c)
            i = j
            continue
        errors.append(ParseError(f"unexpected character {ch!r}", start_line, start_col))
        advance(ch)
        i += 1
    tokens.append(_Token("eof", "", line, col))
    return tokens, errors


class _Parser:
    def __init__(self, tokens: list[_Token], errors: list[ParseError]):
        self.tokens = tokens
        self.errors = errors
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def bump(self) -> _Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.cur
        self.errors.append(ParseError(message, tok.line, tok.column))

    def expect_keyword(self, word: str) -> bool:
        if self.cur.kind == "keyword" and self.cur.value == word:
            self.bump()
            return True
        self.error(f"expected {word!r}, found {self._describe(self.cur)}")
        return False

    def expect(self, kind: str, what: str) -> _Token | None:
        if self.cur.kind == kind:
            return self.bump()
        self.error(f"expected {what}, found {self._describe(self.cur)}")
        return None

    @staticmethod
    def _describe(tok: _Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        if tok.kind == "string":
            return f'string "{tok.value}"'
        return repr(tok.value)

    def synchronize(self):
        """Skip to just past the next ";" (or stop before "}" / eof)."""
        while self.cur.kind not in ("semi", "rbrace", "eof"):
            self.bump()
        if self.cur.kind == "semi":
            self.bump()

    def parse_policy(self) -> PolicyAst | None:
        if not self.expect_keyword("policy"):
            return None
        name_tok = self.expect("string", "a quoted policy name")
        if name_tok is None:
            return None
        if self.expect("lbrace", "'{'") is None:
            return None
        statements: list[Statement] = []
        while self.cur.kind not in ("rbrace", "eof"):
            stmt = self.parse_statement()
            if stmt is not None:
                statements.append(stmt)
            else:
                self.synchronize()
        if self.expect("rbrace", "'}'") is None:
            return None
        if self.cur.kind != "eof":
            self.error("unexpected trailing input after '}'")
        return PolicyAst(name=name_tok.value, statements=tuple(statements))

    def parse_statement(self) -> Statement | None:
        tok = self.cur
        if tok.kind != "keyword":
            self.error(f"expected a statement, found {self._describe(tok)}")
            return None
        if tok.value in ("min_length", "max_length"):
            self.bump()
            value = self.expect("int", "an integer")
            if value is None or not self._semi():
                return None
            return Statement(tok.value, (int(value.value),), tok.line, tok.column)
        if tok.value == "require":
            self.bump()
            cls = self.cur
            if cls.kind == "keyword" and cls.value in CHAR_CLASSES:
                self.bump()
            else:
                self.error(f"expected a character class ({', '.join(CHAR_CLASSES)})")
                return None
            if self.expect("ge", "'>='") is None:
                return None
            count = self.expect("int", "an integer")
            if count is None or not self._semi():
                return None
            if int(count.value) < 1:
                # The rule vocabulary has no trivially-satisfied requirement,
                # so reject here rather than crash in compile.
                self.error("character class count must be at least 1", count)
            return Statement("require_class", (cls.value, int(count.value)), tok.line, tok.column)
        if tok.value == "ban":
            self.bump()
            mode = self.cur
            if mode.kind == "keyword" and mode.value in ("dictionary", "substring", "exact"):
                self.bump()
            else:
                self.error("expected 'dictionary', 'substring' or 'exact' after 'ban'")
                return None
            arg = self.expect("string", "a quoted string")
            if arg is None or not self._semi():
                return None
            if mode.value == "substring" and arg.value == "":
                self.error("banned substring must not be empty", arg)
            return Statement(f"ban_{mode.value}", (arg.value,), tok.line, tok.column)
        self.error(f"expected a statement, found {self._describe(tok)}")
        return None

    def _semi(self) -> bool:
        return self.expect("semi", "';'") is not None


def parse(source: str) -> tuple[PolicyAst | None, list[ParseError]]:
    """Parse DSL source. Returns (ast, []) on success or (None, errors) on
    failure; never a partial AST alongside errors."""
    tokens, errors = _tokenize(source)
    parser = _Parser(tokens, errors)
    ast = parser.parse_policy()
    if parser.errors:
        return None, parser.errors
    return ast, []


_STATEMENT_RULES = {
    "min_length": lambda args: MinLength(*args),
    "max_length": lambda args: MaxLength(*args),
    "require_class": lambda args: RequireClass(*args),
    "ban_dictionary": lambda args: BanDictionary(*args),
    "ban_substring": lambda args: BanSubstring(*args),
    "ban_exact": lambda args: BanExact(*args),
}


def compile_policy(ast: PolicyAst) -> tuple[CompositionPolicy, list[PolicyConflict]]:
    """Map each statement onto its rule. Structural conflicts (contradictory
    bounds, duplicates) are returned as warnings, not failures; unknown
    dictionaries surface later, at check time."""
    rules = tuple(_STATEMENT_RULES[stmt.kind](stmt.args) for stmt in ast.statements)
    compiled = CompositionPolicy(name=ast.name, rules=rules)
    return compiled, validate_policy(compiled)


def _quote(value: str) -> str:
    return '"' + "".join(_UNESCAPES.get(ch, ch) for ch in value) + '"'


def format_source(ast: PolicyAst) -> str:
    """Canonical layout: one statement per line, two-space indent."""
    lines = [f"policy {_quote(ast.name)} {{"]
    for stmt in ast.statements:
        if stmt.kind in ("min_length", "max_length"):
            body = f"{stmt.kind} {stmt.args[0]}"
        elif stmt.kind == "require_class":
            body = f"require {stmt.args[0]} >= {stmt.args[1]}"
        else:
            body = f"ban {stmt.kind.removeprefix('ban_')} {_quote(stmt.args[0])}"
        lines.append(f"  {body};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_RULE_STATEMENTS = {
    MinLength: lambda r: ("min_length", (r.n,)),
    MaxLength: lambda r: ("max_length", (r.n,)),
    RequireClass: lambda r: ("require_class", (r.char_class, r.k)),
    BanDictionary: lambda r: ("ban_dictionary", (r.dict_ref,)),
    BanSubstring: lambda r: ("ban_substring", (r.substring,)),
    BanExact: lambda r: ("ban_exact", (r.word,)),
}


def ast_from_policy(policy: CompositionPolicy) -> PolicyAst:
    """Inverse of compile_policy (spans are synthesized)."""
    statements = []
    for i, rule in enumerate(policy.rules):
        kind, args = _RULE_STATEMENTS[type(rule)](rule)
        statements.append(Statement(kind, args, line=i + 2, column=3))
    return PolicyAst(name=policy.name, statements=tuple(statements))


def render_policy_source(policy: CompositionPolicy) -> str:
    """Render a policy as canonical DSL source text."""
    return format_source(ast_from_policy(policy))
