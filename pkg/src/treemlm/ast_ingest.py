"""Source ingestion: tokenize toy code, parse it to an AST, and extract the
set of root-to-terminal paths that represents the tree.

Rendering convention: a node renders as its value when it has one (terminals
always do; function-definition nodes carry the function name as a value even
though they have children), otherwise as its type name.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Optional


class IngestError(Exception):
    pass


class UnbalancedIndentation(IngestError):
    """A dedent does not return to any open indentation level."""


class ParseError(IngestError):
    def __init__(self, message: str, token_index: int):
        super().__init__(f"{message} (at token {token_index})")
        self.token_index = token_index


class SchemaError(IngestError):
    """JSON AST document violates the tree schema; carries the node path."""

    def __init__(self, message: str, node_path: str):
        super().__init__(f"{message} at {node_path}")
        self.node_path = node_path


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AstNode:
    type_name: str
    value: Optional[str] = None
    children: tuple["AstNode", ...] = ()

    def __post_init__(self):
        if not self.children and self.value is None:
            raise ValueError(f"terminal node {self.type_name!r} must carry a value")

    @property
    def is_terminal(self) -> bool:
        return not self.children

    @property
    def render(self) -> str:
        return self.value if self.value is not None else self.type_name

    @property
    def renders_by_value(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class AstTree:
    root: AstNode
    height: int
    node_count: int

    @classmethod
    def from_root(cls, root: AstNode) -> "AstTree":
        height = 0
        count = 0
        stack = [(root, 0)]
        while stack:
            node, level = stack.pop()
            count += 1
            if level > height:
                height = level
            for child in node.children:
                stack.append((child, level + 1))
        return cls(root, height, count)


@dataclass(frozen=True)
class NodePath:
    """Root-to-terminal node sequence, rendered.

    `node_ids` are preorder indices into the source tree so downstream code
    can recover each slot's tree position; `value_flags[k]` is True when
    slot k renders by value (terminal or function-name node).
    """

    labels: tuple[str, ...]
    value_flags: tuple[bool, ...]
    node_ids: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class PathSet:
    paths: tuple[NodePath, ...]

    @property
    def count(self) -> int:
        return len(self.paths)


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=")
_ONE_CHAR_OPS = set("=+-*/():,<>.")
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"\d+(?:\.\d+)?")

STRUCTURE_TOKENS = ("NEWLINE", "INDENT", "DEDENT")


def _strip_comment(line: str) -> str:
    in_string = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_string = not in_string
        elif ch == "#" and not in_string:
            return line[:i]
    return line


def _lex_line(body: str, base_index: int) -> list[str]:
    tokens: list[str] = []
    i = 0
    n = len(body)
    while i < n:
        ch = body[i]
        if ch == " ":
            i += 1
            continue
        if ch == '"':
            end = body.find('"', i + 1)
            if end < 0:
                raise ParseError("unterminated string literal", base_index + len(tokens))
            # spaces inside string literals become underscores
            tokens.append('"' + body[i + 1:end].replace(" ", "_") + '"')
            i = end + 1
            continue
        m = _WORD_RE.match(body, i)
        if m:
            tokens.append(m.group())
            i = m.end()
            continue
        m = _NUM_RE.match(body, i)
        if m:
            tokens.append(m.group())
            i = m.end()
            continue
        if body[i:i + 2] in _TWO_CHAR_OPS:
            tokens.append(body[i:i + 2])
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(ch)
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", base_index + len(tokens))
    return tokens


def tokenize_code(source_text: str, language_tag: str = "python") -> list[str]:
    """Tokenize toy source. Indentation changes become INDENT/DEDENT, line
    breaks between content lines become NEWLINE, comments are dropped, and
    spaces inside string literals are replaced with underscores."""
    tokens: list[str] = []
    indents = [0]
    first = True
    for raw in source_text.split("\n"):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip(" "))
        if not first:
            tokens.append("NEWLINE")
        if indent > indents[-1]:
            indents.append(indent)
            tokens.append("INDENT")
        else:
            while indent < indents[-1]:
                indents.pop()
                tokens.append("DEDENT")
            if indent != indents[-1]:
                raise UnbalancedIndentation(
                    f"dedent to column {indent} matches no open indentation level"
                )
        tokens.extend(_lex_line(line.strip(), len(tokens)))
        first = False
    while len(indents) > 1:
        indents.pop()
        tokens.append("DEDENT")
    return tokens


_NO_SPACE_BEFORE = {":", ",", ")", "(", "."}
_NO_SPACE_AFTER = {"(", "."}


def detokenize_code(tokens: list[str]) -> str:
    """Inverse of tokenize_code on canonically formatted, comment-free
    sources (4-space indents, conventional operator spacing)."""
    lines: list[str] = []
    words: list[str] = []
    depth = 0
    line_depth = 0
    for tok in tokens:
        if tok == "NEWLINE":
            lines.append("    " * line_depth + _join_words(words))
            words = []
        elif tok == "INDENT":
            depth += 1
        elif tok == "DEDENT":
            depth -= 1
        else:
            if not words:
                line_depth = depth
            words.append(tok)
    if words:
        lines.append("    " * line_depth + _join_words(words))
    return "\n".join(lines)


def _join_words(words: list[str]) -> str:
    out: list[str] = []
    for i, w in enumerate(words):
        if i > 0 and w not in _NO_SPACE_BEFORE and words[i - 1] not in _NO_SPACE_AFTER:
            out.append(" ")
        out.append(w)
    return "".join(out)


# ---------------------------------------------------------------------------
# toy parser
# ---------------------------------------------------------------------------

_BINARY_OPS = {"+", "-", "*", "/", "<", ">", "==", "!=", "<=", ">="}
_KEYWORDS = {"if", "else", "def", "return"}


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Optional[str]:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def advance(self) -> str:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r}, found {self.peek()!r}", self.pos)
        self.advance()

    def fail(self, message: str):
        raise ParseError(message, self.pos)

    # -- grammar --

    def module(self) -> AstNode:
        stmts = self.stmt_list(stop=frozenset())
        if self.pos != len(self.tokens):
            self.fail(f"unexpected token {self.peek()!r}")
        if not stmts:
            # an empty module is a single terminal; give it its own name as value
            return AstNode("Module", value="Module")
        return AstNode("Module", children=tuple(stmts))

    def stmt_list(self, stop: frozenset) -> list[AstNode]:
        stmts: list[AstNode] = []
        while True:
            while self.peek() == "NEWLINE":
                self.advance()
            if self.peek() is None or self.peek() in stop:
                break
            stmts.append(self.stmt())
        return stmts

    def stmt(self) -> AstNode:
        tok = self.peek()
        if tok == "def":
            return self.def_stmt()
        if tok == "if":
            return self.if_stmt()
        if tok == "return":
            return self.return_stmt()
        if tok == "else":
            self.fail("'else' without matching 'if'")
        if _WORD_RE.fullmatch(tok or "") and tok not in _KEYWORDS and self.peek(1) == "=":
            name = self.advance()
            self.advance()
            return AstNode("Assign", children=(AstNode("Name", value=name), self.expr()))
        return AstNode("Expr", children=(self.expr(),))

    def def_stmt(self) -> AstNode:
        self.expect("def")
        name = self.advance()
        if not _WORD_RE.fullmatch(name) or name in _KEYWORDS:
            self.fail(f"bad function name {name!r}")
        self.expect("(")
        params: list[AstNode] = []
        while self.peek() != ")":
            params.append(AstNode("arg", value=self.advance()))
            if self.peek() == ",":
                self.advance()
        self.expect(")")
        self.expect(":")
        body = AstNode("body", children=tuple(self.block()))
        children: list[AstNode] = []
        if params:
            children.append(AstNode("arguments", children=tuple(params)))
        children.append(body)
        # function name renders by value despite having children
        return AstNode("FunctionDef", value=name, children=tuple(children))

    def if_stmt(self) -> AstNode:
        self.expect("if")
        test = self.expr()
        self.expect(":")
        body = AstNode("body", children=tuple(self.block()))
        children = [test, body]
        while self.peek() == "NEWLINE":
            self.advance()
        if self.peek() == "else":
            self.advance()
            self.expect(":")
            children.append(AstNode("orelse", children=tuple(self.block())))
        return AstNode("If", children=tuple(children))

    def return_stmt(self) -> AstNode:
        self.expect("return")
        if self.peek() in (None, "NEWLINE", "DEDENT"):
            return AstNode("Return", value="return")
        return AstNode("Return", children=(self.expr(),))

    def block(self) -> list[AstNode]:
        self.expect("NEWLINE")
        self.expect("INDENT")
        stmts = self.stmt_list(stop=frozenset({"DEDENT"}))
        self.expect("DEDENT")
        if not stmts:
            self.fail("empty block")
        return stmts

    def expr(self) -> AstNode:
        # left-associative chain; the operator symbol stays code-only and is
        # deliberately absent from the tree (all operators share one BinOp type)
        node = self.atom()
        while self.peek() in _BINARY_OPS:
            self.advance()
            node = AstNode("BinOp", children=(node, self.atom()))
        return node

    def atom(self) -> AstNode:
        tok = self.peek()
        if tok is None or tok in STRUCTURE_TOKENS:
            self.fail("expected expression")
        if tok.startswith('"'):
            return AstNode("Str", value=self.advance())
        if _NUM_RE.fullmatch(tok):
            return AstNode("Num", value=self.advance())
        if _WORD_RE.fullmatch(tok) and tok not in _KEYWORDS:
            node: AstNode = AstNode("Name", value=self.advance())
            while self.peek() == ".":
                self.advance()
                attr = self.advance()
                if not _WORD_RE.fullmatch(attr):
                    self.fail(f"bad attribute name {attr!r}")
                node = AstNode("Attribute", children=(node, AstNode("Name", value=attr)))
            if self.peek() == "(":
                self.advance()
                args: list[AstNode] = []
                while self.peek() != ")":
                    args.append(self.expr())
                    if self.peek() == ",":
                        self.advance()
                self.expect(")")
                node = AstNode("Call", children=(node, *args))
            return node
        self.fail(f"unexpected token {tok!r}")


def parse_toy_tokens(tokens: list[str]) -> AstTree:
    return AstTree.from_root(_Parser(tokens).module())


def parse_toy_source(source_text: str, language_tag: str = "python") -> AstTree:
    return parse_toy_tokens(tokenize_code(source_text, language_tag))


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def _node_from_json(obj, node_path: str) -> AstNode:
    if not isinstance(obj, dict):
        raise SchemaError("node must be an object", node_path)
    type_name = obj.get("type")
    if not isinstance(type_name, str) or not type_name:
        raise SchemaError("missing or invalid 'type'", node_path)
    value = obj.get("value")
    if value is not None and not isinstance(value, str):
        raise SchemaError("'value' must be a string", node_path)
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise SchemaError("'children' must be an array", node_path)
    children = tuple(
        _node_from_json(c, f"{node_path}.children[{i}]") for i, c in enumerate(raw_children)
    )
    if not children and value is None:
        raise SchemaError(f"terminal node {type_name!r} has no value", node_path)
    return AstNode(type_name, value=value, children=children)


def load_ast_json(data: bytes | str) -> AstTree:
    """Parse one JSON AST document ({"type", "value"?, "children"})."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", "$") from exc
    return AstTree.from_root(_node_from_json(obj, "$"))


def ast_to_json(node: AstNode) -> dict:
    out: dict = {"type": node.type_name}
    if node.value is not None:
        out["value"] = node.value
    if node.children:
        out["children"] = [ast_to_json(c) for c in node.children]
    return out


def dump_ast_json(tree: AstTree) -> str:
    return json.dumps(ast_to_json(tree.root), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# path extraction
# ---------------------------------------------------------------------------


def preorder(root: AstNode) -> Iterator[tuple[int, AstNode, int]]:
    """Yield (preorder_id, node, level)."""
    counter = 0
    stack = [(root, 0)]
    order: list[tuple[AstNode, int]] = []
    while stack:
        node, level = stack.pop()
        order.append((node, level))
        for child in reversed(node.children):
            stack.append((child, level + 1))
    for node, level in order:
        yield counter, node, level
        counter += 1


def extract_paths(tree: AstTree, max_paths: int, max_nodes: int) -> PathSet:
    """One path per terminal, root to terminal, in left-to-right terminal
    order. Overlong paths keep the root-side prefix of max_nodes-1 nodes
    plus the terminal; at most max_paths paths are kept."""
    paths: list[NodePath] = []

    def walk(node: AstNode, node_id: int, trail: list[tuple[str, bool, int]]) -> int:
        trail.append((node.render, node.renders_by_value, node_id))
        next_id = node_id + 1
        if node.is_terminal:
            if len(paths) < max_paths:
                entries = trail if len(trail) <= max_nodes else trail[: max_nodes - 1] + [trail[-1]]
                labels, flags, ids = zip(*entries)
                paths.append(NodePath(labels, flags, ids))
        else:
            for child in node.children:
                next_id = walk(child, next_id, trail)
        trail.pop()
        return next_id

    walk(tree.root, 0, [])
    return PathSet(tuple(paths))
