"""Payload values shared by history and task files.

Grammar::

    value  := int | symbol | set | tuple
    set    := '{' [value (',' value)*] '}'
    tuple  := '(' value (',' value)+ ')'

Sets become ``frozenset``, tuples become ``tuple``, symbols stay ``str``.
An empty argument list (``deq()``) is represented by ``None``.
"""

import re

from .errors import MalformedEvent

_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def sort_key(value):
    """Total order over payload values, used for canonical printing."""
    if value is None:
        return (0,)
    if isinstance(value, bool):
        return (1, int(value))
    if isinstance(value, int):
        return (1, value)
    if isinstance(value, str):
        return (2, value)
    if isinstance(value, tuple):
        return (3, len(value), tuple(sort_key(v) for v in value))
    if isinstance(value, frozenset):
        items = sorted((sort_key(v) for v in value))
        return (4, len(items), tuple(items))
    raise TypeError(f"unsupported payload {value!r}")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return "(" + ",".join(format_value(v) for v in value) + ")"
    if isinstance(value, (frozenset, set)):
        return "{" + ",".join(format_value(v) for v in sorted(value, key=sort_key)) + "}"
    raise TypeError(f"unsupported payload {value!r}")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            return None, None
        return m, m.lastindex

    def take(self, literal: str | None = None):
        m, kind = self.peek()
        if m is None:
            raise MalformedEvent(f"unexpected end of payload in {self.text!r}")
        tok = m.group(kind)
        if literal is not None and tok != literal:
            raise MalformedEvent(f"expected {literal!r} at {self.pos} in {self.text!r}, got {tok!r}")
        self.pos = m.end()
        return tok, kind

    def at(self, literal: str) -> bool:
        m, kind = self.peek()
        return m is not None and kind == 3 and m.group(3) == literal

    def value(self):
        tok, kind = self.take()
        if kind == 1:
            return int(tok)
        if kind == 2:
            return tok
        if tok == "{":
            items = []
            if self.at("}"):
                self.take("}")
                return frozenset()
            while True:
                items.append(self.value())
                if self.at(","):
                    self.take(",")
                    continue
                self.take("}")
                return frozenset(items)
        if tok == "(":
            items = [self.value()]
            while self.at(","):
                self.take(",")
                items.append(self.value())
            self.take(")")
            if len(items) < 2:
                raise MalformedEvent(f"tuple needs two or more items in {self.text!r}")
            return tuple(items)
        raise MalformedEvent(f"unexpected {tok!r} in {self.text!r}")

    def done(self) -> bool:
        return self.text[self.pos:].strip() == ""


def parse_value(text: str):
    """Parse one payload; blank text yields ``None``."""
    if text.strip() == "":
        return None
    p = _Parser(text)
    v = p.value()
    if not p.done():
        raise MalformedEvent(f"trailing input {text[p.pos:]!r} in payload {text!r}")
    return v
