"""Text grammars for polynomials, piecewise functions, and words.

Polynomial grammar: rational literals p/q or integers, the indeterminate t,
operators + - * ^ (nonnegative integer exponents) and parentheses.
Piecewise literal:

    piecewise{ [0,1/2]: 1 - t; (1/2,1]: t^2 }

Word grammar: whitespace-separated tokens X, X*, [<poly>], with power sugar
(...)^k.  Renderers round-trip through the parsers exactly.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import WordSyntaxError
from .funcspace import PiecewisePoly, Poly, const, from_poly, piecewise

F0 = Fraction(0)
F1 = Fraction(1)


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_PUNCT = "+-*^()[]{}:;,"


def _tokenize(text: str):
    tokens = []  # (kind, value, pos)
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            num = int(text[i:j])
            if j < n and text[j] == "/":
                k = j + 1
                while k < n and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    raise WordSyntaxError("expected denominator digits", j + 1)
                den = int(text[j + 1:k])
                if den == 0:
                    raise WordSyntaxError("zero denominator", j + 1)
                tokens.append(("rat", Fraction(num, den), i))
                i = k
            else:
                tokens.append(("rat", Fraction(num), i))
                i = j
            continue
        if text.startswith("piecewise", i):
            tokens.append(("piecewise", None, i))
            i += len("piecewise")
            continue
        if ch == "t" and not text.startswith("tX", i):
            tokens.append(("t", None, i))
            i += 1
            continue
        if ch == "X":
            if i + 1 < n and text[i + 1] == "*":
                tokens.append(("Xstar", None, i))
                i += 2
            else:
                tokens.append(("X", None, i))
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append((ch, None, i))
            i += 1
            continue
        raise WordSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Stream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise WordSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok


# ---------------------------------------------------------------------------
# polynomial / piecewise parser
# ---------------------------------------------------------------------------

def parse_function(text: str) -> PiecewisePoly:
    """Parse a polynomial or piecewise expression on [0,1]."""
    st = _Stream(_tokenize(text))
    f = _parse_expr(st)
    st.expect("end")
    return f


def _parse_expr(st: _Stream) -> PiecewisePoly:
    if st.peek()[0] == "piecewise":
        return _parse_piecewise(st)
    out = _parse_term(st)
    while st.peek()[0] in ("+", "-"):
        op = st.next()[0]
        rhs = _parse_term(st)
        out = out + rhs if op == "+" else out - rhs
    return out


def _parse_term(st: _Stream) -> PiecewisePoly:
    out = _parse_factor(st)
    while st.peek()[0] == "*":
        st.next()
        out = out * _parse_factor(st)
    return out


def _parse_factor(st: _Stream) -> PiecewisePoly:
    base = _parse_atom(st)
    while st.peek()[0] == "^":
        st.next()
        tok = st.expect("rat")
        if tok[1].denominator != 1 or tok[1] < 0:
            raise WordSyntaxError("exponent must be a nonnegative integer", tok[2])
        base = base ** int(tok[1])
    return base


def _parse_atom(st: _Stream) -> PiecewisePoly:
    tok = st.next()
    kind = tok[0]
    if kind == "rat":
        return const(tok[1])
    if kind == "t":
        return from_poly((F0, F1))
    if kind == "-":
        return -_parse_atom_with_power(st)
    if kind == "+":
        return _parse_atom_with_power(st)
    if kind == "(":
        inner = _parse_expr(st)
        st.expect(")")
        return inner
    raise WordSyntaxError(f"unexpected token {kind!r}", tok[2])


def _parse_atom_with_power(st: _Stream) -> PiecewisePoly:
    # unary sign binds looser than ^ so that -t^2 means -(t^2)
    base = _parse_atom(st)
    while st.peek()[0] == "^":
        st.next()
        tok = st.expect("rat")
        if tok[1].denominator != 1 or tok[1] < 0:
            raise WordSyntaxError("exponent must be a nonnegative integer", tok[2])
        base = base ** int(tok[1])
    return base


def _parse_piecewise(st: _Stream) -> PiecewisePoly:
    st.expect("piecewise")
    st.expect("{")
    breakpoints = []
    pieces = []
    first = True
    while True:
        open_tok = st.next()
        if open_tok[0] not in ("[", "("):
            raise WordSyntaxError("expected interval", open_tok[2])
        lo = st.expect("rat")[1]
        st.expect(",")
        hi = st.expect("rat")[1]
        close_tok = st.next()
        if close_tok[0] != "]":
            raise WordSyntaxError("intervals end closed: expected ']'", close_tok[2])
        st.expect(":")
        body = _parse_expr(st)
        if first:
            if open_tok[0] != "[" or lo != 0:
                raise WordSyntaxError("first interval must start [0", open_tok[2])
            breakpoints.append(lo)
            first = False
        else:
            if open_tok[0] != "(" or lo != breakpoints[-1]:
                raise WordSyntaxError("intervals must chain as (prev, next]",
                                      open_tok[2])
        if hi <= lo:
            raise WordSyntaxError("interval endpoints must increase", close_tok[2])
        breakpoints.append(hi)
        if len(body.pieces) != 1:
            raise WordSyntaxError("nested piecewise bodies are not supported",
                                  open_tok[2])
        pieces.append(body.pieces[0])
        nxt = st.next()
        if nxt[0] == ";":
            continue
        if nxt[0] == "}":
            break
        raise WordSyntaxError("expected ';' or '}'", nxt[2])
    if breakpoints[-1] != 1:
        raise WordSyntaxError("piecewise intervals must cover up to 1")
    return piecewise(breakpoints, pieces)


# ---------------------------------------------------------------------------
# renderers (inverse of the parsers)
# ---------------------------------------------------------------------------

def render_poly(coeffs: Poly) -> str:
    if not coeffs:
        return "0"
    parts = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        elif mag == 1:
            body = "t" if k == 1 else f"t^{k}"
        else:
            body = f"{mag}*t" if k == 1 else f"{mag}*t^{k}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts) if parts else "0"


def render_function(f: PiecewisePoly) -> str:
    if len(f.pieces) == 1:
        return render_poly(f.pieces[0])
    chunks = []
    for i, p in enumerate(f.pieces):
        lo, hi = f.breakpoints[i], f.breakpoints[i + 1]
        bracket = "[" if i == 0 else "("
        chunks.append(f"{bracket}{lo},{hi}]: {render_poly(p)}")
    return "piecewise{ " + "; ".join(chunks) + " }"


# ---------------------------------------------------------------------------
# word parser
# ---------------------------------------------------------------------------

def parse_word(text: str):
    """Parse the word grammar into a normalized Word."""
    from .moments import Word

    if not text or not text.strip():
        raise WordSyntaxError("empty word", 0)
    st = _Stream(_tokenize(text))
    items = _parse_word_seq(st, top=True)
    st.expect("end")
    return Word.of(items)


def _parse_word_seq(st: _Stream, top: bool):
    items = []
    while True:
        kind, _val, pos = st.peek()
        if kind == "X":
            st.next()
            items.append("X")
        elif kind == "Xstar":
            st.next()
            items.append("X*")
        elif kind == "[":
            st.next()
            body = _parse_expr(st)
            st.expect("]")
            items.append(body)
        elif kind == "(":
            st.next()
            inner = _parse_word_seq(st, top=False)
            st.expect(")")
            st.expect("^")
            tok = st.expect("rat")
            if tok[1].denominator != 1 or tok[1] < 0:
                raise WordSyntaxError("word exponent must be a nonnegative "
                                      "integer", tok[2])
            items.extend(list(inner) * int(tok[1]))
        else:
            break
    if not items and top:
        raise WordSyntaxError("empty word", st.peek()[2])
    return items


def render_word(word) -> str:
    if word.is_zero:
        return "[0]"
    parts = []
    for letter in word.letters:
        if letter == "X" or letter == "X*":
            parts.append(letter)
        else:
            parts.append(f"[{render_function(letter)}]")
    return " ".join(parts) if parts else "[1]"
