"""Line-oriented declaration language for the workbench.

A source file is a sequence of statements, one per line; `mates` blocks open
with `{` and close with a bare `}`. Every name must be declared before it is
used, so references are acyclic by construction. `check` statements queue
verification commands that the runner executes in file order.

The full grammar, with one worked example per statement, lives in
docs/dsl.md. Parse errors carry the line and column of the offending token;
errors raised while building a declaration keep their class and gain a
`line N:` prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import RATIONALS, AlgebraMap, AlgebraPresentation
from .complexes import PerfectComplex
from .cotangent import de_rham
from .errors import (
    BudgetExceededError,
    FolwerkError,
    InputError,
    SyntaxInputError,
    TypeMismatchError,
    UnknownNameError,
)
from .foliation import final_foliation, pullback_foliation, zero_foliation
from .graded_mixed import GradedMixedMap, GradedMixedPresentation, pushforward_gm
from .mates import AdjunctionContext
from .poly import Gen, Polynomial
from .pushforward import (
    FiniteFreeMap,
    f_plus,
    mapping_scheme,
    pushforward_foliation,
    weil_restrict,
)
from .windows import DEFAULT_WINDOW, Window

# kinds whose object is (or wraps) a foliation presentation
FOLIATION_KINDS = ("foliation", "pullback", "pushfol")
# kinds a homology expectation can attach to
HOMOLOGY_KINDS = FOLIATION_KINDS + ("complex", "fplus")


# -- tokens ------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "num" | "op" | "end"
    text: str
    col: int


_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<op><=|->|=>|\^\*|-\||[][(){}^*/+,.:=|<>@;-])"
)


def _tokenize(text: str, line: int) -> list[Token]:
    out: list[Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise SyntaxInputError(f"unreadable character {text[i]!r}", line, i + 1)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), m.start() + 1))
        i = m.end()
    out.append(Token("end", "end of line", len(text) + 1))
    return out


class _Stream:
    def __init__(self, text: str, line: int):
        self.toks = _tokenize(text, line)
        self.line = line
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def at_end(self) -> bool:
        return self.peek().kind == "end"

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            got = self.peek()
            want = what or (repr(text) if text else f"a {kind}")
            raise SyntaxInputError(f"expected {want}, got {got.text!r}", self.line, got.col)
        return t

    def done(self) -> None:
        if not self.at_end():
            t = self.peek()
            raise SyntaxInputError(f"trailing input {t.text!r}", self.line, t.col)


# -- polynomial expressions ----------------------------------------------------

# expr  := term (('+'|'-') term)*
# term  := factor ('*' factor)*
# factor:= '-' factor | atom ('^' INT)?
# atom  := NAME | INT ('/' INT)? | '(' expr ')'


def _parse_poly(s: _Stream, gens: tuple[Gen, ...], where: str) -> Polynomial:
    index = {g.name: k for k, g in enumerate(gens)}

    def atom() -> Polynomial:
        t = s.peek()
        if s.accept("op", "("):
            e = expr()
            s.expect("op", ")")
            return e
        if t.kind == "num":
            s.i += 1
            num = int(t.text)
            if s.accept("op", "/"):
                den = int(s.expect("num", what="a denominator").text)
                if den == 0:
                    raise SyntaxInputError("zero denominator", s.line, t.col)
                return Polynomial.const(gens, Fraction(num, den))
            return Polynomial.const(gens, Fraction(num))
        if t.kind == "name":
            s.i += 1
            k = index.get(t.text)
            if k is None:
                raise UnknownNameError(
                    f"line {s.line}: unknown generator {t.text!r} in {where}"
                )
            return Polynomial.gen(gens, k)
        raise SyntaxInputError(f"expected a polynomial, got {t.text!r}", s.line, t.col)

    def factor() -> Polynomial:
        if s.accept("op", "-"):
            return -factor()
        a = atom()
        if s.accept("op", "^"):
            a = a ** int(s.expect("num", what="an exponent").text)
        return a

    def term() -> Polynomial:
        f = factor()
        while s.accept("op", "*"):
            f = f * factor()
        return f

    def expr() -> Polynomial:
        t = term()
        while True:
            if s.accept("op", "+"):
                t = t + term()
            elif s.accept("op", "-"):
                t = t - term()
            else:
                return t

    return expr()


# -- workspace -------------------------------------------------------------------


@dataclass
class Declaration:
    name: str
    kind: str
    obj: object
    line: int
    inputs: tuple[str, ...] = ()
    window: Window | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class CheckCommand:
    name: str
    line: int
    homology: dict[int, int] | None = None
    cohomology: dict[int, int] | None = None


@dataclass
class MatesBlock:
    """An adjunction context plus the demands queued inside its braces."""

    context: AdjunctionContext
    demands: list[tuple[str, tuple[str, ...], int]]


@dataclass
class TangentQuery:
    argument: object  # pushed-forward foliation or mapping-scheme result
    point: AlgebraMap


class Workspace:
    """Parsed declarations keyed by name, plus the queued check commands."""

    def __init__(self):
        self.declarations: dict[str, Declaration] = {}
        self.checks: list[CheckCommand] = []

    def declare(self, decl: Declaration) -> None:
        prior = self.declarations.get(decl.name)
        if prior is not None:
            raise SyntaxInputError(
                f"duplicate name {decl.name!r}: first declared at line {prior.line}",
                decl.line,
            )
        self.declarations[decl.name] = decl

    def get(self, name: str, line: int, kinds: tuple[str, ...] | None = None) -> Declaration:
        decl = self.declarations.get(name)
        if decl is None:
            raise UnknownNameError(f"line {line}: nothing named {name!r} is declared")
        if kinds is not None and decl.kind not in kinds:
            raise TypeMismatchError(
                f"line {line}: {name!r} is a {decl.kind}, expected {' or '.join(kinds)}"
            )
        return decl

    def algebra(self, name: str, line: int) -> AlgebraPresentation:
        if name == "Q":
            return RATIONALS
        return self.get(name, line, ("algebra",)).obj


# -- the parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, ws: Workspace):
        self.ws = ws
        # open mates block: (name, context, demands, opening line)
        self.mates: tuple[str, AdjunctionContext, list, int] | None = None

    def feed(self, source: str) -> None:
        for line_no, raw in enumerate(source.splitlines(), start=1):
            text = raw.split("#", 1)[0].rstrip()
            if not text.strip():
                continue
            if self.mates is not None:
                self._mates_line(text, line_no)
            else:
                self._statement(text, line_no)
        if self.mates is not None:
            name, _, _, opened = self.mates
            raise SyntaxInputError(f"mates block {name!r} is never closed", opened)

    def _statement(self, text: str, line: int) -> None:
        s = _Stream(text, line)
        head = s.expect("name", what="a statement keyword")
        fn = getattr(self, f"_stmt_{head.text}", None)
        if fn is None:
            raise SyntaxInputError(f"unknown statement {head.text!r}", line, head.col)
        fn(s, line)

    def _build(self, line: int, thunk):
        """Run a constructor, tagging any workbench error with the line."""
        try:
            return thunk()
        except (SyntaxInputError, BudgetExceededError):
            raise
        except FolwerkError as e:
            raise type(e)(f"line {line}: {e}") from e

    # -- small shared pieces -------------------------------------------------

    def _name_list(self, s: _Stream, close: str) -> list[str]:
        names: list[str] = []
        if s.accept("op", close):
            return names
        while True:
            names.append(s.expect("name", what="a name").text)
            if s.accept("op", close):
                return names
            s.expect("op", ",")

    def _image_block(self, s: _Stream, gens: tuple[Gen, ...], where: str) -> dict[str, Polynomial]:
        s.expect("op", "{")
        images: dict[str, Polynomial] = {}
        if s.accept("op", "}"):
            return images
        while True:
            t = s.expect("name", what="a generator name")
            if t.text in images:
                raise SyntaxInputError(f"image of {t.text!r} given twice", s.line, t.col)
            s.expect("op", "->")
            images[t.text] = _parse_poly(s, gens, where)
            if s.accept("op", "}"):
                return images
            s.expect("op", ",")

    def _signed_int(self, s: _Stream) -> int:
        neg = s.accept("op", "-") is not None
        n = int(s.expect("num", what="an integer").text)
        return -n if neg else n

    def _fraction(self, s: _Stream) -> Fraction:
        neg = s.accept("op", "-") is not None
        t = s.expect("num", what="a number")
        num = int(t.text)
        den = 1
        if s.accept("op", "/"):
            den = int(s.expect("num", what="a denominator").text)
            if den == 0:
                raise SyntaxInputError("zero denominator", s.line, t.col)
        q = Fraction(num, den)
        return -q if neg else q

    def _int_table(self, s: _Stream) -> dict[int, int]:
        s.expect("op", "{")
        table: dict[int, int] = {}
        if s.accept("op", "}"):
            return table
        while True:
            k = self._signed_int(s)
            s.expect("op", ":")
            table[k] = int(s.expect("num", what="a dimension").text)
            if s.accept("op", "}"):
                return table
            s.expect("op", ",")

    def _relative_pair(self, s: _Stream, line: int) -> tuple[AlgebraPresentation, str]:
        """Parse `(B/A)` and confirm A really is the base of B's tower."""
        s.expect("op", "(")
        bname = s.expect("name", what="an algebra name").text
        b = self.ws.algebra(bname, line)
        s.expect("op", "/")
        aname = s.expect("name", what="a base name").text
        a = self.ws.algebra(aname, line)
        s.expect("op", ")")
        actual = b.base if b.base is not None else b
        if a is not actual:
            raise TypeMismatchError(
                f"line {line}: {bname!r} is presented over {actual.name!r}, not {aname!r}"
            )
        return b, bname

    def _finite_free(self, mname: str, line: int) -> FiniteFreeMap:
        decl = self.ws.get(mname, line, ("map",))
        ffm = decl.extra.get("finite_free")
        if ffm is None:
            raise TypeMismatchError(f"line {line}: map {mname!r} has no declared basis")
        return ffm

    def _graded_mixed(self, name: str, line: int) -> GradedMixedPresentation:
        decl = self.ws.get(name, line, ("derham", "mixed", "pushgm"))
        return decl.obj.mixed if decl.kind == "derham" else decl.obj

    # -- statements ----------------------------------------------------------

    def _stmt_algebra(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="an algebra name").text
        s.expect("op", "=")
        bname = s.expect("name", what="a base algebra").text
        base = self.ws.algebra(bname, line)
        s.expect("op", "[")
        gens = tuple(Gen(n) for n in self._name_list(s, "]"))
        full = base.gens + gens
        rels: list[Polynomial] = []
        if s.accept("op", "/"):
            s.expect("op", "(")
            while True:
                rels.append(_parse_poly(s, full, f"a relation of {name!r}"))
                if s.accept("op", ")"):
                    break
                s.expect("op", ",")
        s.done()
        obj = self._build(line, lambda: AlgebraPresentation(name, base, gens, tuple(rels)))
        inputs = () if base is RATIONALS else (bname,)
        self.ws.declare(Declaration(name, "algebra", obj, line, inputs))

    def _stmt_map(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a map name").text
        s.expect("op", ":")
        sname = s.expect("name", what="a source algebra").text
        src = self.ws.algebra(sname, line)
        s.expect("op", "->")
        tname = s.expect("name", what="a target algebra").text
        tgt = self.ws.algebra(tname, line)
        images = self._image_block(s, tgt.gens, f"map {name!r}")
        s.done()
        obj = self._build(line, lambda: AlgebraMap(name, src, tgt, images))
        self.ws.declare(Declaration(name, "map", obj, line, (sname, tname)))

    def _stmt_basis(self, s: _Stream, line: int) -> None:
        mname = s.expect("name", what="a map name").text
        decl = self.ws.get(mname, line, ("map",))
        m: AlgebraMap = decl.obj
        s.expect("op", "=")
        s.expect("op", "{")
        basis: list[Polynomial] = []
        while True:
            basis.append(_parse_poly(s, m.target.gens, f"basis of {mname!r}"))
            if s.accept("op", "}"):
                break
            s.expect("op", ",")
        mult: list[tuple[Polynomial, Polynomial]] = []
        if s.accept("name", "mult"):
            s.expect("op", "{")
            if not s.accept("op", "}"):
                while True:
                    lhs = _parse_poly(s, m.target.gens, f"mult table of {mname!r}")
                    s.expect("op", "=")
                    rhs = _parse_poly(s, m.target.gens, f"mult table of {mname!r}")
                    mult.append((lhs, rhs))
                    if s.accept("op", "}"):
                        break
                    s.expect("op", ",")
        s.done()

        def build() -> FiniteFreeMap:
            for i in range(len(m.source.gens)):
                want = m.target.reduce(m.target.embed(Polynomial.gen(m.source.gens, i)))
                if m.images[i] != want:
                    raise TypeMismatchError(
                        f"basis declared on {mname!r}, which is not the tower inclusion"
                    )
            ffm = FiniteFreeMap(mname, m.source, m.target, basis)
            for k, (lhs, rhs) in enumerate(mult):
                if not m.target.is_zero_mod(lhs - rhs):
                    raise InputError(
                        f"declared product {k} in the basis of {mname!r} does not "
                        f"hold in {m.target.name!r}"
                    )
            return ffm

        decl.extra["finite_free"] = self._build(line, build)

    def _stmt_derham(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        kw = s.expect("name", what="DR")
        if kw.text != "DR":
            raise SyntaxInputError(f"expected DR, got {kw.text!r}", line, kw.col)
        b, bname = self._relative_pair(s, line)
        wbound = dbound = None
        while not s.at_end():
            clause = s.expect("name", what="weight or deg")
            s.expect("op", "<=")
            val = int(s.expect("num", what="a bound").text)
            if clause.text == "weight":
                wbound = val
            elif clause.text == "deg":
                dbound = val
            else:
                raise SyntaxInputError(
                    f"unknown bound {clause.text!r}", line, clause.col
                )
        s.done()
        window = None
        if wbound is not None or dbound is not None:
            window = Window(
                weight=wbound if wbound is not None else DEFAULT_WINDOW.weight,
                poly_degree=dbound if dbound is not None else DEFAULT_WINDOW.poly_degree,
            )
        obj = self._build(line, lambda: de_rham(b, weight_bound=wbound, window=window))
        self.ws.declare(Declaration(name, "derham", obj, line, (bname,), window))

    def _stmt_foliation(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        kw = s.expect("name", what="final or zero")
        if kw.text not in ("final", "zero"):
            raise SyntaxInputError(f"expected final or zero, got {kw.text!r}", line, kw.col)
        b, bname = self._relative_pair(s, line)
        s.done()
        ctor = final_foliation if kw.text == "final" else zero_foliation
        obj = self._build(line, lambda: ctor(b))
        self.ws.declare(Declaration(name, "foliation", obj, line, (bname,)))

    def _stmt_pullback(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        mname = s.expect("name", what="a map name").text
        m = self.ws.get(mname, line, ("map",)).obj
        s.expect("op", "^*")
        fname = s.expect("name", what="a foliation name").text
        fol = self.ws.get(fname, line, FOLIATION_KINDS).obj
        s.done()
        obj = self._build(line, lambda: pullback_foliation(fol, m, name=name))
        self.ws.declare(Declaration(name, "pullback", obj, line, (mname, fname)))

    def _stmt_weilres(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        s.expect("name", "pushforward", what="pushforward")
        s.expect("op", "(")
        aname = s.expect("name", what="an algebra name").text
        alg = self.ws.algebra(aname, line)
        s.expect("op", ",")
        mname = s.expect("name", what="a map name").text
        ffm = self._finite_free(mname, line)
        s.expect("op", ")")
        s.done()
        obj = self._build(line, lambda: weil_restrict(alg, ffm, name=name))
        self.ws.declare(Declaration(name, "weilres", obj, line, (aname, mname)))

    def _stmt_mapsch(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        s.expect("name", "maps", what="maps")
        s.expect("op", "(")
        mname = s.expect("name", what="a map name").text
        ffm = self._finite_free(mname, line)
        s.expect("op", ",")
        aname = s.expect("name", what="an algebra name").text
        alg = self.ws.algebra(aname, line)
        s.expect("op", ")")
        s.done()
        obj = self._build(line, lambda: mapping_scheme(ffm, alg, name=name))
        self.ws.declare(Declaration(name, "mapsch", obj, line, (mname, aname)))

    def _stmt_pushfol(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        s.expect("name", "pushforward", what="pushforward")
        s.expect("op", "(")
        fname = s.expect("name", what="a foliation name").text
        fol = self.ws.get(fname, line, FOLIATION_KINDS).obj
        s.expect("op", ",")
        mname = s.expect("name", what="a map name").text
        ffm = self._finite_free(mname, line)
        s.expect("op", ")")
        s.done()
        obj = self._build(line, lambda: pushforward_foliation(fol, ffm, name=name))
        self.ws.declare(Declaration(name, "pushfol", obj, line, (fname, mname)))

    def _stmt_gmmap(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a map name").text
        s.expect("op", ":")
        sname = s.expect("name", what="a graded mixed source").text
        src = self._graded_mixed(sname, line)
        s.expect("op", "->")
        tname = s.expect("name", what="a graded mixed target").text
        tgt = self._graded_mixed(tname, line)
        images = self._image_block(s, tgt.algebra.gens, f"graded mixed map {name!r}")
        s.done()
        obj = self._build(line, lambda: GradedMixedMap(name, src, tgt, images))
        self.ws.declare(Declaration(name, "gmmap", obj, line, (sname, tname)))

    def _stmt_pushgm(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        s.expect("name", "pushforward", what="pushforward")
        s.expect("op", "(")
        dname = s.expect("name", what="a graded mixed name").text
        gm = self._graded_mixed(dname, line)
        s.expect("op", ",")
        gname = s.expect("name", what="a graded mixed map").text
        g = self.ws.get(gname, line, ("gmmap",)).obj
        s.expect("op", ")")
        s.done()
        obj = self._build(line, lambda: pushforward_gm(gm, g))
        self.ws.declare(Declaration(name, "pushgm", obj, line, (dname, gname)))

    def _stmt_mixed(self, s: _Stream, line: int) -> None:
        # mixed M = B [dx deg -1, dy deg -1 weight 1] d { ... } eps { ... }
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        aname = s.expect("name", what="an algebra name").text
        alg = self.ws.algebra(aname, line)
        s.expect("op", "[")
        specs: list[Gen] = []
        if not s.accept("op", "]"):
            while True:
                gname = s.expect("name", what="a generator name").text
                deg, weight = 0, 1
                while s.peek().kind == "name" and s.peek().text in ("deg", "weight"):
                    kw = s.expect("name")
                    if kw.text == "deg":
                        deg = self._signed_int(s)
                    else:
                        weight = self._signed_int(s)
                specs.append(Gen(gname, deg=deg, weight=weight))
                if s.accept("op", "]"):
                    break
                s.expect("op", ",")
        full = alg.gens + tuple(specs)
        d_images: dict[str, Polynomial] = {}
        eps_images: dict[str, Polynomial] = {}
        while not s.at_end():
            kw = s.expect("name", what="d or eps")
            if kw.text == "d":
                d_images = self._image_block(s, full, f"d of {name!r}")
            elif kw.text == "eps":
                eps_images = self._image_block(s, full, f"eps of {name!r}")
            else:
                raise SyntaxInputError(f"expected d or eps, got {kw.text!r}", line, kw.col)
        s.done()
        base = alg.base if alg.base is not None else RATIONALS
        obj = self._build(
            line,
            lambda: GradedMixedPresentation(
                name, base, alg, tuple(specs), d_images, eps_images
            ),
        )
        self.ws.declare(Declaration(name, "mixed", obj, line, (aname,)))

    def _stmt_complex(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("name", "over", what="over")
        aname = s.expect("name", what="an algebra name").text
        alg = self.ws.algebra(aname, line)
        s.expect("op", "{")
        terms: dict[int, int] = {}
        if not s.accept("op", "}"):
            while True:
                n = self._signed_int(s)
                s.expect("op", ":")
                terms[n] = int(s.expect("num", what="a rank").text)
                if s.accept("op", "}"):
                    break
                s.expect("op", ",")
        diffs: dict[int, list] = {}
        if s.accept("name", "d"):
            s.expect("op", "{")
            if not s.accept("op", "}"):
                while True:
                    n = self._signed_int(s)
                    s.expect("op", "->")
                    diffs[n] = self._matrix(s, alg.gens, f"differential of {name!r}")
                    if s.accept("op", "}"):
                        break
                    s.expect("op", ",")
        s.done()
        obj = self._build(line, lambda: PerfectComplex(alg, terms, diffs))
        self.ws.declare(Declaration(name, "complex", obj, line, (aname,)))

    def _matrix(self, s: _Stream, gens: tuple[Gen, ...], where: str) -> list[list[Polynomial]]:
        s.expect("op", "[")
        rows: list[list[Polynomial]] = []
        while True:
            s.expect("op", "[")
            row: list[Polynomial] = []
            while True:
                row.append(_parse_poly(s, gens, where))
                if s.accept("op", "]"):
                    break
                s.expect("op", ",")
            rows.append(row)
            if s.accept("op", "]"):
                return rows
            s.expect("op", ",")

    def _stmt_fplus(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        s.expect("name", "f_plus", what="f_plus")
        s.expect("op", "(")
        cname = s.expect("name", what="a complex name").text
        cx = self.ws.get(cname, line, ("complex", "fplus")).obj
        s.expect("op", ",")
        mname = s.expect("name", what="a map name").text
        ffm = self._finite_free(mname, line)
        s.expect("op", ")")
        s.done()
        obj = self._build(line, lambda: f_plus(cx, ffm))
        self.ws.declare(Declaration(name, "fplus", obj, line, (cname, mname)))

    def _stmt_tangentat(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a name").text
        s.expect("op", "=")
        wname = s.expect("name", what="a restricted scheme").text
        decl = self.ws.get(wname, line, ("pushfol", "mapsch"))
        s.expect("name", "at", what="at")
        s.expect("op", "(")
        vals: list[Fraction] = []
        if not s.accept("op", ")"):
            while True:
                vals.append(self._fraction(s))
                if s.accept("op", ")"):
                    break
                s.expect("op", ",")
        s.done()
        w = decl.obj.weil if decl.kind == "pushfol" else decl.obj
        pres = w.presentation
        if len(vals) != len(pres.own_gens):
            raise TypeMismatchError(
                f"line {line}: {wname!r} has {len(pres.own_gens)} coordinates, "
                f"got {len(vals)} values"
            )
        images = {
            g.name: Polynomial.const((), v) for g, v in zip(pres.own_gens, vals)
        }
        point = self._build(
            line, lambda: AlgebraMap(f"{name}.pt", pres, RATIONALS, images)
        )
        obj = TangentQuery(decl.obj, point)
        self.ws.declare(Declaration(name, "tangentat", obj, line, (wname,)))

    def _stmt_mates(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a context name").text
        s.expect("op", "{")
        s.done()
        if name in self.ws.declarations:
            # surface the collision now, not when the block closes
            self.ws.declare(Declaration(name, "mates", None, line))
        self.mates = (name, AdjunctionContext(name), [], line)

    def _stmt_check(self, s: _Stream, line: int) -> None:
        name = s.expect("name", what="a declared name").text
        decl = self.ws.get(name, line)
        homology = cohomology = None
        while not s.at_end():
            kw = s.expect("name", what="homology or cohomology")
            if kw.text == "homology":
                if decl.kind not in HOMOLOGY_KINDS:
                    raise TypeMismatchError(
                        f"line {line}: homology expectation on a {decl.kind}"
                    )
                homology = self._int_table(s)
            elif kw.text == "cohomology":
                if decl.kind != "derham":
                    raise TypeMismatchError(
                        f"line {line}: cohomology expectation on a {decl.kind}"
                    )
                cohomology = self._int_table(s)
            else:
                raise SyntaxInputError(
                    f"unknown check clause {kw.text!r}", line, kw.col
                )
        s.done()
        self.ws.checks.append(CheckCommand(name, line, homology, cohomology))

    # -- mates block statements -------------------------------------------------

    def _word(self, s: _Stream) -> tuple[str, ...]:
        parts = [s.expect("name", what="a 1-cell").text]
        while s.accept("op", "."):
            parts.append(s.expect("name", what="a 1-cell").text)
        return tuple(parts)

    def _mates_line(self, text: str, line: int) -> None:
        name, ctx, demands, opened = self.mates
        if text.strip() == "}":
            self.ws.declare(
                Declaration(name, "mates", MatesBlock(ctx, demands), opened)
            )
            self.mates = None
            return
        s = _Stream(text, line)
        head = s.expect("name", what="a mates statement")
        if head.text == "cell":
            while True:
                nm = s.expect("name", what="a 0-cell name").text
                self._build(line, lambda nm=nm: ctx.add_cell(nm))
                if not s.accept("op", ","):
                    break
        elif head.text == "arrow":
            nm = s.expect("name", what="a 1-cell name").text
            s.expect("op", ":")
            src = s.expect("name", what="a 0-cell").text
            s.expect("op", "->")
            dst = s.expect("name", what="a 0-cell").text
            self._build(line, lambda: ctx.add_arrow(nm, src, dst))
        elif head.text == "adjunction":
            nm = s.expect("name", what="an adjunction name").text
            s.expect("op", "=")
            left = s.expect("name", what="the left leg").text
            s.expect("op", "-|")
            right = s.expect("name", what="the right leg").text
            unit = counit = None
            while not s.at_end():
                kw = s.expect("name", what="unit or counit")
                if kw.text == "unit":
                    unit = s.expect("name", what="a 2-cell name").text
                elif kw.text == "counit":
                    counit = s.expect("name", what="a 2-cell name").text
                else:
                    raise SyntaxInputError(
                        f"expected unit or counit, got {kw.text!r}", line, kw.col
                    )
            self._build(line, lambda: ctx.add_adjunction(nm, left, right, unit, counit))
        elif head.text == "square":
            nm = s.expect("name", what="a 2-cell name").text
            s.expect("op", ":")
            src = self._word(s)
            s.expect("op", "=>")
            tgt = self._word(s)
            invertible = s.accept("name", "invertible") is not None
            self._build(line, lambda: ctx.add_square(nm, src, tgt, invertible))
        elif head.text in ("bc", "roundtrip"):
            target = s.expect("name", what="a square name").text
            if target not in ctx.two_gens:
                raise UnknownNameError(f"line {line}: unknown 2-cell {target!r}")
            demands.append((head.text, (target,), line))
        elif head.text == "paste":
            top = s.expect("name", what="the upper square").text
            bottom = s.expect("name", what="the lower square").text
            for nm in (top, bottom):
                if nm not in ctx.two_gens:
                    raise UnknownNameError(f"line {line}: unknown 2-cell {nm!r}")
            demands.append(("paste", (top, bottom), line))
        else:
            raise SyntaxInputError(
                f"unknown mates statement {head.text!r}", line, head.col
            )
        s.done()


def parse(source: str) -> Workspace:
    """Parse DSL source into a workspace of built declarations."""
    ws = Workspace()
    _Parser(ws).feed(source)
    return ws
