"""
DSL Service - parse and render `.mjp` model documents.

The format is line oriented; `#` starts a comment. Example:

    species A B
    param k = 1.0
    reaction a_in: 0 -> 1 A @ mass_action(k)
    reaction b_in: 0 -> 1 B @ mass_action(k)
    init point (0, 0)
    terminal pred "A>=64 and B>=64" at 20
    options delta=1e-4 m=4 bounds=(159, 159)
"""
import itertools
import re
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple
from pydantic import ValidationError
from models.document import (
    BinaryTest,
    Interval,
    ModelDocument,
    ObservationTerminal,
    PointInitial,
    PointTerminal,
    Predicate,
    PredicateTerminal,
    RefinementOptions,
    TableInitial,
)
from models.errors import ModelParseError, ModelValidationError
from models.network import (
    CustomFactor,
    Hill,
    MassAction,
    Reaction,
    ReactionNetwork,
    SeparableCustom,
    Species,
)

TOKEN_PATTERN = re.compile(
    r"""
     (?P<ws>[ \t\r]+)
    |(?P<comment>\#.*)
    |(?P<string>"[^"]*")
    |(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    |(?P<name>[A-Za-z_][A-Za-z0-9_.]*)
    |(?P<op>->|>=|<=|==|[()<>:@=,+*/-])
    """,
    re.VERBOSE,
)

INTEGER = re.compile(r"^\d+$")
CUSTOM_FACTORS = ("inv", "lin", "exp")
OPTION_KEYS = ("delta", "m", "time_points", "rtol", "atol", "method", "unlumped", "bounds")
TEST_KEYS = ("sensitivity", "fpr", "observed", "species", "total")


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> List[Token]:
    """Tokens of one line; `column` is the column of text[0]."""
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            raise ModelParseError(
                f"unexpected character {text[position]!r}", line, column + position
            )
        if match.lastgroup not in ("ws", "comment"):
            tokens.append(Token(match.lastgroup, match.group(), line, column + position))
        position = match.end()
    return tokens


class _LineParser:
    """Recursive-descent cursor over the tokens of one line."""

    def __init__(self, tokens: List[Token], line: int, end_column: int, parameters: Dict[str, float]):
        self.tokens = tokens
        self.pos = 0
        self.line = line
        self.end_column = end_column
        self.parameters = parameters

    # ---- cursor ----

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def error(self, detail: str, expected: Sequence[str] = ()) -> ModelParseError:
        token = self.peek()
        column = token.column if token else self.end_column
        found = f"found {token.text!r}" if token else "found end of line"
        return ModelParseError(f"{detail}, {found}", self.line, column, expected)

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token is not None and token.text == text and token.kind in ("op", "name"):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token is None or token.text != text:
            raise self.error("unexpected token", [repr(text)])
        self.pos += 1
        return token

    def expect_kind(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None or token.kind != kind:
            raise self.error("unexpected token", [what])
        self.pos += 1
        return token

    def expect_end(self) -> None:
        if not self.at_end():
            raise self.error("trailing input", ["end of line"])

    # ---- values ----

    def integer(self) -> int:
        token = self.peek()
        if token is None or token.kind != "number" or not INTEGER.match(token.text):
            raise self.error("unexpected token", ["nonnegative integer"])
        self.pos += 1
        return int(token.text)

    def int_tuple(self) -> Tuple[int, ...]:
        self.expect("(")
        values = [self.integer()]
        while self.accept(","):
            values.append(self.integer())
        self.expect(")")
        return tuple(values)

    def expr(self) -> float:
        value = self.factor()
        while True:
            if self.accept("*"):
                value *= self.factor()
            elif self.accept("/"):
                divisor = self.factor()
                if divisor == 0:
                    raise self.error("division by zero")
                value /= divisor
            else:
                return value

    def factor(self) -> float:
        token = self.peek()
        if token is None:
            raise self.error("unexpected end of line", ["number", "parameter", "'('"])
        if self.accept("-"):
            return -self.factor()
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value
        if token.kind == "number":
            self.pos += 1
            return float(token.text)
        if token.kind == "name":
            if token.text not in self.parameters:
                raise ModelParseError(f"unknown parameter {token.text!r}", token.line, token.column)
            self.pos += 1
            return self.parameters[token.text]
        raise self.error("unexpected token", ["number", "parameter", "'('"])


def _species_ref(parser: _LineParser, species: Dict[str, int]) -> int:
    token = parser.expect_kind("name", "species name")
    if token.text not in species:
        raise ModelValidationError(
            f"line {token.line}, column {token.column}: unknown species {token.text!r}"
        )
    return species[token.text]


def _validated(factory, *args, line: int = 0, **kwargs):
    """Build a domain object, converting pydantic errors."""
    try:
        return factory(*args, **kwargs)
    except ValidationError as exc:
        messages = "; ".join(
            str(error["msg"]).removeprefix("Value error, ") for error in exc.errors()
        )
        prefix = f"line {line}: " if line else ""
        raise ModelValidationError(prefix + messages) from exc


# ==================== PREDICATES ====================

COMPARATORS = (">=", "<=", ">", "<", "==")


def _predicate_atom(parser: _LineParser, species: Dict[str, int], n: int):
    if parser.accept("("):
        clauses = _predicate_or(parser, species, n)
        parser.expect(")")
        return clauses
    dim = _species_ref(parser, species)
    token = parser.peek()
    if token is None or token.text not in COMPARATORS:
        raise parser.error("unexpected token", COMPARATORS)
    parser.pos += 1
    value = parser.integer()
    bound = {
        ">=": Interval(lower=value),
        ">": Interval(lower=value + 1),
        "<=": Interval(lower=0, upper=value),
        "<": Interval(lower=0, upper=value - 1) if value > 0 else None,
        "==": Interval(lower=value, upper=value),
    }[token.text]
    if bound is None:
        return []
    clause = [Interval() for _ in range(n)]
    clause[dim] = bound
    return [tuple(clause)]


def _predicate_and(parser: _LineParser, species: Dict[str, int], n: int):
    clauses = _predicate_atom(parser, species, n)
    while parser.accept("and"):
        right = _predicate_atom(parser, species, n)
        merged = []
        for a, b in itertools.product(clauses, right):
            parts = [x.intersect(y) for x, y in zip(a, b)]
            if all(p is not None for p in parts):
                merged.append(tuple(parts))
        clauses = merged
    return clauses


def _predicate_or(parser: _LineParser, species: Dict[str, int], n: int):
    clauses = _predicate_and(parser, species, n)
    while parser.accept("or"):
        clauses = clauses + _predicate_and(parser, species, n)
    return clauses


def parse_predicate(source: str, species: Dict[str, int], line: int = 1, column: int = 1) -> Predicate:
    """Comparisons of species against integers joined by `and` / `or` (with parentheses)."""
    tokens = tokenize(source, line, column)
    parser = _LineParser(tokens, line, column + len(source), {})
    if parser.at_end():
        raise parser.error("empty predicate", ["comparison"])
    clauses = _predicate_or(parser, species, len(species))
    parser.expect_end()
    return Predicate(source=source, clauses=tuple(dict.fromkeys(clauses)))


# ==================== DOCUMENT ====================

class _DocumentBuilder:
    """Accumulates declarations line by line."""

    def __init__(self):
        self.species: Dict[str, int] = {}
        self.parameters: Dict[str, float] = {}
        self.reactions: List[Reaction] = []
        self.initial = None
        self.terminal = None
        self.horizon: Optional[float] = None
        self.terminal_lineno = 0
        self.options: Dict[str, object] = {}
        self.pending_total: Optional[Dict[str, object]] = None

    def require_species(self, parser: _LineParser) -> None:
        if not self.species:
            raise parser.error("species must be declared first", ["species"])

    # ---- statements ----

    def species_line(self, parser: _LineParser) -> None:
        if self.species:
            raise parser.error("species declared twice")
        names = []
        while not parser.at_end():
            names.append(parser.expect_kind("name", "species name"))
        if not names:
            raise parser.error("empty species list", ["species name"])
        for token in names:
            if token.text in self.species:
                raise ModelParseError(f"duplicate species {token.text!r}", token.line, token.column)
            self.species[token.text] = len(self.species)

    def param_line(self, parser: _LineParser) -> None:
        name = parser.expect_kind("name", "parameter name")
        parser.expect("=")
        value = parser.expr()
        parser.expect_end()
        if name.text in self.parameters:
            raise ModelParseError(f"parameter {name.text!r} defined twice", name.line, name.column)
        self.parameters[name.text] = value

    def side(self, parser: _LineParser) -> List[int]:
        counts = [0] * len(self.species)
        token = parser.peek()
        if token is not None and token.text == "0":
            parser.pos += 1
            return counts
        while True:
            token = parser.peek()
            coefficient = 1
            if token is not None and token.kind == "number":
                coefficient = parser.integer()
            dim = _species_ref(parser, self.species)
            counts[dim] += coefficient
            if not parser.accept("+"):
                return counts

    def propensity(self, parser: _LineParser):
        kind = parser.expect_kind("name", "propensity")
        if kind.text not in ("mass_action", "hill", "custom"):
            parser.pos -= 1
            raise parser.error("unknown propensity", ["mass_action", "hill", "custom"])
        parser.expect("(")
        if kind.text == "mass_action":
            spec = _validated(MassAction, rate=parser.expr(), line=parser.line)
        elif kind.text == "hill":
            numerator = parser.expr()
            parser.expect(",")
            dim = _species_ref(parser, self.species)
            offset = parser.expr() if parser.accept(",") else 1.0
            spec = _validated(Hill, numerator=numerator, species=dim, offset=offset, line=parser.line)
        else:
            coefficient = parser.expr()
            factors = []
            while parser.accept(","):
                name = parser.expect_kind("name", "custom factor")
                if name.text not in CUSTOM_FACTORS:
                    raise ModelValidationError(
                        f"line {name.line}, column {name.column}: factor {name.text!r} has no "
                        f"antiderivative (supported: {', '.join(CUSTOM_FACTORS)})"
                    )
                parser.expect("(")
                dim = _species_ref(parser, self.species)
                args = []
                while parser.accept(","):
                    args.append(parser.expr())
                parser.expect(")")
                factors.append(
                    _validated(CustomFactor, name=name.text, species=dim, args=tuple(args), line=parser.line)
                )
            spec = _validated(
                SeparableCustom, coefficient=coefficient, factors=tuple(factors), line=parser.line
            )
        parser.expect(")")
        return spec

    def reaction_line(self, parser: _LineParser) -> None:
        self.require_species(parser)
        name = parser.expect_kind("name", "reaction name")
        if any(r.name == name.text for r in self.reactions):
            raise ModelParseError(f"reaction {name.text!r} defined twice", name.line, name.column)
        parser.expect(":")
        loss = self.side(parser)
        parser.expect("->")
        gain = self.side(parser)
        parser.expect("@")
        spec = self.propensity(parser)
        parser.expect_end()
        self.reactions.append(
            _validated(
                Reaction, name=name.text, loss=tuple(loss), gain=tuple(gain),
                propensity=spec, line=parser.line,
            )
        )

    def init_line(self, parser: _LineParser, lines: "_Lines") -> None:
        self.require_species(parser)
        if self.initial is not None:
            raise parser.error("initial constraint declared twice")
        kind = parser.expect_kind("name", "'point' or 'table'")
        if kind.text == "point":
            state = parser.int_tuple()
            parser.expect_end()
            self.initial = _validated(PointInitial, state=state, line=parser.line)
        elif kind.text == "table":
            parser.expect_end()
            entries = []
            for row in lines.block(self.parameters):
                if row.accept("end"):
                    row.expect_end()
                    break
                state = row.int_tuple()
                entries.append((state, row.expr()))
                row.expect_end()
            else:
                raise ModelParseError("unterminated init table", lines.number, 1, ["end"])
            self.initial = _validated(TableInitial, entries=tuple(entries), line=parser.line)
        else:
            parser.pos -= 1
            raise parser.error("unknown initial constraint", ["point", "table"])

    def terminal_line(self, parser: _LineParser) -> None:
        self.require_species(parser)
        if self.terminal is not None or self.pending_total is not None:
            raise parser.error("terminal constraint declared twice")
        self.terminal_lineno = parser.line
        kind = parser.expect_kind("name", "'point', 'pred' or 'observe'")
        if kind.text == "point":
            state = parser.int_tuple()
            parser.expect("at")
            self.horizon = parser.expr()
            first_passage = parser.accept("first_passage")
            parser.expect_end()
            self.terminal = _validated(
                PointTerminal, state=state, first_passage=first_passage, line=parser.line
            )
        elif kind.text == "pred":
            token = parser.expect_kind("string", "quoted predicate")
            predicate = parse_predicate(token.text[1:-1], self.species, token.line, token.column + 1)
            parser.expect("at")
            self.horizon = parser.expr()
            parser.expect_end()
            self.terminal = PredicateTerminal(predicate=predicate)
        elif kind.text == "observe":
            model = parser.expect_kind("name", "likelihood name")
            if model.text != "binary_test":
                parser.pos -= 1
                raise parser.error("unknown likelihood", ["binary_test"])
            parser.expect("(")
            fields: Dict[str, object] = {}
            while True:
                key = parser.expect_kind("name", "likelihood argument")
                if key.text not in TEST_KEYS:
                    parser.pos -= 1
                    raise parser.error("unknown likelihood argument", TEST_KEYS)
                parser.expect("=")
                if key.text == "species":
                    fields["species"] = _species_ref(parser, self.species)
                elif key.text in ("observed", "total"):
                    fields[key.text] = parser.integer()
                else:
                    fields[key.text] = parser.expr()
                if not parser.accept(","):
                    break
            parser.expect(")")
            parser.expect("at")
            self.horizon = parser.expr()
            parser.expect_end()
            missing = [k for k in TEST_KEYS if k != "total" and k not in fields]
            if missing:
                raise ModelParseError(
                    f"binary_test is missing {', '.join(missing)}", parser.line, model.column
                )
            self.pending_total = fields
        else:
            parser.pos -= 1
            raise parser.error("unknown terminal constraint", ["point", "pred", "observe"])

    def options_line(self, parser: _LineParser) -> None:
        self.require_species(parser)
        while not parser.at_end():
            key = parser.expect_kind("name", "option name")
            if key.text not in OPTION_KEYS:
                parser.pos -= 1
                raise parser.error("unknown option", OPTION_KEYS)
            parser.expect("=")
            if key.text in ("m", "time_points"):
                value = parser.integer()
            elif key.text == "method":
                value = parser.expect_kind("name", "integration method").text
            elif key.text == "unlumped":
                dims = [_species_ref(parser, self.species)]
                while parser.accept(","):
                    dims.append(_species_ref(parser, self.species))
                value = frozenset(dims)
            elif key.text == "bounds":
                value = parser.int_tuple()
            else:
                value = parser.expr()
            field = {"m": "grid_exponent", "unlumped": "unlumped_dims"}.get(key.text, key.text)
            self.options[field] = value

    # ---- result ----

    def build(self, last_line: int) -> ModelDocument:
        if not self.species:
            raise ModelParseError("missing species declaration", last_line, 1, ["species"])
        if not self.reactions:
            raise ModelParseError("at least one reaction is required", last_line, 1, ["reaction"])
        if self.initial is None:
            raise ModelParseError("missing initial constraint", last_line, 1, ["init"])
        if self.terminal is None and self.pending_total is None:
            raise ModelParseError("missing terminal constraint", last_line, 1, ["terminal"])
        if self.pending_total is not None:
            fields = dict(self.pending_total)
            if "total" not in fields:
                support = [s for s, p in self.initial.distribution().items() if p > 0]
                fields["total"] = max(sum(s) for s in support)
            test = _validated(BinaryTest, line=self.terminal_lineno, **fields)
            self.terminal = ObservationTerminal(observation=test)
        names = sorted(self.species, key=self.species.get)
        network = _validated(
            ReactionNetwork,
            species=tuple(Species(name=name, index=k) for k, name in enumerate(names)),
            reactions=tuple(self.reactions),
            parameters=dict(self.parameters),
        )
        options = _validated(RefinementOptions, **self.options)
        return _validated(
            ModelDocument,
            network=network,
            initial=self.initial,
            terminal=self.terminal,
            horizon=self.horizon,
            options=options,
        )


class _Lines:
    """Line source shared by the statement loop and block statements."""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.number = 0

    def next_tokens(self) -> Optional[Tuple[List[Token], int]]:
        while self.number < len(self.lines):
            raw = self.lines[self.number]
            self.number += 1
            tokens = tokenize(raw, self.number)
            if tokens:
                return tokens, len(raw) + 1
        return None

    def block(self, parameters: Dict[str, float]):
        while True:
            item = self.next_tokens()
            if item is None:
                return
            tokens, end_column = item
            yield _LineParser(tokens, self.number, end_column, parameters)


STATEMENTS = ("species", "param", "reaction", "init", "terminal", "options")


def parse_model(text: str) -> ModelDocument:
    """Parse a `.mjp` document into a fully resolved ModelDocument."""
    builder = _DocumentBuilder()
    lines = _Lines(text)
    while True:
        item = lines.next_tokens()
        if item is None:
            break
        tokens, end_column = item
        parser = _LineParser(tokens, lines.number, end_column, builder.parameters)
        keyword = parser.peek()
        if keyword.kind != "name" or keyword.text not in STATEMENTS:
            raise parser.error("unknown statement", STATEMENTS)
        parser.pos += 1
        if keyword.text == "species":
            builder.species_line(parser)
        elif keyword.text == "param":
            builder.param_line(parser)
        elif keyword.text == "reaction":
            builder.reaction_line(parser)
        elif keyword.text == "init":
            builder.init_line(parser, lines)
        elif keyword.text == "terminal":
            builder.terminal_line(parser)
        else:
            builder.options_line(parser)
    return builder.build(max(lines.number, 1))


def load_model(path: Path) -> ModelDocument:
    """Read and parse a model file (UTF-8)."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        head = data[: e.start]
        line = head.count(b"\n") + 1
        column = e.start - (head.rfind(b"\n") + 1) + 1
        raise ModelParseError(f"invalid UTF-8 byte 0x{data[e.start]:02x}", line, column) from e
    return parse_model(text)


# ==================== RENDERING ====================

def _number(value: float) -> str:
    return repr(float(value))


def _state(state: Sequence[int]) -> str:
    return "(" + ", ".join(str(x) for x in state) + ")"


def _side(counts: Sequence[int], names: Sequence[str]) -> str:
    terms = [f"{c} {name}" for c, name in zip(counts, names) if c]
    return " + ".join(terms) if terms else "0"


def _propensity(spec, names: Sequence[str]) -> str:
    if isinstance(spec, MassAction):
        return f"mass_action({_number(spec.rate)})"
    if isinstance(spec, Hill):
        offset = "" if spec.offset == 1.0 else f", {_number(spec.offset)}"
        return f"hill({_number(spec.numerator)}, {names[spec.species]}{offset})"
    parts = [_number(spec.coefficient)]
    for factor in spec.factors:
        args = "".join(f", {_number(a)}" for a in factor.args)
        parts.append(f"{factor.name}({names[factor.species]}{args})")
    return f"custom({', '.join(parts)})"


def render_model(document: ModelDocument) -> str:
    """Canonical text of a document; parse_model(render_model(d)) == d."""
    network = document.network
    names = network.species_names
    lines = ["species " + " ".join(names)]
    lines += [f"param {name} = {_number(value)}" for name, value in network.parameters.items()]
    for reaction in network.reactions:
        lines.append(
            f"reaction {reaction.name}: {_side(reaction.loss, names)} -> "
            f"{_side(reaction.gain, names)} @ {_propensity(reaction.propensity, names)}"
        )

    initial = document.initial
    if isinstance(initial, PointInitial):
        lines.append(f"init point {_state(initial.state)}")
    else:
        lines.append("init table")
        lines += [f"  {_state(state)} {_number(p)}" for state, p in initial.entries]
        lines.append("end")

    terminal = document.terminal
    horizon = _number(document.horizon)
    if isinstance(terminal, PointTerminal):
        suffix = " first_passage" if terminal.first_passage else ""
        lines.append(f"terminal point {_state(terminal.state)} at {horizon}{suffix}")
    elif isinstance(terminal, PredicateTerminal):
        lines.append(f'terminal pred "{terminal.predicate.source}" at {horizon}')
    else:
        test = terminal.observation
        lines.append(
            f"terminal observe binary_test(sensitivity={_number(test.sensitivity)}, "
            f"fpr={_number(test.fpr)}, observed={test.observed}, "
            f"species={names[test.species]}, total={test.total}) at {horizon}"
        )

    options = document.options
    parts = [
        f"delta={_number(options.delta)}",
        f"m={options.grid_exponent}",
        f"time_points={options.time_points}",
        f"rtol={_number(options.rtol)}",
        f"atol={_number(options.atol)}",
        f"method={options.method}",
    ]
    if options.unlumped_dims:
        parts.append("unlumped=" + ",".join(names[d] for d in sorted(options.unlumped_dims)))
    if options.bounds is not None:
        parts.append(f"bounds={_state(options.bounds)}")
    lines.append("options " + " ".join(parts))
    return "\n".join(lines) + "\n"
