"""Parsers and serializers for every surface format.

Formats (all versioned):

* ``.norm``  -- hand-authored norm sets, a line-oriented DSL with
  ``;``-terminated fields and ``#`` comments (``# format 1`` header);
* ``.ts.json`` -- transition systems (JSON, ``"format": 1``);
* ``.scenario.json`` -- simulation scenarios (JSON);
* ``.runlog.jsonl`` -- run logs, one JSON record per step plus a header
  and a trailing summary record;
* witness lassos -- ``{"stem": [...], "cycle": [...]}``.

Parsing reports *all* independent defects of an input in one pass, with
line/column spans for the DSL and JSON-pointer-ish paths for the JSON
formats.  Rendering is canonical (sets ordered by id) and
``parse(render(x)) == x`` holds structurally for every format.
Sanction amounts are exact decimals end to end; they are never read or
written through binary floating point.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .errors import NormsupError
from .formula import (
    And,
    Atom,
    FALSE,
    Formula,
    Not,
    Or,
    TRUE,
    render as render_formula,
)
from .model import Path, TransitionSystem
from .norms import Norm, NormKind, NormSet
from .revision import CandidatePool, RevisionVerdict
from .supervision import (
    AgentSpec,
    Enforcement,
    Objective,
    ObjectiveKind,
    RunLog,
    Scenario,
    Scope,
)

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int  # 1-based
    column: int  # 1-based
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseIssue:
    span: SourceSpan
    expected: str
    found: str

    def __str__(self) -> str:
        return f"{self.span}: expected {self.expected}, found {self.found}"


class ParseError(NormsupError):
    """Syntax errors; carries every independent issue found."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class SchemaError(NormsupError):
    """Structural errors in a JSON document; ``issues`` are
    (path, message) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.issues))


# ---------------------------------------------------------------------------
# formula text


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>(?:[A-Za-z_]|\{a\})(?:[A-Za-z0-9_]|\{a\})*)
  | (?P<op>[&|!()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # ident / op / eof
    text: str
    line: int
    column: int


def _tokenize_formula(text: str, file: str, line0: int = 1, col0: int = 1) -> list[_Token]:
    tokens = []
    pos = 0
    line, col = line0, col0
    issues = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            issues.append(
                ParseIssue(SourceSpan(file, line, col), "a formula token", repr(text[pos]))
            )
            pos += 1
            col += 1
            continue
        lexeme = m.group(0)
        if not m.lastgroup == "ws":
            kind = "ident" if m.lastgroup == "ident" else "op"
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    if issues:
        raise ParseError(issues)
    tokens.append(_Token("eof", "end of input", line, col))
    return tokens


class _FormulaParser:
    """Recursive descent over the grammar

    formula := disj ; disj := conj { "|" conj } ; conj := unary { "&" unary } ;
    unary := "!" unary | "(" formula ")" | "true" | "false" | IDENT
    """

    def __init__(self, tokens: list[_Token], file: str) -> None:
        self.tokens = tokens
        self.file = file
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected: str) -> ParseError:
        tok = self.peek()
        span = SourceSpan(self.file, tok.line, tok.column, max(len(tok.text), 1))
        return ParseError([ParseIssue(span, expected, tok.text)])

    def formula(self) -> Formula:
        return self.disj()

    def disj(self) -> Formula:
        node = self.conj()
        while self.peek().text == "|":
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Formula:
        node = self.unary()
        while self.peek().text == "&":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.take()
            return Not(self.unary())
        if tok.text == "(":
            self.take()
            node = self.formula()
            if self.peek().text != ")":
                raise self.fail("')'")
            self.take()
            return node
        if tok.kind == "ident":
            self.take()
            if tok.text == "true":
                return TRUE
            if tok.text == "false":
                return FALSE
            return Atom(tok.text)
        raise self.fail("an operand")


def parse_formula(text: str, file: str = "<formula>") -> Formula:
    """Parse one formula; raises :class:`ParseError` with a span."""
    parser = _FormulaParser(_tokenize_formula(text, file), file)
    node = parser.formula()
    if parser.peek().kind != "eof":
        raise parser.fail("end of input")
    return node


# ---------------------------------------------------------------------------
# norm DSL


_NORM_KEYS = ("when", "forbid", "oblige", "until", "sanction")
_DECIMAL_RE = re.compile(r"[0-9]+(\.[0-9]+)?\Z")


class _Cursor:
    def __init__(self, text: str, file: str) -> None:
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def span(self, length: int = 1) -> SourceSpan:
        return SourceSpan(self.file, self.line, self.col, length)

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.eof():
                return
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_blank(self) -> None:
        """Skip whitespace and # comments."""
        while not self.eof():
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#":
                while not self.eof() and self.text[self.pos] != "\n":
                    self.advance()
            else:
                return

    def take_ident(self) -> Optional[str]:
        m = re.compile(r"(?:[A-Za-z_]|\{a\})(?:[A-Za-z0-9_]|\{a\})*").match(
            self.text, self.pos
        )
        if not m:
            return None
        self.advance(len(m.group(0)))
        return m.group(0)

    def until_any(self, stops: str) -> tuple[str, SourceSpan]:
        """Consume up to (not including) the next stop character or a
        comment start; returns the raw text and its starting span.  The
        agent placeholder ``{a}`` passes through as ordinary text."""
        start = self.span()
        out = []
        while not self.eof() and self.text[self.pos] not in stops:
            if self.text.startswith("{a}", self.pos):
                out.append("{a}")
                self.advance(3)
                continue
            if self.text[self.pos] == "#":
                while not self.eof() and self.text[self.pos] != "\n":
                    self.advance()
                continue
            out.append(self.text[self.pos])
            self.advance()
        return "".join(out), start


def parse_norms(text: str, file: str = "<norms>", default_id: str = "N") -> NormSet:
    """Parse a norm-set document; all defects are reported together."""
    cur = _Cursor(text, file)
    issues: list[ParseIssue] = []
    norms: list[Norm] = []
    seen_ids: set[str] = set()
    set_id = default_id

    def recover() -> None:
        """Skip forward to the next 'norm' keyword at nesting depth 0."""
        while not cur.eof():
            cur.skip_blank()
            rest = cur.text[cur.pos :]
            if rest.startswith("norm") and (len(rest) == 4 or not rest[4].isalnum()):
                return
            if cur.eof():
                return
            cur.advance()

    cur.skip_blank()
    rest = cur.text[cur.pos :]
    if rest.startswith("set"):
        cur.advance(3)
        cur.skip_blank()
        ident = cur.take_ident()
        if ident is None:
            issues.append(ParseIssue(cur.span(), "a set identifier", _found_at(cur)))
            recover()
        else:
            set_id = ident
            cur.skip_blank()
            if cur.eof() or cur.text[cur.pos] != ";":
                issues.append(ParseIssue(cur.span(), "';'", _found_at(cur)))
            else:
                cur.advance()

    while True:
        cur.skip_blank()
        if cur.eof():
            break
        kw = cur.take_ident()
        if kw != "norm":
            issues.append(ParseIssue(cur.span(), "'norm'", kw or _found_at(cur)))
            recover()
            continue
        cur.skip_blank()
        norm_id = cur.take_ident()
        if norm_id is None:
            issues.append(ParseIssue(cur.span(), "a norm identifier", _found_at(cur)))
            recover()
            continue
        cur.skip_blank()
        if cur.eof() or cur.text[cur.pos] != "{":
            issues.append(ParseIssue(cur.span(), "'{'", _found_at(cur)))
            recover()
            continue
        cur.advance()
        fields: dict[str, tuple[str, SourceSpan]] = {}
        closed = False
        while not cur.eof():
            cur.skip_blank()
            if not cur.eof() and cur.text[cur.pos] == "}":
                cur.advance()
                closed = True
                break
            key_span = cur.span()
            key = cur.take_ident()
            if key is None:
                issues.append(ParseIssue(cur.span(), "a field name or '}'", _found_at(cur)))
                break
            if key not in _NORM_KEYS:
                issues.append(
                    ParseIssue(key_span, "one of " + "/".join(_NORM_KEYS), key)
                )
            cur.skip_blank()
            if cur.eof() or cur.text[cur.pos] != ":":
                issues.append(ParseIssue(cur.span(), "':'", _found_at(cur)))
                break
            cur.advance()
            value, value_span = cur.until_any(";}")
            if cur.eof() or cur.text[cur.pos] != ";":
                issues.append(ParseIssue(cur.span(), "';'", _found_at(cur)))
                break
            cur.advance()
            if key in fields:
                issues.append(ParseIssue(key_span, f"a single '{key}' field", key))
            elif key in _NORM_KEYS:
                fields[key] = (value.strip(), value_span)
        if not closed:
            issues.append(ParseIssue(cur.span(), "'}'", _found_at(cur)))
            recover()
            continue
        norm = _build_norm(norm_id, fields, file, issues)
        if norm is not None:
            if norm.id in seen_ids:
                issues.append(
                    ParseIssue(cur.span(), "a fresh norm id", f"duplicate id {norm.id}")
                )
            else:
                seen_ids.add(norm.id)
                norms.append(norm)

    if issues:
        raise ParseError(issues)
    return NormSet(set_id, tuple(norms))


def _found_at(cur: _Cursor) -> str:
    return "end of input" if cur.eof() else repr(cur.text[cur.pos])


def _build_norm(norm_id, fields, file, issues) -> Optional[Norm]:
    ok = True

    def formula_field(key: str) -> Optional[Formula]:
        nonlocal ok
        if key not in fields:
            return None
        value, span = fields[key]
        try:
            return parse_formula(value, file)
        except ParseError as exc:
            issues.extend(exc.issues)
            ok = False
            return None

    if "forbid" in fields and "oblige" in fields:
        issues.append(
            ParseIssue(fields["oblige"][1], "exactly one of forbid/oblige", "both")
        )
        ok = False
    kind = NormKind.PROHIBITION if "forbid" in fields else NormKind.OBLIGATION
    target_key = "forbid" if "forbid" in fields else "oblige"
    for required in ("when", target_key if target_key in fields else "forbid", "until", "sanction"):
        if required not in fields:
            issues.append(
                ParseIssue(
                    SourceSpan(file, 1, 1),
                    f"field '{required if required != 'forbid' else 'forbid or oblige'}' in norm {norm_id}",
                    "nothing",
                )
            )
            ok = False
    cond = formula_field("when")
    target = formula_field(target_key)
    deadline: Optional[Formula] = None
    if "until" in fields:
        value, span = fields["until"]
        if value.strip() == "never":
            deadline = None
        else:
            deadline = formula_field("until")
            if deadline is None and ok:
                ok = False
    sanction = Decimal(0)
    if "sanction" in fields:
        value, span = fields["sanction"]
        if not _DECIMAL_RE.match(value.strip()):
            issues.append(ParseIssue(span, "a non-negative decimal", value.strip() or "nothing"))
            ok = False
        else:
            sanction = Decimal(value.strip())
    if not ok or cond is None or target is None:
        return None
    return Norm(norm_id, cond, kind, target, deadline, sanction)


def render_norms(norms: NormSet) -> str:
    """Canonical norm DSL text; norms keep their declared order."""
    lines = [f"# format {FORMAT_VERSION}", f"set {norms.id};", ""]
    for n in norms:
        verb = "forbid" if n.kind is NormKind.PROHIBITION else "oblige"
        deadline = "never" if n.deadline is None else render_formula(n.deadline)
        lines += [
            f"norm {n.id} {{",
            f"  when: {render_formula(n.cond)};",
            f"  {verb}: {render_formula(n.target)};",
            f"  until: {deadline};",
            f"  sanction: {n.sanction};",
            "}",
            "",
        ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# JSON helpers


class _Checker:
    def __init__(self) -> None:
        self.issues: list[tuple[str, str]] = []

    def error(self, path: str, message: str) -> None:
        self.issues.append((path, message))

    def expect(self, value, types, path: str, what: str):
        if not isinstance(value, types):
            self.error(path, f"{what} expected, got {type(value).__name__}")
            return None
        return value

    def key(self, obj: dict, name: str, types, path: str, required: bool = True, default=None):
        if name not in obj:
            if required:
                self.error(f"{path}.{name}", "missing")
            return default
        got = self.expect(obj[name], types, f"{path}.{name}", types_name(types))
        return default if got is None else got

    def raise_if_any(self) -> None:
        if self.issues:
            raise SchemaError(self.issues)


def types_name(types) -> str:
    if isinstance(types, tuple):
        return " or ".join(t.__name__ for t in types)
    return types.__name__


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([(f"<json>:{exc.lineno}:{exc.colno}", exc.msg)]) from None


def _check_format(doc: dict, check: _Checker, path: str = "$") -> None:
    version = check.key(doc, "format", int, path)
    if version is not None and version != FORMAT_VERSION:
        check.error(f"{path}.format", f"unsupported version {version}")


def _dump(obj: Any, indent: Optional[int] = 2) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent, separators=(",", ": ") if indent else (",", ":"))


# ---------------------------------------------------------------------------
# transition systems


def parse_model(text: str) -> TransitionSystem:
    doc = _load_json(text)
    check = _Checker()
    if check.expect(doc, dict, "$", "an object") is None:
        check.raise_if_any()
    _check_format(doc, check)
    atoms = check.key(doc, "atoms", list, "$", default=[]) or []
    for i, a in enumerate(atoms):
        check.expect(a, str, f"$.atoms[{i}]", "an atom name")
    states_raw = check.key(doc, "states", list, "$", default=[]) or []
    labels: dict[str, set[str]] = {}
    ids: list[str] = []
    for i, entry in enumerate(states_raw):
        if check.expect(entry, dict, f"$.states[{i}]", "an object") is None:
            continue
        sid = check.key(entry, "id", str, f"$.states[{i}]")
        state_labels = check.key(entry, "labels", list, f"$.states[{i}]", required=False, default=[])
        if sid is None:
            continue
        if sid in labels:
            check.error(f"$.states[{i}].id", f"duplicate state id {sid}")
            continue
        ids.append(sid)
        labels[sid] = set()
        for j, lab in enumerate(state_labels or []):
            if check.expect(lab, str, f"$.states[{i}].labels[{j}]", "an atom name"):
                labels[sid].add(lab)
    init = check.key(doc, "init", str, "$")
    edges_raw = check.key(doc, "edges", list, "$", default=[]) or []
    edges: list[tuple[str, str]] = []
    for i, e in enumerate(edges_raw):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            check.error(f"$.edges[{i}]", "a [source, target] pair expected")
            continue
        a, b = e
        if check.expect(a, str, f"$.edges[{i}][0]", "a state id") and check.expect(
            b, str, f"$.edges[{i}][1]", "a state id"
        ):
            edges.append((a, b))
    check.raise_if_any()
    return TransitionSystem(
        [a for a in atoms if isinstance(a, str)], ids, labels, init, edges
    )


def render_model(system: TransitionSystem) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "atoms": sorted(system.atoms),
        "states": [
            {"id": s, "labels": sorted(system.labels[s])} for s in system.sorted_states()
        ],
        "init": system.init,
        "edges": [list(e) for e in sorted(system.edges)],
    }
    return _dump(doc) + "\n"


# ---------------------------------------------------------------------------
# paths / witnesses


def parse_path(text: str) -> Path:
    doc = _load_json(text)
    check = _Checker()
    if check.expect(doc, dict, "$", "an object") is None:
        check.raise_if_any()
    _check_format(doc, check)
    stem = check.key(doc, "stem", list, "$", default=[]) or []
    cycle = check.key(doc, "cycle", list, "$", required=False, default=[]) or []
    for i, s in enumerate(stem):
        check.expect(s, str, f"$.stem[{i}]", "a state id")
    for i, s in enumerate(cycle):
        check.expect(s, str, f"$.cycle[{i}]", "a state id")
    if not stem and not cycle:
        check.error("$.stem", "empty path")
    check.raise_if_any()
    states = tuple(stem) + tuple(cycle)
    return Path(states, cycle_start=len(stem) if cycle else None)


def path_json(path: Path) -> dict:
    return {
        "format": FORMAT_VERSION,
        "stem": list(path.stem),
        "cycle": list(path.cycle),
    }


def render_path(path: Path) -> str:
    return _dump(path_json(path)) + "\n"


def verdict_json(verdict: RevisionVerdict) -> dict:
    return {
        "relation": verdict.relation.value,
        "sanction_change": verdict.sanction_change.value,
        "witness_in_R_not_N": (
            None
            if verdict.witness_in_R_not_N is None
            else path_json(verdict.witness_in_R_not_N)
        ),
        "witness_in_N_not_R": (
            None
            if verdict.witness_in_N_not_R is None
            else path_json(verdict.witness_in_N_not_R)
        ),
    }


# ---------------------------------------------------------------------------
# scenarios


_ENFORCEMENT = {e.value: e for e in Enforcement}
_OBJECTIVE_KINDS = {k.value: k for k in ObjectiveKind}
_SCOPES = {s.value: s for s in Scope}


def parse_scenario(text: str, file: str = "<scenario>") -> Scenario:
    doc = _load_json(text)
    check = _Checker()
    if check.expect(doc, dict, "$", "an object") is None:
        check.raise_if_any()
    _check_format(doc, check)
    scenario_id = check.key(doc, "id", str, "$", default="scenario")
    world_doc = check.key(doc, "world", dict, "$")
    world = None
    if world_doc is not None:
        try:
            world = parse_model(_dump(world_doc, indent=None))
        except SchemaError as exc:
            for path, message in exc.issues:
                check.error("$.world" + path.lstrip("$"), message)

    agents: list[AgentSpec] = []
    for i, entry in enumerate(check.key(doc, "agents", list, "$", default=[]) or []):
        path = f"$.agents[{i}]"
        if check.expect(entry, dict, path, "an object") is None:
            continue
        aid = check.key(entry, "id", str, path)
        lam = check.key(entry, "sanction_sensitivity", (int, float), path, required=False, default=1.0)
        eps = check.key(entry, "epsilon", (int, float), path, required=False, default=0.0)
        utilities = check.key(entry, "utilities", dict, path, required=False, default={}) or {}
        util = {}
        for k, v in utilities.items():
            if check.expect(v, (int, float), f"{path}.utilities.{k}", "a number") is not None:
                util[k] = float(v)
        if aid is None:
            continue
        try:
            agents.append(AgentSpec(aid, float(lam), float(eps), util))
        except ValueError as exc:
            check.error(path, str(exc))

    norms = None
    norms_text = check.key(doc, "norms", str, "$")
    if norms_text is not None:
        try:
            norms = parse_norms(norms_text, file=f"{file}#norms")
        except ParseError as exc:
            for issue in exc.issues:
                check.error("$.norms", str(issue))

    objectives: list[Objective] = []
    for i, entry in enumerate(check.key(doc, "objectives", list, "$", default=[]) or []):
        path = f"$.objectives[{i}]"
        if check.expect(entry, dict, path, "an object") is None:
            continue
        oid = check.key(entry, "id", str, path)
        kind_name = check.key(entry, "kind", str, path)
        atom = check.key(entry, "atom", str, path)
        limit = check.key(entry, "limit", int, path, required=False, default=1)
        threshold = check.key(entry, "threshold", int, path, required=False, default=0)
        scope_name = check.key(entry, "scope", str, path, required=False, default="global")
        if kind_name is not None and kind_name not in _OBJECTIVE_KINDS:
            check.error(f"{path}.kind", f"unknown objective kind {kind_name}")
            continue
        if scope_name not in _SCOPES:
            check.error(f"{path}.scope", f"unknown scope {scope_name}")
            continue
        if None in (oid, kind_name, atom):
            continue
        try:
            objectives.append(
                Objective(
                    oid,
                    _OBJECTIVE_KINDS[kind_name],
                    atom,
                    limit=limit,
                    threshold=threshold,
                    scope=_SCOPES[scope_name],
                )
            )
        except ValueError as exc:
            check.error(path, str(exc))

    pool_doc = check.key(doc, "pool", dict, "$", required=False, default={}) or {}
    pool_formula_texts = check.key(pool_doc, "formulas", list, "$.pool", required=False, default=[]) or []
    pool_sanction_texts = check.key(pool_doc, "sanctions", list, "$.pool", required=False, default=[]) or []
    pool_formulas: list[Formula] = []
    for i, f_text in enumerate(pool_formula_texts):
        if check.expect(f_text, str, f"$.pool.formulas[{i}]", "a formula") is None:
            continue
        try:
            pool_formulas.append(parse_formula(f_text, file=f"{file}#pool"))
        except ParseError as exc:
            for issue in exc.issues:
                check.error(f"$.pool.formulas[{i}]", str(issue))
    pool_sanctions: list[Decimal] = []
    for i, amount in enumerate(pool_sanction_texts):
        if not isinstance(amount, (str, int)):
            check.error(f"$.pool.sanctions[{i}]", "a decimal string or integer expected")
            continue
        try:
            value = Decimal(str(amount))
        except InvalidOperation:
            check.error(f"$.pool.sanctions[{i}]", f"not a decimal: {amount}")
            continue
        if value < 0:
            check.error(f"$.pool.sanctions[{i}]", "sanctions must be non-negative")
            continue
        pool_sanctions.append(value)

    enforcement_name = check.key(doc, "enforcement", str, "$", required=False, default="sanctioning")
    if enforcement_name not in _ENFORCEMENT:
        check.error("$.enforcement", f"unknown enforcement {enforcement_name}")
        enforcement_name = "sanctioning"
    seed = check.key(doc, "seed", int, "$", required=False, default=0)
    horizon = check.key(doc, "horizon", int, "$", required=False, default=0)
    window = check.key(doc, "window", int, "$", required=False, default=max(horizon or 1, 1))
    theta_low = check.key(doc, "theta_low", (int, float), "$", required=False, default=0.0)
    theta_high = check.key(doc, "theta_high", (int, float), "$", required=False, default=1.0)
    minutes = check.key(doc, "minutes_per_step", int, "$", required=False, default=1)

    check.raise_if_any()
    try:
        return Scenario(
            id=scenario_id,
            world=world,
            agents=tuple(agents),
            norms=norms,
            objectives=tuple(objectives),
            pool=CandidatePool(tuple(pool_formulas), tuple(pool_sanctions)),
            enforcement=_ENFORCEMENT[enforcement_name],
            seed=seed,
            horizon=horizon,
            window=window,
            theta_low=float(theta_low),
            theta_high=float(theta_high),
            minutes_per_step=minutes,
        )
    except ValueError as exc:
        raise SchemaError([("$", str(exc))]) from None


def render_scenario(scenario: Scenario) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "id": scenario.id,
        "world": json.loads(render_model(scenario.world)),
        "agents": [
            {
                "id": a.id,
                "sanction_sensitivity": a.sanction_sensitivity,
                "epsilon": a.epsilon,
                "utilities": {k: a.utilities[k] for k in sorted(a.utilities)},
            }
            for a in scenario.agents
        ],
        "norms": render_norms(scenario.norms),
        "objectives": [
            {
                "id": o.id,
                "kind": o.kind.value,
                "atom": o.atom,
                "limit": o.limit,
                "threshold": o.threshold,
                "scope": o.scope.value,
            }
            for o in scenario.objectives
        ],
        "pool": {
            "formulas": [render_formula(f) for f in scenario.pool.formulas],
            "sanctions": [str(s) for s in scenario.pool.sanctions],
        },
        "enforcement": scenario.enforcement.value,
        "seed": scenario.seed,
        "horizon": scenario.horizon,
        "window": scenario.window,
        "theta_low": scenario.theta_low,
        "theta_high": scenario.theta_high,
        "minutes_per_step": scenario.minutes_per_step,
    }
    return _dump(doc) + "\n"


# ---------------------------------------------------------------------------
# run logs


def _event_json(event) -> dict:
    return {
        "step": event.step,
        "norm": event.norm_id,
        "kind": event.kind.value,
        "sanction": str(event.sanction),
    }


def _decision_json(decision) -> dict:
    return {
        "window": decision.window_index,
        "window_score": decision.window_score,
        "directions": [d.value for d in decision.directions],
        "considered": decision.considered,
        "adopted": None if decision.adopted is None else render_norms(decision.adopted),
        "rollout_score": decision.rollout_score,
        "verdict": None if decision.verdict is None else verdict_json(decision.verdict),
    }


def render_runlog(log: RunLog, norms_text: Optional[str] = None) -> str:
    """Line-delimited JSON: header, one record per step, summary."""
    lines = [
        _dump(
            {
                "format": FORMAT_VERSION,
                "kind": "header",
                "scenario": log.scenario_id,
                "seed": log.seed,
                "enforcement": log.enforcement.value,
                "norms": norms_text,
            },
            indent=None,
        )
    ]
    for r in log.records:
        lines.append(
            _dump(
                {
                    "kind": "step",
                    "step": r.step,
                    "agents": {
                        a: {
                            "action": s.action,
                            "state": s.state,
                            "labels": sorted(s.labels),
                        }
                        for a, s in sorted(r.agents.items())
                    },
                    "events": [_event_json(e) for e in r.events],
                    "flags": dict(sorted(r.flags.items())),
                    "normset": r.normset_id,
                    "deadlock": r.deadlock,
                    "revision": None if r.revision is None else _decision_json(r.revision),
                },
                indent=None,
            )
        )
    lines.append(
        _dump(
            {
                "kind": "summary",
                "objective_rates": dict(sorted(log.objective_rates.items())),
                "ledger_total": str(log.ledger.total),
                "violations": len(log.ledger.entries),
                "deadlock_steps": log.deadlock_steps,
                "revisions": [_decision_json(d) for d in log.revisions],
                "final_norms": None if log.final_norms is None else render_norms(log.final_norms),
            },
            indent=None,
        )
    )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunLogDoc:
    """Parsed run log: raw dict records for replay and diffing."""

    header: dict
    steps: list[dict]
    summary: dict


def parse_runlog(text: str) -> RunLogDoc:
    check = _Checker()
    header: Optional[dict] = None
    steps: list[dict] = []
    summary: Optional[dict] = None
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            check.error(f"line {i + 1}", exc.msg)
            continue
        if not isinstance(doc, dict):
            check.error(f"line {i + 1}", "a record object expected")
            continue
        kind = doc.get("kind")
        if kind == "header":
            if header is not None:
                check.error(f"line {i + 1}", "duplicate header")
            header = doc
        elif kind == "step":
            steps.append(doc)
        elif kind == "summary":
            summary = doc
        else:
            check.error(f"line {i + 1}", f"unknown record kind {kind!r}")
    if header is None:
        check.error("line 1", "missing header record")
    elif header.get("format") != FORMAT_VERSION:
        check.error("line 1", f"unsupported version {header.get('format')}")
    if summary is None:
        check.error("end", "missing summary record")
    expected = list(range(len(steps)))
    if [s.get("step") for s in steps] != expected:
        check.error("steps", "step indices are not contiguous from 0")
    check.raise_if_any()
    return RunLogDoc(header, steps, summary)
