"""Solver-agnostic MIP model container and MPS / LP text exchange.

Names are deterministic.  Fixed MPS limits names to 8 characters, so the MPS
writer substitutes short codes (``C0000001`` for columns, ``R0000001`` for root
rows, ``U0000001`` for user cuts) and records the original names in ``*``
comment lines that :func:`parse_mps` reads back.
"""
from __future__ import annotations

import io
import math
import re
import warnings
from dataclasses import dataclass, field

from .errors import ParseError

CONTINUOUS = "C"
BINARY = "B"
ROOT = "root"
USER = "user"
USER_CUT_PREFIX = "UCUT_"
_SENSES = ("<=", ">=", "=")


@dataclass
class Variable:
    name: str
    kind: str = CONTINUOUS
    lo: float = 0.0
    hi: float = math.inf

    @property
    def is_binary(self) -> bool:
        return self.kind == BINARY


@dataclass
class Constraint:
    name: str
    terms: dict
    sense: str
    rhs: float
    attachment: str = ROOT
    family: str = ""
    owner: str = ""  # binary whose big-M switches this row, if any

    def activity(self, values) -> float:
        return sum(c * values[v] for v, c in self.terms.items())

    def satisfied(self, values, tol=1e-9) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class Sos1:
    name: str
    members: list


@dataclass(frozen=True)
class ModelStats:
    n_binary: int
    n_continuous: int
    n_constraints_root: int
    n_user_cuts: int
    n_sos1: int


@dataclass
class MipModel:
    name: str = "model"
    variables: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    sos1_sets: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)  # always minimised

    # -- construction -----------------------------------------------------
    def add_var(self, name, kind=CONTINUOUS, lo=0.0, hi=math.inf) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        if kind == BINARY:
            lo, hi = 0.0, 1.0
        self.variables[name] = Variable(name, kind, float(lo), float(hi))
        return name

    def add_constr(self, name, terms, sense, rhs, attachment=ROOT, family="", owner="") -> Constraint:
        if sense not in _SENSES:
            raise ValueError(f"bad sense {sense!r}")
        clean = {}
        for v, c in terms.items() if isinstance(terms, dict) else terms:
            if v not in self.variables:
                raise KeyError(f"constraint {name!r} references undeclared variable {v!r}")
            clean[v] = clean.get(v, 0.0) + float(c)
        clean = {v: c for v, c in clean.items() if c != 0.0}
        con = Constraint(name, clean, sense, float(rhs), attachment, family, owner)
        self.constraints.append(con)
        return con

    def add_sos1(self, name, members) -> None:
        for v in members:
            if v not in self.variables:
                raise KeyError(f"SOS {name!r} references undeclared variable {v!r}")
        self.sos1_sets.append(Sos1(name, list(members)))

    # -- reductions -------------------------------------------------------
    def fix_to_zero(self, name) -> None:
        """Remove a variable, treating it as the constant 0 everywhere.

        Rows owned by the variable are switched off for good, so they go too.
        """
        self.variables.pop(name)
        self.objective.pop(name, None)
        kept = []
        for con in self.constraints:
            if con.owner == name:
                continue
            con.terms.pop(name, None)
            if con.terms:
                kept.append(con)
            elif not con.satisfied({}, 1e-9):
                raise ValueError(f"fixing {name} to 0 violates {con.name}")
        self.constraints = kept
        for s in self.sos1_sets:
            if name in s.members:
                s.members.remove(name)
        self.sos1_sets = [s for s in self.sos1_sets if len(s.members) > 1]

    def substitute(self, old, new) -> None:
        """Replace variable ``old`` by ``new`` (they are declared equal)."""
        if old == new:
            return
        self.variables.pop(old)
        for con in self.constraints:
            if old in con.terms:
                c = con.terms.pop(old)
                total = con.terms.get(new, 0.0) + c
                if total == 0.0:
                    con.terms.pop(new, None)
                else:
                    con.terms[new] = total
        if old in self.objective:
            self.objective[new] = self.objective.get(new, 0.0) + self.objective.pop(old)
        for s in self.sos1_sets:
            if old in s.members:
                s.members = list(dict.fromkeys(new if v == old else v for v in s.members))
        self.sos1_sets = [s for s in self.sos1_sets if len(s.members) > 1]

    # -- queries ----------------------------------------------------------
    def binaries(self):
        return [v for v in self.variables.values() if v.is_binary]

    def root_constraints(self):
        return [c for c in self.constraints if c.attachment == ROOT]

    def user_cuts(self):
        return [c for c in self.constraints if c.attachment == USER]

    def count_family(self, *families) -> int:
        return sum(1 for c in self.constraints if c.family in families)


def model_stats(model: MipModel) -> ModelStats:
    nb = sum(1 for v in model.variables.values() if v.is_binary)
    nu = sum(1 for c in model.constraints if c.attachment == USER)
    return ModelStats(
        n_binary=nb,
        n_continuous=len(model.variables) - nb,
        n_constraints_root=len(model.constraints) - nu,
        n_user_cuts=nu,
        n_sos1=len(model.sos1_sets),
    )


def _num(x: float) -> str:
    """Shortest text that reads back to the identical double."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


# ---------------------------------------------------------------------------
# MPS


def mps_name_map(model: MipModel) -> dict:
    """Original name -> 8-character MPS name for columns, rows and SOS sets."""
    out = {}
    for n, v in enumerate(model.variables, start=1):
        out[v] = f"C{n:07d}"
    nr = nu = 0
    for con in model.constraints:
        if con.attachment == USER:
            nu += 1
            out[con.name] = f"U{nu:07d}"
        else:
            nr += 1
            out[con.name] = f"R{nr:07d}"
    for n, s in enumerate(model.sos1_sets, start=1):
        out[s.name] = f"S{n:07d}"
    return out


def _needs_short(name):
    return len(name) > 8 or " " in name


def _field_line(code, name1, name2="", value=None):
    line = f" {code:<2} {name1:<8}"
    if name2 or value is not None:
        line += f"  {name2:<8}"
    if value is not None:
        line += f"  {_num(value):>12}"
    return line.rstrip()


def _write_mps(model: MipModel) -> str:
    nmap = mps_name_map(model)
    long_names = [n for n in nmap if _needs_short(n)]
    if long_names:
        warnings.warn(
            f"{len(long_names)} names exceed the 8-character MPS limit; "
            "deterministic short codes used (see '* name' comments)",
            stacklevel=3,
        )
    out = io.StringIO()
    w = out.write
    w(f"* {model.name}\n")
    for orig, short in nmap.items():
        w(f"* name {short} {orig}\n")
    w(f"NAME          {model.name[:8] if not _needs_short(model.name) else 'MODEL'}\n")
    w("ROWS\n")
    w(" N  OBJ\n")
    code = {"<=": "L", ">=": "G", "=": "E"}
    for con in model.constraints:
        w(f" {code[con.sense]}  {nmap[con.name]}\n")
    # column-major coefficient lists in row order
    cols = {v: [] for v in model.variables}
    for v, c in model.objective.items():
        cols[v].append(("OBJ", c))
    for con in model.constraints:
        for v, c in con.terms.items():
            cols[v].append((nmap[con.name], c))
    w("COLUMNS\n")
    in_int = False
    marker = 0
    for v, var in model.variables.items():
        if var.is_binary and not in_int:
            w(f"    MARKER{marker:02d}  'MARKER'                 'INTORG'\n")
            in_int = True
        elif not var.is_binary and in_int:
            w(f"    MARKER{marker:02d}  'MARKER'                 'INTEND'\n")
            marker += 1
            in_int = False
        entries = cols[v] or [("OBJ", 0.0)]
        for row, c in entries:
            w(_field_line("", nmap[v], row, c) + "\n")
    if in_int:
        w(f"    MARKER{marker:02d}  'MARKER'                 'INTEND'\n")
    w("RHS\n")
    for con in model.constraints:
        if con.rhs != 0.0:
            w(_field_line("", "RHS", nmap[con.name], con.rhs) + "\n")
    w("BOUNDS\n")
    for v, var in model.variables.items():
        s = nmap[v]
        if var.is_binary:
            w(_field_line("BV", "BND", s) + "\n")
            continue
        if var.lo == -math.inf and var.hi == math.inf:
            w(_field_line("FR", "BND", s) + "\n")
            continue
        if var.lo == -math.inf:
            w(_field_line("MI", "BND", s) + "\n")
        elif var.lo != 0.0:
            w(_field_line("LO", "BND", s, var.lo) + "\n")
        if var.hi != math.inf:
            w(_field_line("UP", "BND", s, var.hi) + "\n")
    if model.sos1_sets:
        w("SOS\n")
        for s in model.sos1_sets:
            w(f" S1 SOS       {nmap[s.name]}\n")
            for n, v in enumerate(s.members, start=1):
                w(_field_line("", nmap[v], "", None).rstrip() + f"  {n}\n")
    w("ENDATA\n")
    return out.getvalue()


def parse_mps(text: str) -> MipModel:
    """Read fixed or free MPS as written by :func:`export_model`.

    ``* name SHORT ORIGINAL`` comments restore the original names.
    """
    rename = {}
    model = MipModel()
    rows = {}  # mps row -> (sense or 'N')
    row_order = []
    coefs = {}  # row -> {col: c}
    cols = {}  # col -> kind
    bounds = {}
    sos = []
    section = None
    in_int = False
    obj_row = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("*"):
            parts = raw.split()
            if len(parts) == 4 and parts[1] == "name":
                rename[parts[2]] = parts[3]
            continue
        if not raw.strip():
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0].upper()
            if section == "NAME":
                model.name = head[1] if len(head) > 1 else "model"
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "SOS", "OBJSENSE"):
                raise ParseError(f"line {lineno}: unknown MPS section {section!r}")
            continue
        tok = raw.split()
        try:
            if section == "ROWS":
                sense, name = tok
                if sense == "N":
                    if obj_row is None:
                        obj_row = name
                    continue
                rows[name] = {"L": "<=", "G": ">=", "E": "="}[sense]
                row_order.append(name)
                coefs[name] = {}
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                col = tok[0]
                if col not in cols:
                    cols[col] = BINARY if in_int else CONTINUOUS
                for r, val in zip(tok[1::2], tok[2::2]):
                    val = float(val)
                    if r == obj_row:
                        model.objective[col] = val
                    elif r in coefs:
                        coefs[r][col] = val
                    else:
                        raise ParseError(f"line {lineno}: unknown row {r!r}")
            elif section == "RHS":
                for r, val in zip(tok[1::2], tok[2::2]):
                    bounds.setdefault(("rhs", r), float(val))
            elif section == "BOUNDS":
                kind, col = tok[0], tok[2]
                val = float(tok[3]) if len(tok) > 3 else None
                b = bounds.setdefault(col, {})
                if kind == "BV":
                    cols[col] = BINARY
                    b["lo"], b["hi"] = 0.0, 1.0
                elif kind == "FR":
                    b["lo"], b["hi"] = -math.inf, math.inf
                elif kind == "MI":
                    b["lo"] = -math.inf
                elif kind == "PL":
                    b["hi"] = math.inf
                elif kind == "LO":
                    b["lo"] = val
                elif kind == "UP":
                    b["hi"] = val
                elif kind == "FX":
                    b["lo"] = b["hi"] = val
                else:
                    raise ParseError(f"line {lineno}: unsupported bound type {kind!r}")
            elif section == "SOS":
                if tok[0] in ("S1", "S2"):
                    if tok[0] != "S1":
                        raise ParseError(f"line {lineno}: only SOS1 is supported")
                    sos.append((tok[-1], []))
                else:
                    sos[-1][1].append(tok[0])
            elif section == "RANGES":
                raise ParseError(f"line {lineno}: RANGES are not supported")
        except (ValueError, IndexError, KeyError) as exc:
            raise ParseError(f"line {lineno}: malformed MPS record ({exc})") from None

    def nm(s):
        return rename.get(s, s)

    for col, kind in cols.items():
        b = bounds.get(col, {})
        lo = b.get("lo", 0.0)
        hi = b.get("hi", math.inf)
        var = Variable(nm(col), kind, lo, hi)
        model.variables[var.name] = var
    model.objective = {nm(c): v for c, v in model.objective.items()}
    for r in row_order:
        name = nm(r)
        att = USER if name.startswith(USER_CUT_PREFIX) else ROOT
        model.constraints.append(Constraint(
            name, {nm(c): v for c, v in coefs[r].items()}, rows[r],
            bounds.get(("rhs", r), 0.0), att))
    for name, members in sos:
        model.sos1_sets.append(Sos1(nm(name), [nm(m) for m in members]))
    return model


# ---------------------------------------------------------------------------
# CPLEX LP


def _lp_expr(terms, filler, width=78):
    pieces = []
    for v, c in terms:
        if c == 1.0:
            pieces.append(f"+ {v}")
        elif c == -1.0:
            pieces.append(f"- {v}")
        elif c < 0:
            pieces.append(f"- {_num(-c)} {v}")
        else:
            pieces.append(f"+ {_num(c)} {v}")
    if not pieces:
        return [f"0 {filler}"]
    lines, cur = [], ""
    for p in pieces:
        if cur and len(cur) + len(p) + 1 > width:
            lines.append(cur)
            cur = ""
        cur = f"{cur} {p}" if cur else p
    lines.append(cur)
    if lines[0].startswith("+ "):
        lines[0] = lines[0][2:]
    return lines


def _write_lp(model: MipModel) -> str:
    out = io.StringIO()
    w = out.write
    w(f"\\ {model.name}\n")
    w("Minimize\n")
    filler = next(iter(model.variables), "x")
    obj = _lp_expr(list(model.objective.items()), filler)
    w(" obj: " + "\n      ".join(obj) + "\n")
    w("Subject To\n")
    for con in model.constraints:
        expr = _lp_expr(list(con.terms.items()), filler)
        w(f" {con.name}: " + "\n   ".join(expr) + f" {con.sense} {_num(con.rhs)}\n")
    w("Bounds\n")
    for v, var in model.variables.items():
        if var.is_binary:
            continue
        if var.lo == -math.inf and var.hi == math.inf:
            w(f" {v} free\n")
        elif var.hi == math.inf:
            if var.lo != 0.0:
                w(f" {v} >= {_num(var.lo)}\n")
        else:
            lo = "-inf" if var.lo == -math.inf else _num(var.lo)
            w(f" {lo} <= {v} <= {_num(var.hi)}\n")
    bins = [v for v, var in model.variables.items() if var.is_binary]
    if bins:
        w("Binaries\n")
        for v in bins:
            w(f" {v}\n")
    if model.sos1_sets:
        w("SOS\n")
        for s in model.sos1_sets:
            items = " ".join(f"{v}:{n}" for n, v in enumerate(s.members, start=1))
            w(f" {s.name}: S1:: {items}\n")
    w("End\n")
    return out.getvalue()


_TOKEN = re.compile(
    r"\s*(<=|>=|=<|=>|=|[+-]|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![\w.])"
    r"|[^\s+\-<>=:]+:|[^\s+\-<>=]+)"
)
_SECTION = {
    "minimize": "obj", "minimise": "obj", "minimum": "obj", "min": "obj",
    "maximize": "max", "maximise": "max", "maximum": "max", "max": "max",
    "subject to": "con", "such that": "con", "st": "con", "s.t.": "con",
    "bounds": "bnd", "bound": "bnd",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "generals": "gen", "general": "gen", "gen": "gen",
    "sos": "sos", "end": "end",
    "user cuts": "cut", "lazy constraints": "lazy",
}


def _is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _parse_linear(tokens, lineno):
    """Tokens of ``[name:] expr sense rhs`` -> (name, terms, sense, rhs)."""
    name = None
    if tokens and tokens[0].endswith(":"):
        name = tokens[0][:-1]
        tokens = tokens[1:]
    terms = {}
    sense = rhs = None
    sign, coef = 1.0, None
    k = 0
    while k < len(tokens):
        t = tokens[k]
        if t in ("<=", ">=", "=", "=<", "=>"):
            sense = {"=<": "<=", "=>": ">="}.get(t, t)
            rest = tokens[k + 1:]
            if len(rest) == 2 and rest[0] in "+-":
                rest = [rest[0] + rest[1]]
            if len(rest) != 1 or not _is_number(rest[0]):
                raise ParseError(f"line {lineno}: bad right-hand side")
            rhs = float(rest[0])
            break
        if t == "+":
            sign = 1.0
        elif t == "-":
            sign = -sign
        elif _is_number(t):
            coef = float(t) if coef is None else coef * float(t)
        else:
            c = sign * (1.0 if coef is None else coef)
            terms[t] = terms.get(t, 0.0) + c
            sign, coef = 1.0, None
        k += 1
    return name, terms, sense, rhs


def parse_lp(text: str) -> MipModel:
    """Read the CPLEX LP subset produced by :func:`export_model`."""
    model = MipModel()
    section = None
    buf, buf_line = [], 0
    declared = {}  # name -> Variable (in order of appearance)
    binaries = set()

    def var(name):
        if name not in declared:
            declared[name] = Variable(name)
        return declared[name]

    def flush():
        nonlocal buf
        if not buf:
            return
        toks = buf
        buf = []
        if section == "obj":
            if toks and toks[0].endswith(":"):
                toks = toks[1:]
            _, terms, _, _ = _parse_linear(toks + ["=", "0"], buf_line)
            for v, c in terms.items():
                var(v)
                model.objective[v] = c
        elif section in ("con", "cut", "lazy"):
            name, terms, sense, rhs = _parse_linear(toks, buf_line)
            if sense is None:
                raise ParseError(f"line {buf_line}: constraint without sense")
            for v in terms:
                var(v)
            name = name or f"R{len(model.constraints) + 1}"
            att = USER if section == "cut" or name.startswith(USER_CUT_PREFIX) else ROOT
            model.constraints.append(Constraint(name, terms, sense, rhs, att))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = " ".join(line.lower().split())
        if key in _SECTION:
            flush()
            section = _SECTION[key]
            if section == "max":
                raise ParseError(f"line {lineno}: only minimisation is supported")
            if section == "end":
                break
            continue
        if section is None:
            raise ParseError(f"line {lineno}: content before any section")
        if section in ("obj", "con", "cut", "lazy"):
            toks = [m.group(1) for m in _TOKEN.finditer(line)]
            starts_new = bool(toks) and toks[0].endswith(":") and section != "obj"
            ends_prev = buf and any(t in ("<=", ">=", "=", "=<", "=>") for t in buf)
            if starts_new or ends_prev:
                flush()
            if not buf:
                buf_line = lineno
            buf.extend(toks)
        elif section == "bnd":
            toks = line.replace("<=", " <= ").replace(">=", " >= ").split()
            try:
                if len(toks) == 2 and toks[1].lower() == "free":
                    v = var(toks[0])
                    v.lo, v.hi = -math.inf, math.inf
                elif len(toks) == 5:
                    v = var(toks[2])
                    v.lo, v.hi = float(toks[0]), float(toks[4])
                elif len(toks) == 3 and toks[1] in ("<=", ">=", "="):
                    if _is_number(toks[0]):
                        v, val, op = var(toks[2]), float(toks[0]), {"<=": ">=", ">=": "<="}.get(toks[1], "=")
                    else:
                        v, val, op = var(toks[0]), float(toks[2]), toks[1]
                    if op == "<=":
                        v.hi = val
                    elif op == ">=":
                        v.lo = val
                    else:
                        v.lo = v.hi = val
                else:
                    raise ValueError(line)
            except ValueError:
                raise ParseError(f"line {lineno}: bad bound {line!r}") from None
        elif section == "bin":
            for t in line.split():
                binaries.add(t)
                var(t)
        elif section == "gen":
            raise ParseError(f"line {lineno}: general integers are not supported")
        elif section == "sos":
            m = re.match(r"(\S+):\s*S1::\s*(.*)$", line)
            if not m:
                raise ParseError(f"line {lineno}: bad SOS line {line!r}")
            members = [item.rsplit(":", 1)[0] for item in m.group(2).split()]
            model.sos1_sets.append(Sos1(m.group(1), members))
    flush()
    for name, v in declared.items():
        if name in binaries:
            v.kind, v.lo, v.hi = BINARY, 0.0, 1.0
        model.variables[name] = v
    return model


def export_model(model: MipModel, format: str = "lp") -> str:
    if format == "mps":
        return _write_mps(model)
    if format == "lp":
        return _write_lp(model)
    raise ValueError(f"unknown model format {format!r}")


def parse_model(text: str, format: str) -> MipModel:
    if format == "mps":
        return parse_mps(text)
    if format == "lp":
        return parse_lp(text)
    raise ValueError(f"unknown model format {format!r}")
