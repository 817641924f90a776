"""Reference problems believed strictly harder than constant-depth
threshold circuits: arithmetic formula evaluation, Boolean formula value,
and permutation composition (the S5 word problem), plus the classical
width-5 permutation branching-program construction that places all of them
in logarithmic circuit depth.

Arithmetic formulas are expression trees over a semiring tagged
``integers``, ``booleans``, or ``zmod`` (addition/multiplication, unary
minus where additive inverses exist), serialized as S-expressions such as
``(+ (* X1 3) (- X2))``.  Boolean formulas come in two concrete syntaxes
over the alphabet {0, 1, AND, OR, NOT, parens}: a fully parenthesized infix
form and a postfix form in which a binary node is written ``<alpha><beta><op>``
with the *longer-or-equal* operand first and negation keeps its parentheses
(``(<alpha>NOT)``).  Permutations are stored as pointwise images and compose
right to left: the first permutation of a sequence is applied first.

``barrington_transform`` converts a single-output circuit of fan-in-2 AND,
NOT, INPUT and constant gates into a program over S5 whose instruction
count is at most ``4**depth`` and whose composed product is a fixed
5-cycle exactly on accepting assignments (identity otherwise).  AND is the
commutator of retargeted subprograms; NOT appends the inverse cycle and
retargets; OR gates must be lowered first (:func:`lower_or_gates`).

``gen_instances`` emits byte-reproducible labelled corpora for each
problem: one plain-text instance per line, ground truth computed by the
evaluators in this module.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import permutations as iter_permutations
from typing import Callable, Iterable, Sequence

from .circuits import ArityMismatch, Circuit, Gate

__all__ = [
    "ACCEPTING_CYCLE",
    "ArithFormula",
    "ArithNode",
    "BoolFormula",
    "Corpus",
    "DomainMismatch",
    "FormulaParseError",
    "IndexOutOfRange",
    "PbpInstruction",
    "PbpProgram",
    "Permutation",
    "Semiring",
    "UnsupportedGate",
    "barrington_transform",
    "compose",
    "enumerate_small_circuits",
    "eval_arith",
    "eval_bool",
    "eval_instance",
    "eval_pbp",
    "gen_instances",
    "lower_or_gates",
    "parse_arith",
    "parse_bool_infix",
    "parse_bool_postfix",
    "parse_permutation_line",
    "word_problem",
]


class FormulaParseError(ValueError):
    """Malformed formula text (either syntax)."""


class DomainMismatch(ValueError):
    """Operands from different domains, or an operation the domain lacks."""


class UnsupportedGate(ValueError):
    """Gate kind outside the fan-in-2 AND/NOT basis."""


class IndexOutOfRange(IndexError):
    """A branching-program instruction references a missing input bit."""


# ------------------------------------------------------------- arithmetic


@dataclass(frozen=True, slots=True)
class Semiring:
    """Carrier tag: arbitrary-precision integers, Booleans (OR/AND), or
    integers modulo m.  ``+``/``*`` are the two semiring operations; unary
    minus exists only where additive inverses do."""

    kind: str
    modulus: int | None = None

    @classmethod
    def integers(cls) -> "Semiring":
        return cls("integers")

    @classmethod
    def booleans(cls) -> "Semiring":
        return cls("booleans")

    @classmethod
    def zmod(cls, m: int) -> "Semiring":
        if m < 2:
            raise ValueError(f"modulus must be >= 2, got {m}")
        return cls("zmod", m)

    def coerce(self, value: int) -> int:
        """Bring a constant into the carrier (Z_m reduces, never errors)."""
        if not isinstance(value, int) or isinstance(value, bool):
            raise DomainMismatch(f"{value!r} is not a semiring constant")
        if self.kind == "booleans":
            if value not in (0, 1):
                raise DomainMismatch(f"{value} is not a Boolean constant")
            return value
        if self.kind == "zmod":
            return value % (self.modulus or 1)
        return value

    def add(self, a: int, b: int) -> int:
        if self.kind == "booleans":
            return a | b
        if self.kind == "zmod":
            return (a + b) % (self.modulus or 1)
        return a + b

    def mul(self, a: int, b: int) -> int:
        if self.kind == "booleans":
            return a & b
        if self.kind == "zmod":
            return (a * b) % (self.modulus or 1)
        return a * b

    def neg(self, a: int) -> int:
        if self.kind == "booleans":
            raise DomainMismatch("the Boolean semiring has no additive inverse")
        if self.kind == "zmod":
            return (-a) % (self.modulus or 1)
        return -a

    def name(self) -> str:
        return f"z{self.modulus}" if self.kind == "zmod" else self.kind


@dataclass(frozen=True, slots=True)
class ArithNode:
    """Expression-tree node: const / var / neg / add / mul."""

    op: str
    value: int | None = None  # const
    index: int | None = None  # var, 1-based
    args: tuple["ArithNode", ...] = ()


@dataclass(frozen=True, slots=True)
class ArithFormula:
    """A semiring-tagged expression tree over indeterminates X1..Xn."""

    semiring: Semiring
    root: ArithNode
    n_indeterminates: int

    def to_sexpr(self) -> str:
        return _node_to_sexpr(self.root)


def _node_to_sexpr(node: ArithNode) -> str:
    if node.op == "const":
        return str(node.value)
    if node.op == "var":
        return f"X{node.index}"
    if node.op == "neg":
        return f"(- {_node_to_sexpr(node.args[0])})"
    sym = "+" if node.op == "add" else "*"
    return f"({sym} {_node_to_sexpr(node.args[0])} {_node_to_sexpr(node.args[1])})"


def _tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_arith(text: str, semiring: Semiring) -> ArithFormula:
    """Parse an S-expression: atoms are integers or ``Xk``; forms are
    ``(+ a b)``, ``(* a b)``, and ``(- a)``."""
    tokens = _tokenize_sexpr(text)
    if not tokens:
        raise FormulaParseError("empty formula")
    pos = 0

    def parse_node() -> ArithNode:
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaParseError("unexpected end of formula")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise FormulaParseError("dangling '('")
            op = tokens[pos]
            pos += 1
            if op == "-":
                child = parse_node()
                node = ArithNode("neg", args=(child,))
            elif op in ("+", "*"):
                left = parse_node()
                right = parse_node()
                node = ArithNode("add" if op == "+" else "mul", args=(left, right))
            else:
                raise FormulaParseError(f"unknown operator {op!r}")
            if pos >= len(tokens) or tokens[pos] != ")":
                raise FormulaParseError("missing ')'")
            pos += 1
            return node
        if tok == ")":
            raise FormulaParseError("unexpected ')'")
        if tok.startswith("X"):
            try:
                index = int(tok[1:])
            except ValueError:
                raise FormulaParseError(f"bad indeterminate {tok!r}") from None
            if index < 1:
                raise FormulaParseError("indeterminate indices are 1-based")
            return ArithNode("var", index=index)
        try:
            value = int(tok)
        except ValueError:
            raise FormulaParseError(f"bad atom {tok!r}") from None
        return ArithNode("const", value=semiring.coerce(value))

    root = parse_node()
    if pos != len(tokens):
        raise FormulaParseError(f"trailing tokens at {pos}")
    return ArithFormula(semiring, root, _max_index(root))


def _max_index(node: ArithNode) -> int:
    if node.op == "var":
        return node.index or 0
    return max((_max_index(a) for a in node.args), default=0)


def eval_arith(formula: ArithFormula, assignment: Sequence[int]) -> int:
    """Recursive evaluation of the tree under X_i := assignment[i-1]."""
    if len(assignment) != formula.n_indeterminates:
        raise ArityMismatch(
            f"formula uses X1..X{formula.n_indeterminates}, "
            f"got {len(assignment)} constants"
        )
    ring = formula.semiring
    values = [ring.coerce(c) for c in assignment]

    def walk(node: ArithNode) -> int:
        if node.op == "const":
            return ring.coerce(node.value or 0)
        if node.op == "var":
            return values[(node.index or 1) - 1]
        if node.op == "neg":
            return ring.neg(walk(node.args[0]))
        a, b = (walk(x) for x in node.args)
        return ring.add(a, b) if node.op == "add" else ring.mul(a, b)

    return walk(formula.root)


# ----------------------------------------------------------- Boolean form

_NOT, _AND, _OR = "¬", "∧", "∨"
_ALIASES = {"!": _NOT, "~": _NOT, "&": _AND, "|": _OR}


@dataclass(frozen=True, slots=True)
class BoolFormula:
    """Closed Boolean formula tree: const / not / and / or."""

    op: str
    value: int | None = None
    args: tuple["BoolFormula", ...] = ()

    def to_infix(self) -> str:
        if self.op == "const":
            return str(self.value)
        if self.op == "not":
            return f"({_NOT}{self.args[0].to_infix()})"
        sym = _AND if self.op == "and" else _OR
        return f"({self.args[0].to_infix()}{sym}{self.args[1].to_infix()})"

    def to_postfix(self) -> str:
        """Canonical postfix: the longer operand printed first (the two
        binary connectives are commutative, so swapping preserves value)."""
        if self.op == "const":
            return str(self.value)
        if self.op == "not":
            return f"({self.args[0].to_postfix()}{_NOT})"
        sym = _AND if self.op == "and" else _OR
        first = self.args[0].to_postfix()
        second = self.args[1].to_postfix()
        if len(first) < len(second):
            first, second = second, first
        return f"{first}{second}{sym}"


def _canon(text: str) -> str:
    out = []
    for ch in text:
        if ch.isspace():
            continue
        out.append(_ALIASES.get(ch, ch))
    return "".join(out)


def parse_bool_infix(text: str) -> BoolFormula:
    """Fully parenthesized infix: 0, 1, (NOT f), (f AND g), (f OR g)."""
    s = _canon(text)
    pos = 0

    def parse_node() -> BoolFormula:
        nonlocal pos
        if pos >= len(s):
            raise FormulaParseError("unexpected end of formula")
        ch = s[pos]
        if ch in "01":
            pos += 1
            return BoolFormula("const", value=int(ch))
        if ch != "(":
            raise FormulaParseError(f"expected '(' or constant at {pos}")
        pos += 1
        if pos < len(s) and s[pos] == _NOT:
            pos += 1
            inner = parse_node()
            node = BoolFormula("not", args=(inner,))
        else:
            left = parse_node()
            if pos >= len(s) or s[pos] not in (_AND, _OR):
                raise FormulaParseError(f"expected connective at {pos}")
            op = "and" if s[pos] == _AND else "or"
            pos += 1
            right = parse_node()
            node = BoolFormula(op, args=(left, right))
        if pos >= len(s) or s[pos] != ")":
            raise FormulaParseError(f"missing ')' at {pos}")
        pos += 1
        return node

    node = parse_node()
    if pos != len(s):
        raise FormulaParseError(f"trailing characters at {pos}")
    return node


def parse_bool_postfix(text: str) -> BoolFormula:
    """Postfix form: ``<alpha><beta><op>`` with ``len(alpha) >= len(beta)``
    (enforced), negation written ``(<alpha>NOT)`` with its parentheses."""
    s = _canon(text)
    marker = object()
    stack: list = []  # (formula, symbol_length) pairs or open-paren markers
    i = 0
    while i < len(s):
        ch = s[i]
        if ch in "01":
            stack.append((BoolFormula("const", value=int(ch)), 1))
        elif ch == "(":
            stack.append(marker)
        elif ch == _NOT:
            if not stack or stack[-1] is marker:
                raise FormulaParseError(f"negation lacks an operand at {i}")
            inner, length = stack.pop()
            if not stack or stack[-1] is not marker:
                raise FormulaParseError(f"negation must be parenthesized at {i}")
            stack.pop()
            if i + 1 >= len(s) or s[i + 1] != ")":
                raise FormulaParseError(f"negation missing ')' at {i}")
            i += 1
            stack.append((BoolFormula("not", args=(inner,)), length + 3))
        elif ch in (_AND, _OR):
            if len(stack) < 2 or stack[-1] is marker or stack[-2] is marker:
                raise FormulaParseError(f"connective lacks operands at {i}")
            beta, len_beta = stack.pop()
            alpha, len_alpha = stack.pop()
            if len_alpha < len_beta:
                raise FormulaParseError(
                    f"operand order violates the length rule at {i}: "
                    f"{len_alpha} < {len_beta}"
                )
            op = "and" if ch == _AND else "or"
            stack.append(
                (BoolFormula(op, args=(alpha, beta)), len_alpha + len_beta + 1)
            )
        elif ch == ")":
            raise FormulaParseError(f"unmatched ')' at {i}")
        else:
            raise FormulaParseError(f"unexpected symbol {ch!r} at {i}")
        i += 1
    if len(stack) != 1 or stack[0] is marker:
        raise FormulaParseError("formula does not reduce to a single value")
    return stack[0][0]


def eval_bool(formula: BoolFormula) -> int:
    if formula.op == "const":
        return formula.value or 0
    if formula.op == "not":
        return 1 - eval_bool(formula.args[0])
    a = eval_bool(formula.args[0])
    b = eval_bool(formula.args[1])
    return (a & b) if formula.op == "and" else (a | b)


# ------------------------------------------------------------ permutations


@dataclass(frozen=True, slots=True)
class Permutation:
    """Bijection on [n], stored as the image tuple (1-based values)."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.image)
        if sorted(self.image) != list(range(1, n + 1)):
            raise ValueError(f"{self.image} is not a bijection on [{n}]")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycle(cls, cycle: Sequence[int], n: int) -> "Permutation":
        image = list(range(1, n + 1))
        for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
            image[a - 1] = b
        return cls(tuple(image))

    @classmethod
    def from_string(cls, text: str) -> "Permutation":
        return cls(tuple(int(ch) for ch in text.strip()))

    def to_string(self) -> str:
        return "".join(str(v) for v in self.image)

    @property
    def n(self) -> int:
        return len(self.image)

    def apply(self, x: int) -> int:
        return self.image[x - 1]

    def after(self, other: "Permutation") -> "Permutation":
        """Function composition self(other(x)): ``other`` acts first."""
        if self.n != other.n:
            raise DomainMismatch(f"domain sizes differ: {self.n} vs {other.n}")
        return Permutation(tuple(self.image[v - 1] for v in other.image))

    def inverse(self) -> "Permutation":
        image = [0] * self.n
        for x, v in enumerate(self.image, start=1):
            image[v - 1] = x
        return Permutation(tuple(image))

    @property
    def is_identity(self) -> bool:
        return all(v == x for x, v in enumerate(self.image, start=1))


def compose(perms: Sequence[Permutation]) -> Permutation:
    """Right-to-left product: the first sequence element is applied first."""
    if not perms:
        raise ValueError("compose requires at least one permutation")
    acc = Permutation.identity(perms[0].n)
    for p in perms:
        acc = p.after(acc)
    return acc


def word_problem(perms: Sequence[Permutation]) -> int:
    """1 iff the right-to-left composition is the identity."""
    return int(compose(perms).is_identity)


def parse_permutation_line(line: str) -> list[Permutation]:
    return [Permutation.from_string(tok) for tok in line.split()]


# -------------------------------------------------- branching programs


ACCEPTING_CYCLE = Permutation.from_cycle((1, 2, 3, 4, 5), 5)


@dataclass(frozen=True, slots=True)
class PbpInstruction:
    """Read input bit ``var`` (0-based): contribute ``on_true`` or
    ``on_false`` to the running product."""

    var: int
    on_true: Permutation
    on_false: Permutation


@dataclass(frozen=True, slots=True)
class PbpProgram:
    """Width-5 permutation branching program.

    Accepts an assignment when the instruction-by-instruction product
    (first instruction applied first) equals ``accept``; the construction
    guarantees the product is the identity otherwise.
    """

    instructions: tuple[PbpInstruction, ...]
    n_inputs: int
    accept: Permutation = ACCEPTING_CYCLE

    def __len__(self) -> int:
        return len(self.instructions)


def eval_pbp(program: PbpProgram, bits: Sequence[int]) -> int:
    """Compose the selected permutations; 1 iff the accepting cycle."""
    acc = Permutation.identity(5)
    for ins in program.instructions:
        if not 0 <= ins.var < len(bits):
            raise IndexOutOfRange(
                f"instruction reads bit {ins.var}, assignment has {len(bits)}"
            )
        step = ins.on_true if bits[ins.var] else ins.on_false
        acc = step.after(acc)
    return int(acc.image == program.accept.image)


def _all_s5() -> list[Permutation]:
    return [Permutation(img) for img in iter_permutations(range(1, 6))]


_S5 = _all_s5()
_CONJUGATOR_CACHE: dict[tuple[tuple[int, ...], tuple[int, ...]], Permutation] = {}
_COMMUTATOR_PAIR: tuple[Permutation, Permutation] | None = None


def _find_conjugator(source: Permutation, target: Permutation) -> Permutation:
    """Some pi with pi * source * pi^-1 = target (5-cycles are conjugate)."""
    key = (source.image, target.image)
    hit = _CONJUGATOR_CACHE.get(key)
    if hit is not None:
        return hit
    for pi in _S5:
        if pi.after(source).after(pi.inverse()).image == target.image:
            _CONJUGATOR_CACHE[key] = pi
            return pi
    raise ValueError(f"{source.image} and {target.image} are not conjugate")


def _is_five_cycle(p: Permutation) -> bool:
    x, seen = 1, 0
    while True:
        x = p.apply(x)
        seen += 1
        if x == 1:
            return seen == 5


def _commutator_pair() -> tuple[Permutation, Permutation]:
    """Two 5-cycles whose commutator is itself a 5-cycle (found by search)."""
    global _COMMUTATOR_PAIR
    if _COMMUTATOR_PAIR is None:
        cycles = [p for p in _S5 if _is_five_cycle(p)]
        for gamma in cycles:
            for delta in cycles:
                comm = (
                    delta.inverse()
                    .after(gamma.inverse())
                    .after(delta)
                    .after(gamma)
                )
                if _is_five_cycle(comm):
                    _COMMUTATOR_PAIR = (gamma, delta)
                    return _COMMUTATOR_PAIR
        raise AssertionError("no commutator pair in S5")  # pragma: no cover
    return _COMMUTATOR_PAIR


def _retarget(
    instructions: tuple[PbpInstruction, ...],
    source: Permutation,
    target: Permutation,
) -> tuple[PbpInstruction, ...]:
    """Conjugate every instruction so a source-computing program becomes a
    target-computing one (interior conjugators cancel; length unchanged)."""
    pi = _find_conjugator(source, target)
    pi_inv = pi.inverse()
    return tuple(
        PbpInstruction(
            ins.var,
            pi.after(ins.on_true).after(pi_inv),
            pi.after(ins.on_false).after(pi_inv),
        )
        for ins in instructions
    )


def lower_or_gates(circuit: Circuit) -> Circuit:
    """Rewrite fan-in-2 OR gates as NOT(AND(NOT, NOT)) (De Morgan).

    The result uses only the basis ``barrington_transform`` accepts; any
    THRESHOLD or wider fan-in raises :class:`UnsupportedGate`.
    """
    gates: list[Gate] = []
    remap: dict[int, int] = {}

    def emit(kind: str, inputs: tuple[int, ...] = ()) -> int:
        gid = len(gates)
        gates.append(Gate(gid, kind, inputs))
        return gid

    for g in circuit.gates:
        ins = tuple(remap[q] for q in g.inputs)
        if g.kind in ("INPUT", "CONST0", "CONST1", "NOT"):
            remap[g.id] = emit(g.kind, ins)
        elif g.kind == "AND":
            if len(ins) != 2:
                raise UnsupportedGate(f"AND gate {g.id} must have fan-in 2")
            remap[g.id] = emit("AND", ins)
        elif g.kind == "OR":
            if len(ins) != 2:
                raise UnsupportedGate(f"OR gate {g.id} must have fan-in 2")
            na = emit("NOT", (ins[0],))
            nb = emit("NOT", (ins[1],))
            both = emit("AND", (na, nb))
            remap[g.id] = emit("NOT", (both,))
        else:
            raise UnsupportedGate(f"cannot lower {g.kind} gate {g.id}")
    return Circuit(gates, [remap[o] for o in circuit.outputs])


def barrington_transform(circuit: Circuit) -> PbpProgram:
    """Standard width-5 construction over the fan-in-2 AND/NOT basis.

    Each gate's subprogram multiplies out to the accepting 5-cycle on
    assignments where the gate is 1 and to the identity otherwise.  An
    input is one instruction; CONST0 is the empty program; CONST1 is one
    constant instruction; NOT appends the inverse cycle and retargets; AND
    concatenates retargeted copies of its operands in commutator order,
    doubling their combined length — hence length <= 4**depth.

    The circuit must have exactly one output; OR/THRESHOLD gates raise
    :class:`UnsupportedGate` (lower them first via :func:`lower_or_gates`).
    """
    if len(circuit.outputs) != 1:
        raise ValueError("the branching-program transform needs one output")
    if circuit.n_inputs < 1:
        raise ValueError("the transform needs at least one input bit")
    rho = ACCEPTING_CYCLE
    rho_inv = rho.inverse()
    ident = Permutation.identity(5)
    input_pos = {g.id: pos for pos, g in enumerate(
        g for g in circuit.gates if g.kind == "INPUT"
    )}
    gamma, delta = _commutator_pair()
    commutator = (
        delta.inverse().after(gamma.inverse()).after(delta).after(gamma)
    )

    programs: dict[int, tuple[PbpInstruction, ...]] = {}
    for g in circuit.gates:
        if g.kind == "INPUT":
            programs[g.id] = (PbpInstruction(input_pos[g.id], rho, ident),)
        elif g.kind == "CONST0":
            programs[g.id] = ()
        elif g.kind == "CONST1":
            programs[g.id] = (PbpInstruction(0, rho, rho),)
        elif g.kind == "NOT":
            inner = programs[g.inputs[0]]
            appended = inner + (PbpInstruction(0, rho_inv, rho_inv),)
            programs[g.id] = _retarget(appended, rho_inv, rho)
        elif g.kind == "AND":
            if len(g.inputs) != 2:
                raise UnsupportedGate(f"AND gate {g.id} must have fan-in 2")
            left = programs[g.inputs[0]]
            right = programs[g.inputs[1]]
            combined = (
                _retarget(left, rho, gamma)
                + _retarget(right, rho, delta)
                + _retarget(left, rho, gamma.inverse())
                + _retarget(right, rho, delta.inverse())
            )
            programs[g.id] = _retarget(combined, commutator, rho)
        else:
            raise UnsupportedGate(
                f"{g.kind} gate {g.id}: lower to the AND/NOT basis first"
            )
    return PbpProgram(programs[circuit.outputs[0]], circuit.n_inputs)


def enumerate_small_circuits(
    n_inputs: int = 3, max_depth: int = 3, include_or: bool = False
) -> list[Circuit]:
    """Fixed deterministic family: one circuit per reachable
    (truth table, depth) class with depth <= ``max_depth``.

    Built by bottom-up closure over the fan-in-2 basis (AND/NOT, optionally
    OR) with leaves X1..Xn, CONST0, CONST1, keeping the first representative
    found for each class; every Boolean function realizable at each depth
    is therefore exercised exactly once.
    """
    n_assign = 1 << n_inputs
    Tree = tuple  # ("x", i) | ("c", b) | ("not", t) | ("and"|"or", t, t)

    def table(tree: Tree) -> int:
        bits = 0
        for a in range(n_assign):
            if _eval_tree(tree, a):
                bits |= 1 << a
        return bits

    def _eval_tree(tree: Tree, a: int) -> int:
        tag = tree[0]
        if tag == "x":
            return (a >> tree[1]) & 1
        if tag == "c":
            return tree[1]
        if tag == "not":
            return 1 - _eval_tree(tree[1], a)
        lhs = _eval_tree(tree[1], a)
        rhs = _eval_tree(tree[2], a)
        return (lhs & rhs) if tag == "and" else (lhs | rhs)

    by_depth: list[list[Tree]] = [[]]
    seen: set[tuple[int, int]] = set()
    for i in range(n_inputs):
        by_depth[0].append(("x", i))
        seen.add((table(("x", i)), 0))
    for b in (0, 1):
        by_depth[0].append(("c", b))
        seen.add((table(("c", b)), 0))

    ops = ["and", "or"] if include_or else ["and"]
    for depth in range(1, max_depth + 1):
        layer: list[Tree] = []
        below = [t for lvl in by_depth for t in lvl]
        tops = by_depth[depth - 1]
        for t in tops:
            cand = ("not", t)
            key = (table(cand), depth)
            if key not in seen:
                seen.add(key)
                layer.append(cand)
        for op in ops:
            for t1 in tops:
                for t2 in below:
                    for cand in ((op, t1, t2), (op, t2, t1)):
                        key = (table(cand), depth)
                        if key not in seen:
                            seen.add(key)
                            layer.append(cand)
        by_depth.append(layer)

    def compile_tree(tree: Tree) -> Circuit:
        gates = [Gate(i, "INPUT") for i in range(n_inputs)]

        def emit(kind: str, inputs: tuple[int, ...] = ()) -> int:
            gid = len(gates)
            gates.append(Gate(gid, kind, inputs))
            return gid

        def walk(t: Tree) -> int:
            tag = t[0]
            if tag == "x":
                return t[1]
            if tag == "c":
                return emit("CONST1" if t[1] else "CONST0")
            if tag == "not":
                return emit("NOT", (walk(t[1]),))
            return emit(tag.upper(), (walk(t[1]), walk(t[2])))

        out = walk(tree)
        return Circuit(gates, [out])

    return [compile_tree(t) for lvl in by_depth for t in lvl]


# ----------------------------------------------------------------- corpora


@dataclass(frozen=True, slots=True)
class Corpus:
    """A labelled instance set; line i of the labels grounds line i of the
    instances.  Serialization is canonical, so equal parameters give
    byte-identical text."""

    kind: str
    size: int
    seed: int
    instances: tuple[str, ...]
    labels: tuple[str, ...]

    def instances_text(self) -> str:
        return "\n".join(self.instances) + "\n"

    def labels_text(self) -> str:
        return "\n".join(self.labels) + "\n"


def _rng_for(kind: str, size: int, seed: int) -> random.Random:
    return random.Random(f"{kind}|{size}|{seed}")


def _random_bool_tree(rng: random.Random, budget: int) -> BoolFormula:
    """A random closed formula whose postfix form fits in ``budget`` symbols."""
    if budget < 4 or rng.random() < 0.2:
        return BoolFormula("const", value=rng.randint(0, 1))
    choice = rng.random()
    if choice < 0.3:
        return BoolFormula("not", args=(_random_bool_tree(rng, budget - 3),))
    left_budget = rng.randint(1, budget - 2)
    left = _random_bool_tree(rng, left_budget)
    right = _random_bool_tree(rng, budget - 1 - left_budget)
    op = "and" if choice < 0.65 else "or"
    return BoolFormula(op, args=(left, right))


def _random_arith_node(
    rng: random.Random, budget: int, ring: Semiring, n_vars: int
) -> ArithNode:
    if budget <= 1 or rng.random() < 0.25:
        if n_vars and rng.random() < 0.5:
            return ArithNode("var", index=rng.randint(1, n_vars))
        hi = (ring.modulus - 1) if ring.kind == "zmod" else 9
        lo = 0 if ring.kind != "integers" else -9
        return ArithNode("const", value=ring.coerce(rng.randint(lo, hi)))
    roll = rng.random()
    if roll < 0.2 and ring.kind != "booleans":
        return ArithNode(
            "neg", args=(_random_arith_node(rng, budget - 1, ring, n_vars),)
        )
    split = rng.randint(1, max(budget - 2, 1))
    left = _random_arith_node(rng, split, ring, n_vars)
    right = _random_arith_node(rng, budget - 1 - split, ring, n_vars)
    return ArithNode("add" if roll < 0.6 else "mul", args=(left, right))


def _random_s5(rng: random.Random) -> Permutation:
    image = list(range(1, 6))
    rng.shuffle(image)
    return Permutation(tuple(image))


def _arith_semiring(kind: str) -> Semiring:
    if kind == "arith":
        return Semiring.integers()
    if kind.startswith("arith-z"):
        return Semiring.zmod(int(kind[len("arith-z") :]))
    raise ValueError(f"unknown arithmetic corpus kind {kind!r}")


def gen_instances(kind: str, size: int, seed: int, count: int = 100) -> Corpus:
    """Deterministic labelled corpus for one problem family.

    Kinds: ``bool`` (postfix formulas of at most ``size`` symbols),
    ``perm`` (lines of ``size`` space-separated S5 image strings, roughly
    half engineered to compose to the identity), ``arith`` (integer
    S-expressions with at most ``size`` operators plus a three-constant
    assignment after ``;``), and ``arith-zM`` (the same over Z_M).
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = _rng_for(kind, size, seed)
    instances: list[str] = []
    labels: list[str] = []
    if kind == "bool":
        for _ in range(count):
            tree = _random_bool_tree(rng, size)
            instances.append(tree.to_postfix())
            labels.append(str(eval_bool(tree)))
    elif kind == "perm":
        for _ in range(count):
            if size >= 2 and rng.random() < 0.5:
                head = [_random_s5(rng) for _ in range(size - 1)]
                closing = compose(head).inverse() if len(head) else None
                perms = head + ([closing] if closing else [])
            else:
                perms = [_random_s5(rng) for _ in range(size)]
            instances.append(" ".join(p.to_string() for p in perms))
            labels.append(str(word_problem(perms)))
    elif kind == "arith" or kind.startswith("arith-z"):
        ring = _arith_semiring(kind)
        n_vars = 3
        for _ in range(count):
            node = _random_arith_node(rng, size, ring, n_vars)
            formula = ArithFormula(ring, node, n_vars)
            hi = (ring.modulus - 1) if ring.kind == "zmod" else 9
            lo = -9 if ring.kind == "integers" else 0
            assignment = [rng.randint(lo, hi) for _ in range(n_vars)]
            instances.append(
                formula.to_sexpr() + " ; " + ",".join(str(c) for c in assignment)
            )
            labels.append(str(eval_arith(formula, assignment)))
    else:
        raise ValueError(f"unknown corpus kind {kind!r}")
    return Corpus(kind, size, seed, tuple(instances), tuple(labels))


def eval_instance(kind: str, line: str) -> str:
    """Recompute the ground-truth label of one corpus line."""
    if kind == "bool":
        return str(eval_bool(parse_bool_postfix(line)))
    if kind == "perm":
        return str(word_problem(parse_permutation_line(line)))
    if kind == "arith" or kind.startswith("arith-z"):
        ring = _arith_semiring(kind)
        if ";" not in line:
            raise FormulaParseError("arithmetic instance needs '; assignment'")
        expr, _, assign_text = line.partition(";")
        formula = parse_arith(expr.strip(), ring)
        assign_text = assign_text.strip()
        assignment = (
            [int(tok) for tok in assign_text.split(",")] if assign_text else []
        )
        # Pad to the declared arity: corpus formulas may not use every X_i.
        return str(eval_arith(formula, assignment[: formula.n_indeterminates]))
    raise ValueError(f"unknown corpus kind {kind!r}")
