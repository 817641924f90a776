"""Threshold-circuit intermediate representation.

A circuit is an immutable DAG of unbounded fan-in gates over the kinds
``INPUT``, ``CONST0``, ``CONST1``, ``NOT``, ``AND``, ``OR``, and
``THRESHOLD(k)`` (output 1 iff at least ``k`` inputs are 1).  A MAJORITY
gate over fan-in ``f`` is ``THRESHOLD(floor(f/2)+1)`` — "more than half".
Gate ids are dense and topologically ordered (every gate's inputs have
smaller ids), which makes evaluation a single forward pass.

Depth counts gate levels along input-to-output paths: ``INPUT`` and the
two constant kinds are depth-zero sources (a constant lies on no
input-to-output path and computes nothing), every other gate is one level
above its deepest argument, and the circuit depth is the deepest output.
Size counts all non-``INPUT`` gates, constants included.

Evaluation is bit-sliced: a wire's value across many assignments is packed
into one big integer, so exhaustive equivalence checks over all encodable
operand pairs run as a single forward pass with word-parallel bitwise
operations (thresholds use a ripple popcount over bit planes followed by a
lane-wise constant comparison).

The textual netlist format is one gate per line, ``id KIND [k] inputs...``,
followed by a final ``OUTPUTS id...`` line; parsing reports the offending
line number on error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "ArityMismatch",
    "Circuit",
    "CircuitError",
    "Gate",
    "ParseError",
    "evaluate",
    "evaluate_many",
    "is_majority_only",
    "parse_netlist",
    "serialize_netlist",
    "to_majority_only",
]

GATE_KINDS = ("INPUT", "CONST0", "CONST1", "NOT", "AND", "OR", "THRESHOLD")


class CircuitError(ValueError):
    """Structurally invalid circuit."""


class ArityMismatch(CircuitError):
    """An assignment's length does not match the circuit's input count."""


class ParseError(ValueError):
    """Netlist text rejected; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, slots=True)
class Gate:
    id: int
    kind: str
    inputs: tuple[int, ...] = ()
    k: int | None = None  # THRESHOLD only


class Circuit:
    """A validated gate list plus designated output ids."""

    def __init__(self, gates: Sequence[Gate], outputs: Sequence[int]):
        n = len(gates)
        for i, g in enumerate(gates):
            if g.id != i:
                raise CircuitError(f"gate ids must be dense and ordered, got {g.id} at {i}")
            if g.kind not in GATE_KINDS:
                raise CircuitError(f"unknown gate kind {g.kind!r}")
            if any(q >= i or q < 0 for q in g.inputs):
                raise CircuitError(f"gate {i} input ids must precede it")
            if g.kind in ("INPUT", "CONST0", "CONST1"):
                if g.inputs:
                    raise CircuitError(f"{g.kind} gate {i} takes no inputs")
            elif g.kind == "NOT":
                if len(g.inputs) != 1:
                    raise CircuitError(f"NOT gate {i} must have exactly one input")
            elif not g.inputs:
                raise CircuitError(f"{g.kind} gate {i} needs at least one input")
            if g.kind == "THRESHOLD":
                if g.k is None or not 1 <= g.k <= len(g.inputs):
                    raise CircuitError(
                        f"THRESHOLD gate {i} needs 1 <= k <= fan-in, got k={g.k}"
                    )
            elif g.k is not None:
                raise CircuitError(f"gate {i}: only THRESHOLD carries k")
        for o in outputs:
            if not 0 <= o < n:
                raise CircuitError(f"output id {o} out of range")
        self.gates: tuple[Gate, ...] = tuple(gates)
        self.outputs: tuple[int, ...] = tuple(outputs)
        self._input_ids = tuple(g.id for g in self.gates if g.kind == "INPUT")

    # ------------------------------------------------------------- metrics
    @property
    def n_inputs(self) -> int:
        return len(self._input_ids)

    @property
    def size(self) -> int:
        """Non-INPUT gate count (constants included)."""
        return sum(1 for g in self.gates if g.kind != "INPUT")

    @property
    def depth(self) -> int:
        """Gate levels on the deepest source-to-output path.

        Sources (inputs and constants) sit at level zero; every other gate
        is one level above its deepest argument.
        """
        level = [0] * len(self.gates)
        for g in self.gates:
            if g.kind in ("INPUT", "CONST0", "CONST1"):
                level[g.id] = 0
            else:
                level[g.id] = 1 + max((level[q] for q in g.inputs), default=0)
        return max((level[o] for o in self.outputs), default=0)


def _popcount_planes(lanes: list[int]) -> list[int]:
    """Bit planes (little-endian) of the per-lane count of set inputs."""
    planes: list[int] = []
    for x in lanes:
        carry = x
        for i in range(len(planes)):
            planes[i], carry = planes[i] ^ carry, planes[i] & carry
            if not carry:
                break
        else:
            if carry:
                planes.append(carry)
            continue
    return planes


def _ge_const(planes: list[int], k: int, mask: int) -> int:
    """Lane-wise test: does the plane-encoded count reach constant k?"""
    if k <= 0:
        return mask
    width = max(len(planes), k.bit_length())
    padded = planes + [0] * (width - len(planes))
    gt = 0
    eq = mask
    for bit in range(width - 1, -1, -1):
        kb = (k >> bit) & 1
        if kb == 0:
            gt |= eq & padded[bit]
        else:
            eq &= padded[bit]
    return (gt | eq) & mask


def evaluate_many(
    circuit: Circuit, assignments: Sequence[Sequence[int]]
) -> list[tuple[int, ...]]:
    """Evaluate on many assignments at once (bit-sliced across lanes)."""
    lanes = len(assignments)
    for a in assignments:
        if len(a) != circuit.n_inputs:
            raise ArityMismatch(
                f"assignment length {len(a)} != input count {circuit.n_inputs}"
            )
    mask = (1 << lanes) - 1
    packed_inputs: list[int] = []
    for pos in range(circuit.n_inputs):
        word = 0
        for lane, a in enumerate(assignments):
            if a[pos]:
                word |= 1 << lane
        packed_inputs.append(word)
    wires = [0] * len(circuit.gates)
    next_input = iter(packed_inputs)
    for g in circuit.gates:
        if g.kind == "INPUT":
            wires[g.id] = next(next_input)
        elif g.kind == "CONST0":
            wires[g.id] = 0
        elif g.kind == "CONST1":
            wires[g.id] = mask
        elif g.kind == "NOT":
            wires[g.id] = ~wires[g.inputs[0]] & mask
        elif g.kind == "AND":
            acc = mask
            for q in g.inputs:
                acc &= wires[q]
            wires[g.id] = acc
        elif g.kind == "OR":
            acc = 0
            for q in g.inputs:
                acc |= wires[q]
            wires[g.id] = acc
        else:  # THRESHOLD
            planes = _popcount_planes([wires[q] for q in g.inputs])
            wires[g.id] = _ge_const(planes, g.k or 0, mask)
    return [
        tuple((wires[o] >> lane) & 1 for o in circuit.outputs) for lane in range(lanes)
    ]


def evaluate(circuit: Circuit, assignment: Sequence[int]) -> tuple[int, ...]:
    """Evaluate one assignment; bits in INPUT-gate order."""
    return evaluate_many(circuit, [assignment])[0]


# ------------------------------------------------------------ majority form


def to_majority_only(circuit: Circuit) -> Circuit:
    """Rewrite every AND/OR/THRESHOLD into a MAJORITY-shaped THRESHOLD.

    A ``THRESHOLD(k)`` of fan-in ``f`` is padded one-sidedly with
    ``f - 2k + 1`` CONST1 gates (when that is positive) or ``2k - 1 - f``
    CONST0 gates, giving odd fan-in ``F`` and threshold ``floor(F/2) + 1``:
    the count of live ones reaches the majority mark exactly when the
    original threshold fired.  AND and OR are thresholds with ``k = f`` and
    ``k = 1``; binary AND/OR become the familiar ``MAJ(x, y, CONST0)`` /
    ``MAJ(x, y, CONST1)``.  NOT and the sources stay (negation has no
    monotone majority form; the gate basis after rewriting is
    MAJORITY/NOT/constants).  Outputs are preserved gate-for-gate.
    """
    gates: list[Gate] = []
    remap: dict[int, int] = {}

    def emit(kind: str, inputs: tuple[int, ...] = (), k: int | None = None) -> int:
        gid = len(gates)
        gates.append(Gate(gid, kind, inputs, k))
        return gid

    def majority(inputs: tuple[int, ...], k: int) -> int:
        f = len(inputs)
        pads = f - 2 * k + 1
        if pads >= 0:
            extra = tuple(emit("CONST1") for _ in range(pads))
        else:
            extra = tuple(emit("CONST0") for _ in range(-pads))
        full = inputs + extra
        return emit("THRESHOLD", full, len(full) // 2 + 1)

    for g in circuit.gates:
        ins = tuple(remap[q] for q in g.inputs)
        if g.kind in ("INPUT", "CONST0", "CONST1", "NOT"):
            remap[g.id] = emit(g.kind, ins)
        elif g.kind == "AND":
            remap[g.id] = majority(ins, len(ins))
        elif g.kind == "OR":
            remap[g.id] = majority(ins, 1)
        else:  # THRESHOLD
            remap[g.id] = majority(ins, g.k or 1)
    return Circuit(gates, [remap[o] for o in circuit.outputs])


def is_majority_only(circuit: Circuit) -> bool:
    """True when every logic gate is a MAJORITY-shaped THRESHOLD or NOT."""
    for g in circuit.gates:
        if g.kind in ("AND", "OR"):
            return False
        if g.kind == "THRESHOLD":
            f = len(g.inputs)
            if f % 2 == 0 or g.k != f // 2 + 1:
                return False
    return True


# ---------------------------------------------------------------- netlists


def serialize_netlist(circuit: Circuit) -> str:
    """Canonical text form: one ``id KIND [k] inputs...`` line per gate,
    then ``OUTPUTS id...``."""
    lines = []
    for g in circuit.gates:
        parts = [str(g.id), g.kind]
        if g.kind == "THRESHOLD":
            parts.append(str(g.k))
        parts.extend(str(q) for q in g.inputs)
        lines.append(" ".join(parts))
    lines.append("OUTPUTS " + " ".join(str(o) for o in circuit.outputs))
    return "\n".join(lines) + "\n"


def parse_netlist(text: str) -> Circuit:
    gates: list[Gate] = []
    outputs: list[int] | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "OUTPUTS":
            if outputs is not None:
                raise ParseError(line_no, "duplicate OUTPUTS line")
            try:
                outputs = [int(x) for x in parts[1:]]
            except ValueError:
                raise ParseError(line_no, "output ids must be integers") from None
            continue
        if outputs is not None:
            raise ParseError(line_no, "gate line after OUTPUTS")
        try:
            gid = int(parts[0])
        except ValueError:
            raise ParseError(line_no, f"bad gate id {parts[0]!r}") from None
        if len(parts) < 2:
            raise ParseError(line_no, "missing gate kind")
        kind = parts[1]
        if kind not in GATE_KINDS:
            raise ParseError(line_no, f"unknown gate kind {kind!r}")
        rest = parts[2:]
        k: int | None = None
        if kind == "THRESHOLD":
            if not rest:
                raise ParseError(line_no, "THRESHOLD needs k")
            try:
                k = int(rest[0])
            except ValueError:
                raise ParseError(line_no, f"bad threshold {rest[0]!r}") from None
            rest = rest[1:]
        try:
            inputs = tuple(int(x) for x in rest)
        except ValueError:
            raise ParseError(line_no, "input ids must be integers") from None
        if gid != len(gates):
            raise ParseError(line_no, f"expected gate id {len(gates)}, got {gid}")
        if any(q >= gid or q < 0 for q in inputs):
            raise ParseError(line_no, f"gate {gid} refers to a not-yet-defined gate")
        if kind in ("INPUT", "CONST0", "CONST1") and inputs:
            raise ParseError(line_no, f"{kind} takes no inputs")
        if kind == "NOT" and len(inputs) != 1:
            raise ParseError(line_no, "NOT must have exactly one input")
        if kind in ("AND", "OR") and not inputs:
            raise ParseError(line_no, f"{kind} needs at least one input")
        if kind == "THRESHOLD" and not 1 <= (k or 0) <= len(inputs):
            raise ParseError(line_no, f"need 1 <= k <= fan-in, got k={k}")
        gates.append(Gate(gid, kind, inputs, k))
    if outputs is None:
        raise ParseError(len(text.splitlines()) or 1, "missing OUTPUTS line")
    try:
        return Circuit(gates, outputs)
    except CircuitError as exc:
        raise ParseError(len(text.splitlines()), str(exc)) from None
