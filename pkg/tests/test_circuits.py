"""Tests for the threshold-circuit IR: structure, evaluation, rewriting,
and the netlist text format."""

from __future__ import annotations

import random

import pytest

from artifact.circuits import (
    ArityMismatch,
    Circuit,
    CircuitError,
    Gate,
    ParseError,
    evaluate,
    evaluate_many,
    is_majority_only,
    parse_netlist,
    serialize_netlist,
    to_majority_only,
)


def reference_evaluate(circuit: Circuit, assignment) -> tuple[int, ...]:
    """Plain per-gate semantics, independent of the bit-sliced evaluator."""
    values = {}
    inputs = iter(assignment)
    for g in circuit.gates:
        if g.kind == "INPUT":
            values[g.id] = next(inputs) & 1
        elif g.kind == "CONST0":
            values[g.id] = 0
        elif g.kind == "CONST1":
            values[g.id] = 1
        elif g.kind == "NOT":
            values[g.id] = 1 - values[g.inputs[0]]
        elif g.kind == "AND":
            values[g.id] = int(all(values[q] for q in g.inputs))
        elif g.kind == "OR":
            values[g.id] = int(any(values[q] for q in g.inputs))
        else:
            values[g.id] = int(sum(values[q] for q in g.inputs) >= g.k)
    return tuple(values[o] for o in circuit.outputs)


def random_circuit(rng: random.Random, n_inputs: int, n_gates: int) -> Circuit:
    """A seeded random DAG over the full gate vocabulary."""
    gates = [Gate(i, "INPUT") for i in range(n_inputs)]
    gates.append(Gate(n_inputs, "CONST0"))
    gates.append(Gate(n_inputs + 1, "CONST1"))
    while len(gates) < n_inputs + 2 + n_gates:
        gid = len(gates)
        kind = rng.choice(["NOT", "AND", "OR", "THRESHOLD"])
        if kind == "NOT":
            inputs = (rng.randrange(gid),)
            k = None
        else:
            fan = rng.randint(1, min(5, gid))
            inputs = tuple(rng.randrange(gid) for _ in range(fan))
            k = rng.randint(1, fan) if kind == "THRESHOLD" else None
        gates.append(Gate(gid, kind, inputs, k))
    n_out = rng.randint(1, 3)
    outputs = [rng.randrange(len(gates)) for _ in range(n_out)]
    return Circuit(gates, outputs)


class TestCircuitStructure:
    """Construction-time validation and the depth/size metrics."""

    def test_single_and_depth_and_size(self):
        """One AND over two inputs: depth 1, size 1."""
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "INPUT"), Gate(2, "AND", (0, 1))], [2]
        )
        assert c.depth == 1
        assert c.size == 1
        assert c.n_inputs == 2

    def test_not_chain_depth(self):
        """Two chained NOTs count two levels."""
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "NOT", (0,)), Gate(2, "NOT", (1,))], [2]
        )
        assert c.depth == 2
        assert c.size == 2

    def test_constants_are_depth_zero_sources(self):
        """Constants count toward size but sit at level zero like inputs."""
        c = Circuit(
            [
                Gate(0, "INPUT"),
                Gate(1, "CONST1"),
                Gate(2, "AND", (0, 1)),
            ],
            [2],
        )
        assert c.depth == 1
        assert c.size == 2  # the constant still occupies a gate

    def test_depth_measured_at_outputs(self):
        """Gates not feeding any output do not contribute to depth."""
        c = Circuit(
            [
                Gate(0, "INPUT"),
                Gate(1, "NOT", (0,)),
                Gate(2, "NOT", (1,)),
                Gate(3, "OR", (0,)),
            ],
            [3],
        )
        assert c.depth == 1

    def test_rejects_forward_reference(self):
        with pytest.raises(CircuitError):
            Circuit([Gate(0, "AND", (1,)), Gate(1, "INPUT")], [0])

    def test_rejects_sparse_ids(self):
        with pytest.raises(CircuitError):
            Circuit([Gate(1, "INPUT")], [1])

    def test_rejects_bad_not_arity(self):
        with pytest.raises(CircuitError):
            Circuit([Gate(0, "INPUT"), Gate(1, "NOT", (0, 0))], [1])

    def test_rejects_threshold_k_out_of_range(self):
        gates = [Gate(0, "INPUT"), Gate(1, "INPUT")]
        with pytest.raises(CircuitError):
            Circuit(gates + [Gate(2, "THRESHOLD", (0, 1), 3)], [2])
        with pytest.raises(CircuitError):
            Circuit(gates + [Gate(2, "THRESHOLD", (0, 1), 0)], [2])

    def test_rejects_output_out_of_range(self):
        with pytest.raises(CircuitError):
            Circuit([Gate(0, "INPUT")], [1])

    def test_rejects_k_on_non_threshold(self):
        with pytest.raises(CircuitError):
            Circuit([Gate(0, "INPUT"), Gate(1, "OR", (0,), 1)], [1])


class TestEvaluate:
    """Semantics of the bit-sliced evaluator."""

    def test_majority_of_three(self):
        """THRESHOLD(2) over three inputs is the majority vote."""
        c = Circuit(
            [
                Gate(0, "INPUT"),
                Gate(1, "INPUT"),
                Gate(2, "INPUT"),
                Gate(3, "THRESHOLD", (0, 1, 2), 2),
            ],
            [3],
        )
        for a in range(2):
            for b in range(2):
                for d in range(2):
                    assert evaluate(c, (a, b, d)) == (int(a + b + d >= 2),)

    def test_threshold_counts_multiplicity(self):
        """Repeated wires count once per occurrence, not once per wire."""
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "THRESHOLD", (0, 0), 2)],
            [1],
        )
        assert evaluate(c, (1,)) == (1,)
        assert evaluate(c, (0,)) == (0,)

    def test_arity_mismatch(self):
        c = Circuit([Gate(0, "INPUT"), Gate(1, "NOT", (0,))], [1])
        with pytest.raises(ArityMismatch):
            evaluate(c, (1, 0))

    def test_matches_reference_on_random_circuits(self):
        """Bit-sliced evaluation agrees with plain per-gate semantics."""
        rng = random.Random(7001)
        for _ in range(40):
            c = random_circuit(rng, rng.randint(1, 6), rng.randint(3, 25))
            assignments = [
                [rng.randint(0, 1) for _ in range(c.n_inputs)] for _ in range(32)
            ]
            packed = evaluate_many(c, assignments)
            for a, got in zip(assignments, packed):
                assert got == reference_evaluate(c, a)

    def test_exhaustive_small_circuit(self):
        """All 2**n assignments evaluated in one bit-sliced pass."""
        rng = random.Random(7002)
        c = random_circuit(rng, 5, 15)
        assignments = [
            [(i >> j) & 1 for j in range(5)] for i in range(32)
        ]
        packed = evaluate_many(c, assignments)
        for a, got in zip(assignments, packed):
            assert got == reference_evaluate(c, a)


class TestMajorityRewrite:
    """THRESHOLD/AND/OR elimination in favour of MAJORITY-shaped gates."""

    def _gate_kinds(self, c: Circuit) -> set[str]:
        return {g.kind for g in c.gates}

    def test_binary_and_becomes_majority_with_const0(self):
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "INPUT"), Gate(2, "AND", (0, 1))], [2]
        )
        r = to_majority_only(c)
        assert is_majority_only(r)
        top = r.gates[r.outputs[0]]
        assert top.kind == "THRESHOLD" and len(top.inputs) == 3 and top.k == 2
        pad_kinds = {r.gates[q].kind for q in top.inputs} - {"INPUT"}
        assert pad_kinds == {"CONST0"}

    def test_binary_or_becomes_majority_with_const1(self):
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "INPUT"), Gate(2, "OR", (0, 1))], [2]
        )
        r = to_majority_only(c)
        top = r.gates[r.outputs[0]]
        assert top.kind == "THRESHOLD" and len(top.inputs) == 3 and top.k == 2
        pad_kinds = {r.gates[q].kind for q in top.inputs} - {"INPUT"}
        assert pad_kinds == {"CONST1"}

    def test_threshold_low_k_pads_with_ones(self):
        """THRESHOLD(1) over two wires needs one CONST1 pad."""
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "INPUT"), Gate(2, "THRESHOLD", (0, 1), 1)],
            [2],
        )
        r = to_majority_only(c)
        assert is_majority_only(r)
        top = r.gates[r.outputs[0]]
        assert len(top.inputs) == 3 and top.k == 2

    def test_rewrite_is_detected(self):
        c = Circuit(
            [Gate(0, "INPUT"), Gate(1, "INPUT"), Gate(2, "AND", (0, 1))], [2]
        )
        assert not is_majority_only(c)
        assert is_majority_only(to_majority_only(c))

    def test_equivalence_exhaustive_small(self):
        """Rewrites preserve every truth table up to 12 inputs exhaustively."""
        rng = random.Random(7100)
        for _ in range(25):
            n = rng.randint(1, 6)
            c = random_circuit(rng, n, rng.randint(3, 20))
            r = to_majority_only(c)
            assignments = [
                [(i >> j) & 1 for j in range(n)] for i in range(1 << n)
            ]
            assert evaluate_many(c, assignments) == evaluate_many(r, assignments)

    def test_equivalence_sampled_wide(self):
        """Beyond 12 inputs: a thousand seeded random assignments."""
        rng = random.Random(7101)
        c = random_circuit(rng, 16, 40)
        r = to_majority_only(c)
        assignments = [
            [rng.randint(0, 1) for _ in range(16)] for _ in range(1000)
        ]
        assert evaluate_many(c, assignments) == evaluate_many(r, assignments)

    def test_rewrite_preserves_depth(self):
        """Pads are depth-zero constants, so gate levels never stretch."""
        rng = random.Random(7102)
        for _ in range(20):
            c = random_circuit(rng, rng.randint(2, 5), rng.randint(3, 20))
            assert to_majority_only(c).depth == c.depth


class TestNetlist:
    """Round trips and line-numbered rejection of malformed text."""

    def test_round_trip_example(self):
        c = Circuit(
            [
                Gate(0, "INPUT"),
                Gate(1, "INPUT"),
                Gate(2, "THRESHOLD", (0, 1, 1), 2),
                Gate(3, "NOT", (2,)),
            ],
            [2, 3],
        )
        text = serialize_netlist(c)
        back = parse_netlist(text)
        assert back.gates == c.gates
        assert back.outputs == c.outputs
        assert serialize_netlist(back) == text

    def test_round_trip_random(self):
        rng = random.Random(7200)
        for _ in range(25):
            c = random_circuit(rng, rng.randint(1, 5), rng.randint(2, 30))
            back = parse_netlist(serialize_netlist(c))
            assert back.gates == c.gates
            assert back.outputs == c.outputs

    def test_comments_and_blank_lines_ignored(self):
        text = "# a comment\n\n0 INPUT\n1 NOT 0\n\nOUTPUTS 1\n"
        c = parse_netlist(text)
        assert c.n_inputs == 1
        assert evaluate(c, (0,)) == (1,)

    def test_parse_error_carries_line_number(self):
        text = "0 INPUT\n1 NOT 0\n2 FROB 1\nOUTPUTS 2\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 3
        assert "line 3" in str(err.value)

    def test_forward_reference_rejected(self):
        text = "0 INPUT\n1 AND 0 2\n2 INPUT\nOUTPUTS 1\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 2

    def test_self_reference_rejected(self):
        text = "0 INPUT\n1 AND 1\nOUTPUTS 1\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 2

    def test_missing_outputs_rejected(self):
        with pytest.raises(ParseError):
            parse_netlist("0 INPUT\n1 NOT 0\n")

    def test_gate_after_outputs_rejected(self):
        text = "0 INPUT\nOUTPUTS 0\n1 NOT 0\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 3

    def test_duplicate_outputs_rejected(self):
        text = "0 INPUT\nOUTPUTS 0\nOUTPUTS 0\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 3

    def test_threshold_requires_k(self):
        text = "0 INPUT\n1 THRESHOLD\nOUTPUTS 1\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 2

    def test_nonsequential_id_rejected(self):
        text = "0 INPUT\n2 NOT 0\nOUTPUTS 2\n"
        with pytest.raises(ParseError) as err:
            parse_netlist(text)
        assert err.value.line_no == 2
