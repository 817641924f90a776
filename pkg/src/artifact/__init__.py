"""Bit-exact p-bit float workbench.

Exact low-precision floating point (`floats`), correctly-rounded elementary
functions (`elementary`), matrices and evaluation contexts (`matrices`,
`contexts`), a selective state-space forward pass (`mamba`), a symbolic
circuit-depth calculus with execution tracing (`depth`), threshold-circuit
IR and synthesis (`circuits`, `synthesis`), and evaluators for canonical
NC1-complete problems (`hardness`).
"""

from artifact.circuits import (
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
from artifact.contexts import ExactScalars, PBitScalars, ScalarContext
from artifact.depth import (
    check_depth,
    critical_depth,
    depth_report,
    formula_registry,
    trace_component,
    trace_run,
)
from artifact.elementary import (
    exp_fp,
    log_fp,
    sigmoid_fp,
    silu_fp,
    softplus_fp,
    sqrt_fp,
)
from artifact.floats import (
    Comparison,
    DivisionByZero,
    FpError,
    FpNumber,
    Overflow,
    approx_div,
    fp_add,
    fp_compare,
    fp_div,
    fp_floor,
    fp_mul,
    iter_add,
    iter_mul,
    round_p,
)
from artifact.hardness import (
    ArithFormula,
    BoolFormula,
    PbpProgram,
    Permutation,
    Semiring,
    barrington_transform,
    compose,
    eval_arith,
    eval_bool,
    eval_pbp,
    gen_instances,
    parse_arith,
    parse_bool_infix,
    parse_bool_postfix,
    word_problem,
)
from artifact.mamba import (
    MambaParams,
    ShapeConfig,
    forward_matrix,
    mamba_forward,
    random_input,
    random_params,
    ssm_convolution,
    ssm_recurrent,
)
from artifact.matrices import FpMatrix, ShapeMismatch, max_rel_gap
from artifact.synthesis import (
    BitEncoding,
    SynthesizedOp,
    UnsupportedPrecision,
    check_op,
    synth_primitive,
)

__all__ = [
    "ArithFormula",
    "BitEncoding",
    "BoolFormula",
    "Circuit",
    "CircuitError",
    "Comparison",
    "DivisionByZero",
    "ExactScalars",
    "FpError",
    "FpMatrix",
    "FpNumber",
    "Gate",
    "MambaParams",
    "Overflow",
    "ParseError",
    "PBitScalars",
    "PbpProgram",
    "Permutation",
    "ScalarContext",
    "Semiring",
    "ShapeConfig",
    "ShapeMismatch",
    "SynthesizedOp",
    "UnsupportedPrecision",
    "approx_div",
    "barrington_transform",
    "check_depth",
    "check_op",
    "compose",
    "critical_depth",
    "depth_report",
    "eval_arith",
    "eval_bool",
    "eval_pbp",
    "evaluate",
    "evaluate_many",
    "exp_fp",
    "formula_registry",
    "forward_matrix",
    "fp_add",
    "fp_compare",
    "fp_div",
    "fp_floor",
    "fp_mul",
    "gen_instances",
    "is_majority_only",
    "iter_add",
    "iter_mul",
    "log_fp",
    "mamba_forward",
    "max_rel_gap",
    "parse_arith",
    "parse_bool_infix",
    "parse_bool_postfix",
    "parse_netlist",
    "random_input",
    "random_params",
    "round_p",
    "serialize_netlist",
    "sigmoid_fp",
    "silu_fp",
    "softplus_fp",
    "sqrt_fp",
    "ssm_convolution",
    "ssm_recurrent",
    "synth_primitive",
    "to_majority_only",
    "trace_component",
    "trace_run",
    "word_problem",
]
