"""Binary patterns, input encodings, Boolean functions and gates.

Conventions used throughout the package:

* Spins live in {+1, -1} and Boolean True maps to spin -1, so a function's
  bit is 1 exactly where its output spin is -1.  Under this convention
  AND(S1, S2) = sgn(S1 + S2 + 1), OR(S1, S2) = sgn(S1 + S2 - 1) and
  MAJ(S1..Sk) = sgn(sum Sj).
* Patterns over n inputs are labeled gamma = 1..2^n, counting in binary with
  input 1 as the most significant digit and spin +1 as digit 0.  Pattern
  gamma = 1 is all +1, and gamma and 2^n + 1 - gamma are always negations of
  each other.
* A function on n inputs is packed into an integer whose bit at position
  gamma - 1 is the function's bit at pattern gamma.  The hex text form reads
  "n=2:0x8" (which is the two-input AND).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

MAX_PATTERN_ARITY = 16
MAX_ENUM_ARITY = 3
MAX_GATE_FAN_IN = 8

__all__ = [
    "MAX_PATTERN_ARITY",
    "MAX_ENUM_ARITY",
    "MAX_GATE_FAN_IN",
    "PatternSet",
    "SchemeKind",
    "InputScheme",
    "BooleanFunction",
    "Gate",
    "enumerate_patterns",
    "augment_input",
    "initial_overlap",
    "initial_overlap_matrix",
    "input_component_matrix",
    "input_mean",
    "gate_properties",
    "compose_gate",
    "is_odd_function",
    "all_functions",
    "odd_functions",
]


def _check_arity(n: int) -> None:
    if not 1 <= n <= MAX_PATTERN_ARITY:
        raise ValueError(f"arity must be in 1..{MAX_PATTERN_ARITY}, got {n}")


@dataclass(frozen=True)
class PatternSet:
    """All 2^n spin patterns over n inputs, in label order."""

    arity: int
    spins: np.ndarray = field(repr=False)  # (2^n, n) int8, row gamma-1

    @property
    def count(self) -> int:
        return 1 << self.arity

    def pattern(self, gamma: int) -> np.ndarray:
        """Spin vector of pattern ``gamma`` (1-based)."""
        if not 1 <= gamma <= self.count:
            raise ValueError(f"pattern label must be in 1..{self.count}, got {gamma}")
        return self.spins[gamma - 1]

    def negation_label(self, gamma: int) -> int:
        return self.count + 1 - gamma


def enumerate_patterns(n: int) -> PatternSet:
    """Build the label-ordered pattern set for ``n`` inputs.

    Pattern gamma has spins s_m = 1 - 2 * bit, where bit is digit n - m of
    gamma - 1 in binary; gamma = 1 is the all-(+1) pattern.
    """
    _check_arity(n)
    labels = np.arange(1 << n, dtype=np.int64)
    shifts = n - 1 - np.arange(n)
    spins = 1 - 2 * ((labels[:, None] >> shifts[None, :]) & 1)
    spins = spins.astype(np.int8)
    spins.setflags(write=False)
    return PatternSet(arity=n, spins=spins)


class SchemeKind(Enum):
    RAW = "raw"
    BIASED = "biased"
    BALANCED = "balanced"


@dataclass(frozen=True)
class InputScheme:
    """How a bare input pattern is presented to the first layer.

    Raw feeds the n spins as they are.  Biased appends a constant component
    (magnitude ``bias_const``, default 1).  Balanced feeds the spins, their
    negations and a +1/-1 pair, which zeroes every input mean.
    """

    kind: SchemeKind
    bias_const: float = 1.0

    @staticmethod
    def raw() -> "InputScheme":
        return InputScheme(SchemeKind.RAW)

    @staticmethod
    def biased(bias_const: float = 1.0) -> "InputScheme":
        if bias_const <= 0:
            raise ValueError("bias constant must be positive")
        return InputScheme(SchemeKind.BIASED, bias_const)

    @staticmethod
    def balanced() -> "InputScheme":
        return InputScheme(SchemeKind.BALANCED)

    def component_count(self, n: int) -> int:
        if self.kind is SchemeKind.RAW:
            return n
        if self.kind is SchemeKind.BIASED:
            return n + 1
        return 2 * n + 2

    @property
    def name(self) -> str:
        return self.kind.value


def augment_input(scheme: InputScheme, spins) -> np.ndarray:
    """Augmented component vector seen by layer 0 for one pattern."""
    s = np.asarray(spins, dtype=float)
    if s.ndim != 1 or not np.all(np.abs(s) == 1):
        raise ValueError("input pattern must be a flat vector of +-1 spins")
    if scheme.kind is SchemeKind.RAW:
        return s
    if scheme.kind is SchemeKind.BIASED:
        return np.concatenate([s, [scheme.bias_const]])
    return np.concatenate([s, -s, [1.0], [-1.0]])


def input_component_matrix(scheme: InputScheme, n: int) -> np.ndarray:
    """Component values for all patterns at once, shape (components, 2^n).

    Row m is the m-th augmented component evaluated across the label-ordered
    patterns; this is the layer-0 state table of the wide-network picture.
    """
    _check_arity(n)
    spins = enumerate_patterns(n).spins.T.astype(float)  # (n, M)
    m = 1 << n
    if scheme.kind is SchemeKind.RAW:
        return spins
    if scheme.kind is SchemeKind.BIASED:
        return np.vstack([spins, np.full((1, m), scheme.bias_const)])
    return np.vstack([spins, -spins, np.ones((1, m)), -np.ones((1, m))])


def initial_overlap_matrix(scheme: InputScheme, n: int) -> np.ndarray:
    """Layer-0 overlap (correlation) matrix across all pattern pairs.

    Entries are normalized so the diagonal is exactly 1: for Biased(c) this
    gives (c^2 + sum_m s_m s'_m) / (n + c^2), reducing to the flat component
    average whenever every component has unit magnitude.  Correlation is the
    right invariant because the layer maps used downstream are positively
    homogeneous in the input scale.
    """
    comp = input_component_matrix(scheme, n)
    gram = comp.T @ comp
    diag = np.diag(gram)
    if np.all(diag == diag[0]):
        # every scheme here has a pattern-independent diagonal; dividing by
        # the scalar keeps negation pairs at exactly -1 (sqrt(d)*sqrt(d)
        # rounds away from d and would leak a ulp into the boundary)
        q = gram / diag[0]
    else:
        q = gram / np.sqrt(np.outer(diag, diag))
    np.fill_diagonal(q, 1.0)
    return q


def initial_overlap(scheme: InputScheme, n: int, gamma: int, gamma_prime: int) -> float:
    """Layer-0 overlap of two patterns (1-based labels)."""
    q = initial_overlap_matrix(scheme, n)
    m = 1 << n
    for g in (gamma, gamma_prime):
        if not 1 <= g <= m:
            raise ValueError(f"pattern label must be in 1..{m}, got {g}")
    return float(q[gamma - 1, gamma_prime - 1])


def input_mean(scheme: InputScheme, n: int) -> np.ndarray:
    """Normalized mean component value per pattern, shape (2^n,).

    Uses the same normalization as `initial_overlap_matrix` (component vectors
    scaled to unit root-mean-square), so Raw gives the plain spin average and
    Balanced gives exact zeros.
    """
    comp = input_component_matrix(scheme, n)
    mean = comp.mean(axis=0)
    rms = np.sqrt((comp ** 2).mean(axis=0))
    return mean / rms


@dataclass(frozen=True)
class BooleanFunction:
    """A Boolean function on n inputs, packed into an integer.

    ``bits`` holds bit 1 at position gamma - 1 exactly where the function
    outputs spin -1 (True) on pattern gamma.
    """

    arity: int
    bits: int

    def __post_init__(self):
        _check_arity(self.arity)
        if not 0 <= self.bits < (1 << self.table_size):
            raise ValueError("packed bits out of range for this arity")

    @property
    def table_size(self) -> int:
        return 1 << self.arity

    def bit(self, gamma: int) -> int:
        if not 1 <= gamma <= self.table_size:
            raise ValueError(f"pattern label must be in 1..{self.table_size}")
        return (self.bits >> (gamma - 1)) & 1

    def spin(self, gamma: int) -> int:
        return 1 - 2 * self.bit(gamma)

    def spin_table(self) -> np.ndarray:
        gammas = np.arange(self.table_size)
        return (1 - 2 * ((self.bits >> gammas) & 1)).astype(np.int8)

    def negate(self) -> "BooleanFunction":
        return BooleanFunction(self.arity, self.bits ^ (self.table_size_mask))

    @property
    def table_size_mask(self) -> int:
        return (1 << self.table_size) - 1

    def encode(self) -> int:
        return self.bits

    def to_text(self) -> str:
        return f"n={self.arity}:{self.bits:#x}"

    @staticmethod
    def decode(n: int, value: int) -> "BooleanFunction":
        return BooleanFunction(n, value)

    @staticmethod
    def from_text(text: str) -> "BooleanFunction":
        try:
            head, hexpart = text.split(":")
            n = int(head.removeprefix("n="))
            return BooleanFunction(n, int(hexpart, 16))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"malformed function text {text!r}") from exc

    @staticmethod
    def from_spins(n: int, spins) -> "BooleanFunction":
        s = np.asarray(spins)
        if s.shape != (1 << n,):
            raise ValueError("spin table length must be 2^n")
        bits = 0
        for pos, v in enumerate(s):
            if v < 0:
                bits |= 1 << pos
        return BooleanFunction(n, bits)

    @staticmethod
    def constant(n: int, spin: int) -> "BooleanFunction":
        if spin == 1:
            return BooleanFunction(n, 0)
        if spin == -1:
            return BooleanFunction(n, (1 << (1 << n)) - 1)
        raise ValueError("constant spin must be +-1")

    @staticmethod
    def dictator(n: int, m: int, negated: bool = False) -> "BooleanFunction":
        """The function returning input m (1-based), optionally negated."""
        spins = enumerate_patterns(n).spins[:, m - 1]
        f = BooleanFunction.from_spins(n, spins)
        return f.negate() if negated else f


def is_odd_function(f: BooleanFunction) -> bool:
    """True when f(-s) = -f(s) for every pattern.

    Pattern gamma negates to 2^n + 1 - gamma, so oddness is a bit-reversal
    complement of the packed table.
    """
    m = f.table_size
    rev = 0
    b = f.bits
    for _ in range(m):
        rev = (rev << 1) | (b & 1)
        b >>= 1
    return (f.bits ^ rev) == (1 << m) - 1


def all_functions(n: int):
    """Iterate every Boolean function on n inputs (n <= 3)."""
    if n > MAX_ENUM_ARITY:
        raise ValueError(f"function enumeration capped at n <= {MAX_ENUM_ARITY}")
    for bits in range(1 << (1 << n)):
        yield BooleanFunction(n, bits)


def odd_functions(n: int):
    for f in all_functions(n):
        if is_odd_function(f):
            yield f


class Gate:
    """A k-ary spin gate given by its full output table.

    Table combinations are labeled like patterns: combination c (0-based)
    assigns input j the spin 1 - 2 * (digit k - j of c), and table bit c is 1
    where the output spin is -1.
    """

    def __init__(self, fan_in: int, table: int, name: str | None = None):
        if not 1 <= fan_in <= MAX_GATE_FAN_IN:
            raise ValueError(f"gate fan-in must be in 1..{MAX_GATE_FAN_IN}")
        size = 1 << fan_in
        if not 0 <= table < (1 << size):
            raise ValueError("gate table out of range for this fan-in")
        self.fan_in = fan_in
        self.table = table
        self.name = name or f"table:{table:0{max(1, size // 4)}x}"

    def __eq__(self, other):
        return (
            isinstance(other, Gate)
            and other.fan_in == self.fan_in
            and other.table == self.table
        )

    def __hash__(self):
        return hash((self.fan_in, self.table))

    def __repr__(self):
        return f"Gate({self.name}, k={self.fan_in})"

    def combination_spins(self, c: int) -> np.ndarray:
        shifts = self.fan_in - 1 - np.arange(self.fan_in)
        return (1 - 2 * ((c >> shifts) & 1)).astype(np.int8)

    def output_spin(self, spins) -> int:
        """Evaluate the gate on one spin tuple."""
        c = 0
        for v in spins:
            c = (c << 1) | (1 if v < 0 else 0)
        return 1 - 2 * ((self.table >> c) & 1)

    def output_spin_table(self) -> np.ndarray:
        cs = np.arange(1 << self.fan_in)
        return (1 - 2 * ((self.table >> cs) & 1)).astype(np.int8)

    @cached_property
    def balanced(self) -> bool:
        return int(self.output_spin_table().sum()) == 0

    @cached_property
    def gf2_linear(self) -> bool:
        # parity-of-a-subset gates, optionally negated: 2^(k+1) tables
        k = self.fan_in
        for subset in range(1 << k):
            spins = np.ones(1 << k, dtype=np.int64)
            for j in range(k):
                if (subset >> j) & 1:
                    cs = np.arange(1 << k)
                    spins *= 1 - 2 * ((cs >> (k - 1 - j)) & 1)
            for sign in (1, -1):
                table = 0
                for c, v in enumerate(sign * spins):
                    if v < 0:
                        table |= 1 << c
                if table == self.table:
                    return True
        return False

    @cached_property
    def idempotent(self) -> bool:
        """Maps the all-equal tuple to that same value, for both spins."""
        size = 1 << self.fan_in
        top = (self.table >> (size - 1)) & 1  # all inputs -1
        bottom = self.table & 1  # all inputs +1
        return bottom == 0 and top == 1


def _sgn_gate(fan_in: int, rule, name: str) -> Gate:
    table = 0
    for c in range(1 << fan_in):
        shifts = fan_in - 1 - np.arange(fan_in)
        spins = 1 - 2 * ((c >> shifts) & 1)
        if rule(spins) < 0:
            table |= 1 << c
    return Gate(fan_in, table, name)


def _majority_gate(k: int) -> Gate:
    if k % 2 == 0:
        raise ValueError("majority gate needs odd fan-in")
    return _sgn_gate(k, lambda s: int(np.sum(s)), f"MAJ{k}")


_PRESETS = {
    "AND": lambda: _sgn_gate(2, lambda s: int(s[0] + s[1] + 1), "AND"),
    "OR": lambda: _sgn_gate(2, lambda s: int(s[0] + s[1] - 1), "OR"),
    "XOR2": lambda: _sgn_gate(2, lambda s: int(s[0] * s[1]), "XOR2"),
    "MAJ3": lambda: _majority_gate(3),
    "MAJ5": lambda: _majority_gate(5),
}


def parse_gate(spec: str) -> Gate:
    """Build a gate from a preset name or a "table:<hex>" literal.

    The hex digit count fixes the fan-in (1 digit covers k = 2, 2 digits
    k = 3, and so on), so pad with leading zeros to select a wider gate.
    """
    key = spec.strip()
    upper = key.upper()
    if upper in _PRESETS:
        return _PRESETS[upper]()
    if key.lower().startswith("table:"):
        digits = key[6:]
        if digits.lower().startswith("0x"):
            digits = digits[2:]
        if not digits:
            raise ValueError(f"empty gate table in {spec!r}")
        nbits = 4 * len(digits)
        fan_in = max(2, (nbits - 1).bit_length())
        if (1 << fan_in) != nbits:
            raise ValueError(
                f"hex table length {len(digits)} does not give a power-of-two table"
            )
        return Gate(fan_in, int(digits, 16))
    raise ValueError(f"unknown gate {spec!r}")


@dataclass(frozen=True)
class GateProperties:
    balanced: bool
    gf2_linear: bool
    idempotent: bool


def gate_properties(gate: Gate) -> GateProperties:
    """Structural flags that drive the circuit-dynamics classification."""
    return GateProperties(
        balanced=gate.balanced,
        gf2_linear=gate.gf2_linear,
        idempotent=gate.idempotent,
    )


def compose_gate(gate: Gate, inputs) -> BooleanFunction:
    """Apply a gate pointwise across patterns to k functions of equal arity.

    Bit-parallel: the packed tables are combined with one mask pass per gate
    combination, so runtime is O(2^k) word operations.
    """
    fs = list(inputs)
    if len(fs) != gate.fan_in:
        raise ValueError(f"gate wants {gate.fan_in} inputs, got {len(fs)}")
    n = fs[0].arity
    if any(f.arity != n for f in fs):
        raise ValueError("all composed functions must share one arity")
    full = (1 << (1 << n)) - 1
    out = 0
    for c in range(1 << gate.fan_in):
        if not (gate.table >> c) & 1:
            continue
        mask = full
        for j, f in enumerate(fs):
            bit = (c >> (gate.fan_in - 1 - j)) & 1
            mask &= f.bits if bit else (f.bits ^ full)
        out |= mask
    return BooleanFunction(n, out)


def scheme_component_functions(scheme: InputScheme, n: int) -> list[BooleanFunction]:
    """Layer-0 component functions for circuit ensembles.

    Requires every component to be a spin value, which rules out
    Biased(c != 1).
    """
    comp = input_component_matrix(scheme, n)
    if not np.all(np.abs(comp) == 1.0):
        raise ValueError(
            "circuit inputs need +-1 components; use Biased(1) rather than a "
            "general bias constant"
        )
    return [BooleanFunction.from_spins(n, row) for row in comp]
