"""Measurement patterns: commands, validation and text serialization.

A pattern is a sequence of commands acting on labelled nodes (non-negative
integers):

``N(i)``
    prepare node ``i`` in ``|+>``;
``E(i, j)``
    controlled-Z between existing nodes ``i`` and ``j``;
``M(i, plane, angle, s, t)``
    measure node ``i``.  The command is shorthand for applying
    ``X^{s} Z^{t}`` to node ``i`` (``s``/``t`` is the parity of the recorded
    outcomes of the nodes in the domain) and then measuring in the basis of
    ``plane`` at ``angle``; outcome ``0`` is the first basis vector below;
``X(i, d)`` / ``Z(i, d)``
    byproduct Pauli on ``i`` raised to the parity of domain ``d``.

Measurement bases for outcome 0 (outcome 1 is the orthogonal vector):

========  ==========================================
``XY``    ``(|0> + e^{i a} |1>) / sqrt(2)``
``YZ``    ``cos(a/2) |0> + i sin(a/2) |1>``
``ZX``    ``cos(a/2) |0> + sin(a/2) |1>``
========  ==========================================
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from ..errors import PatternError

PLANES = ("XY", "YZ", "ZX")


def _domain(nodes: Iterable[int] | None) -> frozenset[int]:
    if nodes is None:
        return frozenset()
    out: set[int] = set()
    for n in nodes:
        # repeated entries cancel: a domain is a parity
        out ^= {int(n)}
    return frozenset(out)


@dataclass(frozen=True)
class N:
    node: int

    kind = "N"

    def nodes(self) -> tuple[int, ...]:
        return (self.node,)


@dataclass(frozen=True)
class E:
    i: int
    j: int

    kind = "E"

    def nodes(self) -> tuple[int, ...]:
        return (self.i, self.j)


@dataclass(frozen=True)
class M:
    node: int
    plane: str = "XY"
    angle: float = 0.0
    s_domain: frozenset = frozenset()
    t_domain: frozenset = frozenset()

    kind = "M"

    def __post_init__(self):
        if self.plane not in PLANES:
            raise PatternError(f"unknown measurement plane {self.plane!r}")
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "s_domain", _domain(self.s_domain))
        object.__setattr__(self, "t_domain", _domain(self.t_domain))

    def nodes(self) -> tuple[int, ...]:
        return (self.node,)


@dataclass(frozen=True)
class X:
    node: int
    domain: frozenset = frozenset()

    kind = "X"

    def __post_init__(self):
        object.__setattr__(self, "domain", _domain(self.domain))

    def nodes(self) -> tuple[int, ...]:
        return (self.node,)


@dataclass(frozen=True)
class Z:
    node: int
    domain: frozenset = frozenset()

    kind = "Z"

    def __post_init__(self):
        object.__setattr__(self, "domain", _domain(self.domain))

    def nodes(self) -> tuple[int, ...]:
        return (self.node,)


Command = Union[N, E, M, X, Z]


class Pattern:
    """Validated command list over a set of nodes.

    Parameters
    ----------
    inputs : sequence of int
        Nodes that carry the input state (the ``nodes_state`` of the pattern).
    commands : iterable of Command, optional
    outputs : sequence of int, optional
        Output order.  Defaults to the unmeasured nodes in creation order.

    Notes
    -----
    Every command is validated as it is appended, so a ``Pattern`` is always
    well formed: nodes are created once, measured at most once, entangled
    only while alive, and domains only reference nodes already measured.
    Applying ``E`` twice to the same pair is allowed (``CZ^2 = I``).

    Examples
    --------
    >>> p = Pattern([0]).n(1).e(0, 1).m(0, angle=0.0).x(1, [0])
    >>> p.outputs
    (1,)
    """

    def __init__(self, inputs: Sequence[int] = (), commands: Iterable[Command] = (), outputs=None):
        self.inputs: tuple[int, ...] = tuple(int(i) for i in inputs)
        if len(set(self.inputs)) != len(self.inputs):
            raise PatternError(f"duplicate input nodes {self.inputs}")
        self.commands: list[Command] = []
        self._alive: dict[int, None] = dict.fromkeys(self.inputs)
        self._measured: set[int] = set()
        self._outputs: tuple[int, ...] | None = None
        for c in commands:
            self.add(c)
        if outputs is not None:
            self.set_outputs(outputs)

    # -------------------------------------------------------------- building
    def _require_alive(self, node: int, what: str) -> None:
        if node in self._measured:
            raise PatternError(f"{what}: node {node} has already been measured")
        if node not in self._alive:
            raise PatternError(f"{what}: unknown node {node}")

    def _require_measured(self, dom: frozenset, what: str) -> None:
        bad = sorted(d for d in dom if d not in self._measured)
        if bad:
            raise PatternError(f"{what}: domain references unmeasured node(s) {bad}")

    def add(self, cmd: Command) -> "Pattern":
        """Validate and append one command."""
        if isinstance(cmd, N):
            if cmd.node < 0:
                raise PatternError("node labels must be non-negative")
            if cmd.node in self._alive or cmd.node in self._measured:
                raise PatternError(f"N: node {cmd.node} already exists")
            self._alive[cmd.node] = None
        elif isinstance(cmd, E):
            if cmd.i == cmd.j:
                raise PatternError(f"E: self-loop on node {cmd.i}")
            self._require_alive(cmd.i, "E")
            self._require_alive(cmd.j, "E")
        elif isinstance(cmd, M):
            self._require_alive(cmd.node, "M")
            self._require_measured(cmd.s_domain | cmd.t_domain, f"M {cmd.node}")
            del self._alive[cmd.node]
            self._measured.add(cmd.node)
        elif isinstance(cmd, (X, Z)):
            self._require_alive(cmd.node, cmd.kind)
            self._require_measured(cmd.domain, f"{cmd.kind} {cmd.node}")
        else:
            raise PatternError(f"not a pattern command: {cmd!r}")
        if self._outputs is not None and isinstance(cmd, M) and cmd.node in self._outputs:
            raise PatternError(f"M: node {cmd.node} is declared as an output")
        self.commands.append(cmd)
        return self

    def n(self, node: int) -> "Pattern":
        return self.add(N(int(node)))

    def e(self, i: int, j: int) -> "Pattern":
        return self.add(E(int(i), int(j)))

    def m(self, node: int, angle: float = 0.0, plane: str = "XY", s=None, t=None) -> "Pattern":
        return self.add(M(int(node), plane, angle, _domain(s), _domain(t)))

    def x(self, node: int, domain=None) -> "Pattern":
        return self.add(X(int(node), _domain(domain)))

    def z(self, node: int, domain=None) -> "Pattern":
        return self.add(Z(int(node), _domain(domain)))

    def set_outputs(self, outputs: Sequence[int]) -> None:
        outs = tuple(int(o) for o in outputs)
        if sorted(outs) != sorted(self._alive):
            raise PatternError(f"outputs {outs} must be exactly the unmeasured nodes {tuple(self._alive)}")
        self._outputs = outs

    # ------------------------------------------------------------ inspection
    @property
    def outputs(self) -> tuple[int, ...]:
        if self._outputs is not None:
            return self._outputs
        return tuple(self._alive)

    @property
    def measured(self) -> tuple[int, ...]:
        """Measured nodes in measurement order."""
        return tuple(c.node for c in self.commands if isinstance(c, M))

    @property
    def nodes(self) -> tuple[int, ...]:
        seen = dict.fromkeys(self.inputs)
        for c in self.commands:
            for k in c.nodes():
                seen.setdefault(k)
        return tuple(seen)

    def __iter__(self) -> Iterator[Command]:
        return iter(self.commands)

    def __len__(self) -> int:
        return len(self.commands)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return (self.inputs, self.outputs, self.commands) == (other.inputs, other.outputs, other.commands)

    def copy(self) -> "Pattern":
        return Pattern(self.inputs, self.commands, self._outputs)

    def is_standard(self) -> bool:
        """True if commands appear in the order ``N* E* M* {X, Z}*``."""
        rank = {"N": 0, "E": 1, "M": 2, "X": 3, "Z": 3}
        ranks = [rank[c.kind] for c in self.commands]
        return all(a <= b for a, b in zip(ranks, ranks[1:]))

    def __repr__(self) -> str:
        return f"Pattern(inputs={self.inputs}, outputs={self.outputs}, ncommand={len(self.commands)})"

    # ------------------------------------------------------------ execution
    def run(self, input_state=None, seed=None, outcomes=None):
        """Execute the pattern; see :func:`qumulus.mbqc.simulate.execute`."""
        from .simulate import execute

        return execute(self, input_state=input_state, seed=seed, outcomes=outcomes)

    forward = run

    # -------------------------------------------------------- serialization
    def to_text(self) -> str:
        """Line-oriented text form; inverse of :func:`from_text`."""
        lines = ["I " + " ".join(map(str, self.inputs)) if self.inputs else "I"]
        for c in self.commands:
            lines.append(format_command(c))
        lines.append("O " + " ".join(map(str, self.outputs)) if self.outputs else "O")
        return "\n".join(lines) + "\n"


def _fmt_dom(tag: str, dom: frozenset) -> str:
    return f" {tag}:" + ",".join(map(str, sorted(dom))) if dom else ""


def format_command(c: Command) -> str:
    if isinstance(c, N):
        return f"N {c.node}"
    if isinstance(c, E):
        return f"E {c.i} {c.j}"
    if isinstance(c, M):
        return f"M {c.node} {c.plane} {c.angle!r}" + _fmt_dom("s", c.s_domain) + _fmt_dom("t", c.t_domain)
    return f"{c.kind} {c.node}" + _fmt_dom("d", c.domain)


def _parse_domains(tokens: Sequence[str], allowed: Sequence[str], lineno: int) -> dict[str, frozenset]:
    out: dict[str, frozenset] = {}
    for tok in tokens:
        tag, sep, body = tok.partition(":")
        if not sep or tag not in allowed or tag in out:
            raise PatternError(f"line {lineno}: bad domain token {tok!r}")
        try:
            out[tag] = _domain(int(v) for v in body.split(",") if v)
        except ValueError:
            raise PatternError(f"line {lineno}: bad domain token {tok!r}") from None
    return out


def from_text(text: str) -> Pattern:
    """Parse the format written by :meth:`Pattern.to_text`.

    Blank lines and lines starting with ``#`` are ignored.  The ``I`` line
    (inputs) is optional and must come first; the ``O`` line (outputs) is
    optional and must come last.
    """
    inputs: list[int] = []
    outputs = None
    pat: Pattern | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        try:
            if head == "I":
                if pat is not None:
                    raise PatternError(f"line {lineno}: input declaration must come first")
                inputs = [int(v) for v in rest]
                continue
            if outputs is not None:
                raise PatternError(f"line {lineno}: commands after the output declaration")
            if pat is None:
                pat = Pattern(inputs)
            if head == "O":
                outputs = [int(v) for v in rest]
            elif head == "N" and len(rest) == 1:
                pat.n(int(rest[0]))
            elif head == "E" and len(rest) == 2:
                pat.e(int(rest[0]), int(rest[1]))
            elif head == "M" and len(rest) >= 3:
                doms = _parse_domains(rest[3:], ("s", "t"), lineno)
                pat.m(int(rest[0]), float(rest[2]), rest[1], doms.get("s"), doms.get("t"))
            elif head in ("X", "Z") and len(rest) >= 1:
                doms = _parse_domains(rest[1:], ("d",), lineno)
                (pat.x if head == "X" else pat.z)(int(rest[0]), doms.get("d"))
            else:
                raise PatternError(f"line {lineno}: cannot parse {line!r}")
        except ValueError as exc:
            if isinstance(exc, PatternError):
                raise
            raise PatternError(f"line {lineno}: cannot parse {line!r}") from None
    if pat is None:
        pat = Pattern(inputs)
    if outputs is not None:
        pat.set_outputs(outputs)
    return pat
