"""Measurement-calculus rewrites: standardization and signal shifting.

Both passes return new patterns and leave their input untouched.

Standardization moves every byproduct correction to the right.  Walking the
command list once, the corrections waiting on each node are tracked as an
operator ``X^a Z^b`` (``a``, ``b`` are parities of outcome sets):

* ``X(i, d)`` / ``Z(i, d)`` toggle ``a_i`` / ``b_i`` by ``d``;
* ``E(i, j)`` after ``X_i^a``: ``E X_i^a = X_i^a Z_j^a E``, so ``b_j ^= a_i``
  (and symmetrically for ``X_j``); ``Z`` commutes with ``E``;
* ``M_i`` absorbs what is waiting on ``i``: ``s_i ^= a_i`` and ``t_i ^= b_i``
  — ``M`` is defined as measuring after ``X^s Z^t``;
* the leftovers on output nodes are emitted at the end as ``Z`` then ``X``.

Signal shifting removes outcome flips from measurements.  A Pauli that maps
the measurement basis onto itself with the outcomes swapped can be dropped
if the outcome is reinterpreted: for ``XY`` this is ``Z`` (the ``t``
domain), for ``YZ`` it is ``X`` (the ``s`` domain) and for ``ZX`` it is
``XZ``, so there ``Z^t = X^t (XZ)^t`` moves ``t`` into ``s`` before the flip
is shifted.  The recorded outcome ``r_i`` of the rewritten measurement then
relates to the original signal by ``s_i = r_i + sum_{k in S_i} r_k``; every
later domain containing ``i`` is toggled by ``S_i``.
"""

from __future__ import annotations

from .pattern import E, M, N, Pattern, X, Z


def standardize(pattern: Pattern) -> Pattern:
    """Rewrite into ``N* E* M*`` form with corrections only on outputs.

    The rewritten pattern records the same outcome for every measured node
    as the original, and on every branch produces the same output state up
    to a global phase.
    """
    ns: list[N] = []
    es: list[E] = []
    ms: list[M] = []
    px: dict[int, frozenset] = {}
    pz: dict[int, frozenset] = {}

    def get(d, node):
        return d.get(node, frozenset())

    for cmd in pattern.commands:
        if isinstance(cmd, N):
            ns.append(cmd)
        elif isinstance(cmd, E):
            xi, xj = get(px, cmd.i), get(px, cmd.j)
            if xi:
                pz[cmd.j] = get(pz, cmd.j) ^ xi
            if xj:
                pz[cmd.i] = get(pz, cmd.i) ^ xj
            es.append(cmd)
        elif isinstance(cmd, M):
            a, b = px.pop(cmd.node, frozenset()), pz.pop(cmd.node, frozenset())
            ms.append(M(cmd.node, cmd.plane, cmd.angle, cmd.s_domain ^ a, cmd.t_domain ^ b))
        elif isinstance(cmd, X):
            px[cmd.node] = get(px, cmd.node) ^ cmd.domain
        elif isinstance(cmd, Z):
            pz[cmd.node] = get(pz, cmd.node) ^ cmd.domain
    tail: list = []
    for node in pattern.outputs:
        if get(pz, node):
            tail.append(Z(node, pz[node]))
        if get(px, node):
            tail.append(X(node, px[node]))
    return Pattern(pattern.inputs, [*ns, *es, *ms, *tail], pattern.outputs)


def shift_signals(pattern: Pattern, return_map: bool = False):
    """Remove outcome-flip dependencies from measurements.

    Parameters
    ----------
    pattern : Pattern
        Usually a standardized pattern, but any valid pattern works.
    return_map : bool
        Also return ``{node: S_node}`` such that the original signal of
        ``node`` equals the new recorded outcome of ``node`` plus the parity
        of the new outcomes of ``S_node``.

    Returns
    -------
    Pattern or (Pattern, dict)
        After the rewrite no ``XY`` or ``ZX`` measurement has a ``t``
        domain, and no ``YZ`` measurement has an ``s`` domain.
    """
    shift: dict[int, frozenset] = {}

    def sub(dom: frozenset) -> frozenset:
        out = dom
        for k in dom:
            if k in shift:
                out = out ^ shift[k]
        return out

    cmds: list = []
    for cmd in pattern.commands:
        if isinstance(cmd, M):
            s, t = sub(cmd.s_domain), sub(cmd.t_domain)
            if cmd.plane == "XY":
                flip, s, t = t, s, frozenset()
            elif cmd.plane == "ZX":
                flip, s, t = t, s ^ t, frozenset()
            else:
                flip, s = s, frozenset()
            if flip:
                shift[cmd.node] = flip
            cmds.append(M(cmd.node, cmd.plane, cmd.angle, s, t))
        elif isinstance(cmd, (X, Z)):
            cmds.append(type(cmd)(cmd.node, sub(cmd.domain)))
        else:
            cmds.append(cmd)
    out = Pattern(pattern.inputs, cmds, pattern.outputs)
    if return_map:
        return out, dict(shift)
    return out


def original_outcomes(new_outcomes: dict[int, int], signal_map: dict[int, frozenset]) -> dict[int, int]:
    """Translate recorded outcomes of a shifted pattern back to original signals."""
    out = {}
    for node, r in new_outcomes.items():
        extra = sum(new_outcomes[k] for k in signal_map.get(node, ()))
        out[node] = (r + extra) & 1
    return out
