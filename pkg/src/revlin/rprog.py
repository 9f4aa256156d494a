"""Tree-structured reversible programs and their metering interpreter.

Node kinds:

* ``Prim``    a single primitive
* ``Seq``     children in order (reverse order when run backward)
* ``Inverse`` the child run in the opposite direction
* ``Ccu``     compute, copy, then uncompute (compute run backward)
* ``Scope``   ancilla cells claimed on entry and released on exit; release
              fails with ``GarbageLeak`` unless they are back to zero

Loop bounds are unrolled when a program is built, so a program is specific
to one problem size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence, Union

from .arena import (
    ADDITIVE_KINDS,
    BACKWARD,
    FORWARD,
    Arena,
    CellId,
    Direction,
    Primitive,
    ResourceReport,
)
from .errors import CopyOverlap, DivideByZero, NonInvertible, ReversibleError

# maps a zero-operand failure (NonInvertible / DivideByZero) to a domain error
ZeroFault = Callable[[str], ReversibleError]


class _Node:
    label: str | None

    @cached_property
    def footprint(self) -> tuple[frozenset[CellId], frozenset[CellId]]:
        """(cells read, cells written) anywhere below this node."""
        reads: set[CellId] = set()
        writes: set[CellId] = set()
        for prim in self.primitives():
            reads.update(prim.reads())
            writes.update(prim.writes())
        return frozenset(reads), frozenset(writes)

    @property
    def reads(self) -> frozenset[CellId]:
        return self.footprint[0]

    @property
    def writes(self) -> frozenset[CellId]:
        return self.footprint[1]

    @property
    def touched(self) -> frozenset[CellId]:
        r, w = self.footprint
        return r | w

    def primitives(self) -> Iterator[Primitive]:
        raise NotImplementedError

    @cached_property
    def op_count(self) -> int:
        """Primitive steps executed by one run, in either direction."""
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Prim(_Node):
    prim: Primitive
    label: str | None = field(default=None, compare=False)

    def primitives(self) -> Iterator[Primitive]:
        yield self.prim

    @cached_property
    def op_count(self) -> int:
        return 1


@dataclass(frozen=True, eq=True)
class Seq(_Node):
    children: tuple[RevProgram, ...]
    label: str | None = field(default=None, compare=False)
    zero_fault: ZeroFault | None = field(default=None, compare=False)

    def primitives(self) -> Iterator[Primitive]:
        for child in self.children:
            yield from child.primitives()

    @cached_property
    def op_count(self) -> int:
        return sum(c.op_count for c in self.children)


@dataclass(frozen=True, eq=True)
class Inverse(_Node):
    body: RevProgram
    label: str | None = field(default=None, compare=False)

    def primitives(self) -> Iterator[Primitive]:
        return self.body.primitives()

    @cached_property
    def op_count(self) -> int:
        return self.body.op_count


@dataclass(frozen=True, eq=True)
class Ccu(_Node):
    compute: RevProgram
    copy: RevProgram
    label: str | None = field(default=None, compare=False)

    def primitives(self) -> Iterator[Primitive]:
        yield from self.compute.primitives()
        yield from self.copy.primitives()

    @cached_property
    def op_count(self) -> int:
        return 2 * self.compute.op_count + self.copy.op_count


@dataclass(frozen=True, eq=True)
class Scope(_Node):
    cells: tuple[CellId, ...]
    body: RevProgram
    label: str | None = field(default=None, compare=False)

    def primitives(self) -> Iterator[Primitive]:
        return self.body.primitives()

    @cached_property
    def op_count(self) -> int:
        return self.body.op_count


RevProgram = Union[Prim, Seq, Inverse, Ccu, Scope]

EMPTY = Seq(())


def seq(parts: Iterable[RevProgram | Primitive], label: str | None = None) -> Seq:
    return Seq(tuple(Prim(p) if isinstance(p, Primitive) else p for p in parts), label)


def ccu(
    compute: RevProgram | Primitive,
    copy: RevProgram | Primitive,
    label: str | None = None,
) -> Ccu:
    """Compute-copy-uncompute block.

    The copy leg may only use additive primitives, and may only write cells
    the compute leg neither reads nor writes; otherwise ``CopyOverlap``.
    """
    if isinstance(compute, Primitive):
        compute = Prim(compute)
    if isinstance(copy, Primitive):
        copy = Prim(copy)
    for prim in copy.primitives():
        if prim.kind not in ADDITIVE_KINDS:
            raise CopyOverlap(f"copy leg may only accumulate, got {prim.kind.value}")
    clash = copy.writes & compute.touched
    if clash:
        shown = ", ".join(f"c{c}" for c in sorted(clash)[:5])
        raise CopyOverlap(f"copy leg writes cells used by compute: {shown}")
    return Ccu(compute, copy, label)


def scope(cells: Sequence[CellId], body: RevProgram, label: str | None = None) -> Scope:
    return Scope(tuple(cells), body, label)


def invert(prog: RevProgram) -> RevProgram:
    """Syntactic inverse of ``prog``."""
    if isinstance(prog, Prim):
        return Prim(prog.prim.inverse(), prog.label)
    if isinstance(prog, Seq):
        return Seq(tuple(invert(c) for c in reversed(prog.children)), prog.label, prog.zero_fault)
    if isinstance(prog, Inverse):
        return prog.body
    if isinstance(prog, Ccu):
        return Ccu(prog.compute, invert(prog.copy), prog.label)
    if isinstance(prog, Scope):
        return Scope(prog.cells, invert(prog.body), prog.label)
    raise TypeError(f"not a program node: {prog!r}")


class _Runner:
    def __init__(self, arena: Arena) -> None:
        self.arena = arena
        self.garbage = 0

    def exec(self, node: RevProgram, direction: Direction) -> None:
        try:
            self._exec(node, direction)
        except ReversibleError as err:
            if node.label:
                err.labels.insert(0, node.label)
            raise

    def _exec(self, node: RevProgram, direction: Direction) -> None:
        if isinstance(node, Prim):
            self.arena.step(node.prim, direction)
        elif isinstance(node, Seq):
            children = node.children if direction is FORWARD else reversed(node.children)
            last = len(node.children) - 1
            for pos, child in enumerate(children):
                try:
                    self.exec(child, direction)
                except ReversibleError as err:
                    err.path.insert(0, pos if direction is FORWARD else last - pos)
                    if node.zero_fault is not None and type(err) in (NonInvertible, DivideByZero):
                        fault = node.zero_fault(err.message)
                        fault.path, fault.labels = err.path, err.labels
                        raise fault from err
                    raise
        elif isinstance(node, Ccu):
            cells = self.arena._cells
            before = {c: cells.get(c) for c in node.compute.writes}
            self.exec(node.compute, FORWARD)
            self.exec(node.copy, direction)
            self.exec(node.compute, BACKWARD)
            self.garbage += sum(1 for c, v in before.items() if cells.get(c) != v)
        elif isinstance(node, Inverse):
            self.exec(node.body, direction.flipped())
        elif isinstance(node, Scope):
            self.arena.claim(node.cells)
            self.exec(node.body, direction)
            self.arena.free(node.cells)
        else:
            raise TypeError(f"not a program node: {node!r}")


def run(arena: Arena, prog: RevProgram, direction: Direction = FORWARD) -> ResourceReport:
    """Execute ``prog`` on ``arena`` and report the resources of this run.

    Running backward is the same as running ``invert(prog)`` forward.
    Errors abort without rollback and carry the failing node's path.
    """
    ops_before = arena.op_count
    arena.window_peak = arena.live_count
    arena.window_bits = 0
    runner = _Runner(arena)
    runner.exec(prog, direction)
    peak = arena.window_peak
    persistent = arena.live_count
    return ResourceReport(
        primitive_ops=arena.op_count - ops_before,
        peak_live_cells=peak,
        persistent_cells=persistent,
        transient_peak=peak - persistent,
        garbage_cells=runner.garbage,
        max_bits=arena.window_bits,
    )


def pretty(prog: RevProgram, indent: str = "  ") -> str:
    """One line per node, indented by tree depth."""
    lines: list[str] = []

    def walk(node: RevProgram, depth: int) -> None:
        pad = indent * depth
        tag = f" # {node.label}" if node.label else ""
        if isinstance(node, Prim):
            lines.append(f"{pad}{node.prim}{tag}")
        elif isinstance(node, Seq):
            lines.append(f"{pad}SEQ{tag}")
            for child in node.children:
                walk(child, depth + 1)
        elif isinstance(node, Inverse):
            lines.append(f"{pad}INVERSE{tag}")
            walk(node.body, depth + 1)
        elif isinstance(node, Ccu):
            lines.append(f"{pad}CCU{tag}")
            lines.append(f"{pad}{indent}COMPUTE")
            walk(node.compute, depth + 2)
            lines.append(f"{pad}{indent}COPY")
            walk(node.copy, depth + 2)
            lines.append(f"{pad}{indent}UNCOMPUTE")
        elif isinstance(node, Scope):
            cells = " ".join(f"c{c}" for c in node.cells)
            lines.append(f"{pad}SCOPE {cells}{tag}")
            walk(node.body, depth + 1)

    walk(prog, 0)
    return "\n".join(lines)
