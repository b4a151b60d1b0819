"""
Character-level edit scripts between an alias suffix and its primary suffix.

The alignment is a longest-common-subsequence diff (rapidfuzz's Indel
editops). Consecutive non-matching operations form a hunk; inside a hunk,
deletions and additions are paired positionally into replacements and the
leftovers stay plain deletions or additions. Positions index the alias
suffix; an addition at position p is inserted before character p.
"""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

from rapidfuzz.distance import Indel


class EditKind(str, Enum):
    DELETE = "Delete"
    ADD = "Add"
    REPLACE = "Replace"


KIND_ORDER = {EditKind.DELETE: 0, EditKind.ADD: 1, EditKind.REPLACE: 2}


@dataclass(frozen=True)
class EditOp:
    kind: EditKind
    position: int
    old_char: Optional[str] = None
    new_char: Optional[str] = None

    def __post_init__(self):
        has_old, has_new = self.old_char is not None, self.new_char is not None
        expected = {EditKind.DELETE: (True, False), EditKind.ADD: (False, True), EditKind.REPLACE: (True, True)}
        if (has_old, has_new) != expected[self.kind]:
            raise ValueError(f"{self.kind.value} op with old={self.old_char!r} new={self.new_char!r}")
        if self.position < 0:
            raise ValueError("Edit position must not be negative")


# (kind, old_char, new_char, count), sorted by kind then characters
Signature = Tuple[Tuple[EditKind, Optional[str], Optional[str], int], ...]


@dataclass(frozen=True)
class EditScript:
    ops: Tuple[EditOp, ...] = ()

    def __len__(self) -> int:
        return len(self.ops)

    def signature(self) -> Signature:
        """Canonical multiset of operations; positions are ignored."""
        counts = Counter((op.kind, op.old_char, op.new_char) for op in self.ops)
        keys = sorted(counts, key=lambda k: (KIND_ORDER[k[0]], k[1] or "", k[2] or ""))
        return tuple((kind, old, new, counts[(kind, old, new)]) for kind, old, new in keys)


def _hunk_ops(start: int, deleted: List[str], added: List[str]) -> List[EditOp]:
    paired = min(len(deleted), len(added))
    ops = [EditOp(EditKind.REPLACE, start + t, deleted[t], added[t]) for t in range(paired)]
    ops += [EditOp(EditKind.DELETE, start + t, deleted[t]) for t in range(paired, len(deleted))]
    ops += [EditOp(EditKind.ADD, start + len(deleted), new_char=ch) for ch in added[paired:]]
    return ops


def edit_script(s1: str, s2: str) -> EditScript:
    """LCS-based character diff from s1 to s2."""
    editops = list(Indel.editops(s1, s2))
    ops: List[EditOp] = []
    k = 0
    while k < len(editops):
        i, j = editops[k].src_pos, editops[k].dest_pos
        start = i
        deleted: List[str] = []
        added: List[str] = []
        while k < len(editops) and editops[k].src_pos == i and editops[k].dest_pos == j:
            if editops[k].tag == "delete":
                deleted.append(s1[i])
                i += 1
            else:
                added.append(s2[j])
                j += 1
            k += 1
        ops.extend(_hunk_ops(start, deleted, added))
    return EditScript(tuple(ops))


def apply_edit_script(s1: str, script: EditScript) -> str:
    adds: Dict[int, List[str]] = {}
    at: Dict[int, EditOp] = {}
    for op in script.ops:
        if op.kind == EditKind.ADD:
            adds.setdefault(op.position, []).append(op.new_char)
        else:
            if op.position >= len(s1) or s1[op.position] != op.old_char:
                raise ValueError(f"{op.kind.value} at {op.position} does not match {s1!r}")
            at[op.position] = op
    out: List[str] = []
    for p in range(len(s1) + 1):
        out.extend(adds.get(p, ()))
        if p == len(s1):
            break
        op = at.get(p)
        if op is None:
            out.append(s1[p])
        elif op.kind == EditKind.REPLACE:
            out.append(op.new_char)
    return "".join(out)


CHAR_NAMES = {
    "/": "a slash (/)",
    "-": "a hyphen (-)",
    ".": "a period (.)",
    "_": "an underscore (_)",
    ":": "a colon (:)",
    ";": "a semicolon (;)",
    ",": "a comma (,)",
    " ": "a space",
    "(": "an opening parenthesis (()",
    ")": "a closing parenthesis ())",
}

TIMES = {1: "once", 2: "twice", 3: "three times", 4: "four times", 5: "five times",
         6: "six times", 7: "seven times", 8: "eight times", 9: "nine times", 10: "ten times"}


def _char(c: str) -> str:
    return CHAR_NAMES.get(c, f'"{c}"')


def _times(n: int) -> str:
    return TIMES.get(n, f"{n} times")


def describe_signature(signature: Signature) -> str:
    """Prose form, e.g. 'Delete a slash (/) once' or 'Add a hyphen (-) four times'."""
    parts = []
    for kind, old, new, count in signature:
        if kind == EditKind.DELETE:
            parts.append(f"delete {_char(old)} {_times(count)}")
        elif kind == EditKind.ADD:
            parts.append(f"add {_char(new)} {_times(count)}")
        else:
            parts.append(f"replace {_char(old)} with {_char(new)} {_times(count)}")
    if not parts:
        return "No change"
    text = ", ".join(parts)
    return text[0].upper() + text[1:]


@dataclass(frozen=True)
class SignatureSummary:
    signature: Signature
    description: str
    count: int
    example_alias: str
    example_primary: str


def summarize_edits(scripts: Iterable[Tuple[str, str, EditScript]]) -> List[SignatureSummary]:
    """
    Count signatures over (alias suffix, primary suffix, script) triples.

    Ranked by count descending, then by description; the example kept for each
    signature is the lexicographically smallest alias suffix.
    """
    counts: Counter = Counter()
    examples: Dict[Signature, Tuple[str, str]] = {}
    for s1, s2, script in scripts:
        sig = script.signature()
        counts[sig] += 1
        if sig not in examples or (s1, s2) < examples[sig]:
            examples[sig] = (s1, s2)
    summaries = [
        SignatureSummary(sig, describe_signature(sig), n, examples[sig][0], examples[sig][1])
        for sig, n in counts.items()
    ]
    summaries.sort(key=lambda s: (-s.count, s.description))
    return summaries
