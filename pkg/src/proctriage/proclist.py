"""Parse raw process-listing text into structured process lists.

Two input shapes are understood:

* ``tasklist_tabular`` -- Windows-style verbose listings with a header of
  PID / PPID / ARCH / SESS / NAME / OWNER columns (any order).  Cells are
  separated by tabs or by runs of two-or-more spaces, because NAME and
  OWNER legitimately contain single spaces ("System Process",
  "NT AUTHORITY\\SYSTEM").
* ``ps_unix`` -- ps-style output whose first non-blank line is a header
  containing PID and CMD/COMMAND.

The canonical serialized form emitted by :func:`serialize_process_list`
is tab-separated with a single header line.
"""
from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field

from .errors import EmptyListing, MalformedRow, UnrecognizedFormat

logger = logging.getLogger(__name__)

TASKLIST_TABULAR = "tasklist_tabular"
PS_UNIX = "ps_unix"

ARCH_X86 = "x86"
ARCH_X64 = "x64"
ARCH_UNKNOWN = "unknown"

_TASKLIST_COLUMNS = ("PID", "PPID", "ARCH", "SESS", "NAME", "OWNER")
_SPACE_RUN = re.compile(r" {2,}")
_RULE_LINE = re.compile(r"^[=\- ]+$")


@dataclass(frozen=True)
class ProcessEntry:
    """One row of a process listing."""

    pid: int
    ppid: int
    name: str
    arch: str = ARCH_UNKNOWN
    session: int | None = None
    owner: str | None = None

    def __post_init__(self):
        if self.pid < 0 or self.ppid < 0:
            raise ValueError(f"negative pid/ppid: {self.pid}/{self.ppid}")
        if not self.name.strip():
            raise ValueError("empty process name")
        if self.owner is not None and not self.owner.strip():
            raise ValueError("owner present but blank")


@dataclass(frozen=True)
class ProcessList:
    """A parsed host snapshot: ordered entries plus parse metadata."""

    entries: tuple[ProcessEntry, ...]
    source_id: str = ""
    received_at: float = field(default_factory=time.time)
    format: str = TASKLIST_TABULAR
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.entries:
            raise ValueError("process list has no entries")
        if sum(1 for e in self.entries if e.pid == 0) > 1:
            raise ValueError("more than one pid-0 pseudo-process")


def detect_format(text: str) -> str:
    """Return the listing format of ``text``.

    The first line that looks like a header decides: PID plus NAME tokens
    mean ``tasklist_tabular``; PID plus CMD/COMMAND mean ``ps_unix``.
    Raises :class:`UnrecognizedFormat` when no line qualifies.
    """
    for line in text.splitlines():
        if not line.strip():
            continue
        tokens = {tok.upper() for tok in line.split()}
        if "PID" in tokens and "NAME" in tokens:
            return TASKLIST_TABULAR
        if "PID" in tokens and ("CMD" in tokens or "COMMAND" in tokens):
            return PS_UNIX
    raise UnrecognizedFormat("no tasklist or ps header line found")


def _split_cells(line: str) -> list[str]:
    if "\t" in line:
        return [c.strip() for c in line.split("\t")]
    return [c for c in _SPACE_RUN.split(line.strip())]


def _parse_int(cell: str) -> int | None:
    try:
        return int(cell)
    except ValueError:
        return None


def _entry_from_tasklist(cells: list[str], col_of: dict[str, int],
                         positional: bool) -> ProcessEntry | str:
    """Build an entry from one tasklist row, or return a reject reason.

    Tab-split rows map cells to header columns positionally.  Space-split
    rows lose their empty cells, so remaining cells after PID/PPID are
    consumed by type: an arch token, then an integer session, then the
    name, then an optional owner.
    """
    if positional:
        def cell(name):
            i = col_of.get(name)
            return cells[i] if i is not None and i < len(cells) else ""

        pid_cell, ppid_cell = cell("PID"), cell("PPID")
        arch_cell, sess_cell = cell("ARCH"), cell("SESS")
        name_cell, owner_cell = cell("NAME"), cell("OWNER")
    else:
        if len(cells) < 3:
            return "fewer than three cells"
        pid_cell, ppid_cell, rest = cells[0], cells[1], cells[2:]
        arch_cell = sess_cell = ""
        if rest and rest[0].lower() in (ARCH_X86, ARCH_X64):
            arch_cell = rest.pop(0)
        if rest and _parse_int(rest[0]) is not None:
            sess_cell = rest.pop(0)
        if not rest:
            return "no name cell"
        name_cell = rest.pop(0)
        owner_cell = rest.pop(0) if rest else ""

    pid = _parse_int(pid_cell)
    if pid is None or pid < 0:
        return f"non-numeric pid cell {pid_cell!r}"
    ppid = _parse_int(ppid_cell) if ppid_cell else 0
    if ppid is None or ppid < 0:
        ppid = 0
    arch = arch_cell.lower() if arch_cell.lower() in (ARCH_X86, ARCH_X64) else ARCH_UNKNOWN
    session = _parse_int(sess_cell) if sess_cell else None
    if not name_cell.strip():
        return "empty name cell"
    owner = owner_cell.strip() or None
    return ProcessEntry(pid=pid, ppid=ppid, name=name_cell.strip(),
                        arch=arch, session=session, owner=owner)


def _parse_tasklist(lines: list[str], strict: bool):
    header_idx = None
    col_of: dict[str, int] = {}
    for i, line in enumerate(lines):
        flat = {t.upper() for t in line.split()}
        if "PID" in flat and "NAME" in flat:
            header_idx = i
            for j, tok in enumerate(_split_cells(line)):
                tok = tok.upper()
                if tok in _TASKLIST_COLUMNS:
                    col_of[tok] = j
            if "PID" not in col_of:  # header not cell-aligned, assume canonical order
                col_of = {name: j for j, name in enumerate(_TASKLIST_COLUMNS)}
            break
    if header_idx is None:
        raise UnrecognizedFormat("no tasklist header line found")

    entries: list[ProcessEntry] = []
    warnings: list[str] = []
    seen_pid0 = False
    for offset, line in enumerate(lines[header_idx + 1:], start=header_idx + 2):
        if not line.strip() or _RULE_LINE.match(line.strip()):
            continue
        cells = _split_cells(line)
        made = _entry_from_tasklist(cells, col_of, positional="\t" in line)
        if isinstance(made, str):
            if strict:
                raise MalformedRow(offset, made)
            warnings.append(f"line {offset}: skipped ({made})")
            continue
        if made.pid == 0:
            if seen_pid0:
                if strict:
                    raise MalformedRow(offset, "duplicate pid-0 row")
                warnings.append(f"line {offset}: skipped (duplicate pid-0 row)")
                continue
            seen_pid0 = True
        entries.append(made)
    return entries, warnings


def _parse_ps(lines: list[str], strict: bool):
    header_idx = next((i for i, l in enumerate(lines) if l.strip()), None)
    if header_idx is None:
        raise UnrecognizedFormat("empty text")
    header = lines[header_idx].split()
    upper = [t.upper() for t in header]
    try:
        pid_idx = upper.index("PID")
    except ValueError:
        raise UnrecognizedFormat("ps header lacks PID") from None
    cmd_idx = next((i for i, t in enumerate(upper) if t in ("CMD", "COMMAND")), None)
    if cmd_idx is None:
        raise UnrecognizedFormat("ps header lacks CMD/COMMAND")
    ppid_idx = upper.index("PPID") if "PPID" in upper else None
    user_idx = next((i for i, t in enumerate(upper) if t in ("USER", "UID")), None)

    entries: list[ProcessEntry] = []
    warnings: list[str] = []
    for offset, line in enumerate(lines[header_idx + 1:], start=header_idx + 2):
        if not line.strip():
            continue
        if "\t" in line:
            cells = [c.strip() for c in line.split("\t")]
        else:
            cells = line.split(None, len(header) - 1)
        if len(cells) <= max(pid_idx, cmd_idx):
            if strict:
                raise MalformedRow(offset, "too few columns")
            warnings.append(f"line {offset}: skipped (too few columns)")
            continue
        pid = _parse_int(cells[pid_idx])
        if pid is None or pid < 0:
            if strict:
                raise MalformedRow(offset, f"non-numeric pid cell {cells[pid_idx]!r}")
            warnings.append(f"line {offset}: skipped (non-numeric pid)")
            continue
        ppid = 0
        if ppid_idx is not None and ppid_idx < len(cells):
            ppid = _parse_int(cells[ppid_idx]) or 0
        owner = cells[user_idx].strip() or None if user_idx is not None and user_idx < len(cells) else None
        name = cells[cmd_idx].strip()
        if not name:
            if strict:
                raise MalformedRow(offset, "empty command cell")
            warnings.append(f"line {offset}: skipped (empty command)")
            continue
        entries.append(ProcessEntry(pid=pid, ppid=ppid, name=name, owner=owner))
    return entries, warnings


def parse_process_list(text: str, fmt: str | None = None, *, strict: bool = False,
                       source_id: str = "") -> ProcessList:
    """Parse raw listing text into a :class:`ProcessList`.

    Malformed rows are skipped with a recorded warning unless ``strict``
    is set, in which case the first bad row raises :class:`MalformedRow`.
    Raises :class:`EmptyListing` when the header has no data rows and
    :class:`UnrecognizedFormat` when no header is found.
    """
    if not text.strip():
        raise UnrecognizedFormat("empty text")
    if fmt is None:
        fmt = detect_format(text)
    if fmt not in (TASKLIST_TABULAR, PS_UNIX):
        raise UnrecognizedFormat(f"unknown format hint {fmt!r}")

    lines = text.splitlines()
    if fmt == TASKLIST_TABULAR:
        entries, warnings = _parse_tasklist(lines, strict)
    else:
        entries, warnings = _parse_ps(lines, strict)

    for w in warnings:
        logger.warning("%s: %s", source_id or "<listing>", w)
    if not entries:
        raise EmptyListing("header present but no data rows parsed")
    return ProcessList(entries=tuple(entries), source_id=source_id,
                       format=fmt, warnings=tuple(warnings))


def serialize_process_list(plist: ProcessList) -> str:
    """Render a process list back to canonical tab-separated text.

    The header matches the list's format so that parse -> serialize ->
    parse round-trips both entries and detected format.
    """
    if plist.format == PS_UNIX:
        lines = ["PID\tPPID\tUSER\tCMD"]
        for e in plist.entries:
            lines.append(f"{e.pid}\t{e.ppid}\t{e.owner or ''}\t{e.name}")
    else:
        lines = ["\t".join(_TASKLIST_COLUMNS)]
        for e in plist.entries:
            arch = "" if e.arch == ARCH_UNKNOWN else e.arch
            sess = "" if e.session is None else str(e.session)
            lines.append(f"{e.pid}\t{e.ppid}\t{arch}\t{sess}\t{e.name}\t{e.owner or ''}")
    return "\n".join(lines) + "\n"
