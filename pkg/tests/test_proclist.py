"""Parser tests: format detection, lenient/strict behavior, round-trips."""

import pytest

from proctriage.errors import EmptyListing, MalformedRow, UnrecognizedFormat
from proctriage.proclist import (
    PS_UNIX,
    TASKLIST_TABULAR,
    ProcessEntry,
    ProcessList,
    detect_format,
    parse_process_list,
    serialize_process_list,
)

PS_SAMPLE = """\
  PID  PPID USER     CMD
    1     0 root     /sbin/init
  212     1 root     /usr/sbin/sshd
  940   212 alice    sshd: alice [priv]
  951   940 alice    -bash
"""


def test_detect_tasklist(safe_host_text):
    assert detect_format(safe_host_text) == TASKLIST_TABULAR


def test_detect_ps():
    assert detect_format(PS_SAMPLE) == PS_UNIX


def test_detect_unrecognized():
    with pytest.raises(UnrecognizedFormat):
        detect_format("nothing useful here\njust words\n")


def test_parse_safe_fixture(safe_host_text):
    plist = parse_process_list(safe_host_text)
    assert plist.format == TASKLIST_TABULAR
    assert len(plist.entries) == 221
    assert plist.warnings == ()
    assert plist.entries[0].pid == 0
    assert plist.entries[0].name == "System Process"


def test_parse_sandbox_fixture(sandbox_host_text):
    plist = parse_process_list(sandbox_host_text)
    assert len(plist.entries) == 41
    assert plist.warnings == ()
    owners = {e.owner for e in plist.entries if e.owner}
    assert "NT AUTHORITY\\SYSTEM" in owners


def test_parse_ps_sample():
    plist = parse_process_list(PS_SAMPLE)
    assert plist.format == PS_UNIX
    assert len(plist.entries) == 4
    assert plist.entries[0] == ProcessEntry(pid=1, ppid=0, name="/sbin/init",
                                            arch="unknown", session=None, owner="root")
    assert plist.entries[3].owner == "alice"


def test_blank_owner_maps_to_none(safe_host_text):
    plist = parse_process_list(safe_host_text)
    assert any(e.owner is None for e in plist.entries)


def test_lenient_skips_bad_rows_with_warnings():
    text = (
        "PID\tPPID\tARCH\tSESS\tNAME\tOWNER\n"
        "0\t0\t\t\tSystem Process\t\n"
        "abc\t0\t\t\tghost.exe\t\n"
        "8\t4\t\t\tsmss.exe\t\n"
    )
    plist = parse_process_list(text)
    assert len(plist.entries) == 2
    assert len(plist.warnings) == 1
    assert "skipped" in plist.warnings[0]


def test_strict_raises_on_bad_row():
    text = (
        "PID\tPPID\tARCH\tSESS\tNAME\tOWNER\n"
        "abc\t0\t\t\tghost.exe\t\n"
    )
    with pytest.raises(MalformedRow):
        parse_process_list(text, strict=True)


def test_empty_text_has_no_recognizable_format():
    with pytest.raises(UnrecognizedFormat):
        parse_process_list("")
    with pytest.raises(UnrecognizedFormat):
        parse_process_list("   \n\n  ")


def test_header_only_listing_rejected():
    with pytest.raises(EmptyListing):
        parse_process_list("PID\tPPID\tARCH\tSESS\tNAME\tOWNER\n")


def test_duplicate_pid0_lenient_and_strict():
    text = (
        "PID\tPPID\tARCH\tSESS\tNAME\tOWNER\n"
        "0\t0\t\t\tSystem Process\t\n"
        "0\t0\t\t\tSystem Process\t\n"
        "8\t4\t\t\tsmss.exe\t\n"
    )
    plist = parse_process_list(text)
    assert sum(1 for e in plist.entries if e.pid == 0) == 1
    assert len(plist.warnings) == 1
    with pytest.raises(MalformedRow):
        parse_process_list(text, strict=True)


def test_explicit_format_override():
    with pytest.raises(UnrecognizedFormat):
        parse_process_list(PS_SAMPLE, fmt=TASKLIST_TABULAR)
    with pytest.raises(UnrecognizedFormat):
        parse_process_list(PS_SAMPLE, fmt="csv")


def test_roundtrip_tasklist(sandbox_host_text):
    plist = parse_process_list(sandbox_host_text)
    text = serialize_process_list(plist)
    again = parse_process_list(text)
    assert again.entries == plist.entries
    assert again.format == plist.format


def test_roundtrip_ps():
    plist = parse_process_list(PS_SAMPLE)
    text = serialize_process_list(plist)
    again = parse_process_list(text)
    assert again.entries == plist.entries
    assert again.format == PS_UNIX


def test_entry_validation():
    with pytest.raises(ValueError):
        ProcessEntry(pid=-1, ppid=0, name="x")
    with pytest.raises(ValueError):
        ProcessEntry(pid=1, ppid=0, name="")
    with pytest.raises(ValueError):
        ProcessEntry(pid=1, ppid=0, name="x", owner="   ")


def test_list_validation():
    entry = ProcessEntry(pid=1, ppid=0, name="init")
    pid0 = ProcessEntry(pid=0, ppid=0, name="System Process")
    with pytest.raises(ValueError):
        ProcessList(entries=())
    with pytest.raises(ValueError):
        ProcessList(entries=(pid0, pid0, entry))


def test_space_aligned_tasklist_rows():
    text = (
        "PID    PPID   ARCH   SESS   NAME           OWNER\n"
        "0      0                    System Process\n"
        "4      0      x64    0      System         NT AUTHORITY\\SYSTEM\n"
    )
    plist = parse_process_list(text)
    assert len(plist.entries) == 2
    assert plist.entries[1].arch == "x64"
    assert plist.entries[1].session == 0
    assert plist.entries[1].owner == "NT AUTHORITY\\SYSTEM"
