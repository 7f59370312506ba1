from pathlib import Path
import sys

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from config import RANDOM_STATE, RANDOM_THAD_SETS, SPIDEV_LEGACY_MODE_OVERLAY_PATH
from errors import SpecParseError
from generators.random_programs import random_thad_set
from model.thad import Alias, BindingSource
from specio.loader import bundled_spidev, load_constants, load_thad_spec
from specio.parser import parse_constants, parse_thad_spec
from specio.serializer import serialize_constants, serialize_spec

CONSTANTS = {"MSG": 1075866368, "WR_MODE32": 1074031365, "WR_MODE": 1073834753}

SPEC = """
routine open(path, oflag) returns descriptor
routine read(fd:descriptor, buf, nbyte)
routine ioctl(fd:descriptor, request:discriminator, arg)

dep d1: read requires open
dep d2: ioctl[request=MSG] requires ioctl[request=WR_MODE32]
bind d1: open.return -> read.fd
"""


def codes(text: str, constants=CONSTANTS) -> list:
    return [d.code for d in parse_thad_spec(text, constants).diagnostics]


def test_parse_spec() -> None:
    document = parse_thad_spec(SPEC, CONSTANTS)

    assert document.ok
    thad_set = document.parsed
    assert [r.name for r in thad_set.routines] == ["open", "read", "ioctl"]
    assert str(thad_set.thad("d2").dependent) == "ioctl[request=MSG]"
    assert thad_set.thad("d1").binding.source is BindingSource.RETURN
    assert thad_set.thad("d2").binding is None


def test_bundled_spidev_set() -> None:
    thad_set = bundled_spidev()

    assert len(thad_set.thads) == 26
    assert [r.name for r in thad_set.routines] == ["open", "read", "write", "close", "ioctl"]
    assert len(thad_set.constants) == 11
    assert thad_set.aliases == ()
    assert all(t.binding is None for t in thad_set.thads)


def test_legacy_mode_overlay_adds_alias() -> None:
    thad_set = bundled_spidev([SPIDEV_LEGACY_MODE_OVERLAY_PATH])

    assert thad_set.aliases == (Alias("WR_MODE", "WR_MODE32"),)
    assert len(thad_set.thads) == 26


def test_syntax_error_is_located() -> None:
    document = parse_thad_spec("routine open(path\n", CONSTANTS)

    assert not document.ok
    diagnostic = document.diagnostics[0]
    assert diagnostic.code == "SyntaxError"
    assert diagnostic.line == 1
    assert diagnostic.column == 18


def test_semantic_errors() -> None:
    header = "routine open(path) returns descriptor\nroutine ioctl(fd:descriptor, request:discriminator)\n"

    assert codes(header + "dep d1: read requires open\n") == ["UnknownRoutine"]
    assert codes(header + "dep d1: ioctl[request=NOPE] requires open\n") == ["UnknownConstant"]
    assert codes(header + "dep d1: ioctl[fd=MSG] requires open\n") == ["InvalidConstraint"]
    assert codes(header + "dep d1: ioctl requires ioctl\n") == ["SelfDependency"]
    assert codes(header + "dep d1: ioctl requires open\ndep d1: ioctl requires open\n") == ["DuplicateId"]
    assert codes(header + "bind d9: open.return -> ioctl.fd\n") == ["UnknownThad"]
    assert codes(header + "dep d1: ioctl requires open\nbind d1: open.path -> ioctl.fd\n") == [
        "InvalidBinding"
    ]
    assert codes(header + "alias NOPE satisfies MSG\n") == ["UnknownConstant"]


def test_constants_table() -> None:
    document = parse_constants("# header\nA = 1\nB = 0x10\nC = -3\nA = 1\n")

    assert document.parsed == {"A": 1, "B": 16, "C": -3}
    assert [d.severity for d in document.diagnostics] == ["warning"]

    conflicting = parse_constants("A = 1\nA = 2\n")
    assert conflicting.parsed is None
    assert conflicting.diagnostics[0].code == "ConflictingConstant"
    assert conflicting.diagnostics[0].line == 2


def test_byte_order_mark_is_ignored() -> None:
    assert parse_constants("\ufeffA = 1\n").parsed == {"A": 1}


def test_bundled_set_reparses_to_equal_set() -> None:
    thad_set = bundled_spidev()

    reparsed = parse_thad_spec(serialize_spec(thad_set), thad_set.constants).parsed

    assert reparsed == thad_set


def test_random_sets_reparse_to_equal_sets() -> None:
    rng = np.random.default_rng(RANDOM_STATE)
    for _ in range(RANDOM_THAD_SETS):
        thad_set = random_thad_set(rng, CONSTANTS, bind_probability=0.5, alias_probability=0.5)
        text = serialize_spec(thad_set)
        assert parse_thad_spec(text, CONSTANTS).parsed == thad_set, text


def test_constants_reparse() -> None:
    assert parse_constants(serialize_constants(CONSTANTS)).parsed == CONSTANTS


def test_empty_set_serializes_to_empty_text() -> None:
    assert serialize_spec(parse_thad_spec("", {}).parsed) == ""


def test_loader_errors(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        load_constants(tmp_path / "missing.consts")

    broken = tmp_path / "broken.thad"
    broken.write_text("dep d1: read requires open\n", encoding="utf-8")
    with pytest.raises(SpecParseError) as info:
        load_thad_spec([broken], CONSTANTS)
    assert info.value.diagnostics[0].code == "UnknownRoutine"
