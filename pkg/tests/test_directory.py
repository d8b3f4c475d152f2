import pytest
from hypothesis import given, strategies as st

from outfox.crypto import X25519
from outfox.directory import Directory, Privacy
from outfox.errors import DirectoryError

ids = st.binary(min_size=16, max_size=16)


def test_public_register_and_retrieve():
    d = Directory()
    d.register(b"n" * 16, X25519, b"k" * 32, Privacy.PUBLIC)
    assert d.retrieve(b"u" * 16, b"n" * 16) == b"k" * 32
    assert d.audit[-1] == {"op": "retrieve", "requester": (b"u" * 16).hex(), "target": (b"n" * 16).hex()}


def test_private_retrieval_hides_target():
    d = Directory()
    d.register(b"r" * 16, X25519, b"k" * 32, Privacy.PRIVATE)
    assert d.retrieve(b"u" * 16, b"r" * 16, Privacy.PRIVATE) == b"k" * 32
    assert d.audit[-1] == {"op": "retrieve", "requester": (b"u" * 16).hex()}


def test_interfaces_do_not_cross():
    d = Directory()
    d.register(b"r" * 16, X25519, b"k" * 32, Privacy.PRIVATE)
    d.register(b"n" * 16, X25519, b"j" * 32, Privacy.PUBLIC)
    assert d.retrieve(b"u" * 16, b"r" * 16, Privacy.PUBLIC) is None
    assert d.retrieve(b"u" * 16, b"n" * 16, Privacy.PRIVATE) is None
    assert d.retrieve(b"u" * 16, b"x" * 16, Privacy.PRIVATE) is None


def test_duplicate_and_unauthorized_registration():
    d = Directory(authorized=[b"n" * 16])
    d.register(b"n" * 16, X25519, b"k" * 32)
    with pytest.raises(DirectoryError):
        d.register(b"n" * 16, X25519, b"k" * 32)
    with pytest.raises(DirectoryError):
        d.register(b"u" * 16, X25519, b"k" * 32, Privacy.PUBLIC)
    d.register(b"u" * 16, X25519, b"k" * 32, Privacy.PRIVATE)
    assert len(d) == 2 and b"u" * 16 in d
    assert [r["party"] for r in d.registrations] == [(b"n" * 16).hex(), (b"u" * 16).hex()]


@given(st.lists(st.tuples(ids, ids), min_size=1, max_size=30))
def test_private_audit_never_contains_targets(pairs):
    d = Directory()
    targets = {t for _, t in pairs}
    for t in targets:
        d.register(t, X25519, bytes(32), Privacy.PRIVATE)
    for requester, target in pairs:
        d.retrieve(requester, target, Privacy.PRIVATE)
    text = repr(d.audit)
    assert len(d.audit) == len(pairs)
    for t in targets - {r for r, _ in pairs}:
        assert t.hex() not in text


def test_export_import_roundtrip():
    d = Directory()
    d.register(b"n" * 16, X25519, b"k" * 32, Privacy.PUBLIC)
    d.register(b"u" * 16, X25519, b"j" * 32, Privacy.PRIVATE)
    e = Directory.import_json(d.export_json())
    assert e.export_json() == d.export_json()
    assert e.retrieve(b"a" * 16, b"u" * 16, Privacy.PRIVATE) == b"j" * 32
