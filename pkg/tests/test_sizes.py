import random

import pytest
from hypothesis import given, strategies as st

import oracles
from helpers import make_path, terminal
from outfox.crypto import MLKEM768, TESTKEM, X25519, XWING
from outfox.packet import PacketFormat, SizeProfile, layer_sizes, packet_create_layers, surb_create, surb_use
from outfox.packet.format import RouteHop

# frozen from the oracle formulas (k=128, |m| = 1024 bytes)
X25519_L5 = {"header": [352, 288, 224, 160, 96], "packet": [1760, 1696, 1632, 1568, 1504], "payload": 1408, "surb": 368}


def test_frozen_x25519_table():
    profile = SizeProfile(128, 256, 5, 1024)
    rows = layer_sizes(profile)
    assert [r["header"] for r in rows] == X25519_L5["header"]
    assert [r["packet"] for r in rows] == X25519_L5["packet"]
    assert {r["payload"] for r in rows} == {X25519_L5["payload"]}
    assert profile.surb_len == X25519_L5["surb"]


def test_innermost_header_is_4k_plus_p():
    profile = SizeProfile(128, 256, 5, 1024)
    assert profile.header_bits(4) == 4 * 128 + 256


@pytest.mark.parametrize("k", [128, 256])
@pytest.mark.parametrize("p", [256, 8 * 1088, 8 * 1120])
@pytest.mark.parametrize("layers", [1, 2, 3, 5, 8])
def test_profile_matches_oracle(k, p, layers):
    profile = SizeProfile(k, p, layers, 1000)
    ref = oracles.size_bits(k, p, layers - 1, 8000)
    for j, row in enumerate(ref["rows"]):
        assert profile.header_bits(j) == row["header"]
        assert profile.packet_bits(j) == row["packet"]
        assert profile.payload_bits == row["payload"]
        assert profile.packet_closed_form_bits(j) == row["packet_closed_form"]
    assert profile.surb_bits == ref["surb"]


def test_outermost_packet_matches_layer_zero_row():
    # layer 0 row of the cost table: 10k + |m| + 2(l+1)p + 4lk
    k, p, l, m = 128, 256, 4, 8192
    assert SizeProfile(k, p, l + 1, m // 8).packet_bits(0) == 10 * k + m + 2 * (l + 1) * p + 4 * l * k


def test_closed_form_packet_row_only_holds_at_layer_zero():
    profile = SizeProfile(128, 256, 5, 1024)
    assert profile.packet_closed_form_bits(0) == profile.packet_bits(0)
    for j in range(1, 5):
        # header + payload shrinks by p + 2k per layer; the closed form by 2p + 2k
        assert profile.packet_bits(j - 1) - profile.packet_bits(j) == 256 + 256
        assert profile.packet_closed_form_bits(j - 1) - profile.packet_closed_form_bits(j) == 512 + 256


def test_surb_is_header_plus_payload_key():
    profile = SizeProfile(128, 256, 5, 0)
    assert profile.surb_bits == profile.header_bits(0) + profile.k


def test_profile_validation():
    with pytest.raises(ValueError):
        SizeProfile(127, 256, 5, 10)
    with pytest.raises(ValueError):
        SizeProfile(128, 256, 0, 10)
    with pytest.raises(ValueError):
        SizeProfile(128, 256, 3, 10).header_bits(3)


@given(
    st.sampled_from([TESTKEM, X25519]),
    st.sampled_from([128, 256]),
    st.integers(1, 6),
    st.integers(0, 300),
    st.integers(0, 2**32),
)
def test_measured_lengths_equal_formulas(suite, k, layers, msg_len, seed):
    rng = random.Random(seed)
    fmt = PacketFormat(suite, k=k, layers=layers, msg_len=msg_len)
    path = make_path(fmt, rng)
    rows = layer_sizes(fmt.profile)
    packets = packet_create_layers(fmt, path.route, rng.randbytes(msg_len), path.receiver(), rng=rng)
    for row, pkt in zip(rows, packets):
        assert len(pkt.header) == row["header"]
        assert len(pkt.header.aead_ct) == row["aead_ct"]
        assert len(pkt.payload) == row["payload"]
        assert len(pkt.to_bytes()) == row["packet"]


@pytest.mark.parametrize("suite", [MLKEM768, XWING], ids=lambda s: s.name)
def test_measured_lengths_post_quantum(suite):
    rng = random.Random(7)
    fmt = PacketFormat(suite, layers=5, msg_len=1024)
    path = make_path(fmt, rng)
    packets = packet_create_layers(fmt, path.route, bytes(1024), path.receiver(), rng=rng)
    assert [len(p.to_bytes()) for p in packets] == [r["packet"] for r in layer_sizes(fmt.profile)]
    me = RouteHop(path.ids[-1], path.pairs[-1].public)
    surb, _, _ = surb_create(fmt, path.route, me, rng)
    assert len(surb.to_bytes()) == fmt.surb_len
    assert len(surb_use(fmt, surb, bytes(1024)).to_bytes()) == fmt.profile.packet_len(0)


def test_reply_block_fits_surb_region(rng):
    fmt = PacketFormat(X25519, layers=3, msg_len=16)
    path = make_path(fmt, rng)
    surb, _, _ = surb_create(fmt, path.route, RouteHop(path.ids[-1], path.pairs[-1].public), rng)
    assert len(surb.to_bytes()) == fmt.surb_len
    assert terminal(fmt, rng).exit_gateway != terminal(fmt, rng).exit_gateway
