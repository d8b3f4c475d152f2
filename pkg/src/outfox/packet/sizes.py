"""Size calculus for headers, payloads, SURBs and whole packets.

All formulas are in bits with ``l = layers - 1``; layer ``j`` counts from
0 (outermost) to ``l`` (innermost), so the table row "layer l-i" is
``j = l - i``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SizeProfile:
    k: int          # security parameter, bits
    p: int          # KEM ciphertext length, bits
    layers: int     # L = l + 1
    msg_len: int    # fixed message length, bytes

    def __post_init__(self):
        if self.k % 8 or self.p % 8:
            raise ValueError("k and p must be whole bytes")
        if self.layers < 1:
            raise ValueError("at least one layer is required")
        if self.msg_len < 0:
            raise ValueError("msg_len must be non-negative")

    @property
    def l(self) -> int:  # noqa: E743
        return self.layers - 1

    def _depth(self, layer: int) -> int:
        if not 0 <= layer <= self.l:
            raise ValueError(f"layer {layer} outside 0..{self.l}")
        return self.l - layer

    # -- bit lengths -------------------------------------------------------

    def aead_ct_bits(self, layer: int) -> int:
        i = self._depth(layer)
        return 3 * self.k + i * self.p + 2 * i * self.k

    def header_bits(self, layer: int) -> int:
        i = self._depth(layer)
        return 4 * self.k + (i + 1) * self.p + 2 * i * self.k

    @property
    def surb_bits(self) -> int:
        return 5 * self.k + (self.l + 1) * self.p + 2 * self.l * self.k

    @property
    def payload_bits(self) -> int:
        return 6 * self.k + 8 * self.msg_len + (self.l + 1) * self.p + 2 * self.l * self.k

    def packet_bits(self, layer: int) -> int:
        return self.header_bits(layer) + self.payload_bits

    def packet_closed_form_bits(self, layer: int) -> int:
        """``10k + |m| + 2(i+1)p + 2(i+l)k``; agrees with :meth:`packet_bits` only at layer 0."""
        i = self._depth(layer)
        return 10 * self.k + 8 * self.msg_len + 2 * (i + 1) * self.p + 2 * (i + self.l) * self.k

    # -- byte lengths ------------------------------------------------------

    def aead_ct_len(self, layer: int) -> int:
        return self.aead_ct_bits(layer) // 8

    def header_len(self, layer: int) -> int:
        return self.header_bits(layer) // 8

    @property
    def surb_len(self) -> int:
        return self.surb_bits // 8

    @property
    def payload_len(self) -> int:
        return self.payload_bits // 8

    def packet_len(self, layer: int) -> int:
        return self.packet_bits(layer) // 8


def layer_sizes(profile: SizeProfile) -> list[dict]:
    """Per-layer byte lengths, outermost first."""
    return [
        {
            "layer": j,
            "kem_ct": profile.p // 8,
            "aead_ct": profile.aead_ct_len(j),
            "tag": profile.k // 8,
            "header": profile.header_len(j),
            "payload": profile.payload_len,
            "packet": profile.packet_len(j),
        }
        for j in range(profile.layers)
    ]
