"""Key directory with public and privacy-preserving retrieval.

Nodes and gateways register ``Public`` records; any party may retrieve them
and the audit log records both requester and target. Users register
``Private`` records; retrieving one records only the requester, so the
audit log never learns whose key was fetched.

The audit log is the leakage model: it is exactly what an observer of the
directory learns about retrievals. Registration leakage (who registered) is
kept in a separate ``registrations`` log.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass
from typing import Iterable

from outfox.crypto.kem import KemSuite, get_suite
from outfox.errors import DirectoryError


class Privacy(enum.Enum):
    PUBLIC = "public"
    PRIVATE = "private"


@dataclass(frozen=True)
class DirectoryRecord:
    party: bytes
    suite: KemSuite
    public_key: bytes
    privacy: Privacy


class Directory:
    def __init__(self, authorized: Iterable[bytes] | None = None):
        # parties allowed to make Public registrations; None means anyone
        self._authorized = None if authorized is None else frozenset(authorized)
        self._records: dict[bytes, DirectoryRecord] = {}
        self._lock = threading.Lock()
        self.audit: list[dict] = []
        self.registrations: list[dict] = []

    def register(self, party: bytes, suite: KemSuite, public_key: bytes, privacy: Privacy = Privacy.PUBLIC) -> None:
        privacy = Privacy(privacy)
        with self._lock:
            if party in self._records:
                raise DirectoryError(f"party {party.hex()} already registered")
            if privacy is Privacy.PUBLIC and self._authorized is not None and party not in self._authorized:
                raise DirectoryError(f"party {party.hex()} may not register public keys")
            self._records[party] = DirectoryRecord(party, get_suite(suite), bytes(public_key), privacy)
            self.registrations.append({"op": "register", "party": party.hex(), "privacy": privacy.value})

    def retrieve(self, requester: bytes, target: bytes, privacy: Privacy = Privacy.PUBLIC) -> bytes | None:
        """Return the registered key of ``target`` or ``None``.

        ``privacy`` selects the retrieval interface; a Private retrieval only
        sees Private records and leaks nothing about ``target``.
        """
        privacy = Privacy(privacy)
        with self._lock:
            record = self._records.get(target)
            if privacy is Privacy.PRIVATE:
                self.audit.append({"op": "retrieve", "requester": requester.hex()})
            else:
                self.audit.append({"op": "retrieve", "requester": requester.hex(), "target": target.hex()})
        if record is None or record.privacy is not privacy:
            return None
        return record.public_key

    def __contains__(self, party: bytes) -> bool:
        return party in self._records

    def __len__(self) -> int:
        return len(self._records)

    def export_json(self) -> str:
        return json.dumps(
            [
                {
                    "party_hex": r.party.hex(),
                    "suite": r.suite.name,
                    "pk_hex": r.public_key.hex(),
                    "privacy": r.privacy.value,
                }
                for r in self._records.values()
            ],
            indent=2,
        )

    @classmethod
    def import_json(cls, text: str, authorized: Iterable[bytes] | None = None) -> "Directory":
        directory = cls(authorized)
        for entry in json.loads(text):
            directory.register(
                bytes.fromhex(entry["party_hex"]),
                get_suite(entry["suite"]),
                bytes.fromhex(entry["pk_hex"]),
                Privacy(entry["privacy"]),
            )
        return directory
