"""Signer registry with a one-way lock.

The trust root maps signer key ids to Ed25519 public keys, an explicit list
of clearance names each signer may vouch for, and an optional validity
deadline. Once locked, the root can never be replaced again in-process; this
is the mechanism that stops runtime trust widening.
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable

from .lattice import ClassificationScheme
from .sad import KeyPair, generate_keypair

__all__ = [
    "SignerRecord",
    "TrustRoot",
    "TrustRootError",
    "TrustRootLockedError",
    "dev_bundle",
    "load_trust_root_file",
    "parse_rfc3339",
    "serialize_trust_root",
]


class TrustRootError(ValueError):
    """A trust root file or record is malformed."""


class TrustRootLockedError(RuntimeError):
    """Attempt to replace a locked trust root."""


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp. Naive values are taken as UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError as exc:
        raise TrustRootError(f"invalid RFC 3339 timestamp {value!r}") from exc
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


@dataclass(frozen=True)
class SignerRecord:
    """One trusted signer: key material plus the clearance names it may
    assert. ``not_after`` of None means no expiry."""

    key_id: str
    public_key: bytes
    approved_clearance: tuple[str, ...]
    not_after: datetime | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "approved_clearance", tuple(self.approved_clearance))
        if not self.key_id:
            raise TrustRootError("signer key_id must be non-empty")
        if len(self.public_key) != 32:
            raise TrustRootError(
                f"signer {self.key_id!r}: public key must be 32 bytes, got {len(self.public_key)}"
            )

    def approves(self, scheme: ClassificationScheme, clearance: str) -> bool:
        """Membership test: does ``clearance`` resolve to the same rank as any
        listed approved name? Alias and case differences are tolerated;
        unresolvable names never match."""
        rank = scheme.resolve(clearance)
        if rank is None:
            return False
        return any(scheme.resolve(name) == rank for name in self.approved_clearance)


class TrustRoot:
    """In-process signer set. Reads are lock-free; replacement and locking are
    serialized, and locking is one-way."""

    def __init__(self, signers: Iterable[SignerRecord] = ()) -> None:
        self._mutex = threading.Lock()
        self._signers: dict[str, SignerRecord] = {}
        self._locked = False
        signers = tuple(signers)
        if signers:
            self.set_trust_root(signers)

    @property
    def locked(self) -> bool:
        return self._locked

    def set_trust_root(self, signers: Iterable[SignerRecord]) -> None:
        """Replace the signer set atomically. Raises TrustRootLockedError once
        the root is locked, leaving the existing set in force."""
        records = tuple(signers)
        table: dict[str, SignerRecord] = {}
        for record in records:
            if record.key_id in table:
                raise TrustRootError(f"duplicate signer key id {record.key_id!r}")
            table[record.key_id] = record
        with self._mutex:
            if self._locked:
                raise TrustRootLockedError("trust root is locked; replacement refused")
            self._signers = table

    def lock_trust_root(self) -> None:
        """One-way lock. Idempotent."""
        with self._mutex:
            self._locked = True

    def find(self, key_id: str) -> SignerRecord | None:
        """Exact, case-sensitive signer lookup."""
        return self._signers.get(key_id)

    def key_ids(self) -> tuple[str, ...]:
        return tuple(self._signers)

    def __len__(self) -> int:
        return len(self._signers)


def load_trust_root_file(raw: bytes | str) -> list[SignerRecord]:
    """Parse the trust root file format:
    ``{"signers": [{"keyId", "publicKey", "approvedClearance", "notAfter"?}]}``
    with base64 public keys. Raises TrustRootError on any malformation,
    including wrong key length or duplicate key ids."""
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise TrustRootError(f"trust root file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("signers"), list):
        raise TrustRootError("trust root file must be an object with a 'signers' array")
    records: list[SignerRecord] = []
    seen: set[str] = set()
    for entry in data["signers"]:
        if not isinstance(entry, dict):
            raise TrustRootError("each signer must be a JSON object")
        key_id = entry.get("keyId")
        if not isinstance(key_id, str) or not key_id:
            raise TrustRootError("signer 'keyId' must be a non-empty string")
        if key_id in seen:
            raise TrustRootError(f"duplicate signer key id {key_id!r}")
        seen.add(key_id)
        encoded = entry.get("publicKey")
        if not isinstance(encoded, str):
            raise TrustRootError(f"signer {key_id!r}: 'publicKey' must be a base64 string")
        try:
            public_key = base64.b64decode(encoded, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise TrustRootError(f"signer {key_id!r}: invalid base64 public key") from exc
        approved = entry.get("approvedClearance")
        if not isinstance(approved, list) or not approved or any(
            not isinstance(name, str) or not name for name in approved
        ):
            raise TrustRootError(
                f"signer {key_id!r}: 'approvedClearance' must be a non-empty array of strings"
            )
        not_after = None
        if entry.get("notAfter") is not None:
            raw_deadline = entry["notAfter"]
            if not isinstance(raw_deadline, str):
                raise TrustRootError(f"signer {key_id!r}: 'notAfter' must be an RFC 3339 string")
            not_after = parse_rfc3339(raw_deadline)
        records.append(
            SignerRecord(
                key_id=key_id,
                public_key=public_key,
                approved_clearance=tuple(approved),
                not_after=not_after,
            )
        )
    return records


def serialize_trust_root(signers: Iterable[SignerRecord], *, indent: int | None = 2) -> str:
    data = {
        "signers": [
            {
                "keyId": record.key_id,
                "publicKey": base64.b64encode(record.public_key).decode("ascii"),
                "approvedClearance": list(record.approved_clearance),
                **(
                    {"notAfter": record.not_after.isoformat().replace("+00:00", "Z")}
                    if record.not_after is not None
                    else {}
                ),
            }
            for record in signers
        ]
    }
    return json.dumps(data, indent=indent, ensure_ascii=False)


def dev_bundle() -> tuple[list[SignerRecord], dict[str, KeyPair]]:
    """Three freshly generated development signers: community and bundled
    extension signers approved only through INTERNAL, and a high-tier signer
    approved through RESTRICTED-PLUS. Never ship these to production."""
    plans = (
        ("dev-community-signer", ("PUBLIC", "INTERNAL")),
        ("dev-bundled-extension-signer", ("PUBLIC", "INTERNAL")),
        ("dev-high-tier-signer", ("PUBLIC", "INTERNAL", "CONFIDENTIAL", "RESTRICTED", "RESTRICTED-PLUS")),
    )
    records: list[SignerRecord] = []
    keys: dict[str, KeyPair] = {}
    for key_id, approved in plans:
        pair = generate_keypair(key_id)
        keys[key_id] = pair
        records.append(
            SignerRecord(key_id=key_id, public_key=pair.public_key, approved_clearance=approved)
        )
    return records, keys
