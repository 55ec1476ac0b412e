"""Server attestation documents: parsing, canonical serialization, Ed25519 signing.

A server attestation document (SAD) is a small JSON object through which a
publisher asserts an MCP server's identity and clearance level. Signatures
are computed over a canonical body so that byte-level formatting of the
document at rest never affects verification.

Canonical form rules:

* the body covers exactly the registered fields minus ``signature``;
* an absent ``signerKeyId`` is serialized as JSON ``null``, while absent
  ``verification`` / ``netAllowedHosts`` are omitted entirely;
* object keys and array members are sorted bytewise over their UTF-8
  serialization;
* no whitespace, minimal string escaping, integers in shortest decimal form.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

__all__ = [
    "DOCUMENT_VERSION",
    "MCP_SERVER_CAPABILITY",
    "AttestationDocument",
    "DocumentError",
    "KeyPair",
    "UnsupportedVersionError",
    "canonical_body",
    "canonical_json_bytes",
    "generate_keypair",
    "keypair_from_seed",
    "parse_document",
    "serialize_document",
    "sign_document",
    "verify_signature",
]

DOCUMENT_VERSION = 1

# Capability string that marks a manifest as an MCP server assertion.
MCP_SERVER_CAPABILITY = "mcp-server"

# Wire field names in at-rest serialization order. The canonical body covers
# every registered field except "signature".
WIRE_FIELDS = (
    "v",
    "id",
    "publisher",
    "version",
    "clearance",
    "capabilities",
    "signerKeyId",
    "netAllowedHosts",
    "verification",
    "signature",
)


class DocumentError(ValueError):
    """A document failed structural validation."""


class UnsupportedVersionError(DocumentError):
    """A document declares a format version this verifier does not understand."""


@dataclass(frozen=True)
class AttestationDocument:
    """Parsed SAD. Unknown wire fields are retained in ``extra`` but are never
    part of the canonical body."""

    id: str
    publisher: str
    version: str
    clearance: str
    capabilities: tuple[str, ...]
    signer_key_id: str | None = None
    net_allowed_hosts: tuple[str, ...] | None = None
    verification: str | None = None
    signature: str | None = None
    v: int = DOCUMENT_VERSION
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "capabilities", tuple(self.capabilities))
        if self.net_allowed_hosts is not None:
            object.__setattr__(self, "net_allowed_hosts", tuple(self.net_allowed_hosts))

    @property
    def attested(self) -> bool:
        """True when both signer key id and signature are present."""
        return self.signer_key_id is not None and self.signature is not None


@dataclass(frozen=True)
class KeyPair:
    """Ed25519 keypair. ``private_key`` is the 32-byte seed; it is absent on
    verify-only keys."""

    key_id: str
    public_key: bytes
    private_key: bytes | None = None

    def __post_init__(self) -> None:
        if not self.key_id:
            raise ValueError("key_id must be non-empty")
        if len(self.public_key) != 32:
            raise ValueError("public key must be 32 bytes")
        if self.private_key is not None and len(self.private_key) != 32:
            raise ValueError("private key seed must be 32 bytes")


def generate_keypair(key_id: str) -> KeyPair:
    private = Ed25519PrivateKey.generate()
    return KeyPair(
        key_id=key_id,
        public_key=private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw),
        private_key=private.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption()),
    )


def keypair_from_seed(key_id: str, seed: bytes) -> KeyPair:
    """Deterministic keypair from a 32-byte seed. Used by seeded corpora."""
    private = Ed25519PrivateKey.from_private_bytes(seed)
    return KeyPair(
        key_id=key_id,
        public_key=private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw),
        private_key=seed,
    )


def canonical_json_bytes(value: Any) -> bytes:
    """Deterministic JSON encoding of ``value`` as UTF-8 bytes.

    Object keys and array members are ordered bytewise over their UTF-8
    serialization, output carries no whitespace, and strings use only the
    escapes JSON mandates. Only ``None``, ``bool``, ``int``, ``str``, lists
    and string-keyed mappings are encodable; anything else raises TypeError.
    """
    return _canon(value).encode("utf-8")


def _canon(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        # json.dumps escapes exactly the mandatory set: quote, backslash,
        # and control characters below U+0020.
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        members = sorted((_canon(m) for m in value), key=lambda s: s.encode("utf-8"))
        return "[" + ",".join(members) + "]"
    if isinstance(value, Mapping):
        for key in value:
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {type(key).__name__}")
        items = sorted(value.items(), key=lambda kv: kv[0].encode("utf-8"))
        return "{" + ",".join(f"{_canon(k)}:{_canon(v)}" for k, v in items) + "}"
    raise TypeError(f"not canonicalizable: {type(value).__name__}")


def canonical_body(doc: AttestationDocument) -> bytes:
    """Signing-input bytes for ``doc``. Identical for a document with and
    without its signature attached."""
    body: dict[str, Any] = {
        "v": doc.v,
        "id": doc.id,
        "publisher": doc.publisher,
        "version": doc.version,
        "clearance": doc.clearance,
        "capabilities": list(doc.capabilities),
        "signerKeyId": doc.signer_key_id,
    }
    if doc.net_allowed_hosts is not None:
        body["netAllowedHosts"] = list(doc.net_allowed_hosts)
    if doc.verification is not None:
        body["verification"] = doc.verification
    return canonical_json_bytes(body)


def sign_document(doc: AttestationDocument, key: KeyPair) -> AttestationDocument:
    """Return ``doc`` with ``signer_key_id`` set to the key's id and a fresh
    detached Ed25519 signature over the canonical body."""
    if key.private_key is None:
        raise ValueError(f"key {key.key_id!r} has no private part")
    unsigned = replace(doc, signer_key_id=key.key_id, signature=None)
    signer = Ed25519PrivateKey.from_private_bytes(key.private_key)
    signature = signer.sign(canonical_body(unsigned))
    return replace(unsigned, signature=base64.b64encode(signature).decode("ascii"))


def verify_signature(doc: AttestationDocument, public_key: bytes) -> bool:
    """True iff ``doc.signature`` is a valid Ed25519 signature by
    ``public_key`` over the canonical body. Malformed input returns False,
    never raises."""
    if doc.signature is None:
        return False
    try:
        raw = base64.b64decode(doc.signature, validate=True)
    except (binascii.Error, ValueError):
        return False
    if len(raw) != 64:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(raw, canonical_body(doc))
    except (InvalidSignature, ValueError):
        return False
    return True


def _require_string(data: Mapping[str, Any], name: str) -> str:
    value = data.get(name)
    if not isinstance(value, str) or not value:
        raise DocumentError(f"field {name!r} must be a non-empty string")
    return value


def _optional_string(data: Mapping[str, Any], name: str, *, allow_empty: bool = False) -> str | None:
    if name not in data or data[name] is None:
        return None
    value = data[name]
    if not isinstance(value, str) or (not value and not allow_empty):
        raise DocumentError(f"field {name!r} must be a non-empty string when present")
    return value


def _string_array(data: Mapping[str, Any], name: str) -> tuple[str, ...]:
    value = data[name]
    if not isinstance(value, list) or any(not isinstance(m, str) for m in value):
        raise DocumentError(f"field {name!r} must be an array of strings")
    return tuple(value)


def parse_document(raw: bytes | str) -> AttestationDocument:
    """Parse and structurally validate a SAD.

    Unknown fields are ignored for validation and retained on the result.
    A ``null`` signerKeyId or signature counts as absent. Raises
    DocumentError on malformed input and UnsupportedVersionError when
    ``v`` is an integer other than 1.
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError(f"document is not valid UTF-8: {exc}") from exc
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise DocumentError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")

    version = data.get("v")
    if isinstance(version, bool) or not isinstance(version, int):
        raise DocumentError("field 'v' must be an integer")
    if version != DOCUMENT_VERSION:
        raise UnsupportedVersionError(f"unsupported document version {version}")

    if "capabilities" not in data:
        raise DocumentError("field 'capabilities' must be an array of strings")
    capabilities = _string_array(data, "capabilities")
    net_allowed_hosts: tuple[str, ...] | None = None
    if "netAllowedHosts" in data:
        net_allowed_hosts = _string_array(data, "netAllowedHosts")

    return AttestationDocument(
        id=_require_string(data, "id"),
        publisher=_require_string(data, "publisher"),
        version=_require_string(data, "version"),
        clearance=_require_string(data, "clearance"),
        capabilities=capabilities,
        signer_key_id=_optional_string(data, "signerKeyId"),
        net_allowed_hosts=net_allowed_hosts,
        verification=_optional_string(data, "verification"),
        signature=_optional_string(data, "signature", allow_empty=True),
        v=version,
        extra={k: v for k, v in data.items() if k not in WIRE_FIELDS},
    )


def serialize_document(doc: AttestationDocument, *, indent: int | None = 2) -> str:
    """At-rest JSON for ``doc``: registered fields in a fixed order, absent
    optionals omitted, retained unknown fields appended."""
    data: dict[str, Any] = {
        "v": doc.v,
        "id": doc.id,
        "publisher": doc.publisher,
        "version": doc.version,
        "clearance": doc.clearance,
        "capabilities": list(doc.capabilities),
    }
    if doc.signer_key_id is not None:
        data["signerKeyId"] = doc.signer_key_id
    if doc.net_allowed_hosts is not None:
        data["netAllowedHosts"] = list(doc.net_allowed_hosts)
    if doc.verification is not None:
        data["verification"] = doc.verification
    if doc.signature is not None:
        data["signature"] = doc.signature
    for key, value in doc.extra.items():
        data.setdefault(key, value)
    return json.dumps(data, indent=indent, ensure_ascii=False)
