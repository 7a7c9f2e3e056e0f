"""
Escrowed chunk transfer

The sender ships ciphertext straight to the receiver and deposits each
chunk's digest and key with the mediator. The receiver checks the
ciphertext against the digest, pays, and only then does the mediator
release the key. Digests cover the ciphertext so integrity is checkable
before the key is held.
"""

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from agora.errors import UnknownChunk
from agora.metering.settlement import PaymentStatus, PaymentTxn
from agora.models.money import Money

from .crypto import KEY_BYTES, NONCE_BYTES, AesGcmCipher, Cipher, digest

KeySource = Callable[[int], bytes]


class Role(str, Enum):
    SENDER = "sender"
    MEDIATOR = "mediator"
    RECEIVER = "receiver"


class MessageType(str, Enum):
    DEPOSIT = "deposit"  # sender -> mediator: manifest and key
    DEPOSIT_ACK = "deposit_ack"
    MANIFEST = "manifest"  # mediator -> receiver
    MANIFEST_ACK = "manifest_ack"
    CIPHERTEXT = "ciphertext"  # sender -> receiver
    CIPHERTEXT_ACK = "ciphertext_ack"
    PAYMENT_PROOF = "payment_proof"  # receiver -> mediator
    KEY = "key"  # mediator -> receiver
    DECRYPTED = "decrypted"  # receiver -> mediator
    ABORT = "abort"


class ChunkState(str, Enum):
    INIT = "Init"
    CIPHERTEXT_SENT = "CiphertextSent"
    MANIFEST_REGISTERED = "ManifestRegistered"
    INTEGRITY_VERIFIED = "IntegrityVerified"
    PAYMENT_ISSUED = "PaymentIssued"
    KEY_RELEASED = "KeyReleased"
    COMPLETED = "Completed"
    ABORTED = "Aborted"


class ChunkManifest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    session_id: str
    chunk_index: int = Field(ge=0)
    ciphertext_digest: str = Field(pattern=r"^[0-9a-f]{64}$")
    ciphertext_len: int = Field(ge=0)
    price: Money


@dataclass(frozen=True)
class Message:
    type: MessageType
    sender: Role
    recipient: Role
    session_id: str
    chunk: Optional[int] = None
    manifest: Optional[ChunkManifest] = None
    key: Optional[bytes] = None
    payload: Optional[bytes] = None
    txn: Optional[PaymentTxn] = None
    reason: Optional[str] = None

    @property
    def carries_data(self) -> bool:
        return self.payload is not None


@dataclass(frozen=True)
class PreparedTransfer:
    ciphertexts: Tuple[bytes, ...]
    manifests: Tuple[ChunkManifest, ...]
    keys: Tuple[bytes, ...]


def sender_prepare(
    data: bytes,
    chunk_bytes: int,
    price_per_chunk: Money,
    session_id: str = "session",
    cipher: Optional[Cipher] = None,
    key_source: KeySource = os.urandom,
) -> PreparedTransfer:
    """Split, encrypt each chunk under a fresh key and describe it."""
    if not data:
        raise ValueError("nothing to transfer")
    if chunk_bytes <= 0:
        raise ValueError("chunk_bytes must be positive")
    cipher = cipher or AesGcmCipher()
    ciphertexts, manifests, keys = [], [], []
    for index in range(math.ceil(len(data) / chunk_bytes)):
        plaintext = data[index * chunk_bytes : (index + 1) * chunk_bytes]
        key = key_source(KEY_BYTES)
        blob = cipher.encrypt(key, key_source(NONCE_BYTES), plaintext)
        ciphertexts.append(blob)
        keys.append(key)
        manifests.append(
            ChunkManifest(
                session_id=session_id,
                chunk_index=index,
                ciphertext_digest=digest(blob),
                ciphertext_len=len(blob),
                price=price_per_chunk,
            )
        )
    return PreparedTransfer(tuple(ciphertexts), tuple(manifests), tuple(keys))


class VerifyOutcome(str, Enum):
    VERIFIED = "verified"
    DIGEST_MISMATCH = "digest_mismatch"


def receiver_verify_chunk(ciphertext: bytes, manifest: ChunkManifest) -> VerifyOutcome:
    if len(ciphertext) != manifest.ciphertext_len:
        return VerifyOutcome.DIGEST_MISMATCH
    if digest(ciphertext) != manifest.ciphertext_digest:
        return VerifyOutcome.DIGEST_MISMATCH
    return VerifyOutcome.VERIFIED


@dataclass(frozen=True)
class KeyRelease:
    chunk_index: int
    key: bytes
    resent: bool = False


@dataclass(frozen=True)
class Refusal:
    chunk_index: int
    reason: str


@dataclass
class MediatorState:
    """Escrowed digests and keys; keys never leave except through release_key."""

    session_id: str
    manifests: Dict[int, ChunkManifest] = field(default_factory=dict)
    keys: Dict[int, bytes] = field(default_factory=dict)
    released: Dict[int, PaymentTxn] = field(default_factory=dict)

    def register(self, manifest: ChunkManifest, key: bytes) -> bool:
        """False when the chunk was already registered."""
        if manifest.chunk_index in self.manifests:
            return False
        self.manifests[manifest.chunk_index] = manifest
        self.keys[manifest.chunk_index] = key
        return True

    def indices(self) -> List[int]:
        return sorted(self.manifests)


def release_key(
    state: MediatorState, chunk_index: int, payment: PaymentTxn
) -> Union[KeyRelease, Refusal]:
    """Key iff the payment is Confirmed for exactly the manifest price.

    A chunk whose key was released answers re-requests with the same key.
    Raises UnknownChunk when no manifest is registered.
    """
    manifest = state.manifests.get(chunk_index)
    if manifest is None:
        raise UnknownChunk(chunk_index)
    if chunk_index in state.released:
        return KeyRelease(chunk_index, state.keys[chunk_index], resent=True)
    if payment.status != PaymentStatus.CONFIRMED:
        return Refusal(chunk_index, f"payment {payment.status.value}")
    if payment.amount != manifest.price:
        return Refusal(chunk_index, f"paid {payment.amount}, price {manifest.price}")
    state.released[chunk_index] = payment
    return KeyRelease(chunk_index, state.keys[chunk_index])
