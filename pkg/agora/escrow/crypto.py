"""
Cipher and digest contracts
Reference profile: AES-256-GCM with a 96-bit nonce prefixed to the
ciphertext, SHA-256 digests.
"""

import hashlib
from abc import ABC, abstractmethod

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from agora.errors import DecryptionFailed

KEY_BYTES = 32
NONCE_BYTES = 12


class Cipher(ABC):
    """Authenticated symmetric encryption under a per-chunk key."""

    @abstractmethod
    def encrypt(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        ...

    @abstractmethod
    def decrypt(self, key: bytes, blob: bytes, chunk_index: int = -1) -> bytes:
        """Raises DecryptionFailed when the blob does not authenticate."""


class AesGcmCipher(Cipher):
    def encrypt(self, key: bytes, nonce: bytes, plaintext: bytes) -> bytes:
        return nonce + AESGCM(key).encrypt(nonce, plaintext, None)

    def decrypt(self, key: bytes, blob: bytes, chunk_index: int = -1) -> bytes:
        nonce, body = blob[:NONCE_BYTES], blob[NONCE_BYTES:]
        try:
            return AESGCM(key).decrypt(nonce, body, None)
        except (InvalidTag, ValueError) as exc:
            raise DecryptionFailed(chunk_index) from exc


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
