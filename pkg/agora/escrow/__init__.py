"""
Escrowed data transfer between a sender and a receiver through a mediator
that holds keys, never data
"""

from .crypto import AesGcmCipher, Cipher, digest
from .protocol import (
    ChunkManifest,
    ChunkState,
    KeyRelease,
    MediatorState,
    Message,
    MessageType,
    PreparedTransfer,
    Refusal,
    Role,
    VerifyOutcome,
    receiver_verify_chunk,
    release_key,
    sender_prepare,
)
from .session import SimNetConfig, SimNetwork, Transcript, TranscriptRecord, run_session

__all__ = [
    "AesGcmCipher",
    "ChunkManifest",
    "ChunkState",
    "Cipher",
    "KeyRelease",
    "MediatorState",
    "Message",
    "MessageType",
    "PreparedTransfer",
    "Refusal",
    "Role",
    "SimNetConfig",
    "SimNetwork",
    "Transcript",
    "TranscriptRecord",
    "VerifyOutcome",
    "digest",
    "receiver_verify_chunk",
    "release_key",
    "run_session",
    "sender_prepare",
]
