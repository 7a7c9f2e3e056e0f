"""
Certificates
Authorities attest node properties ("region=EU", "tee", "usage-tracking")
with HS256 tokens keyed by the authority's registered secret.
"""

import json
from typing import Dict, Iterable, List, Mapping, Optional, Protocol, Sequence

import structlog
from jose import JWTError, jwt
from pydantic import BaseModel, ConfigDict

from agora.errors import ConfigError, UnknownAuthority
from agora.models.assets import CertificateRequirement

logger = structlog.get_logger(__name__)

TOKEN_ALGORITHM = "HS256"


class Certificate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    authority: str
    property: str
    subject: str
    expires_at: int
    token: str

    def expired(self, now: int) -> bool:
        return self.expires_at <= now


class AuthorityRegistry:
    """Authority name -> verification key"""

    def __init__(self, keys: Optional[Mapping[str, str]] = None):
        self._keys: Dict[str, str] = dict(keys or {})

    @classmethod
    def load(cls, path: str) -> "AuthorityRegistry":
        try:
            with open(path, encoding="utf-8") as handle:
                document = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("authority_registry", str(exc)) from exc
        if not isinstance(document, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in document.items()
        ):
            raise ConfigError("authority_registry", "expected an object of name -> key strings")
        return cls(document)

    def register(self, name: str, key: str) -> None:
        self._keys[name] = key

    def key_for(self, name: str) -> str:
        if name not in self._keys:
            raise UnknownAuthority(name)
        return self._keys[name]

    def __contains__(self, name: object) -> bool:
        return name in self._keys

    def names(self) -> List[str]:
        return sorted(self._keys)


class Certified(Protocol):
    node_id: str
    certificates: Sequence[Certificate]


def issue_certificate(
    authority: str, key: str, subject: str, property: str, expires_at: int
) -> Certificate:
    claims = {"iss": authority, "sub": subject, "prop": property, "exp": expires_at}
    token = jwt.encode(claims, key, algorithm=TOKEN_ALGORITHM)
    return Certificate(
        authority=authority,
        property=property,
        subject=subject,
        expires_at=expires_at,
        token=token,
    )


def token_valid(certificate: Certificate, registry: AuthorityRegistry) -> bool:
    """Signature checks out and the claims restate the certificate fields."""
    key = registry.key_for(certificate.authority)
    try:
        claims = jwt.decode(
            certificate.token,
            key,
            algorithms=[TOKEN_ALGORITHM],
            options={"verify_exp": False, "verify_aud": False},
        )
    except JWTError:
        return False
    return (
        claims.get("iss") == certificate.authority
        and claims.get("sub") == certificate.subject
        and claims.get("prop") == certificate.property
        and claims.get("exp") == certificate.expires_at
    )


def satisfies(
    certificate: Certificate,
    requirement: CertificateRequirement,
    subject: str,
    now: int,
    registry: AuthorityRegistry,
) -> bool:
    if certificate.property != requirement.property or certificate.subject != subject:
        return False
    if certificate.authority not in requirement.trusted_authorities:
        return False
    if certificate.expired(now):
        return False
    return token_valid(certificate, registry)


def verify_certificates(
    node: Certified,
    requirements: Iterable[CertificateRequirement],
    now: int,
    registry: AuthorityRegistry,
) -> bool:
    """Every requirement met by an unexpired, trusted, verifying certificate on the node.

    Raises UnknownAuthority if a requirement trusts an unregistered authority.
    """
    for requirement in requirements:
        for authority in requirement.trusted_authorities:
            registry.key_for(authority)
        if not any(
            satisfies(c, requirement, node.node_id, now, registry) for c in node.certificates
        ):
            logger.debug(
                "certificate_missing",
                node=node.node_id,
                property=requirement.property,
                trusted=list(requirement.trusted_authorities),
            )
            return False
    return True
