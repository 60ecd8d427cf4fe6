"""Sealed call descriptors: AES-256-CBC, then HMAC-SHA-256 over iv||ciphertext.

Envelope layout, Base-64 (standard alphabet, padded, unwrapped)::

    cbc_iv (16) || ciphertext (16*k, k >= 1) || tag (32)

The tag is checked before anything is decrypted, so a wrong key or a
modified envelope fails deterministically with :class:`IntegrityFailure`.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import os
import random
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from cryptography.hazmat.primitives import padding
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import EntropyUnavailable, EnvelopeError, IntegrityFailure

KEY_SIZE = 32
BLOCK = 16
TAG_SIZE = 32
MIN_ENVELOPE = BLOCK + BLOCK + TAG_SIZE
_PADS = [bytes((n,)) * n for n in range(BLOCK + 1)]

RandomSource = Callable[[int], bytes]


def gen_nonce(n: int, source: Optional[RandomSource] = None) -> bytes:
    if n not in (16, 32):
        raise ValueError("nonce size must be 16 or 32 bytes")
    if source is not None:
        return source(n)
    try:
        return os.urandom(n)
    except NotImplementedError as exc:
        raise EntropyUnavailable(str(exc)) from exc


def seeded_source(seed: int) -> RandomSource:
    """Reproducible byte source for tests and ``--seed``; never for real releases."""
    return random.Random(seed).randbytes


@dataclass(frozen=True)
class SealedDescriptor:
    cbc_iv: bytes
    ciphertext: bytes
    tag: bytes

    def encode(self) -> str:
        return base64.b64encode(self.cbc_iv + self.ciphertext + self.tag).decode("ascii")

    @classmethod
    def decode(cls, text: str) -> "SealedDescriptor":
        raw = unpack(text)
        return cls(raw[:BLOCK], raw[BLOCK:-TAG_SIZE], raw[-TAG_SIZE:])


def unpack(text: str) -> bytes:
    """Base-64 decode an envelope and check its length; raises EnvelopeError."""
    try:
        raw = binascii.a2b_base64(text)
        # a2b skips stray characters; only the canonical encoding is accepted
        if binascii.b2a_base64(raw, newline=False) != text.encode("ascii"):
            raise ValueError("non-canonical encoding")
    except (binascii.Error, ValueError) as exc:
        raise EnvelopeError(f"bad Base-64 envelope: {exc}") from None
    if len(raw) < MIN_ENVELOPE or (len(raw) - BLOCK - TAG_SIZE) % BLOCK:
        raise EnvelopeError(f"envelope of {len(raw)} bytes has impossible length")
    return raw


def _check_key(key) -> bytes:
    key = bytes(key)
    if len(key) != KEY_SIZE:
        raise ValueError(f"key must be {KEY_SIZE} bytes, got {len(key)}")
    return key


def seal(key, plaintext: bytes, *, iv: Optional[bytes] = None, source: Optional[RandomSource] = None) -> SealedDescriptor:
    """Encrypt-then-MAC ``plaintext``.

    ``iv`` pins the CBC initialization vector (golden-value tests only);
    otherwise a fresh one is drawn from ``source`` or the OS.
    """
    key = _check_key(key)
    iv = gen_nonce(BLOCK, source) if iv is None else iv
    if len(iv) != BLOCK:
        raise ValueError("cbc iv must be 16 bytes")
    padder = padding.PKCS7(128).padder()
    padded = padder.update(plaintext) + padder.finalize()
    enc = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    ciphertext = enc.update(padded) + enc.finalize()
    tag = hmac.digest(key, iv + ciphertext, "sha256")
    return SealedDescriptor(iv, ciphertext, tag)


class Opener:
    """Authenticated decryption under one fixed key.

    Keeps one AES block context for the key and chains CBC by hand; building
    a fresh CBC cipher object per envelope costs more than the rest of the
    open combined. Safe to share between threads.
    """

    def __init__(self, key):
        self._key = _check_key(key)
        self._ecb = Cipher(algorithms.AES(self._key), modes.ECB()).decryptor()
        self._lock = threading.Lock()
        # HMAC with the pad hashes precomputed; keying HMAC per call is half its cost
        block = self._key.ljust(64, b"\0")
        self._inner = hashlib.sha256(bytes(b ^ 0x36 for b in block))
        self._outer = hashlib.sha256(bytes(b ^ 0x5C for b in block))

    def _mac(self, data: bytes) -> bytes:
        inner = self._inner.copy()
        inner.update(data)
        outer = self._outer.copy()
        outer.update(inner.digest())
        return outer.digest()

    def open(self, sealed) -> bytes:
        return self.open_raw(unpack(sealed) if isinstance(sealed, str) else _raw(sealed))

    def open_raw(self, raw: bytes) -> bytes:
        """Open an already Base-64-decoded, length-checked envelope."""
        body = raw[:-TAG_SIZE]
        inner = self._inner.copy()
        inner.update(body)
        outer = self._outer.copy()
        outer.update(inner.digest())
        if not hmac.compare_digest(outer.digest(), raw[-TAG_SIZE:]):
            raise IntegrityFailure("authentication tag mismatch")
        with self._lock:
            blocks = self._ecb.update(body[BLOCK:])
        padded = (int.from_bytes(blocks, "big") ^ int.from_bytes(body[:-BLOCK], "big")).to_bytes(len(blocks), "big")
        pad = padded[-1]
        if not 1 <= pad <= BLOCK or not padded.endswith(_PADS[pad]):
            raise IntegrityFailure("bad padding under an authentic tag")
        return padded[:-pad]

    def wipe(self) -> None:
        self._key = bytes(KEY_SIZE)
        self._ecb = self._inner = self._outer = None


def _raw(sealed: SealedDescriptor) -> bytes:
    if len(sealed.cbc_iv) != BLOCK or len(sealed.tag) != TAG_SIZE or not sealed.ciphertext or len(sealed.ciphertext) % BLOCK:
        raise EnvelopeError("malformed sealed descriptor")
    return sealed.cbc_iv + sealed.ciphertext + sealed.tag


def open(key, sealed) -> bytes:  # noqa: A001 - mirrors seal/open naming
    """Verify and decrypt ``sealed`` (a :class:`SealedDescriptor` or its Base-64 text)."""
    return Opener(key).open(sealed)
