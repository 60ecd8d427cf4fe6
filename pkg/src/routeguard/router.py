"""Run-time router: integrity check at start-up, then decrypt-and-dispatch per call."""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Optional

from .canon import canonicalize, plain_hash
from .closedhash import ZERO, KeyNonce, closed_hashes, derive_key
from .cryptobox import Opener, unpack
from .depgraph import DependencyGraph
from .errors import (
    CycleError,
    ConfigError,
    DescriptorError,
    EnvelopeError,
    IntegrityFailure,
    LexError,
    MinilangRuntimeError,
    TamperDetected,
)
from .protector import RouterConfig
from .rewriter import decode_descriptor

TAMPER_EXIT_STATUS = 13


class TamperKind(enum.Enum):
    DECRYPTION_FAILURE = "DecryptionFailure"
    HASH_MISMATCH = "HashMismatch"


@dataclass(frozen=True)
class TamperReport:
    kind: TamperKind
    file_id: str
    detail: str = ""


class ResponseStrategy(enum.Enum):
    TERMINATE = "terminate"
    REPORT_ONLY = "report-only"  # test harnesses only


@dataclass(frozen=True)
class ExitDirective:
    message: str
    stop: bool


def tamper_message(report: TamperReport) -> str:
    return f"PLAGIARISM ATTEMPT DETECTED: {report.kind.value} in {report.file_id}"


def respond(strategy: ResponseStrategy, report: TamperReport) -> ExitDirective:
    return ExitDirective(tamper_message(report), strategy is ResponseStrategy.TERMINATE)


class DispatchCache:
    """Memo of resolved targets: ``(file, method, arity) -> FunctionDef``.

    Alongside it, decoded descriptors are memoized by their plaintext so a
    repeated call skips parsing too. Reads are lock-free; inserts and the
    counters are serialized.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.handles: dict = {}
        self.descriptors: dict = {}
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def store(self, table: dict, key, value) -> None:
        with self._lock:
            table.setdefault(key, value)

    def clear(self) -> None:
        with self._lock:
            self.handles.clear()
            self.descriptors.clear()
            self.hits = self.misses = 0


class RouterState:
    """Ready router. Build with :func:`init`."""

    def __init__(self, config: RouterConfig, runtime: dict, keys: dict, *,
                 response: ResponseStrategy, cache: bool):
        self.config = config
        self.runtime_closed_hashes = runtime
        self._keys = keys
        self._openers = {f: Opener(k) for f, k in sorted(keys.items())}
        self._caller_ok = {f: runtime.get(f) == h for f, h in config.closed_hashes.items()}
        self.cache = DispatchCache(cache)
        self.response = response
        self.reports: list[TamperReport] = []
        self._directive: Optional[ExitDirective] = None
        self._tamper_lock = threading.Lock()

    @property
    def derived_keys(self) -> dict:
        return self._keys

    # -- tamper path ---------------------------------------------------
    def tamper(self, report: TamperReport) -> ExitDirective:
        """Apply the response strategy; raises TamperDetected when it says stop."""
        with self._tamper_lock:
            if self._directive is not None:
                raise TamperDetected(self.reports[0], self._directive.message)
            directive = respond(self.response, report)
            self.reports.append(report)
            if directive.stop:
                self._directive = directive
                self.wipe()
        if directive.stop:
            raise TamperDetected(report, directive.message)
        return directive

    def wipe(self) -> None:
        for opener in self._openers.values():
            opener.wipe()
        for key in self._keys.values():
            key[:] = bytes(len(key))
        self._openers = {}
        self._keys = {}
        self.cache.clear()

    # -- dispatch ------------------------------------------------------
    def forward_call(self, envelope: str, args, hint: Optional[str] = None, *, caller: str, target):
        """Verify the caller, open the sealed descriptor, and invoke its target.

        ``target`` is the interpreter: it provides ``registry`` and
        ``call_function``. Returns whatever the target function returns.
        """
        if not self._caller_ok.get(caller, False):
            self.tamper(TamperReport(TamperKind.HASH_MISMATCH, caller, "caller closed hash differs"))

        callee, plaintext = self._open(envelope, hint, caller)
        cache = self.cache
        if cache.enabled:
            decoded = cache.descriptors.get(plaintext)
            if decoded is None:
                decoded = self._decode(target.registry, plaintext, caller)
                cache.store(cache.descriptors, plaintext, decoded)
        else:
            decoded = self._decode(target.registry, plaintext, caller)
        file_id, method, literals = decoded
        if file_id != callee:
            self._fail(caller, f"descriptor for {file_id} sealed under the key of {callee}")
        full = literals + list(args) if literals else args

        key = (file_id, method, len(full))
        fdef = cache.handles.get(key) if cache.enabled else None
        if fdef is None:
            fdef = target.registry.lookup(file_id, method, len(full))
            if fdef is None:
                self._fail(caller, f"no function {file_id}.{method}/{len(full)}")
            if cache.enabled:
                with cache._lock:
                    cache.misses += 1
                    cache.handles.setdefault(key, fdef)
        else:
            with cache._lock:
                cache.hits += 1
        return target.call_function(fdef, full)

    def _decode(self, registry, plaintext: bytes, caller: str) -> tuple:
        try:
            d = decode_descriptor(plaintext.decode("utf-8"))
            literals = d.literal_values()
        except (DescriptorError, UnicodeDecodeError) as exc:
            self._fail(caller, f"undecodable descriptor: {exc}")
        file_id = registry.module(d.dst_file)
        if file_id is None:
            self._fail(caller, f"descriptor names unknown module {d.dst_file}")
        return (file_id, d.method, literals)

    def _open(self, envelope: str, hint, caller: str) -> tuple[str, bytes]:
        try:
            raw = unpack(envelope)
        except EnvelopeError as exc:
            self._fail(caller, str(exc))
        if hint is None:
            for callee, opener in self._openers.items():
                try:
                    return callee, opener.open_raw(raw)
                except IntegrityFailure:
                    pass
        else:
            opener = self._openers.get(hint)
            if opener is not None:
                try:
                    return hint, opener.open_raw(raw)
                except IntegrityFailure:
                    pass
        self._fail(caller, "envelope opens under no derived key")

    def _fail(self, caller: str, detail: str):
        self.tamper(TamperReport(TamperKind.DECRYPTION_FAILURE, caller, detail))
        # only reached under REPORT_ONLY: nothing sensible to dispatch to
        raise MinilangRuntimeError(f"forward_call from {caller} cannot proceed: {detail}")


def init(
    config: RouterConfig,
    deployed,
    *,
    response: ResponseStrategy = ResponseStrategy.TERMINATE,
    cache: bool = True,
) -> RouterState:
    """Hash the deployed sources, compare with the config, derive keys.

    Raises :class:`TamperDetected` on the first mismatching file in
    topological order (dependencies first) unless ``response`` is
    REPORT_ONLY, in which case every mismatch is recorded on the state.
    """
    by_id = {sf.file_id: sf for sf in deployed}
    plain = {}
    for file_id in config.files:
        sf = by_id.get(file_id)
        try:
            plain[file_id] = plain_hash(canonicalize(sf)) if sf is not None else ZERO
        except LexError:
            plain[file_id] = ZERO

    dag = DependencyGraph(frozenset(config.files), config.deps, config.removed)
    try:
        table = closed_hashes(dag, plain)
    except CycleError as exc:
        raise ConfigError(f"dependency arcs are cyclic: {exc}") from None

    mismatches = [
        TamperReport(TamperKind.HASH_MISMATCH, f, "missing" if f not in by_id else "closed hash differs")
        for f in table.closed  # insertion order is topological
        if table.closed[f] != config.closed_hashes[f]
    ]
    if mismatches and response is ResponseStrategy.TERMINATE:
        # fail before any key is derived from tampered sources
        raise TamperDetected(mismatches[0], tamper_message(mismatches[0]))

    callers: dict[str, set] = {}
    for a, b in dag.all_arcs:
        callers.setdefault(b, set()).add(a)
    if set(callers) != set(config.nonces):
        raise ConfigError("key nonces do not match the set of called files")
    keys = {
        callee: derive_key(callee, callers[callee], table, KeyNonce(callee, config.nonces[callee]))
        for callee in sorted(callers)
    }
    state = RouterState(config, dict(table.closed), keys, response=response, cache=cache)
    for report in mismatches:
        state.tamper(report)
    return state
