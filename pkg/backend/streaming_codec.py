"""
Streaming encoder and receiver for codes built by generalized staggered-diagonal
embedding of a systematic MDS code.

Packet position p (1-based) at time t carries symbol p of the codeword anchored
at t - j(p) + 1, where j(p) is the packet offset the dispersion vector assigns
to symbol p. Every codeword spans tau + 1 packets and is block-decoded when its
last occupied slot has passed.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Any, Optional, Sequence, Tuple

import numpy as np

from channel_params import ChannelParams
from dispersion_engine import DispersionVector, best_dispersion, effective_resilience
from erasure_channel import ErasurePattern, enumerate_admissible, codeword_loss_profile
from galois_mds import FieldSpec, MdsCodeSpec, mds_build, mds_encode, decode_known
from gss_config import active_config
from gss_errors import EmptyFirstSlotError, InvalidParamsError, LengthMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodewordLayout:
    """offsets[p-1] = j(p): packet offset (1..tau+1) of codeword symbol p."""
    offsets: Tuple[int, ...]
    span: int

    @property
    def n(self) -> int:
        return len(self.offsets)

    @property
    def last_offset(self) -> int:
        return self.offsets[-1]

    def positions_at(self, offset: int) -> List[int]:
        """1-based symbol indices placed at a given packet offset."""
        return [p for p, j in enumerate(self.offsets, start=1) if j == offset]

    def anchor(self, t: int, p: int) -> int:
        """Anchor time of the codeword whose symbol p rides in packet t."""
        return t - self.offsets[p - 1] + 1


def build_layout(delta_vec: DispersionVector) -> CodewordLayout:
    if delta_vec.empty_first_slot:
        raise EmptyFirstSlotError(f"dispersion vector {delta_vec.to_text()} has n_1 = 0")
    offsets = []
    for j, count in enumerate(delta_vec.entries, start=1):
        offsets.extend([j] * count)
    return CodewordLayout(offsets=tuple(offsets), span=delta_vec.span)


@dataclass
class StreamPacket:
    """Coded packet x(t) = [m(t); p(t)]; symbols is None when the packet is erased."""
    t: int
    symbols: Optional[np.ndarray] = None

    @property
    def erased(self) -> bool:
        return self.symbols is None

    def message(self, k: int) -> List[int]:
        return [int(x) for x in self.symbols[:k]]

    def parity(self, k: int) -> List[int]:
        return [int(x) for x in self.symbols[k:]]

    def erase(self) -> 'StreamPacket':
        return StreamPacket(self.t, None)


class DecodeStatus(Enum):
    ON_TIME = "ON_TIME"
    LATE = "LATE"
    FAILED = "FAILED"


@dataclass
class DecodeEvent:
    t: int
    decode_time: int
    status: DecodeStatus
    message: Optional[List[int]] = None
    failed_positions: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            't': self.t,
            'decode_time': self.decode_time,
            'status': self.status.value,
            'message': self.message,
            'failed_positions': list(self.failed_positions),
        }


class StreamingCode:
    """
    A (a, b, tau) streaming code: dispersion vector + layout + base MDS code.

    k defaults to n - r. A larger k may be forced to build deliberately weak
    codes for negative tests; the delay guarantee is then void.
    """

    def __init__(
        self,
        params: ChannelParams,
        delta_vec: DispersionVector,
        k: int = None,
        field: FieldSpec = None,
    ):
        self.params = params
        self.delta_vec = delta_vec
        self.report = effective_resilience(delta_vec, params)
        self.layout = build_layout(delta_vec)
        self.n = delta_vec.n

        guaranteed_k = self.n - self.report.r
        self.k = guaranteed_k if k is None else k
        if not 1 <= self.k <= self.n:
            raise InvalidParamsError(
                f"code dimension k={self.k} must satisfy 1 <= k <= n={self.n} for {delta_vec.to_text()}"
            )
        if self.k > guaranteed_k:
            logger.warning(
                f"k={self.k} exceeds n-r={guaranteed_k} for {delta_vec.to_text()}: recovery is not guaranteed"
            )

        self.mds: MdsCodeSpec = mds_build(self.n, self.k, field)
        self.tau = params.tau
        logger.info(
            f"Streaming code {params} with vector {delta_vec.to_text()}: [{self.n},{self.k}] over GF({self.mds.field.order})"
        )

    @property
    def rate(self):
        return Fraction(self.k, self.n)

    def zero_message(self) -> List[int]:
        return [0] * self.k

    def describe(self) -> Dict[str, Any]:
        return {
            'params': self.params.to_dict(),
            'dispersion': self.delta_vec.to_text(),
            'n': self.n,
            'k': self.k,
            'r': self.report.r,
            'field_order': self.mds.field.order,
        }


def create_streaming_code(
    params: ChannelParams,
    delta_vec: DispersionVector = None,
    k: int = None,
    field: FieldSpec = None,
) -> StreamingCode:
    """Factory: defaults to the maximum-rate dispersion vector for params."""
    if delta_vec is None:
        delta_vec, _ = best_dispersion(params)
    return StreamingCode(params, delta_vec, k=k, field=field)


class StreamEncoder:
    """Sequential encoder; messages must arrive in time order starting at t = 0."""

    def __init__(self, code: StreamingCode):
        self.code = code
        self.t = 0
        self.history: Dict[int, np.ndarray] = {}
        self._parity_offsets = sorted({code.layout.offsets[p] for p in range(code.k, code.n)})

    def _message_at(self, t: int) -> np.ndarray:
        # Pre-stream messages are zero
        if t < 0:
            return np.zeros(self.code.k, dtype=int)
        return self.history[t]

    def _codeword(self, anchor: int):
        offsets = self.code.layout.offsets
        message = [int(self._message_at(anchor + offsets[i] - 1)[i]) for i in range(self.code.k)]
        return mds_encode(self.code.mds, message)

    def step(self, message: Sequence[int]) -> StreamPacket:
        code = self.code
        if len(message) != code.k:
            raise LengthMismatchError(f"message has {len(message)} symbols, code expects k={code.k}")

        t = self.t
        self.history[t] = np.asarray(message, dtype=int)
        self.history.pop(t - code.tau - 1, None)

        symbols = np.zeros(code.n, dtype=int)
        symbols[:code.k] = self.history[t]

        # Parity at offset j belongs to the codeword anchored at t - j + 1, whose
        # message symbols all sit at offsets <= j and have therefore arrived
        for offset in self._parity_offsets:
            codeword = self._codeword(t - offset + 1)
            for p in code.layout.positions_at(offset):
                if p > code.k:
                    symbols[p - 1] = int(codeword[p - 1])

        self.t += 1
        return StreamPacket(t, symbols)


@dataclass
class _PendingMessage:
    recovered: List[Optional[int]]
    unresolved: set
    failed: set = field(default_factory=set)


class StreamReceiver:
    """Sequential receiver; call step once per time slot with a packet or None."""

    def __init__(self, code: StreamingCode):
        self.code = code
        self.t = 0
        self.buffers: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self.pending: Dict[int, _PendingMessage] = {}
        self.decodes = 0

    def _buffer(self, anchor: int) -> Tuple[np.ndarray, np.ndarray]:
        if anchor not in self.buffers:
            offsets = np.asarray(self.code.layout.offsets)
            symbols = np.zeros(self.code.n, dtype=int)
            # Slots before time 0 hold the zero preamble and are known
            known = (anchor + offsets - 1) < 0
            self.buffers[anchor] = (symbols, known)
        return self.buffers[anchor]

    def _close(self, anchor: int, now: int):
        code = self.code
        symbols, known = self._buffer(anchor)
        del self.buffers[anchor]

        wanted = []
        for p in range(code.k):
            slot_time = anchor + code.layout.offsets[p] - 1
            entry = self.pending.get(slot_time)
            if entry is not None and p in entry.unresolved:
                wanted.append((slot_time, p))
        if not wanted:
            return

        if code.n - int(known.sum()) <= code.mds.redundancy:
            message = decode_known(code.mds, symbols, known)
            self.decodes += 1
            for slot_time, p in wanted:
                self.pending[slot_time].recovered[p] = int(message[p])
                self.pending[slot_time].unresolved.discard(p)
        else:
            logger.debug(f"Codeword anchored at {anchor} lost {code.n - int(known.sum())} symbols at t={now}")
            for slot_time, p in wanted:
                self.pending[slot_time].failed.add(p + 1)
                self.pending[slot_time].unresolved.discard(p)

    def step(self, packet: Optional[StreamPacket]) -> List[DecodeEvent]:
        code = self.code
        t = self.t
        if packet is not None and packet.t != t:
            raise InvalidParamsError(f"receiver expected packet {t}, got {packet.t}")

        events = []
        erased = packet is None or packet.erased
        if erased:
            self.pending[t] = _PendingMessage(recovered=[None] * code.k, unresolved=set(range(code.k)))
        else:
            events.append(DecodeEvent(t, t, DecodeStatus.ON_TIME, packet.message(code.k)))

        for p in range(1, code.n + 1):
            symbols, known = self._buffer(code.layout.anchor(t, p))
            if not erased:
                symbols[p - 1] = int(packet.symbols[p - 1])
                known[p - 1] = True

        self._close(t - code.layout.last_offset + 1, t)

        for slot_time in sorted(self.pending):
            entry = self.pending[slot_time]
            if entry.unresolved:
                continue
            del self.pending[slot_time]
            if entry.failed:
                events.append(DecodeEvent(slot_time, t, DecodeStatus.FAILED, None, tuple(sorted(entry.failed))))
            else:
                status = DecodeStatus.ON_TIME if t <= slot_time + code.tau else DecodeStatus.LATE
                events.append(DecodeEvent(slot_time, t, status, entry.recovered))

        self.t += 1
        events.sort(key=lambda event: event.t)
        return events


def encode_stream(code: StreamingCode, messages: Sequence[Sequence[int]]) -> List[StreamPacket]:
    encoder = StreamEncoder(code)
    return [encoder.step(message) for message in messages]


def receive_stream(code: StreamingCode, packets: Sequence[StreamPacket], pattern: ErasurePattern = None) -> List[DecodeEvent]:
    receiver = StreamReceiver(code)
    events = []
    for packet in packets:
        lost = pattern is not None and pattern.is_erased(packet.t)
        events.extend(receiver.step(None if lost else packet))
    return events


def random_messages(code: StreamingCode, count: int, seed: int) -> List[List[int]]:
    rng = np.random.default_rng(seed)
    return rng.integers(0, code.mds.field.order, size=(count, code.k)).tolist()


@dataclass
class VerifyVerdict:
    passed: bool
    patterns_checked: int
    horizon: int
    maximal_only: bool
    r: int
    k: int
    worst_loss: int
    counterexample: Optional[ErasurePattern] = None
    failing_message: Optional[int] = None
    failing_anchor: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': 'PASS' if self.passed else 'FAIL',
            'patterns_checked': self.patterns_checked,
            'horizon': self.horizon,
            'maximal_only': self.maximal_only,
            'r': self.r,
            'k': self.k,
            'worst_loss': self.worst_loss,
            'counterexample': self.counterexample.to_dict() if self.counterexample else None,
            'failing_message': self.failing_message,
            'failing_anchor': self.failing_anchor,
        }


def _check_pattern(
    code: StreamingCode,
    packets: List[StreamPacket],
    messages: List[List[int]],
    pattern: ErasurePattern,
) -> Tuple[Optional[int], Optional[int], int]:
    """(first failing interior message or None, failing anchor, worst per-codeword loss)."""
    profile = codeword_loss_profile(pattern, code.delta_vec.entries)
    worst = max(profile.values(), default=0)

    interior = pattern.horizon - code.tau
    seen = set()
    failing = None
    for event in receive_stream(code, packets, pattern):
        if event.t >= interior:
            continue
        seen.add(event.t)
        good = event.status is DecodeStatus.ON_TIME and event.message == messages[event.t]
        if not good and failing is None:
            failing = event.t
    if failing is None:
        missing = [t for t in range(interior) if t not in seen]
        failing = missing[0] if missing else None

    anchor = None
    if failing is not None:
        overloaded = [a for a, lost in sorted(profile.items()) if lost > code.mds.redundancy]
        anchor = overloaded[0] if overloaded else None
    return failing, anchor, worst


def verify_exhaustive(
    params: ChannelParams,
    delta_vec: DispersionVector = None,
    code: StreamingCode = None,
    horizon: int = None,
    maximal_only: bool = False,
    seed: int = None,
    budget: int = None,
    workers: int = None,
) -> VerifyVerdict:
    """
    Run encoder and receiver under every admissible pattern on [0, horizon)
    and require every interior message (t < horizon - tau) to arrive ON_TIME
    and intact. Returns PASS or the first counterexample in enumeration order.
    """
    if horizon is None or horizon < params.w:
        raise InvalidParamsError(f"horizon must be at least tau+1 = {params.w}, got {horizon}")
    code = code or create_streaming_code(params, delta_vec)
    seed = active_config.SEED if seed is None else seed
    workers = active_config.WORKERS if workers is None else workers

    messages = random_messages(code, horizon, seed)
    packets = encode_stream(code, messages)
    patterns = list(enumerate_admissible(params, horizon, maximal_only=maximal_only, budget=budget))
    logger.info(
        f"Verifying {params} {code.delta_vec.to_text()} [{code.n},{code.k}] over {len(patterns)} patterns (H={horizon})"
    )

    def check(pattern):
        return _check_pattern(code, packets, messages, pattern)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(check, patterns))
    else:
        outcomes = [check(pattern) for pattern in patterns]

    worst = max((outcome[2] for outcome in outcomes), default=0)
    verdict = VerifyVerdict(
        passed=True,
        patterns_checked=len(patterns),
        horizon=horizon,
        maximal_only=maximal_only,
        r=code.report.r,
        k=code.k,
        worst_loss=worst,
    )
    for pattern, (failing, anchor, _) in zip(patterns, outcomes):
        if failing is not None:
            verdict.passed = False
            verdict.counterexample = pattern
            verdict.failing_message = failing
            verdict.failing_anchor = anchor
            logger.warning(f"Counterexample {pattern.sorted_erased()}: message {failing} not recovered on time")
            break

    if verdict.passed:
        logger.info(f"PASS: {len(patterns)} patterns, worst per-codeword loss {worst} <= r = {code.report.r}")
    return verdict
