#!/usr/bin/env python3
"""
Test script for the streaming encoder/receiver and the exhaustive verifier.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from fractions import Fraction

import numpy as np

from channel_params import ChannelParams
from dispersion_engine import DispersionVector, construction1
from erasure_channel import ErasurePattern
from galois_mds import mds_encode
from gss_errors import EmptyFirstSlotError, InvalidParamsError, LengthMismatchError
from streaming_codec import (
    DecodeStatus, StreamEncoder, StreamReceiver, build_layout, create_streaming_code,
    encode_stream, random_messages, receive_stream, verify_exhaustive,
)
from suite_runner import run_suite

P355 = ChannelParams(3, 5, 5)
GSS_355 = DispersionVector((3, 1, 1, 1, 1, 3))


def test_layout_examples():
    layout = build_layout(GSS_355)
    assert layout.offsets == (1, 1, 1, 2, 3, 4, 5, 6, 6, 6)
    assert layout.positions_at(6) == [8, 9, 10]
    assert layout.anchor(7, 4) == 6

    assert build_layout(DispersionVector((1, 1, 1, 0, 0, 1))).offsets == (1, 2, 3, 6)
    assert build_layout(DispersionVector((4,))).offsets == (1, 1, 1, 1)

    try:
        build_layout(DispersionVector((0, 1, 1)))
    except EmptyFirstSlotError:
        pass
    else:
        raise AssertionError("n_1 = 0 cannot anchor a codeword")


def test_code_defaults():
    code = create_streaming_code(P355)
    assert (code.n, code.k) == (10, 3)
    assert code.rate == Fraction(3, 10)
    assert code.describe()['dispersion'] == "3,1,1,1,1,3"

    try:
        create_streaming_code(P355, k=11)
    except InvalidParamsError:
        pass
    else:
        raise AssertionError("k above n must be rejected")


def test_zero_stream_encodes_to_zero_packets():
    code = create_streaming_code(P355)
    packets = encode_stream(code, [code.zero_message() for _ in range(8)])
    assert all(not np.any(packet.symbols) for packet in packets)


def test_packets_are_systematic():
    code = create_streaming_code(P355)
    messages = random_messages(code, 10, seed=3)
    for packet, message in zip(encode_stream(code, messages), messages):
        assert packet.message(code.k) == message
        assert len(packet.parity(code.k)) == code.n - code.k


def test_single_message_matches_one_codeword():
    code = create_streaming_code(P355)
    m0 = [17, 201, 5]
    messages = [m0] + [code.zero_message() for _ in range(7)]
    packets = encode_stream(code, messages)
    codeword = [int(x) for x in mds_encode(code.mds, m0)]
    for p, offset in enumerate(code.layout.offsets, start=1):
        assert int(packets[offset - 1].symbols[p - 1]) == codeword[p - 1]


def test_encoder_rejects_wrong_message_size():
    encoder = StreamEncoder(create_streaming_code(P355))
    try:
        encoder.step([1, 2])
    except LengthMismatchError:
        pass
    else:
        raise AssertionError("message length must equal k")


def test_no_erasures_passthrough():
    code = create_streaming_code(P355)
    messages = random_messages(code, 12, seed=11)
    events = receive_stream(code, encode_stream(code, messages))
    assert [e.t for e in events] == list(range(12))
    for event in events:
        assert event.status is DecodeStatus.ON_TIME
        assert event.decode_time == event.t
        assert event.message == messages[event.t]


def test_burst_recovered_at_deadline():
    code = create_streaming_code(P355)
    messages = random_messages(code, 12, seed=12)
    pattern = ErasurePattern(12, frozenset({0, 1, 2, 3, 4}))
    events = {e.t: e for e in receive_stream(code, encode_stream(code, messages), pattern)}

    assert events[0].status is DecodeStatus.ON_TIME
    assert events[0].decode_time == 5
    assert events[0].message == messages[0]
    for t in range(1, 5):
        assert events[t].status is DecodeStatus.ON_TIME
        assert events[t].decode_time <= t + code.tau
        assert events[t].message == messages[t]


def test_inadmissible_burst_fails():
    code = create_streaming_code(P355)
    messages = random_messages(code, 14, seed=13)
    pattern = ErasurePattern(14, frozenset(range(2, 8)))
    events = receive_stream(code, encode_stream(code, messages), pattern)
    failed = [e for e in events if e.status is DecodeStatus.FAILED]
    assert failed
    assert all(e.message is None and e.failed_positions for e in failed)
    assert all(1 <= p <= code.k for e in failed for p in e.failed_positions)


def test_receiver_step_by_step():
    code = create_streaming_code(P355)
    messages = random_messages(code, 8, seed=14)
    encoder, receiver = StreamEncoder(code), StreamReceiver(code)
    recovered = {}
    for t, message in enumerate(messages):
        packet = encoder.step(message)
        for event in receiver.step(None if t == 2 else packet):
            recovered[event.t] = event
    assert recovered[2].message == messages[2]
    assert recovered[2].decode_time <= 2 + code.tau
    assert receiver.decodes >= 1


def test_verify_passes_for_gss_and_ss():
    verdict = verify_exhaustive(P355, horizon=6)
    assert verdict.passed and verdict.patterns_checked == 47
    assert verdict.worst_loss == 7

    ss_vec, _ = construction1(P355)
    verdict = verify_exhaustive(P355, delta_vec=ss_vec, horizon=8, maximal_only=True)
    assert verdict.passed
    assert verdict.to_dict()['verdict'] == 'PASS'


def test_verify_finds_counterexample_for_weakened_code():
    weak = create_streaming_code(P355, k=4)
    verdict = verify_exhaustive(P355, code=weak, horizon=8)
    assert not verdict.passed
    assert verdict.counterexample.sorted_erased() == [0, 1, 2, 3, 4]
    assert verdict.failing_message == 0
    assert verdict.failing_anchor == 0
    assert verdict.to_dict()['verdict'] == 'FAIL'


def test_verify_is_independent_of_worker_count():
    serial = verify_exhaustive(P355, horizon=8, workers=1)
    threaded = verify_exhaustive(P355, horizon=8, workers=4)
    assert serial.passed and serial.to_dict() == threaded.to_dict()

    weak = create_streaming_code(P355, k=4)
    serial = verify_exhaustive(P355, code=weak, horizon=8, workers=1)
    threaded = verify_exhaustive(P355, code=weak, horizon=8, workers=4)
    assert not serial.passed
    assert serial.to_dict() == threaded.to_dict()
    assert threaded.counterexample.sorted_erased() == [0, 1, 2, 3, 4]


def test_verify_rejects_short_horizon():
    try:
        verify_exhaustive(P355, horizon=5)
    except InvalidParamsError:
        pass
    else:
        raise AssertionError("horizon below tau+1 is a usage error")


if __name__ == "__main__":
    tests = [
        ("Layout", test_layout_examples),
        ("Code Defaults", test_code_defaults),
        ("Zero Stream", test_zero_stream_encodes_to_zero_packets),
        ("Systematic Packets", test_packets_are_systematic),
        ("Single Message Codeword", test_single_message_matches_one_codeword),
        ("Encoder Message Size", test_encoder_rejects_wrong_message_size),
        ("No Erasures", test_no_erasures_passthrough),
        ("Burst At Deadline", test_burst_recovered_at_deadline),
        ("Inadmissible Burst", test_inadmissible_burst_fails),
        ("Receiver Step By Step", test_receiver_step_by_step),
        ("Verify PASS", test_verify_passes_for_gss_and_ss),
        ("Verify Counterexample", test_verify_finds_counterexample_for_weakened_code),
        ("Verify Worker Count", test_verify_is_independent_of_worker_count),
        ("Verify Short Horizon", test_verify_rejects_short_horizon),
    ]
    sys.exit(0 if run_suite("STREAMING CODEC TESTS", tests) else 1)
