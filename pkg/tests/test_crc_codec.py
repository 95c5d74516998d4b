"""Bus framing: CRC, byte stuffing, frame codec, incremental resync."""

import numpy as np
import pytest

from oracles import crc16_batch, ref_crc16
from robobench.bus.crc import TABLE, crc16
from robobench.bus.packets import (
    BROADCAST_ID,
    HEADER,
    STATUS,
    SYNC_READ,
    SYNC_WRITE,
    Frame,
    FrameDecoder,
    decode,
    encode,
    parse_status,
    parse_sync_read_request,
    parse_sync_write_request,
    ping,
    read_request,
    status,
    stuff,
    sync_read_request,
    sync_write_request,
    unstuff,
    write_request,
)
from robobench.errors import ChecksumError, FramingError, UsageError


# -- crc -------------------------------------------------------------------


def test_crc_empty_and_known_vector():
    assert crc16(b"") == 0
    # classic check string for poly 0x8005, init 0, unreflected
    assert crc16(b"123456789") == 0xFEE8
    assert crc16(b"123456789") == ref_crc16(b"123456789")


def test_crc_table_matches_bitwise_construction():
    for byte in range(256):
        assert TABLE[byte] == ref_crc16(bytes([byte]))


def test_crc_streaming_continuation(rng):
    data = bytes(rng.integers(0, 256, size=64, dtype=np.uint8))
    whole = crc16(data)
    split = crc16(data[40:], crc16(data[:40]))
    assert whole == split == ref_crc16(data)


def test_crc_batch_oracle_agrees_with_scalar_oracle(rng):
    lengths = rng.integers(0, 12, size=200)
    data = rng.integers(0, 256, size=(200, 12), dtype=np.uint8)
    batch = crc16_batch(data, lengths)
    for i in range(200):
        assert batch[i] == ref_crc16(bytes(data[i, : lengths[i]]))


# -- stuffing ----------------------------------------------------------------


@pytest.mark.parametrize(
    "raw,expected",
    [
        (b"", b""),
        (b"\x01\x02", b"\x01\x02"),
        (b"\xff\xff\xfd", b"\xff\xff\xfd\xfd"),
        (b"\xff\xff\xfe", b"\xff\xff\xfe"),
        (b"\xff\xff\xff\xfd", b"\xff\xff\xff\xfd\xfd"),
        (b"\xff\xff\xfd\xff\xff\xfd", b"\xff\xff\xfd\xfd\xff\xff\xfd\xfd"),
    ],
)
def test_stuff_cases(raw, expected):
    assert stuff(raw) == expected
    assert unstuff(expected) == raw


def test_stuffed_params_never_contain_header():
    payload = b"\xff\xff\xfd\x00" * 10
    assert HEADER not in stuff(payload)


def test_unstuff_rejects_bare_header_run():
    with pytest.raises(FramingError):
        unstuff(b"\xff\xff\xfd\x00")


def test_stuff_roundtrip_fuzz(rng):
    alphabet = np.array([0xFF, 0xFD, 0x00, 0x42], dtype=np.uint8)
    for _ in range(300):
        n = int(rng.integers(0, 30))
        raw = bytes(alphabet[rng.integers(0, len(alphabet), size=n)])
        assert unstuff(stuff(raw)) == raw


# -- frame codec ---------------------------------------------------------------


def test_encode_known_frame_bytes():
    # ping id 1: header, id, len=3, instr, crc over everything before the crc
    raw = encode(ping(1))
    assert raw[:4] == HEADER
    assert raw[4] == 1
    assert int.from_bytes(raw[5:7], "little") == 3
    assert raw[7] == 0x01
    assert int.from_bytes(raw[8:10], "little") == ref_crc16(raw[:8])


def test_roundtrip_with_header_like_params():
    frame = Frame(7, 0x03, b"\xff\xff\xfd\x00\xff\xff\xfd")
    assert decode(encode(frame)) == frame


def test_decode_rejects_corruption():
    raw = bytearray(encode(read_request(3, 132, 4)))
    flipped = bytes(raw[:-1]) + bytes([raw[-1] ^ 0x01])
    with pytest.raises(ChecksumError):
        decode(flipped)
    with pytest.raises(FramingError):
        decode(bytes(raw)[:-1])  # truncated
    bad_header = b"\xfe" + bytes(raw)[1:]
    with pytest.raises(FramingError):
        decode(bad_header)
    with pytest.raises(FramingError):
        decode(b"")


def test_frame_validation():
    with pytest.raises(UsageError):
        Frame(255, 0x01)  # 0xFF is not addressable
    with pytest.raises(UsageError):
        Frame(0, 0x100)
    with pytest.raises(UsageError):
        status(1, error=256)


def test_status_helpers():
    frame = status(5, error=0x80, params=b"\x01\x02")
    err, payload = parse_status(decode(encode(frame)))
    assert err == 0x80
    assert payload == b"\x01\x02"
    with pytest.raises(FramingError):
        parse_status(ping(1))
    with pytest.raises(FramingError):
        parse_status(Frame(1, STATUS, b""))


def test_sync_read_roundtrip():
    frame = sync_read_request([1, 2, 9], 126, 10)
    assert frame.device_id == BROADCAST_ID
    assert frame.instruction == SYNC_READ
    addr, size, ids = parse_sync_read_request(decode(encode(frame)))
    assert (addr, size, ids) == (126, 10, [1, 2, 9])
    with pytest.raises(UsageError):
        sync_read_request([1, 1], 126, 10)


def test_sync_write_roundtrip():
    values = {1: b"\x10\x00\x00\x00", 4: b"\xff\xff\xfd\x00"}
    frame = sync_write_request(116, 4, values)
    assert frame.instruction == SYNC_WRITE
    addr, size, got = parse_sync_write_request(decode(encode(frame)))
    assert (addr, size) == (116, 4)
    assert got == values
    with pytest.raises(UsageError):
        sync_write_request(116, 4, {1: b"\x00"})  # wrong data size
    with pytest.raises(FramingError):
        parse_sync_write_request(Frame(BROADCAST_ID, SYNC_WRITE, b"\x00\x00\x02\x00\x01\xaa"))


def test_roundtrip_fuzz(rng):
    for _ in range(2000):
        device_id = int(rng.integers(0, 0xFF))
        instruction = int(rng.integers(0, 0x100))
        n = int(rng.integers(0, 40))
        params = bytes(rng.integers(0, 256, size=n, dtype=np.uint8))
        frame = Frame(device_id, instruction, params)
        assert decode(encode(frame)) == frame


# -- incremental decoding ------------------------------------------------------


def test_decoder_handles_arbitrary_fragmentation(rng):
    frames = [
        Frame(int(rng.integers(0, 250)), int(rng.integers(0, 256)),
              bytes(rng.integers(0, 256, size=int(rng.integers(0, 20)), dtype=np.uint8)))
        for _ in range(100)
    ]
    stream = b"".join(encode(f) for f in frames)
    decoder = FrameDecoder()
    got = []
    i = 0
    while i < len(stream):
        step = int(rng.integers(1, 9))
        got.extend(decoder.feed(stream[i : i + step]))
        i += step
    assert got == frames
    assert decoder.errors == 0


def test_decoder_skips_garbage_between_frames():
    f1, f2 = ping(1), ping(2)
    noise = b"\x00\x11\xff\xff"
    decoder = FrameDecoder()
    got = decoder.feed(noise + encode(f1) + b"\xab\xcd" + encode(f2) + b"\xff")
    assert got == [f1, f2]


def test_decoder_resyncs_after_corrupt_frame():
    good_a, bad, good_b = ping(1), bytearray(encode(ping(9))), ping(2)
    bad[-1] ^= 0xFF  # break the crc
    decoder = FrameDecoder()
    got = decoder.feed(encode(good_a) + bytes(bad) + encode(good_b))
    assert got == [good_a, good_b]
    assert decoder.errors == 1


def test_decoder_resyncs_on_impossible_length():
    fake = HEADER + bytes([1, 0, 0])  # length field 0 < minimum
    decoder = FrameDecoder()
    got = decoder.feed(fake + encode(ping(3)))
    assert got == [ping(3)]
    assert decoder.errors == 1


def test_decoder_keeps_partial_header_across_chunks():
    raw = encode(ping(5))
    decoder = FrameDecoder()
    assert decoder.feed(raw[:2]) == []
    assert decoder.feed(raw[2:]) == [ping(5)]
    assert decoder.pending == 0
    # a trailing header prefix stays buffered for the next chunk
    decoder.feed(b"\x00\x00\xff\xff\xfd")
    assert decoder.pending == 3
