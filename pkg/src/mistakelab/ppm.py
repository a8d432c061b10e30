"""Prediction-by-partial-matching compressor over the byte alphabet.

Adaptive context model of configurable maximum order (default 4) driving a
32-bit integer arithmetic coder.  Escape probabilities follow method C: in a
given context the escape symbol carries a count equal to the number of
distinct symbols seen there.  Symbols ruled out at a higher order are excluded
from lower-order tables, and counts are bumped only in the contexts that took
part in coding a symbol (update exclusion).

Stream format: 4-byte big-endian count of the uncompressed bytes, then the
arithmetic-coded payload.  No checksum; truncation detection is best-effort
via the decoder's bounded lookahead.
"""

from __future__ import annotations

import struct

__all__ = ["PPM_DEFAULT_ORDER", "PpmDecodeError", "ppm_compress", "ppm_decompress"]

PPM_DEFAULT_ORDER = 4

_STATE_SIZE = 32
_MAX_RANGE = 1 << _STATE_SIZE
_MASK = _MAX_RANGE - 1
_TOP = _MAX_RANGE >> 1
_SECOND = _MAX_RANGE >> 2
# Coding requires every frequency total to stay at or below MIN_RANGE.  A
# context total is bounded by the input length, so capping the input keeps
# the invariant with room for the escape counts.
_MAX_TOTAL = (_MAX_RANGE >> 2) + 2
_MAX_INPUT = _MAX_TOTAL - 512

# A valid stream never makes the decoder look more than STATE_SIZE bits past
# its end (the code register holds STATE_SIZE bits and the encoder flushes at
# most 8 more); anything beyond that means truncation or corruption.
_PHANTOM_LIMIT = _STATE_SIZE + 8


class PpmDecodeError(ValueError):
    """Stream is truncated, corrupt, or not a PPM stream."""


class _BitWriter:
    __slots__ = ("_buf", "_cur", "_nfill")

    def __init__(self):
        self._buf = bytearray()
        self._cur = 0
        self._nfill = 0

    def write(self, bit: int) -> None:
        self._cur = (self._cur << 1) | bit
        self._nfill += 1
        if self._nfill == 8:
            self._buf.append(self._cur)
            self._cur = 0
            self._nfill = 0

    def getvalue(self) -> bytes:
        if self._nfill:
            return bytes(self._buf) + bytes((self._cur << (8 - self._nfill),))
        return bytes(self._buf)


class _BitReader:
    """Big-endian bit reader; reads past the end yield zeros up to a budget."""

    __slots__ = ("_data", "_pos", "_cur", "_nleft", "_phantom")

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._cur = 0
        self._nleft = 0
        self._phantom = 0

    def read(self) -> int:
        if self._nleft == 0:
            if self._pos >= len(self._data):
                self._phantom += 1
                if self._phantom > _PHANTOM_LIMIT:
                    raise PpmDecodeError("stream truncated: ran out of coded bits")
                return 0
            self._cur = self._data[self._pos]
            self._pos += 1
            self._nleft = 8
        self._nleft -= 1
        return (self._cur >> self._nleft) & 1


class _ArithmeticEncoder:
    def __init__(self, out: _BitWriter):
        self._out = out
        self._low = 0
        self._high = _MASK
        self._pending = 0

    def encode(self, low_count: int, high_count: int, total: int) -> None:
        """Narrow the interval to [low_count, high_count) / total."""
        span = self._high - self._low + 1
        self._high = self._low + high_count * span // total - 1
        self._low = self._low + low_count * span // total
        low, high = self._low, self._high
        while ((low ^ high) & _TOP) == 0:
            bit = low >> (_STATE_SIZE - 1)
            self._out.write(bit)
            flip = bit ^ 1
            for _ in range(self._pending):
                self._out.write(flip)
            self._pending = 0
            low = (low << 1) & _MASK
            high = ((high << 1) & _MASK) | 1
        # low and high straddle the midpoint but sit in the middle half:
        # defer the bit until the straddle resolves.
        while (low & ~high & _SECOND) != 0:
            self._pending += 1
            low = (low << 1) & (_MASK >> 1)
            high = ((high << 1) & (_MASK >> 1)) | _TOP | 1
        self._low, self._high = low, high

    def finish(self) -> None:
        # The midpoint value "1 followed by zeros" always lies inside the
        # final interval.  Deferred middle-straddle bits must be flushed as
        # those zeros explicitly, or a bounded reader would starve.
        self._out.write(1)
        for _ in range(self._pending):
            self._out.write(0)
        self._pending = 0


class _ArithmeticDecoder:
    def __init__(self, inp: _BitReader):
        self._in = inp
        self._low = 0
        self._high = _MASK
        self._code = 0
        for _ in range(_STATE_SIZE):
            self._code = (self._code << 1) | inp.read()

    def read_target(self, total: int) -> int:
        """Scaled position of the code point in the current interval."""
        span = self._high - self._low + 1
        return ((self._code - self._low + 1) * total - 1) // span

    def consume(self, low_count: int, high_count: int, total: int) -> None:
        span = self._high - self._low + 1
        self._high = self._low + high_count * span // total - 1
        self._low = self._low + low_count * span // total
        low, high, code = self._low, self._high, self._code
        read = self._in.read
        while ((low ^ high) & _TOP) == 0:
            code = ((code << 1) & _MASK) | read()
            low = (low << 1) & _MASK
            high = ((high << 1) & _MASK) | 1
        while (low & ~high & _SECOND) != 0:
            code = (code & _TOP) | ((code << 1) & (_MASK >> 1)) | read()
            low = (low << 1) & (_MASK >> 1)
            high = ((high << 1) & (_MASK >> 1)) | _TOP | 1
        self._low, self._high, self._code = low, high, code


class _Context:
    __slots__ = ("counts", "total")

    def __init__(self):
        self.counts: dict[int, int] = {}
        self.total = 0


class _PpmModel:
    """Shared adaptive model; encoder and decoder must mutate it in lockstep.

    Context tables iterate in symbol insertion order, which both sides
    reproduce because they apply identical updates after every symbol.
    """

    def __init__(self, order: int):
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        self.order = order
        self.contexts: dict[bytes, _Context] = {}
        self.history = b""

    def coding_levels(self):
        """Context keys from the longest available suffix down to order 0."""
        h = self.history
        return [h[len(h) - o :] for o in range(min(len(h), self.order), -1, -1)]

    def visible_items(self, ctx: _Context, excluded: set) -> list:
        if not excluded or excluded.isdisjoint(ctx.counts):
            return list(ctx.counts.items())
        return [(s, c) for s, c in ctx.counts.items() if s not in excluded]

    def update(self, symbol: int, coded_key: bytes | None) -> None:
        """Bump the symbol count in the coding context and every longer
        suffix (update exclusion), creating contexts as they first occur."""
        h = self.history
        start = len(coded_key) if coded_key is not None else 0
        for o in range(start, min(len(h), self.order) + 1):
            key = h[len(h) - o :]
            ctx = self.contexts.get(key)
            if ctx is None:
                ctx = self.contexts[key] = _Context()
            ctx.counts[symbol] = ctx.counts.get(symbol, 0) + 1
            ctx.total += 1
        if self.order:
            self.history = (h + bytes((symbol,)))[-self.order :]


def _encode_symbol(model: _PpmModel, enc: _ArithmeticEncoder, symbol: int) -> None:
    excluded: set = set()
    for key in model.coding_levels():
        ctx = model.contexts.get(key)
        if ctx is None:
            continue
        items = model.visible_items(ctx, excluded)
        if not items:
            continue
        n_items = len(items)
        total = (
            ctx.total + n_items
            if n_items == len(ctx.counts)
            else sum(c for _, c in items) + n_items
        )
        acc = 0
        for sym, count in items:
            if sym == symbol:
                enc.encode(acc, acc + count, total)
                model.update(symbol, key)
                return
            acc += count
        # Escape occupies the top of the table with count n_items (method C).
        enc.encode(acc, total, total)
        excluded.update(s for s, _ in items)
    # Bottom table: uniform over the bytes not ruled out above.
    if excluded:
        allowed = [b for b in range(256) if b not in excluded]
        idx = allowed.index(symbol)
        total = len(allowed)
    else:
        idx = symbol
        total = 256
    enc.encode(idx, idx + 1, total)
    model.update(symbol, None)


def _decode_symbol(model: _PpmModel, dec: _ArithmeticDecoder) -> int:
    excluded: set = set()
    for key in model.coding_levels():
        ctx = model.contexts.get(key)
        if ctx is None:
            continue
        items = model.visible_items(ctx, excluded)
        if not items:
            continue
        n_items = len(items)
        total = (
            ctx.total + n_items
            if n_items == len(ctx.counts)
            else sum(c for _, c in items) + n_items
        )
        target = dec.read_target(total)
        acc = 0
        found = -1
        for sym, count in items:
            if target < acc + count:
                found = sym
                dec.consume(acc, acc + count, total)
                break
            acc += count
        if found >= 0:
            model.update(found, key)
            return found
        dec.consume(acc, total, total)
        excluded.update(s for s, _ in items)
    if excluded:
        allowed = [b for b in range(256) if b not in excluded]
        total = len(allowed)
        idx = dec.read_target(total)
        symbol = allowed[idx]
    else:
        total = 256
        idx = dec.read_target(total)
        symbol = idx
    dec.consume(idx, idx + 1, total)
    model.update(symbol, None)
    return symbol


def ppm_compress(data: bytes, order: int = PPM_DEFAULT_ORDER) -> bytes:
    """Compress bytes; the result starts with the 4-byte original length."""
    if len(data) > _MAX_INPUT:
        raise ValueError(
            f"input of {len(data)} bytes exceeds the {_MAX_INPUT}-byte limit"
        )
    header = struct.pack(">I", len(data))
    if not data:
        return header + b"\x80"  # flushed terminator bit only
    model = _PpmModel(order)
    out = _BitWriter()
    enc = _ArithmeticEncoder(out)
    for byte in data:
        _encode_symbol(model, enc, byte)
    enc.finish()
    return header + out.getvalue()


def ppm_decompress(stream: bytes, order: int = PPM_DEFAULT_ORDER) -> bytes:
    """Inverse of :func:`ppm_compress`; raises PpmDecodeError on bad input."""
    if len(stream) < 4:
        raise PpmDecodeError("stream shorter than the 4-byte length prefix")
    (n,) = struct.unpack(">I", stream[:4])
    if n > _MAX_INPUT:
        raise PpmDecodeError(f"length prefix {n} exceeds the coder's input limit")
    if n == 0:
        return b""
    model = _PpmModel(order)
    dec = _ArithmeticDecoder(_BitReader(stream[4:]))
    out = bytearray()
    for _ in range(n):
        out.append(_decode_symbol(model, dec))
    return bytes(out)
