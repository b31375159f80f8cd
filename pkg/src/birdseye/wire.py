"""Single-port wire protocol: WebSocket or newline-delimited JSON over TCP.

Clients that open with an HTTP GET are upgraded to a WebSocket (RFC 6455,
text frames, one JSON message per frame); anything else is treated as a plain
TCP peer speaking one JSON object per line. Both carry the same message
schema in both directions.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import struct

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class BufferedStream:
    """asyncio StreamReader wrapper that can replay already-peeked bytes."""

    def __init__(self, reader: asyncio.StreamReader, initial: bytes = b""):
        self._reader = reader
        self._buf = bytearray(initial)

    async def _fill(self) -> bool:
        chunk = await self._reader.read(65536)
        if not chunk:
            return False
        self._buf.extend(chunk)
        return True

    async def readexactly(self, n: int) -> bytes:
        while len(self._buf) < n:
            if not await self._fill():
                raise asyncio.IncompleteReadError(bytes(self._buf), n)
        out = bytes(self._buf[:n])
        del self._buf[:n]
        return out

    async def readline(self) -> bytes:
        """Read up to and including a newline; b'' at clean EOF."""
        while b"\n" not in self._buf:
            if not await self._fill():
                out = bytes(self._buf)
                self._buf.clear()
                return out
        idx = self._buf.index(b"\n") + 1
        out = bytes(self._buf[:idx])
        del self._buf[:idx]
        return out

    async def read_until(self, marker: bytes, limit: int = 65536) -> bytes:
        while marker not in self._buf:
            if len(self._buf) > limit:
                raise ValueError("header block too large")
            if not await self._fill():
                raise asyncio.IncompleteReadError(bytes(self._buf), limit)
        idx = self._buf.index(marker) + len(marker)
        out = bytes(self._buf[:idx])
        del self._buf[:idx]
        return out


def websocket_accept_value(key: str) -> str:
    digest = hashlib.sha1((key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


async def websocket_handshake(stream: BufferedStream,
                              writer: asyncio.StreamWriter,
                              head: bytes) -> bool:
    """Complete the server side of the upgrade; head holds the request block."""
    try:
        text = head.decode("latin1")
    except UnicodeDecodeError:
        return False
    headers = {}
    for line in text.split("\r\n")[1:]:
        if ":" in line:
            k, v = line.split(":", 1)
            headers[k.strip().lower()] = v.strip()
    key = headers.get("sec-websocket-key")
    if not key or "websocket" not in headers.get("upgrade", "").lower():
        writer.write(b"HTTP/1.1 400 Bad Request\r\nConnection: close\r\n\r\n")
        await writer.drain()
        return False
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {websocket_accept_value(key)}\r\n"
        "\r\n"
    )
    writer.write(response.encode("ascii"))
    await writer.drain()
    return True


def encode_frame(payload: bytes, opcode: int = OP_TEXT) -> bytes:
    n = len(payload)
    if n < 126:
        header = bytes([0x80 | opcode, n])
    elif n < 1 << 16:
        header = bytes([0x80 | opcode, 126]) + struct.pack(">H", n)
    else:
        header = bytes([0x80 | opcode, 127]) + struct.pack(">Q", n)
    return header + payload


def encode_close(code: int = 1000) -> bytes:
    return encode_frame(struct.pack(">H", code), OP_CLOSE)


async def read_message(stream: BufferedStream,
                       writer: asyncio.StreamWriter) -> bytes | None:
    """Next complete text/binary message; None once the peer closes.

    Ping frames are answered inline; continuation frames are reassembled.
    """
    buf = b""
    while True:
        try:
            header = await stream.readexactly(2)
        except asyncio.IncompleteReadError:
            return None
        fin = bool(header[0] & 0x80)
        opcode = header[0] & 0x0F
        masked = bool(header[1] & 0x80)
        length = header[1] & 0x7F
        if length == 126:
            length = struct.unpack(">H", await stream.readexactly(2))[0]
        elif length == 127:
            length = struct.unpack(">Q", await stream.readexactly(8))[0]
        mask = await stream.readexactly(4) if masked else None
        payload = await stream.readexactly(length) if length else b""
        if mask:
            payload = bytes(b ^ mask[i & 3] for i, b in enumerate(payload))
        if opcode == OP_CLOSE:
            try:
                writer.write(encode_close())
                await writer.drain()
            except (ConnectionError, RuntimeError):
                pass
            return None
        if opcode == OP_PING:
            writer.write(encode_frame(payload, OP_PONG))
            await writer.drain()
            continue
        if opcode == OP_PONG:
            continue
        buf += payload
        if fin:
            return buf
