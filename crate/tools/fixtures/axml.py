"""Binary-XML (AXML) writer for building AndroidManifest fixtures.

Emits the chunk layout aapt produces: XML document header, string pool,
optional resource map, namespace records, and element records with typed
attribute values. Only the subset of the format the fixtures exercise is
implemented.
"""

import struct

ANDROID_NS = "http://schemas.android.com/apk/res/android"

CHUNK_STRING_POOL = 0x0001
CHUNK_XML_DOCUMENT = 0x0003
CHUNK_START_NAMESPACE = 0x0100
CHUNK_END_NAMESPACE = 0x0101
CHUNK_START_ELEMENT = 0x0102
CHUNK_END_ELEMENT = 0x0103
CHUNK_CDATA = 0x0104
CHUNK_RESOURCE_MAP = 0x0180

UTF8_FLAG = 1 << 8
NO_INDEX = 0xFFFFFFFF

TYPE_STRING = 0x03
TYPE_INT_DEC = 0x10
TYPE_INT_HEX = 0x11
TYPE_INT_BOOLEAN = 0x12


def _encode_utf8_item(s):
    enc = s.encode("utf-8")
    out = bytearray()
    for n in (len(s), len(enc)):
        if n < 0x80:
            out.append(n)
        else:
            out.append(0x80 | (n >> 8))
            out.append(n & 0xFF)
    out += enc
    out.append(0)
    return bytes(out)


def _encode_utf16_item(s):
    enc = s.encode("utf-16-le")
    units = len(enc) // 2
    out = bytearray()
    if units < 0x8000:
        out += struct.pack("<H", units)
    else:
        out += struct.pack("<HH", 0x8000 | (units >> 16), units & 0xFFFF)
    out += enc
    out += b"\x00\x00"
    return bytes(out)


class StringPool:
    def __init__(self, utf8=True):
        self.utf8 = utf8
        self.strings = []
        self._index = {}

    def intern(self, s):
        if s not in self._index:
            self._index[s] = len(self.strings)
            self.strings.append(s)
        return self._index[s]

    def chunk(self):
        offsets = []
        blob = bytearray()
        for s in self.strings:
            offsets.append(len(blob))
            blob += _encode_utf8_item(s) if self.utf8 else _encode_utf16_item(s)
        while len(blob) % 4:
            blob.append(0)
        count = len(self.strings)
        strings_start = 28 + 4 * count
        size = strings_start + len(blob)
        flags = UTF8_FLAG if self.utf8 else 0
        head = struct.pack(
            "<HHIIIIII", CHUNK_STRING_POOL, 28, size, count, 0, flags, strings_start, 0
        )
        return head + b"".join(struct.pack("<I", o) for o in offsets) + bytes(blob)


class AxmlWriter:
    """Records namespace/element events, then serializes the document.

    `resource_attrs` is an ordered (name, resource_id) list; those names are
    interned first so the resource map lines up with the leading pool indices,
    matching aapt's convention.
    """

    def __init__(self, utf8=True, resource_attrs=()):
        self.pool = StringPool(utf8)
        self.resource_ids = []
        for name, rid in resource_attrs:
            self.pool.intern(name)
            self.resource_ids.append(rid)
        self._ops = []
        self._line = 1

    def start_ns(self, prefix, uri):
        self._ops.append(("start_ns", self.pool.intern(prefix), self.pool.intern(uri)))

    def end_ns(self, prefix, uri):
        self._ops.append(("end_ns", self.pool.intern(prefix), self.pool.intern(uri)))

    def start(self, name, attrs=()):
        encoded = []
        for ns_uri, attr_name, value in attrs:
            ns_idx = self.pool.intern(ns_uri) if ns_uri is not None else NO_INDEX
            name_idx = self.pool.intern(attr_name)
            encoded.append((ns_idx, name_idx) + self._typed_value(value))
        self._ops.append(("start", self.pool.intern(name), encoded, self._line))
        self._line += 1

    def end(self, name):
        self._ops.append(("end", self.pool.intern(name), self._line))

    def cdata(self, text):
        self._ops.append(("cdata", self.pool.intern(text), self._line))

    def raw_chunk(self, chunk_bytes):
        self._ops.append(("raw", chunk_bytes))

    def element(self, name, attrs=()):
        self.start(name, attrs)
        self.end(name)

    def _typed_value(self, value):
        # Returns (raw_idx, vtype, data).
        if isinstance(value, bool):
            return (NO_INDEX, TYPE_INT_BOOLEAN, NO_INDEX if value else 0)
        if isinstance(value, int):
            return (NO_INDEX, TYPE_INT_DEC, value & 0xFFFFFFFF)
        if isinstance(value, tuple) and value[0] == "hex":
            return (NO_INDEX, TYPE_INT_HEX, value[1] & 0xFFFFFFFF)
        idx = self.pool.intern(value)
        return (idx, TYPE_STRING, idx)

    def _chunk(self, ctype, line, body):
        head = struct.pack("<HHI", ctype, 16, 16 + len(body))
        head += struct.pack("<II", line, NO_INDEX)
        return head + body

    def tobytes(self):
        chunks = [self.pool.chunk()]
        if self.resource_ids:
            body = b"".join(struct.pack("<I", rid) for rid in self.resource_ids)
            chunks.append(struct.pack("<HHI", CHUNK_RESOURCE_MAP, 8, 8 + len(body)) + body)
        for op in self._ops:
            kind = op[0]
            if kind == "start_ns":
                chunks.append(self._chunk(CHUNK_START_NAMESPACE, 1, struct.pack("<II", op[1], op[2])))
            elif kind == "end_ns":
                chunks.append(self._chunk(CHUNK_END_NAMESPACE, self._line, struct.pack("<II", op[1], op[2])))
            elif kind == "start":
                _, name_idx, attrs, line = op
                body = struct.pack("<IIHHHHHH", NO_INDEX, name_idx, 20, 20, len(attrs), 0, 0, 0)
                for ns_idx, a_name, raw_idx, vtype, data in attrs:
                    body += struct.pack("<IIIHBBI", ns_idx, a_name, raw_idx, 8, 0, vtype, data)
                chunks.append(self._chunk(CHUNK_START_ELEMENT, line, body))
            elif kind == "end":
                _, name_idx, line = op
                chunks.append(self._chunk(CHUNK_END_ELEMENT, line, struct.pack("<II", NO_INDEX, name_idx)))
            elif kind == "cdata":
                _, data_idx, line = op
                body = struct.pack("<I", data_idx) + struct.pack("<HBBI", 8, 0, TYPE_STRING, data_idx)
                chunks.append(self._chunk(CHUNK_CDATA, line, body))
            elif kind == "raw":
                chunks.append(op[1])
        payload = b"".join(chunks)
        return struct.pack("<HHI", CHUNK_XML_DOCUMENT, 8, 8 + len(payload)) + payload


# Resource ids for the attributes the fixtures use, from the public
# android.R.attr table.
RESOURCE_ATTRS = [
    ("label", 0x01010001),
    ("name", 0x01010003),
    ("debuggable", 0x0101000F),
    ("exported", 0x01010010),
    ("value", 0x01010024),
    ("minSdkVersion", 0x0101020C),
    ("versionCode", 0x0101021B),
    ("versionName", 0x0101021C),
    ("targetSdkVersion", 0x01010270),
    ("allowBackup", 0x01010280),
]
