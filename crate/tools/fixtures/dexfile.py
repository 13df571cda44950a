"""DEX writer for building bytecode fixtures.

Produces a structurally valid dex image: header with adler32 checksum and
SHA-1 signature, sorted string/type/method tables, class_defs, and per-method
code items whose instructions invoke the given method references. Proto and
field tables are left empty; nothing in the fixtures needs them.
"""

import hashlib
import struct
import zlib

HEADER_SIZE = 0x70
ENDIAN_CONSTANT = 0x12345678
NO_INDEX = 0xFFFFFFFF

OP_INVOKE_VIRTUAL = 0x6E
OP_RETURN_VOID = 0x0E


def mutf8(s):
    out = bytearray()
    for ch in s:
        cp = ord(ch)
        if cp == 0:
            out += b"\xc0\x80"
        elif cp < 0x80:
            out.append(cp)
        elif cp < 0x800:
            out.append(0xC0 | (cp >> 6))
            out.append(0x80 | (cp & 0x3F))
        elif cp < 0x10000:
            out.append(0xE0 | (cp >> 12))
            out.append(0x80 | ((cp >> 6) & 0x3F))
            out.append(0x80 | (cp & 0x3F))
        else:
            # Supplementary code points are stored as a CESU-8 surrogate pair.
            cp -= 0x10000
            for unit in (0xD800 | (cp >> 10), 0xDC00 | (cp & 0x3FF)):
                out.append(0xE0 | (unit >> 12))
                out.append(0x80 | ((unit >> 6) & 0x3F))
                out.append(0x80 | (unit & 0x3F))
    return bytes(out)


def uleb128(n):
    out = bytearray()
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def utf16_units(s):
    return len(s.encode("utf-16-le")) // 2


class Method:
    def __init__(self, name, invokes=()):
        self.name = name
        self.invokes = list(invokes)  # (class_descriptor, method_name) pairs


class Class:
    def __init__(self, descriptor, methods=()):
        self.descriptor = descriptor
        self.methods = list(methods)


class DexBuilder:
    def __init__(self, version=b"035"):
        self.version = version
        self.extra_strings = []
        self.classes = []
        self.method_refs = []  # (class_descriptor, method_name)

    def string(self, s):
        self.extra_strings.append(s)
        return self

    def method_ref(self, class_descriptor, name):
        pair = (class_descriptor, name)
        if pair not in self.method_refs:
            self.method_refs.append(pair)
        return self

    def cls(self, descriptor, methods=()):
        c = Class(descriptor, methods)
        self.classes.append(c)
        for m in c.methods:
            for ref in m.invokes:
                self.method_ref(*ref)
        return self

    def build(self):
        pool = set(self.extra_strings)
        descriptors = []
        for c in self.classes:
            if c.descriptor not in descriptors:
                descriptors.append(c.descriptor)
        for cd, _ in self.method_refs:
            if cd not in descriptors:
                descriptors.append(cd)
        pool.update(descriptors)
        for cd, name in self.method_refs:
            pool.add(name)
        for c in self.classes:
            for m in c.methods:
                pool.add(m.name)

        # string_ids are sorted by UTF-16 code unit order.
        strings = sorted(pool, key=lambda s: s.encode("utf-16-be"))
        sidx = {s: i for i, s in enumerate(strings)}

        types = sorted(descriptors, key=lambda d: sidx[d])
        tidx = {d: i for i, d in enumerate(types)}

        # method_ids are sorted by (class_idx, name_idx); protos are all 0.
        methods = []
        for cd, name in self.method_refs:
            methods.append((cd, name))
        for c in self.classes:
            for m in c.methods:
                if (c.descriptor, m.name) not in methods:
                    methods.append((c.descriptor, m.name))
        methods.sort(key=lambda m: (tidx[m[0]], sidx[m[1]]))
        midx = {m: i for i, m in enumerate(methods)}

        classes = sorted(self.classes, key=lambda c: tidx[c.descriptor])

        string_ids_off = HEADER_SIZE
        type_ids_off = string_ids_off + 4 * len(strings)
        method_ids_off = type_ids_off + 4 * len(types)
        class_defs_off = method_ids_off + 8 * len(methods)
        data_off = class_defs_off + 32 * len(classes)

        data = bytearray()
        string_offs = []
        for s in strings:
            string_offs.append(data_off + len(data))
            data += uleb128(utf16_units(s)) + mutf8(s) + b"\x00"

        code_offs = {}
        for c in classes:
            for m in c.methods:
                while (data_off + len(data)) % 4:
                    data.append(0)
                code_offs[(c.descriptor, m.name)] = data_off + len(data)
                insns = []
                for ref in m.invokes:
                    insns += [0x1000 | OP_INVOKE_VIRTUAL, midx[ref], 0x0000]
                insns.append(OP_RETURN_VOID)
                data += struct.pack("<HHHHII", 1, 1, 1, 0, 0, len(insns))
                data += b"".join(struct.pack("<H", u) for u in insns)

        class_data_offs = {}
        for c in classes:
            class_data_offs[c.descriptor] = data_off + len(data)
            data += uleb128(0) + uleb128(0) + uleb128(len(c.methods)) + uleb128(0)
            prev = 0
            for m in sorted(c.methods, key=lambda m: midx[(c.descriptor, m.name)]):
                idx = midx[(c.descriptor, m.name)]
                data += uleb128(idx - prev) + uleb128(1) + uleb128(code_offs[(c.descriptor, m.name)])
                prev = idx

        out = bytearray(HEADER_SIZE)
        out[0:8] = b"dex\n" + self.version + b"\x00"
        total = HEADER_SIZE + 4 * len(strings) + 4 * len(types) + 8 * len(methods) + 32 * len(classes) + len(data)
        struct.pack_into("<I", out, 32, total)
        struct.pack_into("<I", out, 36, HEADER_SIZE)
        struct.pack_into("<I", out, 40, ENDIAN_CONSTANT)
        struct.pack_into("<II", out, 56, len(strings), string_ids_off)
        struct.pack_into("<II", out, 64, len(types), type_ids_off)
        struct.pack_into("<II", out, 88, len(methods), method_ids_off)
        struct.pack_into("<II", out, 96, len(classes), class_defs_off)
        struct.pack_into("<II", out, 104, len(data), data_off)

        for off in string_offs:
            out += struct.pack("<I", off)
        for d in types:
            out += struct.pack("<I", sidx[d])
        for cd, name in methods:
            out += struct.pack("<HHI", tidx[cd], 0, sidx[name])
        for c in classes:
            out += struct.pack(
                "<IIIIIIII",
                tidx[c.descriptor],
                1,
                NO_INDEX,
                0,
                NO_INDEX,
                0,
                class_data_offs[c.descriptor],
                0,
            )
        out += data

        assert len(out) == total, (len(out), total)
        struct.pack_into("<20s", out, 12, hashlib.sha1(out[32:]).digest())
        struct.pack_into("<I", out, 8, zlib.adler32(bytes(out[12:])) & 0xFFFFFFFF)
        return bytes(out)
