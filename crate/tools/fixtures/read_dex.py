"""Reference DEX reader: dumps the string, type, and method tables of a dex
file as JSON. Independent of the writer in dexfile.py; every declared string
length is checked against the decoded payload."""

import json
import struct
import sys

ENDIAN_CONSTANT = 0x12345678


def decode_mutf8(raw):
    units = []
    i = 0
    while i < len(raw):
        b0 = raw[i]
        if b0 < 0x80:
            units.append(b0)
            i += 1
        elif b0 >> 5 == 0b110:
            units.append(((b0 & 0x1F) << 6) | (raw[i + 1] & 0x3F))
            i += 2
        elif b0 >> 4 == 0b1110:
            units.append(((b0 & 0x0F) << 12) | ((raw[i + 1] & 0x3F) << 6) | (raw[i + 2] & 0x3F))
            i += 3
        else:
            raise ValueError("invalid mutf-8 lead byte 0x%02x" % b0)
    chars = []
    j = 0
    while j < len(units):
        u = units[j]
        if 0xD800 <= u <= 0xDBFF:
            if j + 1 >= len(units) or not 0xDC00 <= units[j + 1] <= 0xDFFF:
                raise ValueError("unpaired surrogate")
            chars.append(chr(0x10000 + ((u - 0xD800) << 10) + (units[j + 1] - 0xDC00)))
            j += 2
        elif 0xDC00 <= u <= 0xDFFF:
            raise ValueError("unpaired surrogate")
        else:
            chars.append(chr(u))
            j += 1
    return "".join(chars), len(units)


def read_uleb128(data, pos):
    value = 0
    for i in range(5):
        b = data[pos + i]
        value |= (b & 0x7F) << (7 * i)
        if not b & 0x80:
            return value, pos + i + 1
    raise ValueError("uleb128 longer than 5 bytes")


def parse(data):
    if data[0:4] != b"dex\n":
        raise ValueError("bad magic")
    version = data[4:7].decode("ascii")
    (file_size,) = struct.unpack_from("<I", data, 32)
    if file_size != len(data):
        raise ValueError("file size mismatch")
    (endian,) = struct.unpack_from("<I", data, 40)
    if endian != ENDIAN_CONSTANT:
        raise ValueError("unexpected endian tag")

    string_ids_size, string_ids_off = struct.unpack_from("<II", data, 56)
    type_ids_size, type_ids_off = struct.unpack_from("<II", data, 64)
    method_ids_size, method_ids_off = struct.unpack_from("<II", data, 88)

    strings = []
    for i in range(string_ids_size):
        (off,) = struct.unpack_from("<I", data, string_ids_off + 4 * i)
        declared, pos = read_uleb128(data, off)
        end = data.index(b"\x00", pos)
        text, units = decode_mutf8(data[pos:end])
        if units != declared:
            raise ValueError(
                "string %d declares %d utf-16 units, decoded %d" % (i, declared, units)
            )
        strings.append(text)

    types = []
    for i in range(type_ids_size):
        (didx,) = struct.unpack_from("<I", data, type_ids_off + 4 * i)
        types.append(strings[didx])

    methods = []
    for i in range(method_ids_size):
        cidx, _proto, nidx = struct.unpack_from("<HHI", data, method_ids_off + 8 * i)
        methods.append([types[cidx], strings[nidx]])

    return {"version": version, "strings": strings, "types": types, "methods": methods}


def main():
    with open(sys.argv[1], "rb") as f:
        data = f.read()
    print(json.dumps(parse(data), indent=2, ensure_ascii=True))


if __name__ == "__main__":
    main()
