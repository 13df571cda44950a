"""Reference AXML reader: decodes a binary AndroidManifest and prints the
fields the scanner consumes as JSON. Written directly against the chunk
format; shares no code with the writer in axml.py so the two can check each
other."""

import json
import struct
import sys

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

TYPE_NULL = 0x00
TYPE_REFERENCE = 0x01
TYPE_ATTRIBUTE = 0x02
TYPE_STRING = 0x03
TYPE_FLOAT = 0x04
TYPE_INT_DEC = 0x10
TYPE_INT_HEX = 0x11
TYPE_INT_BOOLEAN = 0x12

COMPONENT_ELEMENTS = {"activity", "service", "receiver", "provider"}


def _read_pool(data, start):
    count, _styles, flags, strings_start, _sstart = struct.unpack_from("<IIIII", data, start + 8)
    utf8 = bool(flags & UTF8_FLAG)
    offsets = struct.unpack_from("<%dI" % count, data, start + 28)
    strings = []
    base = start + strings_start
    for off in offsets:
        pos = base + off
        if utf8:
            _chars, pos = _len8(data, pos)
            nbytes, pos = _len8(data, pos)
            strings.append(data[pos : pos + nbytes].decode("utf-8"))
        else:
            units, pos = _len16(data, pos)
            strings.append(data[pos : pos + 2 * units].decode("utf-16-le"))
    return strings


def _len8(data, pos):
    b0 = data[pos]
    if b0 & 0x80:
        return ((b0 & 0x7F) << 8) | data[pos + 1], pos + 2
    return b0, pos + 1


def _len16(data, pos):
    (u0,) = struct.unpack_from("<H", data, pos)
    if u0 & 0x8000:
        (u1,) = struct.unpack_from("<H", data, pos + 2)
        return ((u0 & 0x7FFF) << 16) | u1, pos + 4
    return u0, pos + 2


def _render(pool, raw_idx, vtype, data):
    def s(i):
        return pool[i] if 0 <= i < len(pool) else None

    if vtype == TYPE_STRING:
        return s(data) or s(raw_idx) or ""
    if vtype in (TYPE_REFERENCE, TYPE_ATTRIBUTE):
        return "@0x%08x" % data
    if vtype == TYPE_INT_DEC:
        signed = data - (1 << 32) if data & (1 << 31) else data
        return str(signed)
    if vtype == TYPE_INT_HEX:
        return "0x%x" % data
    if vtype == TYPE_INT_BOOLEAN:
        return "true" if data else "false"
    if vtype == TYPE_NULL:
        return ""
    if vtype == TYPE_FLOAT:
        raise ValueError("float attributes are not supported by this reader")
    return "0x%08x" % data


def _attr(attrs, local):
    for a in attrs:
        if a["name"] == local and a["ns"] == ANDROID_NS:
            return a
    for a in attrs:
        if a["name"] == local:
            return a
    return None


def _attr_int(attrs, local):
    a = _attr(attrs, local)
    if a is None:
        return None
    if a["vtype"] in (TYPE_INT_DEC, TYPE_INT_HEX):
        return a["data"]
    try:
        return int(a["value"])
    except ValueError:
        return None


def parse(data):
    doc_type, _hdr, doc_size = struct.unpack_from("<HHI", data, 0)
    if doc_type != CHUNK_XML_DOCUMENT:
        raise ValueError("not an axml document")
    if doc_size != len(data):
        raise ValueError("document size mismatch")

    pool = None
    stack = []
    out = {
        "package": "",
        "permissions": set(),
        "min_sdk": None,
        "target_sdk": None,
        "components": [],
        "metadata": [],
    }

    pos = 8
    while pos < len(data):
        ctype, header_size, size = struct.unpack_from("<HHI", data, pos)
        body = pos + header_size
        if ctype == CHUNK_STRING_POOL:
            pool = _read_pool(data, pos)
        elif ctype == CHUNK_START_ELEMENT:
            _ns, name_idx, attr_start, attr_size, attr_count = struct.unpack_from(
                "<IIHHH", data, body
            )
            name = pool[name_idx] if name_idx != NO_INDEX else ""
            attrs = []
            for i in range(attr_count):
                a = body + attr_start + i * attr_size
                a_ns, a_name, raw_idx, _sz, _res0, vtype, vdata = struct.unpack_from(
                    "<IIIHBBI", data, a
                )
                attrs.append(
                    {
                        "ns": pool[a_ns] if a_ns != NO_INDEX else None,
                        "name": pool[a_name] if a_name != NO_INDEX else "",
                        "value": _render(pool, raw_idx, vtype, vdata),
                        "vtype": vtype,
                        "data": vdata,
                    }
                )
            _collect(out, stack, name, attrs)
            stack.append(name)
        elif ctype == CHUNK_END_ELEMENT:
            stack.pop()
        elif ctype in (CHUNK_START_NAMESPACE, CHUNK_END_NAMESPACE, CHUNK_CDATA, CHUNK_RESOURCE_MAP):
            pass
        # Unknown chunk types are skipped by size, like the scanner does.
        pos += size

    if pos != len(data):
        raise ValueError("chunk walk did not cover the document")

    out["permissions"] = sorted(out["permissions"])
    return out


def _collect(out, stack, name, attrs):
    if name == "manifest":
        a = _attr(attrs, "package")
        if a is not None:
            out["package"] = a["value"]
    elif name == "uses-permission":
        a = _attr(attrs, "name")
        if a is not None and a["value"]:
            out["permissions"].add(a["value"])
    elif name == "uses-sdk":
        v = _attr_int(attrs, "minSdkVersion")
        if v is not None:
            out["min_sdk"] = v
        v = _attr_int(attrs, "targetSdkVersion")
        if v is not None:
            out["target_sdk"] = v
    elif name == "meta-data":
        key = _attr(attrs, "name")
        value = _attr(attrs, "value")
        rendered = ""
        if value is not None:
            if value["vtype"] in (TYPE_REFERENCE, TYPE_ATTRIBUTE):
                rendered = "@0x%08x" % value["data"]
            else:
                rendered = value["value"]
        out["metadata"].append({"key": key["value"] if key else "", "value": rendered})
    elif name in COMPONENT_ELEMENTS and stack and stack[-1] == "application":
        a = _attr(attrs, "name")
        if a is not None:
            out["components"].append({"kind": name, "class_name": a["value"]})


def main():
    with open(sys.argv[1], "rb") as f:
        data = f.read()
    print(json.dumps(parse(data), indent=2, ensure_ascii=True, sort_keys=True))


if __name__ == "__main__":
    main()
