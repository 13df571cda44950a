"""APK assembly for fixtures: a deterministic zip, optionally with an APK
signing block spliced between the file entries and the central directory the
way apksigner lays it out."""

import struct
import zipfile

FIXED_DATE = (2022, 11, 1, 10, 0, 0)
EOCD_MAGIC = b"PK\x05\x06"
SIG_BLOCK_MAGIC = b"APK Sig Block 42"
V2_PAIR_ID = 0x7109871A


def write_zip(path, entries):
    """entries: iterable of (name, bytes, compress_flag)."""
    with zipfile.ZipFile(path, "w") as z:
        for name, data, compress in entries:
            info = zipfile.ZipInfo(name, date_time=FIXED_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED if compress else zipfile.ZIP_STORED
            info.external_attr = 0o644 << 16
            z.writestr(info, data)


def inject_signing_block(path):
    data = bytearray(open(path, "rb").read())
    eocd = data.rfind(EOCD_MAGIC)
    assert eocd != -1, "no end-of-central-directory record"
    (cd_off,) = struct.unpack_from("<I", data, eocd + 16)

    # One v2 pair with placeholder signature bytes; pair = len u64, id u32,
    # value. size_of_block excludes the leading size field itself.
    value = bytes((i * 37 + 11) & 0xFF for i in range(128))
    pair = struct.pack("<QI", 4 + len(value), V2_PAIR_ID) + value
    size_of_block = len(pair) + 8 + len(SIG_BLOCK_MAGIC)
    block = struct.pack("<Q", size_of_block) + pair + struct.pack("<Q", size_of_block) + SIG_BLOCK_MAGIC

    out = data[:cd_off] + block + data[cd_off:]
    new_eocd = eocd + len(block)
    assert out[new_eocd : new_eocd + 4] == EOCD_MAGIC
    struct.pack_into("<I", out, new_eocd + 16, cd_off + len(block))
    open(path, "wb").write(out)


def build_apk(path, entries, signed=False):
    write_zip(path, entries)
    if signed:
        inject_signing_block(path)
