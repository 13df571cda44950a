"""Brute-force Shannon entropy oracle.

Generates a fixed corpus of strings and computes per-character entropy with a
plain frequency count, no shortcuts, so the scanner's implementation can be
checked against an independent one.
"""

import json
import math
import random
import sys
from collections import Counter

ASCII = [chr(c) for c in range(0x21, 0x7F)]
HEX = list("0123456789abcdef")
BASE64 = list("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/")
WORDS = [
    "api", "token", "session", "user", "bank", "transfer", "resume", "job",
    "chat", "push", "android", "manifest", "endpoint", "probe", "header",
]
CYRILLIC = [chr(c) for c in range(0x0410, 0x0450)]
CJK = [chr(c) for c in range(0x4E00, 0x4E80)]
EMOJI = [chr(c) for c in range(0x1F600, 0x1F620)]


def entropy(s):
    counts = Counter(s)
    n = len(s)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


def generate(rng, count=100):
    cases = []

    def pick(alphabet, length):
        return "".join(rng.choice(alphabet) for _ in range(length))

    while len(cases) < count:
        kind = len(cases) % 10
        if kind == 0:
            s = pick(ASCII, rng.randint(1, 80))
        elif kind == 1:
            s = pick(HEX, rng.randint(8, 64))
        elif kind == 2:
            s = pick(BASE64, rng.randint(16, 96))
        elif kind == 3:
            s = rng.choice(ASCII) * rng.randint(1, 40)
        elif kind == 4:
            a, b = rng.choice(ASCII), rng.choice(ASCII)
            s = (a + b) * rng.randint(1, 30)
        elif kind == 5:
            s = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 8)))
        elif kind == 6:
            s = pick(CYRILLIC, rng.randint(4, 40))
        elif kind == 7:
            s = pick(CJK, rng.randint(2, 30))
        elif kind == 8:
            s = pick(EMOJI, rng.randint(1, 12))
        else:
            s = pick(ASCII + CYRILLIC + CJK + EMOJI, rng.randint(4, 60))
        cases.append({"s": s, "h": entropy(s)})
    return cases


def main():
    rng = random.Random(9001)
    json.dump(generate(rng), sys.stdout, indent=2, ensure_ascii=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
