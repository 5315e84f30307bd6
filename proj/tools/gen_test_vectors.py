#!/usr/bin/env python3
"""Regenerates the frozen vectors under tests/data from hashlib."""
import hashlib
import pathlib

out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
out.mkdir(parents=True, exist_ok=True)

# message byte i is i & 0xff
with open(out / "sha3_256_lengths.txt", "w") as f:
    for n in range(301):
        msg = bytes(i & 0xFF for i in range(n))
        f.write(f"{n} {hashlib.sha3_256(msg).hexdigest()}\n")

with open(out / "sha3_256_named.txt", "w") as f:
    for name, msg in [("empty", b""), ("abc", b"abc"),
                      ("fox", b"The quick brown fox jumps over the lazy dog")]:
        f.write(f"{name} {hashlib.sha3_256(msg).hexdigest()}\n")
