#!/usr/bin/env python3
"""Convert the per-class JSON dump of Fashion-MNIST shipped by the `fashion-mnist`
npm package into a gzipped IDX image/label pair.

The npm package stores 7000 images per class (train + test, grouped by class).
We keep the first PER_CLASS images of every class and interleave them
round-robin so that file order cycles through labels 0..9.

usage: fashion_json_to_idx.py <package/src/clothes dir> <out dir> [per_class]
"""
import gzip
import json
import struct
import sys
from pathlib import Path

src = Path(sys.argv[1])
out = Path(sys.argv[2])
per_class = int(sys.argv[3]) if len(sys.argv) > 3 else 1100

classes = []
for label in range(10):
    rows = json.loads((src / f"{label}.json").read_text())["data"]
    rows = [r for r in rows if len(r) == 784]
    classes.append(rows[:per_class])

images = bytearray()
labels = bytearray()
for i in range(per_class):
    for label in range(10):
        images.extend(bytes(classes[label][i]))
        labels.append(label)

count = per_class * 10
out.mkdir(parents=True, exist_ok=True)
with gzip.GzipFile(out / "fashion-images-idx3-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">IIII", 0x803, count, 28, 28) + bytes(images))
with gzip.GzipFile(out / "fashion-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">II", 0x801, count) + bytes(labels))
