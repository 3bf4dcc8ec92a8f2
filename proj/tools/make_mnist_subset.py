#!/usr/bin/env python3
"""Write the 5000-image MNIST subset bundled with mlxtend as IDX files.

The subset (500 images per digit, drawn from the original MNIST
distribution) ships inside the mlxtend wheel as a CSV with 784 pixel
columns followed by the label. This script converts it to the standard
big-endian IDX container:

    <out>/mnist5k-images-idx3-ubyte   magic 0x00000803, 5000 x 28 x 28
    <out>/mnist5k-labels-idx1-ubyte   magic 0x00000801, 5000

Usage:
    make_mnist_subset.py [--csv mnist_5k.csv.gz] [--out data/mnist]

Without --csv the wheel is fetched with `pip download mlxtend`.
"""

import argparse
import glob
import gzip
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_csv_gz(workdir):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d",
         workdir, "mlxtend"],
        check=True)
    wheels = glob.glob(os.path.join(workdir, "mlxtend-*.whl"))
    if not wheels:
        sys.exit("pip download produced no mlxtend wheel")
    with zipfile.ZipFile(wheels[0]) as z:
        return z.read(MEMBER)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--csv", help="path to mnist_5k.csv.gz")
    ap.add_argument("--out", default=os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data", "mnist"))
    args = ap.parse_args()

    if args.csv:
        with open(args.csv, "rb") as f:
            raw = f.read()
    else:
        with tempfile.TemporaryDirectory() as tmp:
            raw = fetch_csv_gz(tmp)

    rows = gzip.decompress(raw).decode().splitlines()
    pixels = bytearray()
    labels = bytearray()
    for line in rows:
        fields = line.split(",")
        if len(fields) != 785:
            sys.exit(f"unexpected row width {len(fields)}")
        pixels.extend(int(float(v)) for v in fields[:784])
        labels.append(int(float(fields[784])))

    os.makedirs(args.out, exist_ok=True)
    count = len(labels)
    with open(os.path.join(args.out, "mnist5k-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, 28, 28))
        f.write(pixels)
    with open(os.path.join(args.out, "mnist5k-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, count))
        f.write(labels)
    print(f"wrote {count} samples to {os.path.normpath(args.out)}")


if __name__ == "__main__":
    main()
