#!/usr/bin/env python3
# Copyright 2026 The isogeo Authors
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Write a 5000-image MNIST subset as IDX files.

The subset ships inside the mlxtend wheel (mlxtend/data/data/mnist_5k.csv.gz,
one image per row: 784 pixel values then the label). The wheel is fetched
with pip unless --wheel points at a local copy.
"""

import argparse
import gzip
import io
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def find_wheel(tmp: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--quiet", "-d", str(tmp), "mlxtend"],
        check=True,
    )
    wheels = sorted(tmp.glob("mlxtend-*.whl"))
    if not wheels:
        raise SystemExit("pip did not produce an mlxtend wheel")
    return wheels[-1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/mnist", help="output directory")
    ap.add_argument("--wheel", help="local mlxtend wheel")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else find_wheel(pathlib.Path(tmp))
        with zipfile.ZipFile(wheel) as zf:
            raw = gzip.decompress(zf.read(MEMBER))

    images, labels = bytearray(), bytearray()
    count = 0
    for line in io.StringIO(raw.decode("ascii")):
        line = line.strip()
        if not line:
            continue
        fields = [int(float(v)) for v in line.split(",")]
        if len(fields) != 785:
            raise SystemExit(f"unexpected row width {len(fields)}")
        images.extend(bytes(fields[:784]))
        labels.append(fields[784])
        count += 1

    (out / "images-idx3-ubyte").write_bytes(struct.pack(">IIII", 2051, count, 28, 28) + images)
    (out / "labels-idx1-ubyte").write_bytes(struct.pack(">II", 2049, count) + labels)
    print(f"wrote {count} images to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
