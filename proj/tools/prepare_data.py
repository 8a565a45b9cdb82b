#!/usr/bin/env python3
"""Writes the small datasets used by the acceptance suite into data/.

iris.csv comes from the copy bundled with scikit-learn. The MNIST subset is
taken from the 5000-image sample shipped inside the mlxtend wheel and written
in the IDX layout the C++ loader reads.
"""

import argparse
import csv
import gzip
import io
import struct
import zipfile
from pathlib import Path


def write_iris(out: Path) -> None:
    import sklearn.datasets

    src = Path(sklearn.datasets.__file__).parent / "data" / "iris.csv"
    rows = list(csv.reader(src.open()))
    names = rows[0][2:]
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sepal_length", "sepal_width", "petal_length", "petal_width", "species"])
        for r in rows[1:]:
            w.writerow(r[:4] + [names[int(r[4])]])
    print(f"wrote {out}: {len(rows) - 1} rows")


def write_mnist(wheel: Path, out_dir: Path, digits: list[int]) -> None:
    with zipfile.ZipFile(wheel) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    images, labels = [], []
    for line in io.StringIO(text):
        cells = line.strip().split(",")
        label = int(cells[-1])
        if label in digits:
            images.append(bytes(int(float(c)) for c in cells[:-1]))
            labels.append(label)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "images.idx3-ubyte").open("wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with (out_dir / "labels.idx1-ubyte").open("wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {out_dir}: {len(images)} images of digits {digits}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    p.add_argument("--mlxtend-wheel", type=Path, help="mlxtend wheel containing mnist_5k.csv.gz")
    p.add_argument("--digits", type=int, nargs="+", default=[0, 1, 2])
    args = p.parse_args()
    write_iris(args.out / "iris.csv")
    if args.mlxtend_wheel:
        write_mnist(args.mlxtend_wheel, args.out / "mnist", args.digits)


if __name__ == "__main__":
    main()
