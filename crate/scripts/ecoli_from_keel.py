"""Rebuild the 336-row UCI Ecoli file from the one-vs-rest partitions shipped
in the `keel_ds` wheel.

    pip download --no-deps keel_ds==0.2.5 -d /tmp/keel
    python scripts/ecoli_from_keel.py /tmp/keel/keel_ds-0.2.5-py3-none-any.whl \
        crates/core/data/ecoli.data

The KEEL partitions keep the UCI row order, and after normalising number
formatting all 336 attribute vectors are distinct. Most rows take their class
from the partition that marks them positive. The nine rows no partition
isolates take theirs from their slot in the class-sorted UCI order. KEEL drops
the sequence-name column, so a placeholder `row_NNN` takes its place.
"""

import sys
import zipfile

EXPECTED = {"cp": 143, "im": 77, "pp": 52, "imU": 35, "om": 20, "omL": 5, "imL": 2, "imS": 2}


def read(z, name):
    text = z.read(f"keel_ds/data/imbalanced/raw/{name}.dat").decode()
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        *attrs, cls = [f.strip() for f in line.split(",")]
        rows.append((tuple(f"{float(a):.2f}" for a in attrs), cls == "positive"))
    return rows


def main(wheel, out):
    z = zipfile.ZipFile(wheel)
    base = [a for a, _ in read(z, "ecoli1")]
    assert len(base) == 336 and len(set(base)) == 336
    label = {}

    def mark(name, cls):
        for attrs, pos in read(z, name):
            if pos:
                assert label.setdefault(attrs, cls) == cls, (name, attrs)

    mark("ecoli-0_vs_1", "cp")
    mark("ecoli1", "im")
    mark("ecoli2", "pp")
    mark("ecoli3", "imU")
    mark("ecoli4", "om")
    # The UCI file is sorted by class; the nine rows no binary partition
    # isolates fill the imS, imL and omL slots of that order.
    blocks = []
    for attrs in base:
        cls = label.get(attrs, "?")
        if not blocks or blocks[-1][0] != cls:
            blocks.append([cls, []])
        blocks[-1][1].append(attrs)
    assert [b[0] for b in blocks] == ["cp", "im", "?", "imU", "om", "?", "pp"], blocks
    assert len(blocks[2][1]) == 4 and len(blocks[5][1]) == 5
    for attrs, cls in zip(blocks[2][1], ["imS", "imS", "imL", "imL"]):
        label[attrs] = cls
    for attrs in blocks[5][1]:
        label[attrs] = "omL"

    counts = {}
    for attrs in base:
        counts[label[attrs]] = counts.get(label[attrs], 0) + 1
    assert counts == EXPECTED, counts

    with open(out, "w") as f:
        for i, attrs in enumerate(base, 1):
            f.write(f"row_{i:03d}  " + "  ".join(attrs) + f"  {label[attrs]}\n")
    print(f"wrote {len(base)} rows to {out}: {counts}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
