#!/usr/bin/env python3
"""Fetch and convert the evaluation datasets into the manifest + CSV layout.

Subcommands:
  handwritten   Download the UCI Multiple Features dataset (2000 handwritten
                digits in six feature views) and write data/handwritten/.
  webkb         Convert a WebKB .mat file (citation + content views) into
                data/webkb_<name>/. The .mat files are distributed by several
                multi-view clustering repositories; pass one per university.

Both commands write view CSVs (one sample per row), labels.txt and a
manifest.json understood by the nsmvc CLI.
"""

import argparse
import io
import json
import sys
import urllib.request
import zipfile
from pathlib import Path

UCI_ZIP = "https://archive.ics.uci.edu/static/public/72/multiple+features.zip"
UCI_FILES = "https://archive.ics.uci.edu/ml/machine-learning-databases/mfeat/"

MFEAT_VIEWS = [
    ("mfeat-fac", "profile_correlations", 216),
    ("mfeat-fou", "fourier_coefficients", 76),
    ("mfeat-kar", "karhunen_coefficients", 64),
    ("mfeat-mor", "morphological", 6),
    ("mfeat-pix", "pixel_averages", 240),
    ("mfeat-zer", "zernike_moments", 47),
]


def write_manifest(out_dir: Path, name: str, views, normalize: str) -> None:
    manifest = {
        "name": name,
        "views": [{"name": vn, "path": path} for vn, path in views],
        "labels": "labels.txt",
        "normalize": normalize,
        "csv": {"delimiter": ",", "header": False},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def write_view_csv(path: Path, rows) -> None:
    with path.open("w") as out:
        for row in rows:
            out.write(",".join(repr(float(x)) for x in row))
            out.write("\n")


def parse_mfeat_text(text: str):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    return rows


def fetch_handwritten(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    contents = {}
    try:
        print(f"downloading {UCI_ZIP} ...")
        with urllib.request.urlopen(UCI_ZIP, timeout=120) as response:
            archive = zipfile.ZipFile(io.BytesIO(response.read()))
        for member in archive.namelist():
            base = Path(member).name
            if base in {f for f, _, _ in MFEAT_VIEWS}:
                contents[base] = archive.read(member).decode("ascii")
    except Exception as error:  # fall back to the per-file layout
        print(f"zip download failed ({error}); trying individual files")
        for fname, _, _ in MFEAT_VIEWS:
            url = UCI_FILES + fname
            print(f"downloading {url} ...")
            with urllib.request.urlopen(url, timeout=120) as response:
                contents[fname] = response.read().decode("ascii")

    views = []
    n = None
    for fname, view_name, dim in MFEAT_VIEWS:
        rows = parse_mfeat_text(contents[fname])
        if n is None:
            n = len(rows)
        if len(rows) != n:
            raise SystemExit(f"{fname}: expected {n} samples, found {len(rows)}")
        if len(rows[0]) != dim:
            raise SystemExit(f"{fname}: expected {dim} features, found {len(rows[0])}")
        csv_name = view_name + ".csv"
        write_view_csv(out_dir / csv_name, rows)
        views.append((view_name, csv_name))
        print(f"  wrote {csv_name} ({len(rows)} x {dim})")

    # samples are ordered by digit class, 200 per class
    with (out_dir / "labels.txt").open("w") as labels:
        for i in range(n):
            labels.write(f"{i // 200}\n")
    write_manifest(out_dir, "handwritten", views, "zscore")
    print(f"wrote {out_dir}/manifest.json")


def convert_webkb(mat_path: Path, name: str, out_dir: Path) -> None:
    import numpy as np
    from scipy.io import loadmat

    raw = loadmat(str(mat_path))
    candidates = {k: v for k, v in raw.items() if not k.startswith("__")}

    labels = None
    matrices = []
    for key, value in candidates.items():
        arr = np.asarray(value)
        if arr.dtype == object:  # cell array of views
            for cell in arr.ravel():
                matrices.append(np.asarray(cell, dtype=float))
        elif arr.size > 0 and min(arr.shape or (0,)) == 1 and arr.size > 2:
            labels = arr.ravel().astype(int)
        elif arr.ndim == 2:
            matrices.append(arr.astype(float))
    if labels is None or len(matrices) < 2:
        raise SystemExit(
            f"{mat_path}: could not identify two view matrices and a label vector "
            f"(keys: {sorted(candidates)})"
        )

    n = len(labels)
    views = []
    out_dir.mkdir(parents=True, exist_ok=True)
    for idx, matrix in enumerate(matrices[:2]):
        if matrix.shape[0] != n and matrix.shape[1] == n:
            matrix = matrix.T
        if matrix.shape[0] != n:
            raise SystemExit(f"{mat_path}: view {idx} shape {matrix.shape} does not match n={n}")
        view_name = ["citation", "content"][idx]
        csv_name = view_name + ".csv"
        write_view_csv(out_dir / csv_name, matrix)
        views.append((view_name, csv_name))
        print(f"  wrote {csv_name} ({matrix.shape[0]} x {matrix.shape[1]})")

    with (out_dir / "labels.txt").open("w") as out:
        for label in labels:
            out.write(f"{int(label)}\n")
    write_manifest(out_dir, f"webkb_{name}", views, "zscore")
    print(f"wrote {out_dir}/manifest.json")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    hw = sub.add_parser("handwritten", help="download the UCI Multiple Features dataset")
    hw.add_argument("--out", default="data/handwritten", help="output directory")

    wk = sub.add_parser("webkb", help="convert a WebKB .mat file")
    wk.add_argument("--mat", required=True, help="path to the .mat file")
    wk.add_argument("--name", required=True,
                    choices=["cornell", "texas", "washington", "wisconsin"])
    wk.add_argument("--out", default=None, help="output directory")

    args = parser.parse_args()
    if args.command == "handwritten":
        fetch_handwritten(Path(args.out))
    else:
        out = Path(args.out) if args.out else Path("data") / f"webkb_{args.name}"
        convert_webkb(Path(args.mat), args.name, out)


if __name__ == "__main__":
    sys.exit(main())
