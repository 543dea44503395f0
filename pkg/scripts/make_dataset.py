"""Render a synthetic training/test image corpus.

Usage: python scripts/make_dataset.py OUT_DIR [--count 24] [--size 96] [--seed 100]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from compdeg.synthdata import write_dataset


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir")
    parser.add_argument("--count", type=int, default=24)
    parser.add_argument("--size", type=int, default=96)
    parser.add_argument("--seed", type=int, default=100)
    args = parser.parse_args()
    paths = write_dataset(args.out_dir, args.count, args.size, args.size, args.seed)
    print(f"wrote {len(paths)} images to {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
