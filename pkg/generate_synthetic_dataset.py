"""
Generate synthetic multi-view datasets shaped like common clustering benchmarks

Each preset writes views, mask.csv, labels.txt and manifest.json under
datasets/<preset>/ and can be fed straight to `python cli.py run --manifest ...`.
"""

import os
import sys
from datetime import datetime

from data import make_synthetic, save_dataset, simulate_missing
from data.loader import MultiViewDataset
from model.types import PresenceMask

# name -> (K, view dims, N, missing rate, view format)
PRESETS = {
    # 5 handwritten-digit feature sets, 10 classes
    "digit": (10, [76, 216, 64, 240, 47], 2000, 0.4, "csv"),
    # web pages: content and anchor text, 2 classes; dimensions reduced tenfold
    "webkb": (2, [300, 184], 1051, 0.3, "csv"),
    # video: vision, audio, text; larger N stored as MVC1 for --stream-from-disk
    "youtube": (31, [64, 200, 100], 20000, 0.4, "mvc1"),
}


def generate_preset(name: str, out_root: str = "datasets", seed: int = 0,
                    separation: float = 1.0, noise: float = 0.15) -> str:
    """Write one preset and return its manifest path"""
    n_clusters, dims, n_instances, rate, fmt = PRESETS[name]
    views, labels = make_synthetic(n_clusters, len(dims), dims, n_instances, separation, noise, seed)
    dataset = MultiViewDataset(views, PresenceMask.full(len(dims), n_instances), n_clusters, labels)
    dataset = dataset.with_mask(simulate_missing(dataset.meta, rate, seed))
    manifest_path = save_dataset(dataset, os.path.join(out_root, name), fmt=fmt)
    print(f"Generated: {manifest_path} (N={n_instances}, views={dims}, K={n_clusters}, missing={rate})")
    return manifest_path


if __name__ == "__main__":
    names = sys.argv[1:] or ["digit", "webkb"]
    unknown = [n for n in names if n not in PRESETS]
    if unknown:
        print(f"Unknown preset(s): {unknown}; available: {sorted(PRESETS)}")
        sys.exit(2)

    print("\nGenerating Synthetic Multi-view Datasets...")
    print("=" * 50)
    for name in names:
        generate_preset(name)
    print("=" * 50)
    print(f"\nGenerated {len(names)} dataset(s) in datasets/ at {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
