"""Modality-mask ablation sweep for one submodel.

Usage:
    python scripts/run_modality_ablation.py [--config configs/reference.json]
                                            [--net tag|boundary|segment]

Trains the chosen net once per mask listed in the config's ablate section
and writes a CSV sorted by the per-net validation metric (tagging mAP for
the tag net, boundary F1 for the boundary net, scene F1 for the segment
net).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from scenestruct.config import load_experiment_config
from scenestruct.experiment import ABLATION_METRIC_NAMES, run_ablate, run_generate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/reference.json")
    parser.add_argument("--net", default=None, choices=["tag", "boundary", "segment"])
    args = parser.parse_args()

    cfg = load_experiment_config(args.config)
    if not cfg.paths.manifest.exists():
        print("corpus not found; generating it first")
        run_generate(cfg)
    csv_path, rows = run_ablate(cfg, args.net)
    net = args.net or cfg.ablate_net
    print(f"\n{ABLATION_METRIC_NAMES[net]} by modality mask (descending):")
    for mask, value in rows:
        name = "+".join(mask.modalities) or "length-only"
        print(f"  {name:<30} {value:.4f}")
    print(f"\nwrote {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
