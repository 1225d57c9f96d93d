"""
Pseudo-Label Pipeline - Main Entry Point

Runs the command-line interface:

    python main.py simulate --out data/synth
    python main.py fit --scans data/synth/velodyne --calib data/synth/calib \
        --dets data/synth/detections.csv --out results/labels
    python main.py eval --dets results/labels --gt data/synth/label_2
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
