"""Probing embedding snapshots for a typological feature across epochs.

Plants a class signal into synthetic language vectors only from epoch 2
onward, probes every epoch with cross-validated logistic regression, and
classifies the resulting trajectory.  Also renders the trajectory SVG.

Run:  python demos/03_typology_probe.py
"""
import tempfile
from pathlib import Path

import numpy as np

from langprobe.data import LanguageEmbeddingTable, load_wals
from langprobe.figures import FigureSpec, render_figure
from langprobe.probe import majority_baseline, build_probe_dataset, probe_trajectory, write_probe_csv

rng = np.random.default_rng(3)
codes = [f"l{i:02d}" for i in range(16)]
labels = {c: ("agglutinative" if i % 2 == 0 else "fusional") for i, c in enumerate(codes)}

snapshots = []
for epoch in range(6):
    vectors = {}
    for i, code in enumerate(codes):
        vec = rng.normal(0, 0.4, size=16)
        if epoch >= 2:  # the signal appears only after some fine-tuning
            vec[0] = 2.0 if labels[code] == "agglutinative" else -2.0
        vectors[code] = vec
    snapshots.append(LanguageEmbeddingTable(epoch=epoch, vectors=vectors))

wals_rows = ["language_code,feature_id,value"]
wals_rows += [f"{code},M1,{labels[code]}" for code in codes]
wals = load_wals("\n".join(wals_rows))

result = probe_trajectory("M1", snapshots, wals, folds=3, l2=1e-2, seed=0)
baseline = majority_baseline(build_probe_dataset("M1", snapshots[0], wals))
print(f"feature M1, baseline {baseline:.3f}")
for epoch, acc in zip(result.epochs, result.accuracies):
    bar = "#" * int(acc * 40)
    print(f"  epoch {epoch}: {acc:.3f} {bar}")
print(f"pattern: {result.pattern}")

out_dir = Path(tempfile.mkdtemp(prefix="langprobe-demo-"))
csv_path = out_dir / "probe_trajectories.csv"
write_probe_csv([result], csv_path)
svg = render_figure(FigureSpec("trajectory-lines", csv_path, out_dir / "probe.svg"))
print(f"\ntrajectory figure written to {svg}")
