"""End-to-end pipeline on a generated six-language dataset.

Writes synthetic treebanks, an embedding table and a WALS CSV into a
temporary directory, then runs every stage (train, both grids, probe,
held-out prediction, figures) and lists the artifacts.

Run:  python demos/04_full_pipeline.py
"""
import tempfile
from pathlib import Path

from langprobe.config import build_config
from langprobe.pipeline import run_pipeline
from langprobe.synthetic import write_fixture_dataset

root = Path(tempfile.mkdtemp(prefix="langprobe-pipeline-"))
dataset = root / "dataset"
write_fixture_dataset(dataset)
print(f"dataset written to {dataset}")

cfg = build_config(
    {},
    {
        "data_dir": dataset,
        "embeddings": dataset / "langemb.vec",
        "wals": dataset / "wals.csv",
        "output_dir": root / "runs",
        "languages": ["aa", "bb", "cc", "dd", "ee", "ff"],
        "grid_languages": ["aa", "bb"],
        "test_languages": ["aa", "bb"],
        "baseline_language": "bb",
        "bi_targets": ["aa", "bb"],
        "bi_helpers": ["aa", "bb"],
        "heldout_languages": ["ee", "ff"],
        "seed_list": [1],
        "epochs": 2,
        "char_emb_dim": 8,
        "char_lstm_hidden": 8,
        "word_lstm_hidden": 8,
        "lang_emb_dim": 8,
        "lr": 0.005,
        "permutations": 200,
    },
)

result = run_pipeline(cfg, ("ingest", "train", "grid-mono", "grid-bi", "probe", "heldout", "render"))
print(f"exit code: {result.exit_code}")
print(f"run directory: {result.run_dir}\n")
for path in sorted(result.run_dir.rglob("*")):
    if path.is_file():
        print(f"  {path.relative_to(result.run_dir)}  ({path.stat().st_size} bytes)")
if result.manifest:
    print("\nfailures:")
    for entry in result.manifest:
        print(f"  [{entry['stage']}] {entry['item']}: {entry['reason']}")
else:
    print("\nerror manifest is empty: every cell and feature succeeded")
