#!/usr/bin/env python3
"""Smoke test for the sceneseg_py extension module.

Build the extension first, then run this script:

    cargo build --release -p sceneseg-py
    python3 python/smoke_test.py

The script copies the cdylib into python/_build/ under the importable name
and exercises the main entry points end to end.
"""

import json
import math
import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_extension() -> pathlib.Path:
    candidates = [
        ROOT / "target" / "release" / "libsceneseg_py.so",
        ROOT / "target" / "debug" / "libsceneseg_py.so",
        ROOT / "target" / "release" / "libsceneseg_py.dylib",
        ROOT / "target" / "debug" / "libsceneseg_py.dylib",
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("extension not built; run: cargo build --release -p sceneseg-py")


def import_module():
    lib = locate_extension()
    build_dir = ROOT / "python" / "_build"
    build_dir.mkdir(exist_ok=True)
    target = build_dir / ("sceneseg_py" + (".so" if lib.suffix == ".so" else ".dylib"))
    if not target.exists() or lib.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(lib, target)
    sys.path.insert(0, str(build_dir))
    import sceneseg_py

    return sceneseg_py


def main() -> None:
    ss = import_module()
    print(f"imported sceneseg_py {ss.__version__} from {ss.__file__}")

    # DTW basics
    assert ss.dtw_distance([[0.0], [1.0]], [[0.0], [1.0]]) == 0.0
    d = ss.dtw_distance([[0.0], [1.0]], [[5.0]])
    assert math.isclose(d, math.sqrt(41.0), rel_tol=1e-12), d
    bary = ss.dtw_barycenter([[[0.0], [0.0]], [[1.0], [1.0]]])
    assert all(math.isclose(row[0], 0.5, abs_tol=1e-9) for row in bary), bary
    print("dtw + barycenter ok")

    # clustering helpers
    assert ss.elbow_select([100.0, 20.0, 18.0, 17.0, 16.0]) == 2
    labels = ss.context_clusters([[1, 2, 0, 0], [1, 2, 0, 0], [1, 3, 0, 0]])
    assert labels == [1, 1, 2], labels
    combined = ss.ensemble_merge([1, 1, 2], [1, 2, 2])
    assert combined == [1, 2, 3], combined
    seqs = [[[0.0], [0.1]], [[0.05], [0.1]], [[0.9], [1.0]], [[0.95], [1.0]]]
    klabels, wcss = ss.kmeans(seqs, 2, restarts=4, seed=1)
    assert klabels[0] == klabels[1] and klabels[2] == klabels[3], klabels
    assert klabels[0] != klabels[2]
    assert wcss >= 0.0
    print("clustering ok")

    # simulate -> segment: the box-filling example keeps its 5 x 4 shape
    stream, sidecar, catalog = ss.simulate("box_filling", seed=11)
    report = json.loads(ss.segment(stream, catalog))
    assert len(report["activities"]) == 5, len(report["activities"])
    assert len(report["ius"]) == 20
    ground_truth = json.loads(sidecar)
    assert len(ground_truth["activities"]) == 5
    print("simulate + segment ok")

    # train on correct executions, monitor a flawed one
    reports = []
    for seed in range(3):
        stream, _, catalog = ss.simulate("polish_measure_job", seed=seed, noise=0.0005)
        reports.append(ss.segment(stream, catalog))
    model = ss.train(reports)
    flawed_stream, _, _ = ss.simulate(
        "polish_measure_job",
        seed=55,
        noise=0.0005,
        flaw='{"activity":0,"iu":1,"mode":"halt_halfway"}',
    )
    events = json.loads(ss.monitor(flawed_stream, model, catalog))
    kinds = [e["kind"] for e in events]
    assert any(k != "ActivityCorrect" for k in kinds), kinds
    print(f"train + monitor ok (events: {kinds})")

    print("smoke test passed")


if __name__ == "__main__":
    main()
