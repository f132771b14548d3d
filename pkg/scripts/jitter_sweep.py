"""Frame accuracy and movement recognition as keypoint jitter grows.

For each jitter level and seed, renders a stream of movement X and records
the mean per-frame classification accuracy (0 for NULL or wrong frames),
the share of NULL frames, and whether X was identified.
"""

import argparse
import io

import numpy as np

from kineseq.classifier import load_dataset
from kineseq.matcher import load_dictionary
from kineseq.pipeline import Engine, EngineConfig
from kineseq.synth import SynthScript, build_dataset, load_poses, render_stream

SCRIPT = "A:6,B:6,C:10,B:6,A:6,N:7"


def one_run(poses, dataset, dictionary, jitter, seed):
    script = SynthScript.parse(SCRIPT, jitter, seed)
    truth = [lb for lb, n in script.segments for _ in range(n)]
    engine = Engine(dataset, dictionary, EngineConfig())
    hits, nulls = [], 0
    for raw, label in zip(render_stream(script, poses), truth):
        if label is None:
            engine.feed(raw)
            continue
        f = engine.classify_frame(raw)
        if f.is_null:
            nulls += 1
            hits.append(0.0)
        else:
            hits.append(f.accuracy if f.label == label else 0.0)
        engine.feed(raw)
    rep = engine.finish()
    found = any(h.movement == "X" for h in rep.identified)
    return float(np.mean(hits)), nulls / len(hits), found


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=float, nargs="+", default=[0, 5, 10, 20, 40, 80, 120])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    poses = load_poses()
    dataset = load_dataset(io.StringIO(build_dataset(poses, per_pose=10, jitter=2.0, seed=0)))
    dictionary = load_dictionary()
    print(f"{'jitter':>6} {'frame_acc':>9} {'null_rate':>9} {'found_X':>7}")
    for jitter in args.levels:
        runs = [one_run(poses, dataset, dictionary, jitter, s) for s in range(args.seeds)]
        acc, null, found = (np.mean(col) for col in zip(*runs))
        print(f"{jitter:>6g} {acc:>9.3f} {null:>9.3f} {found:>7.2f}")


if __name__ == "__main__":
    main()
