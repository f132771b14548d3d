"""End-to-end demo on a synthetic stream.

Builds an evaluation set from the bundled canonical poses, renders a stream
with two repetitions of movement X and one squat, and prints the report.
"""

import argparse
import io
import logging

from kineseq.classifier import load_dataset
from kineseq.matcher import load_dictionary
from kineseq.pipeline import EngineConfig, run_stream
from kineseq.synth import SynthScript, build_dataset, load_poses, render_stream

DEFAULT_SCRIPT = "N:7,A:6,B:6,C:10,B:6,A:6,N:8,A:5,B:7,C:12,B:5,A:6,N:9,C:8,B:8,C:8,N:7"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--script", default=DEFAULT_SCRIPT)
    ap.add_argument("--jitter", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("-k", type=int, default=5)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")

    poses = load_poses()
    dataset = load_dataset(io.StringIO(build_dataset(poses, per_pose=10, jitter=2.0, seed=args.seed)), k=args.k)
    frames = render_stream(SynthScript.parse(args.script, args.jitter, args.seed), poses)
    report = run_stream(frames, dataset, load_dictionary(), EngineConfig(k=args.k))
    print(report.to_json())


if __name__ == "__main__":
    main()
