"""Per-frame latency across dictionary and buffer sizes."""

import argparse

from kineseq.bench import run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iterations", type=int, default=100)
    ap.add_argument("--variants", type=int, nargs="+", default=[50, 100, 200, 400, 800])
    ap.add_argument("--buffer-lens", type=int, nargs="+", default=[50, 100, 200])
    args = ap.parse_args()

    print(f"{'variants':>8} {'buffer':>6} {'median_ms':>10} {'p95_ms':>8} {'max_ms':>8}")
    for buf in args.buffer_lens:
        for n in args.variants:
            r = run_benchmark(args.iterations, n, buf)
            print(f"{r.n_variants:>8} {r.buffer_len:>6} {r.median_ms:>10.2f} {r.p95_ms:>8.2f} {r.max_ms:>8.2f}")


if __name__ == "__main__":
    main()
