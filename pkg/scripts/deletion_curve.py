"""How the comprehensibility score falls as a reader drops more of a workflow.

Takes a workflow's full text (default: the FIDO/JAWS fixture), deletes a
random fraction of its tokens, and reports the mean and spread of the score
over many seeded trials. Also shows the effect of dropping contiguous tail
chunks, closer to a reader that stops speaking partway through.

    python scripts/deletion_curve.py [--workflow PATH] [--trials 200] [--seed 0]
"""
import argparse
import random
import statistics
from pathlib import Path

from srauth import presets
from srauth.ingest import load_workflow
from srauth.similarity import comprehensibility, tokenize

FRACTIONS = [i / 10 for i in range(11)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workflow", type=Path, default=presets.FIXTURE_WORKFLOWS / "fido_jaws.json")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    text = load_workflow(args.workflow, presets.catalog()).full_text
    toks = tokenize(text)
    rng = random.Random(args.seed)
    print(f"{args.workflow.name}: {len(toks)} tokens, {args.trials} trials per fraction\n")
    print("deleted  random-mean  random-sd  tail-cut")
    for frac in FRACTIONS:
        k = round(frac * len(toks))
        scores = []
        for _ in range(args.trials):
            drop = set(rng.sample(range(len(toks)), k))
            scores.append(comprehensibility(text, " ".join(t for i, t in enumerate(toks) if i not in drop)).score)
        tail = comprehensibility(text, " ".join(toks[: len(toks) - k])).score
        sd = statistics.pstdev(scores)
        print(f"{frac:7.0%}  {statistics.fmean(scores):11.4f}  {sd:9.4f}  {tail:8.4f}")


if __name__ == "__main__":
    main()
