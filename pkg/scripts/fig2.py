"""Coding gain 10 log10 C(R) versus rate for 1x1 up to 4x4 links.

Writes one CSV per antenna pair (fig2_1x1.csv, ...) and an SVG per CSV.
"""
import argparse
import os

from mimo_outage.cli import FIG2_PAIRS, main, suffixed


def run(outdir, rates):
    os.makedirs(outdir, exist_ok=True)
    base = os.path.join(outdir, "fig2.csv")
    args = ["gain", "--figure", "fig2", "--out", base]
    if rates:
        args += ["--rates", rates]
    code = main(args)
    for Nt, Nr in FIG2_PAIRS:
        if code:
            break
        path = suffixed(base, f"{Nt}x{Nr}")
        code = main(["plot", path, "--out", path[:-4] + ".svg"])
    return code


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default="results")
    p.add_argument("--rates", help="override the 0.25:0.25:8 grid")
    a = p.parse_args()
    raise SystemExit(run(a.outdir, a.rates))
