"""Outage versus SNR for 3x3 links with r=(2.7,0.2,0.1) and three transmit spectra.

t1=(1,1,1) (separated slightly so the exact engine applies), t2=(2.3,0.5,0.2)
and t3=(2.7,0.2,0.1).  Writes fig3_t1.csv, fig3_t2.csv, fig3_t3.csv and SVGs.
"""
import argparse
import os

from mimo_outage.cli import FIG3_T, main, suffixed


def run(outdir, trials, snr):
    os.makedirs(outdir, exist_ok=True)
    base = os.path.join(outdir, "fig3.csv")
    args = ["sweep", "--figure", "fig3", "--out", base, "--trials", str(trials)]
    if snr:
        args += ["--snr", snr]
    code = main(args)
    for tag in FIG3_T:
        if code:
            break
        path = suffixed(base, tag)
        code = main(["plot", path, "--out", path[:-4] + ".svg"])
    return code


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default="results")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--snr", help="override the 0:2.5:30 dB grid")
    a = p.parse_args()
    raise SystemExit(run(a.outdir, a.trials, a.snr))
