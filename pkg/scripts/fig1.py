"""Outage versus SNR for the 3x2 link with t=(2.7,0.2,0.1), r=(1.9,0.1), R=2.

Writes fig1.csv (exact, asymptotic and simulated curves) and fig1.svg.
"""
import argparse
import os

from mimo_outage.cli import main


def run(outdir, trials, snr):
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "fig1.csv")
    args = ["sweep", "--figure", "fig1", "--out", csv_path, "--trials", str(trials)]
    if snr:
        args += ["--snr", snr]
    code = main(args)
    if code == 0:
        code = main(["plot", csv_path, "--out", os.path.join(outdir, "fig1.svg")])
    return code


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default="results")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--snr", help="override the 0:2.5:40 dB grid")
    a = p.parse_args()
    raise SystemExit(run(a.outdir, a.trials, a.snr))
