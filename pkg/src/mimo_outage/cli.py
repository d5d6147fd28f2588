"""Command-line front end: SNR sweeps, majorization reports, coding-gain
tables, rate selection and SVG rendering of the emitted CSV files.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .asymptotic import asymptotic_outage, coding_gain, optimize_rate
from .channel import CorrelationMatrix, MimoConfig, distinct_spectrum, has_ties, majorizes
from .errors import OutageError
from .exact import ExactEngineConfig, exact_outage
from .montecarlo import TrialPlan, estimate_outage

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
ENGINES = ("exact", "asymptotic", "montecarlo")
SWEEP_HEADER = ["snr_db", "exact", "asymptotic", "mc_p", "mc_ci_low", "mc_ci_high"]
GAIN_HEADER = ["rate", "coding_gain_db"]


class ConfigError(Exception):
    """Malformed command line, config file or CSV (exit 2)."""


class EngineFailure(Exception):
    """A numerical engine failed at a grid point (exit 3)."""


@dataclass
class RunConfig:
    config: MimoConfig
    rate_bps_hz: float = 2.0
    snr_grid_db: list = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    engines: tuple = ENGINES
    plan: TrialPlan = field(default_factory=TrialPlan)
    engine_settings: ExactEngineConfig = field(default_factory=ExactEngineConfig)
    output_path: str = "sweep.csv"
    confidence: float = 0.95
    notes: tuple = ()

    def __post_init__(self):
        grid = [float(v) for v in self.snr_grid_db]
        if not grid:
            raise ConfigError("SNR grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if not self.engines or any(e not in ENGINES for e in self.engines):
            raise ConfigError(f"engines must be a nonempty subset of {ENGINES}")
        if not self.rate_bps_hz > 0:
            raise ConfigError("rate must be positive")
        self.snr_grid_db = grid


# ------------------------------------------------------------------ presets

FIG1 = {"t": (2.7, 0.2, 0.1), "r": (1.9, 0.1), "rate": 2.0}
FIG2_PAIRS = ((1, 1), (2, 2), (3, 3), (4, 4))
FIG2_RATES = tuple(0.25 * k for k in range(1, 33))
FIG3_R = (2.7, 0.2, 0.1)
FIG3_T = {"t1": (1.0, 1.0, 1.0), "t2": (2.3, 0.5, 0.2), "t3": (2.7, 0.2, 0.1)}
FIG3_RATE = 2.0
PRESET_GRID = {"fig1": list(np.arange(0.0, 40.01, 2.5)), "fig3": list(np.arange(0.0, 30.01, 2.5))}


def fmt(v):
    return "" if v is None else "%.17g" % v


def suffixed(path, tag):
    root, ext = os.path.splitext(path)
    return f"{root}_{tag}{ext or '.csv'}"


def make_config(t, r, epsilon=1e-4):
    """Spectrum-parameterized config; tied spectra are separated first."""
    notes = []
    spectra = []
    for name, v in (("t", t), ("r", r)):
        v = np.asarray(v, dtype=float)
        if has_ties(v):
            w = distinct_spectrum(v, epsilon)
            notes.append(f"{name} spectrum {tuple(v.tolist())} perturbed to "
                         f"{tuple(np.round(w, 8).tolist())} (epsilon={epsilon:g})")
            v = w
        spectra.append(v)
    try:
        return MimoConfig.from_spectra(*spectra), tuple(notes)
    except ValueError as e:
        raise ConfigError(str(e)) from e


# ------------------------------------------------------------------ parsing


def parse_list(text):
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError as e:
        raise ConfigError(f"malformed list {text!r}") from e


def parse_grid(text):
    """'a:step:b' (inclusive) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        try:
            a, step, b = (float(v) for v in text.split(":"))
        except ValueError as e:
            raise ConfigError(f"malformed grid {text!r}") from e
        if step <= 0:
            raise ConfigError("grid step must be positive")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return [a + k * step for k in range(max(n, 0))]
    return parse_list(text)


def read_key_values(path):
    """Flat ``key = value`` text; '#' starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def read_matrix(path):
    """Whitespace-separated rows of (possibly complex) entries."""
    try:
        with open(path) as fh:
            rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
        return CorrelationMatrix(np.array([[complex(v) for v in row] for row in rows]))
    except (OSError, ValueError) as e:
        raise ConfigError(f"bad matrix file {path}: {e}") from e


def config_from_values(kv, base_dir="."):
    eps = float(kv.get("epsilon", 1e-4))
    notes = ()
    if "rt_file" in kv or "rr_file" in kv:
        if not ("rt_file" in kv and "rr_file" in kv):
            raise ConfigError("matrix files need both rt_file and rr_file")
        Rt = read_matrix(os.path.join(base_dir, kv["rt_file"]))
        Rr = read_matrix(os.path.join(base_dir, kv["rr_file"]))
        try:
            cfg = MimoConfig(Rt.dimension, Rr.dimension, Rt, Rr)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    elif "t" in kv and "r" in kv:
        cfg, notes = make_config(parse_list(kv["t"]), parse_list(kv["r"]), eps)
    else:
        raise ConfigError("config needs spectra t and r (or rt_file and rr_file)")
    for key, dim in (("nt", cfg.Nt), ("nr", cfg.Nr)):
        if key in kv and int(kv[key]) != dim:
            raise ConfigError(f"{key} = {kv[key]} disagrees with the spectrum length {dim}")
    return cfg, notes


def run_from_values(kv, base_dir="."):
    cfg, notes = config_from_values(kv, base_dir)
    try:
        plan = TrialPlan(int(kv.get("trials", 1_000_000)), int(kv.get("seed", 2024)),
                         int(kv.get("shards", 16)))
        engines = tuple(e.strip() for e in kv.get("engines", ",".join(ENGINES)).split(",") if e.strip())
        return RunConfig(
            config=cfg,
            rate_bps_hz=float(kv.get("rate", 2.0)),
            snr_grid_db=parse_grid(kv.get("snr_db", "0:5:20")),
            engines=engines,
            plan=plan,
            output_path=kv.get("out", "sweep.csv"),
            confidence=float(kv.get("confidence", 0.95)),
            notes=notes,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


# ------------------------------------------------------------------ commands


def _engine(name, db, fn):
    try:
        return fn()
    except (OutageError, ArithmeticError, ValueError) as e:
        raise EngineFailure(f"{name} engine failed at {db:g} dB: {e}") from e


def sweep_rows(run):
    rows = []
    for j, db in enumerate(run.snr_grid_db):
        rho = 10.0 ** (db / 10.0)
        ex = asy = None
        mc = (None, None, None)
        if "exact" in run.engines:
            ex = _engine("exact", db, lambda: exact_outage(run.rate_bps_hz, run.config, rho,
                                                           run.engine_settings))
        if "asymptotic" in run.engines:
            asy = _engine("asymptotic", db, lambda: asymptotic_outage(run.rate_bps_hz, run.config, rho))
        if "montecarlo" in run.engines:
            est = _engine("montecarlo", db, lambda: estimate_outage(
                run.config, rho, run.rate_bps_hz, run.plan, run.confidence, point=j))
            mc = (est.p_hat, est.ci_low, est.ci_high)
        rows.append((db, ex, asy) + mc)
    return rows


def cmd_sweep(run):
    """Write the sweep CSV; returns (path, rows)."""
    rows = sweep_rows(run)
    with open(run.output_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return run.output_path, rows


def pre_asymptotic_edge(rows, slack=0.1):
    """Largest SNR at which the asymptote overshoots the exact value by > 10%."""
    edge = None
    for db, ex, asy, *_ in rows:
        if ex and asy is not None and asy > (1 + slack) * ex:
            edge = db
    return edge


def cmd_majorize(spectrum_a, spectrum_b):
    a = np.asarray(spectrum_a, dtype=float)
    b = np.asarray(spectrum_b, dtype=float)
    if a.size == 0 or a.shape != b.shape or np.any(a <= 0) or np.any(b <= 0):
        raise ConfigError("spectra must be nonempty, positive and of equal length")
    ab, ba = majorizes(b, a), majorizes(a, b)
    if ab and ba:
        rel = "a ⪯ b and b ⪯ a"
    elif ab:
        rel = "a ⪯ b"
    elif ba:
        rel = "a ⪰ b"
    else:
        rel = "incomparable"
    da, db_ = float(np.prod(a)), float(np.prod(b))
    op = "≥" if da >= db_ else "<"
    lines = [f"{rel}; det(a)={da:.6g} {op} det(b)={db_:.6g}",
             f"per-side penalty 1/det: a={1 / da:.6g}, b={1 / db_:.6g}"]
    if ab and not ba:
        lines.append("b is the more correlated spectrum (larger outage penalty)")
    elif ba and not ab:
        lines.append("a is the more correlated spectrum (larger outage penalty)")
    return "\n".join(lines)


def gain_rows(Nt, Nr, rate_grid):
    rows = []
    for R in rate_grid:
        C = _engine("asymptotic", R, lambda: coding_gain(R, Nt, Nr))
        rows.append((R, 10.0 * math.log10(C)))
    return rows


def cmd_gain(Nt, Nr, rate_grid, out_path):
    rows = gain_rows(Nt, Nr, rate_grid)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAIN_HEADER)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return out_path, rows


def read_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    if not rows or rows[0] not in (SWEEP_HEADER, GAIN_HEADER):
        raise ConfigError(f"{path} is not a sweep or gain CSV")
    header, body = rows[0], rows[1:]
    if not body:
        raise ConfigError(f"{path} has no data rows")
    cols = {h: [] for h in header}
    try:
        for row in body:
            if len(row) != len(header):
                raise ConfigError(f"{path}: ragged row {row}")
            for h, v in zip(header, row):
                cols[h].append(float(v) if v != "" else math.nan)
    except ValueError as e:
        raise ConfigError(f"{path}: non-numeric entry ({e})") from e
    return header, {h: np.array(v) for h, v in cols.items()}


def cmd_plot(csv_path, svg_path):
    """Render a sweep CSV (log-scale outage) or a gain CSV to SVG."""
    header, cols = read_csv(csv_path)
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.fonttype"] = "path"
    plt.rcParams["svg.hashsalt"] = "mimo-outage"
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    if header == SWEEP_HEADER:
        x = cols["snr_db"]
        for key, label, style in (("exact", "Exa.", "-o"), ("asymptotic", "Asy.", "--s"),
                                  ("mc_p", "Sim.", ":^")):
            y = cols[key]
            ok = np.isfinite(y) & (y > 0)
            if ok.any():
                ax.semilogy(x[ok], y[ok], style, label=label, markersize=4)
        ok = np.isfinite(cols["mc_ci_low"]) & (cols["mc_ci_low"] > 0)
        if ok.any():
            ax.fill_between(x[ok], cols["mc_ci_low"][ok], cols["mc_ci_high"][ok], alpha=0.2)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("outage probability")
    else:
        ax.plot(cols["rate"], cols["coding_gain_db"], "-o", markersize=4, label="C(R)")
        ax.set_xlabel("rate (bits/s/Hz)")
        ax.set_ylabel("coding gain (dB)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path


# ------------------------------------------------------------------ argparse glue


def _build_parser():
    p = argparse.ArgumentParser(prog="mimo-outage", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--figure", choices=("fig1", "fig2", "fig3"))
        sp.add_argument("--out", help="output path")

    sw = sub.add_parser("sweep", help="outage versus SNR for the selected engines")
    common(sw)
    sw.add_argument("--snr", help="SNR grid in dB: 'a:step:b' or comma list")
    sw.add_argument("--rate", type=float)
    sw.add_argument("--engines", help="comma list from exact,asymptotic,montecarlo")
    sw.add_argument("--trials", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--shards", type=int)
    sw.add_argument("--confidence", type=float)

    mj = sub.add_parser("majorize", help="majorization relation of two spectra")
    mj.add_argument("a")
    mj.add_argument("b")

    gn = sub.add_parser("gain", help="coding gain 10 log10 C(R) versus rate")
    common(gn)
    gn.add_argument("--nt", type=int)
    gn.add_argument("--nr", type=int)
    gn.add_argument("--rates", help="rate grid: 'a:step:b' or comma list")

    pl = sub.add_parser("plot", help="render a sweep or gain CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True)

    ro = sub.add_parser("rate-opt", help="rate selection on the asymptotic outage")
    common(ro)
    ro.add_argument("--snr", type=float, required=True, help="SNR in dB")
    grp = ro.add_mutually_exclusive_group(required=True)
    grp.add_argument("--target", type=float, help="target outage probability")
    grp.add_argument("--max-throughput", action="store_true")
    return p


def _sweep_runs(args):
    """One RunConfig per output file (fig3 yields three)."""
    kv = read_key_values(args.config) if args.config else {}
    base_dir = os.path.dirname(args.config) if args.config else "."
    overrides = {"snr_db": args.snr, "rate": args.rate, "engines": args.engines,
                 "trials": args.trials, "seed": args.seed, "shards": args.shards,
                 "out": args.out, "confidence": args.confidence}
    if args.figure == "fig1":
        kv.setdefault("t", ",".join(map(str, FIG1["t"])))
        kv.setdefault("r", ",".join(map(str, FIG1["r"])))
        kv.setdefault("rate", str(FIG1["rate"]))
        kv.setdefault("snr_db", ",".join("%g" % v for v in PRESET_GRID["fig1"]))
        kv.setdefault("out", "fig1.csv")
    elif args.figure == "fig3":
        kv.setdefault("r", ",".join(map(str, FIG3_R)))
        kv.setdefault("rate", str(FIG3_RATE))
        kv.setdefault("snr_db", ",".join("%g" % v for v in PRESET_GRID["fig3"]))
        kv.setdefault("out", "fig3.csv")
    elif args.figure == "fig2":
        raise ConfigError("fig2 is a coding-gain figure; use the gain command")
    for k, v in overrides.items():
        if v is not None:
            kv[k] = str(v)
    if args.figure == "fig3":
        runs = []
        for tag, t in FIG3_T.items():
            sub = dict(kv, t=",".join(map(str, t)))
            run = run_from_values(sub, base_dir)
            runs.append(replace(run, output_path=suffixed(run.output_path, tag)))
        return runs
    if not kv:
        raise ConfigError("sweep needs --config or --figure")
    return [run_from_values(kv, base_dir)]


def _main(argv):
    args = _build_parser().parse_args(argv)
    if args.command == "sweep":
        for run in _sweep_runs(args):
            for note in run.notes:
                print("note:", note)
            path, rows = cmd_sweep(run)
            edge = pre_asymptotic_edge(rows)
            print(f"wrote {path} ({len(rows)} rows)")
            if edge is not None:
                print(f"pre-asymptotic: asymptote exceeds exact by >10% up to {edge:g} dB")
    elif args.command == "majorize":
        print(cmd_majorize(parse_list(args.a), parse_list(args.b)))
    elif args.command == "gain":
        rates = parse_grid(args.rates) if args.rates else list(FIG2_RATES)
        if not rates or any(r <= 0 for r in rates):
            raise ConfigError("rate grid must be nonempty and positive")
        if args.figure == "fig2":
            out = args.out or "fig2.csv"
            for Nt, Nr in FIG2_PAIRS:
                path, _ = cmd_gain(Nt, Nr, rates, suffixed(out, f"{Nt}x{Nr}"))
                print(f"wrote {path}")
        else:
            if args.nt is None or args.nr is None:
                raise ConfigError("gain needs --nt and --nr (or --figure fig2)")
            if args.nt < 1 or args.nr < 1:
                raise ConfigError("antenna counts must be positive")
            path, _ = cmd_gain(args.nt, args.nr, rates, args.out or "gain.csv")
            print(f"wrote {path}")
    elif args.command == "plot":
        print(f"wrote {cmd_plot(args.csv, args.out)}")
    elif args.command == "rate-opt":
        kv = read_key_values(args.config) if args.config else {}
        if args.figure == "fig1" or not kv:
            kv.setdefault("t", ",".join(map(str, FIG1["t"])))
            kv.setdefault("r", ",".join(map(str, FIG1["r"])))
        cfg, _ = config_from_values(kv, os.path.dirname(args.config) if args.config else ".")
        rho = 10.0 ** (args.snr / 10.0)
        objective = ({"target_outage": args.target} if args.target is not None
                     else {"max_throughput": True})
        R = _engine("asymptotic", args.snr, lambda: optimize_rate(cfg, rho, objective))
        print("%.17g" % R)
    return EXIT_OK


def main(argv=None):
    try:
        return _main(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except EngineFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as e:  # argparse usage errors
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
