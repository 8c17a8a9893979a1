"""Command-line entry point: ``gazeaffect <command> [options]``.

Every command reads the same INI run configuration (``--config``) with
``--set section.key=value`` overrides. Outputs carry a header naming the
package version, root seed and a hash of the resolved configuration, and
contain nothing else that varies between runs, so re-running a command
rewrites identical bytes. Failures print one line ``error: <Kind>: <message>``
to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .core import dataset_summary
from .features.channels import CHANNEL_KINDS, FeatureChannel, build_channel
from .features.congruency import CenterBiasModel
from .ingest import ValidationError, load_feature_channel, load_trialset, write_feature_channel
from .learn.analyses import classeme_analysis, cooccurrence_table, observer_sweep, sweep_table
from .learn.protocol import late_fuse, run_protocol
from .stats import GROUPINGS, MEASURES, MissingMetadata, grouped_summary, one_way_anova, tukey_kramer

logger = logging.getLogger("gazeaffect")


class CLIError(ValueError):
    pass


def _header(cfg: RunConfig) -> str:
    return f"gazeaffect {__version__} seed={cfg.seed} config={cfg.config_hash}"


def _header_dict(cfg: RunConfig) -> dict:
    return {"version": __version__, "seed": cfg.seed, "config_hash": cfg.config_hash}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _trials(cfg: RunConfig):
    cfg.validate()
    trials = load_trialset(cfg.data_dir, cfg.detection)
    if cfg.scenario:
        trials = trials.scenario(cfg.scenario)
    if not trials.images:
        raise CLIError(f"no images in {cfg.data_dir}" + (f" for scenario {cfg.scenario}" if cfg.scenario else ""))
    return trials


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


# -- features ---------------------------------------------------------------

def cmd_features(cfg: RunConfig, kinds) -> list[Path]:
    unknown = [k for k in kinds if k not in CHANNEL_KINDS]
    if unknown:
        raise CLIError(f"unknown channel kinds {unknown}; choose from {', '.join(CHANNEL_KINDS)}")
    trials = _trials(cfg)
    out = []
    for kind in kinds:
        ch = build_channel(trials, kind, cfg.features)
        path = cfg.output_dir / "features" / f"{kind}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_feature_channel(path, ch.to_file(), _header(cfg))
        out.append(path)
    return out


# -- eval -------------------------------------------------------------------

def _resolve_channel(cfg: RunConfig, name: str, trials) -> FeatureChannel:
    if name in CHANNEL_KINDS:
        return build_channel(trials, name, cfg.features)
    candidates = [Path(name)]
    if cfg.features_dir is not None:
        candidates.append(cfg.features_dir / f"{name}.csv")
    for c in candidates:
        if c.is_file():
            ch = FeatureChannel.from_file(load_feature_channel(c), source="visual")
            keep = [i for i in ch.image_ids if i in trials.images]
            return ch.restrict(keep)
    raise CLIError(f"channel {name!r} is neither a gaze channel kind nor a feature file")


def _common_ids(channels):
    common = set.intersection(*(set(c.image_ids) for c in channels))
    dropped = set.union(*(set(c.image_ids) for c in channels)) - common
    if dropped:
        logger.warning("evaluating on %d images shared by all channels; %d dropped", len(common), len(dropped))
    return [c.restrict([i for i in c.image_ids if i in common]) for c in channels]


def cmd_eval(cfg: RunConfig, channels, fuse=False, sweep=None, classemes=None) -> list[Path]:
    trials = _trials(cfg)
    labels = trials.labels()
    reports = cfg.output_dir / "reports"
    out = []
    if sweep:
        points = observer_sweep(trials, cfg.protocol, sweep, params=cfg.features, jobs=cfg.jobs)
        path = reports / "observer_sweep.csv"
        _write(path, f"# {_header(cfg)}\n" + sweep_table(points))
        out.append(path)
    if classemes:
        ch = _resolve_channel(cfg, classemes, trials)
        report, rows = classeme_analysis(ch, labels, cfg.protocol, jobs=cfg.jobs,
                                         pleasantness={i: r.sam_mean_all for i, r in trials.images.items()})
        out += _write_report(cfg, reports, "classemes", report)
        path = reports / "classemes_cooccurrence.csv"
        _write(path, f"# {_header(cfg)}\n" + cooccurrence_table(rows))
        out.append(path)
    if channels:
        chans = _common_ids([_resolve_channel(cfg, n, trials) for n in channels])
        if fuse:
            report = late_fuse(chans, labels, cfg.protocol, jobs=cfg.jobs)
            out += _write_report(cfg, reports, "fused_" + "+".join(channels), report)
        else:
            for name, ch in zip(channels, chans):
                report = run_protocol(ch, labels, cfg.protocol, jobs=cfg.jobs)
                out += _write_report(cfg, reports, name, report)
    if not out:
        raise CLIError("nothing to evaluate; pass --channels, --sweep-observers or --classemes")
    return out


def _write_report(cfg, directory: Path, stem: str, report) -> list[Path]:
    stem = Path(stem).stem if stem.endswith(".csv") else stem
    report.meta = {**report.meta, "header": _header_dict(cfg), "scenario": cfg.scenario}
    j, t = directory / f"{stem}.json", directory / f"{stem}.txt"
    _write(j, report.to_json())
    _write(t, f"# {_header(cfg)}\n" + report.to_text())
    return [j, t]


# -- stats ------------------------------------------------------------------

def cmd_stats(cfg: RunConfig) -> list[Path]:
    trials = _trials(cfg)
    d = cfg.output_dir / "stats"
    head = f"# {_header(cfg)}\n"
    summary_rows, box_rows, anova_rows, tukey_rows = [], [], ["group_by,measure,df_between,df_within,F,p"], \
        ["group_by,measure,group_a,group_b,mean_diff,q,q_crit,significant"]
    for group_by in GROUPINGS:
        for measure in MEASURES:
            try:
                gs = grouped_summary(trials, group_by, measure)
            except MissingMetadata as e:
                logger.warning("skipping %s grouping: %s", group_by, e)
                break
            summary_rows.append(gs.to_csv() if not summary_rows else gs.to_csv().split("\n", 1)[1])
            box_rows.append(gs.box_csv() if not box_rows else gs.box_csv().split("\n", 1)[1])
            usable = [g for g in gs.groups if g.n >= 2]
            if len(usable) < 2 or sum(g.n for g in usable) <= len(usable):
                logger.warning("too few images for ANOVA on %s by %s", measure, group_by)
                continue
            vals = [g.values for g in usable]
            a = one_way_anova(vals)
            anova_rows.append(f"{group_by},{measure},{a.df_between},{a.df_within},{a.F!r},{a.p!r}")
            tk = tukey_kramer(vals)
            for pc in tk.pairs:
                tukey_rows.append(f"{group_by},{measure},{usable[pc.group_a].name},{usable[pc.group_b].name},"
                                  f"{pc.mean_diff!r},{pc.q!r},{tk.q_crit!r},{int(pc.significant)}")
    paths = {
        "summary.csv": head + "".join(summary_rows),
        "boxplot.csv": head + "".join(box_rows),
        "anova.csv": head + "\n".join(anova_rows) + "\n",
        "tukey.csv": head + "\n".join(tukey_rows) + "\n",
        "dataset.json": json.dumps({"header": _header_dict(cfg), **dataset_summary(trials)},
                                   indent=2, sort_keys=True) + "\n",
    }
    out = []
    for name, text in paths.items():
        _write(d / name, text)
        out.append(d / name)
    return out


# -- synth ------------------------------------------------------------------

def _floats(value: str) -> tuple[float, ...]:
    return tuple(float(v) for v in _split(value))


def load_scenario(path=None, seed=None):
    """Read a synthetic scenario INI file (see README for the keys)."""
    from dataclasses import replace

    from .core import CLASS_NAMES
    from .synth import ClassParams, SyntheticScenario

    scen = SyntheticScenario()
    if path is not None:
        cp = configparser.ConfigParser(interpolation=None)
        if not cp.read(path, encoding="utf-8"):
            raise CLIError(f"scenario file {path} not found")
        kw = {}
        s = cp["scenario"] if cp.has_section("scenario") else {}
        if "n_images" in s:
            kw["n_images"] = tuple(int(v) for v in _split(s["n_images"]))
        for key in ("n_observers",):
            if key in s:
                kw[key] = int(s[key])
        for key in ("seed",):
            if key in s:
                kw[key] = int(s[key])
        for key in ("jitter_px", "female_fraction", "sample_rate_hz", "trial_ms", "min_step_px"):
            if key in s:
                kw[key] = float(s[key])
        if "spatial_mode" in s:
            kw["spatial_mode"] = s["spatial_mode"]
        if "image_size" in s:
            kw["image_size"] = tuple(int(v) for v in _split(s["image_size"]))
        classes = []
        for name in CLASS_NAMES:
            c = ClassParams()
            if cp.has_section(name):
                sec = cp[name]
                ck = {}
                if "duration" in sec:
                    ck["duration"] = _floats(sec["duration"])
                if "length" in sec:
                    ck["length"] = _floats(sec["length"])
                if "length_mean" in sec:
                    if sec.get("length_family", "gamma").strip() != "gamma":
                        raise CLIError(f"[{name}] length_mean applies to the gamma family only")
                    shape = float(sec.get("length_shape", c.length[0]))
                    ck["length"] = (shape, float(sec["length_mean"]) / shape)
                if "slope" in sec:
                    ck["slope"] = _floats(sec["slope"])
                if "bias_mu" in sec or "bias_sigma" in sec:
                    ck["bias"] = CenterBiasModel(_floats(sec.get("bias_mu", "0,0")),
                                                 _floats(sec.get("bias_sigma", "0.25,0.25")))
                for key in ("duration_family", "length_family"):
                    if key in sec:
                        ck[key] = sec[key].strip()
                if "fixations_per_trial" in sec:
                    ck["fixations_per_trial"] = float(sec["fixations_per_trial"])
                c = ClassParams(**ck)
            classes.append(c)
        scen = SyntheticScenario(classes=tuple(classes), **kw)
    if seed is not None:
        scen = replace(scen, seed=seed)
    return scen


def cmd_synth(scenario_path, out_dir, seed=None, timeline=False) -> list[Path]:
    from .synth import generate, generate_trial_timeline, write_dataset

    scen = load_scenario(scenario_path, seed)
    trials, ledger = generate(scen)
    samples = generate_trial_timeline(scen)[0] if timeline else None
    write_dataset(out_dir, trials, ledger, samples,
                  header_comment=f"gazeaffect {__version__} synth seed={scen.seed}")
    return sorted(p for p in Path(out_dir).iterdir() if p.is_file())


# -- ingest-validate --------------------------------------------------------

def cmd_ingest_validate(cfg: RunConfig) -> dict:
    trials = _trials(cfg)
    return dataset_summary(trials)


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value (repeatable)")
    common.add_argument("--data-dir", type=Path, help="shortcut for --set paths.data_dir=...")
    common.add_argument("--out", type=Path, help="shortcut for --set paths.output_dir=...")
    common.add_argument("--seed", type=int, help="shortcut for --set run.seed=...")
    common.add_argument("--jobs", type=int, help="worker threads over protocol repetitions")
    common.add_argument("--scenario", help="restrict to an image scenario (e.g. s296)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gazeaffect", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"gazeaffect {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("features", parents=[common], help="compute gaze feature channels")
    f.add_argument("--kinds", default="fdm", help=f"comma-separated subset of: {', '.join(CHANNEL_KINDS)}")

    e = sub.add_parser("eval", parents=[common], help="run the cross-validation protocol")
    e.add_argument("--channels", default="", help="comma-separated gaze kinds or feature-file names")
    e.add_argument("--fuse", action="store_true", help="late-fuse the listed channels")
    e.add_argument("--sweep-observers", default="", metavar="N1,N2,...",
                   help="FDM accuracy for these observer counts")
    e.add_argument("--classemes", metavar="CHANNEL", help="classeme channel for the visual-category analysis")

    sub.add_parser("stats", parents=[common], help="ANOVA, Tukey-Kramer and grouped summaries")

    s = sub.add_parser("synth", parents=[common], help="write a synthetic data set")
    s.add_argument("scenario_file", nargs="?", type=Path, help="scenario INI (defaults used when absent)")
    s.add_argument("--timeline", action="store_true", help="also write raw 60 Hz gaze samples")

    sub.add_parser("ingest-validate", parents=[common], help="parse and check a data directory")
    return p


def _config(args) -> RunConfig:
    overrides = list(args.overrides)
    if args.data_dir is not None:
        overrides.append(f"paths.data_dir={args.data_dir.resolve()}")
    if args.out is not None:
        overrides.append(f"paths.output_dir={args.out.resolve()}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.jobs is not None:
        overrides.append(f"run.jobs={args.jobs}")
    if args.scenario:
        overrides.append(f"paths.scenario={args.scenario}")
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            out = args.out or Path("synthetic")
            written = cmd_synth(args.scenario_file, out, args.seed, args.timeline)
        else:
            cfg = _config(args)
            if args.command == "features":
                written = cmd_features(cfg, _split(args.kinds))
            elif args.command == "eval":
                sweep = [int(v) for v in _split(args.sweep_observers)]
                written = cmd_eval(cfg, _split(args.channels), args.fuse, sweep, args.classemes)
            elif args.command == "stats":
                written = cmd_stats(cfg)
            else:
                print(json.dumps(cmd_ingest_validate(cfg), indent=2, sort_keys=True))
                written = []
        for path in written:
            print(path)
    except (CLIError, ConfigError, ValidationError, MissingMetadata, ValueError, OSError, KeyError) as e:
        msg = " ".join(str(e).split())
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
