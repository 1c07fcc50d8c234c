"""Command line entry point: ``tisvm experiment | pd-report | toy-demo | make-dataset``.

Configuration files are INI with the sections ``[data]``, ``[experiment]``,
``[kernel]``, ``[pd]`` and ``[output]``; any key can be overridden on the
command line with ``--set section.key=value``.  Lists are comma separated and
image sizes are written ``64x64``.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import MISSING, fields
from pathlib import Path

from .data import DataError, load_idx, make_rotated, make_translated, save_dataset, write_idx, to_idx_bytes
from .experiments import (DataConfig, ExperimentConfig, KernelParams, PdReportConfig,
                          boundary_crossings, demo_toy_example, pd_report_csv, run_experiment,
                          run_pd_report)

log = logging.getLogger("tisvm")

SECTIONS = {"data": DataConfig, "experiment": ExperimentConfig, "kernel": KernelParams,
            "pd": PdReportConfig}


def _size(text):
    a, _, b = text.lower().partition("x")
    return (int(a), int(b or a))


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "none", "auto", "inf") else float(text)


def _optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


# value parsers keyed by (section, key); anything absent falls back to the default's type
PARSERS = {
    ("data", "canvas"): _size,
    ("experiment", "methods"): lambda t: tuple(_split(t)),
    ("experiment", "train_sizes"): lambda t: tuple(int(v) for v in _split(t)),
    ("experiment", "C"): _optional_float,
    ("kernel", "gamma"): _optional_float,
    ("kernel", "translation_window"): _optional_int,
    ("pd", "methods"): lambda t: tuple(_split(t)),
    ("pd", "gaussian_dims"): lambda t: tuple(_size(v) for v in _split(t)),
}


def _convert(section, key, text, default):
    if (section, key) in PARSERS:
        return PARSERS[(section, key)](text)
    if isinstance(default, bool):
        return _bool(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def _section_kwargs(parser, section):
    cls = SECTIONS[section]
    known = {f.name: f for f in fields(cls)}
    out = {}
    if not parser.has_section(section):
        return out
    for key, text in parser.items(section):
        # configparser lower-cases keys; match case-insensitively
        name = next((n for n in known if n.lower() == key), None)
        if name is None:
            raise ValueError(f"unknown key {section}.{key}")
        f = known[name]
        default = None if f.default is MISSING else f.default
        out[name] = _convert(section, name, text, default)
    return out


def read_config(path=None, overrides=()):
    """Parse an INI file plus ``section.key=value`` overrides into a ConfigParser."""
    parser = configparser.ConfigParser()
    parser.optionxform = str.lower
    if path:
        if not parser.read(path):
            raise FileNotFoundError(path)
    for item in overrides:
        dotted, sep, value = item.partition("=")
        section, dot, key = dotted.partition(".")
        if not sep or not dot:
            raise ValueError(f"override must look like section.key=value: {item!r}")
        if section not in SECTIONS and section != "output":
            raise ValueError(f"unknown section {section!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.lower(), value)
    return parser


def build_experiment_config(parser):
    kw = _section_kwargs(parser, "experiment")
    kw["data"] = DataConfig(**_section_kwargs(parser, "data"))
    kw["kernel"] = KernelParams(**_section_kwargs(parser, "kernel"))
    return ExperimentConfig(**kw)


def build_pd_config(parser):
    kw = _section_kwargs(parser, "pd")
    data = _section_kwargs(parser, "data")
    kw["data"] = DataConfig(**data) if data else None
    kw["kernel"] = KernelParams(**_section_kwargs(parser, "kernel"))
    return PdReportConfig(**kw)


def _output(parser, key, cli_value):
    if cli_value:
        return cli_value
    if parser.has_section("output"):
        return parser.get("output", key, fallback="") or None
    return None


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
        log.info("wrote %s", path)


def cmd_experiment(args):
    parser = read_config(args.config, args.set)
    config = build_experiment_config(parser)
    table = run_experiment(config)
    csv_path = _output(parser, "csv", args.csv)
    if csv_path:
        _write(csv_path, table.to_csv())
    text = table.to_text()
    _write(_output(parser, "table", args.table), text)
    return 0


def cmd_pd_report(args):
    parser = read_config(args.config, args.set)
    config = build_pd_config(parser)
    rows = run_pd_report(config)
    _write(_output(parser, "csv", args.csv), pd_report_csv(rows))
    return 0


def cmd_toy_demo(args):
    result = demo_toy_example(C=args.C)
    sys.stdout.write(result.report())
    crossings = boundary_crossings(result.grid, result.scores["augmented"])
    worst = max((abs(p + q - 5.0) for p, q in crossings), default=0.0)
    sys.stdout.write(f"augmented boundary crossings on grid: {len(crossings)}, "
                     f"max |x(1) + x(2) - 5| = {worst:.2e}\n")
    if args.grid:
        _write(args.grid, result.grid_csv())
    return 0


def cmd_make_dataset(args):
    base = load_idx(args.images, args.labels, transpose=args.transpose)
    if args.kind == "translated":
        out = make_translated(base, _size(args.canvas), args.noise_sigma, args.seed)
    else:
        out = make_rotated(base, args.noise_sigma, args.seed)
    if args.idx:
        # IDX stores bytes, so clip to [0, 1] and quantize to the 1/255 grid
        images, labels = to_idx_bytes(type(out)(out.images.clip(0.0, 1.0), out.labels, out.classes,
                                                out.provenance))
        write_idx(f"{args.out}-images-idx3-ubyte.gz", images)
        write_idx(f"{args.out}-labels-idx1-ubyte.gz", labels)
    else:
        save_dataset(args.out, out)
    log.info("%s: %d images of %s", args.kind, len(out), out.shape)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="tisvm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def config_args(sp):
        sp.add_argument("config", nargs="?", help="INI configuration file")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a configuration value (repeatable)")
        sp.add_argument("--csv", help="CSV output path ('-' for stdout)")

    e = sub.add_parser("experiment", help="accuracy table over methods and train sizes")
    config_args(e)
    e.add_argument("--table", help="aligned-text table path (default stdout)")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("pd-report", help="positive-definiteness sweeps and thresholds")
    config_args(r)
    r.set_defaults(func=cmd_pd_report)

    t = sub.add_parser("toy-demo", help="two-point example: augmentation vs invariant kernels")
    t.add_argument("--C", type=float, default=None, help="box constraint (default: hard margin)")
    t.add_argument("--grid", help="write the 21x21 decision-value grid as CSV")
    t.set_defaults(func=cmd_toy_demo)

    d = sub.add_parser("make-dataset", help="build a Translated or Rotated dataset")
    d.add_argument("kind", choices=("translated", "rotated"))
    d.add_argument("images")
    d.add_argument("labels")
    d.add_argument("out", help="cache file path, or a path prefix with --idx")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--noise-sigma", type=float, default=0.1)
    d.add_argument("--canvas", default="64x64")
    d.add_argument("--transpose", action="store_true", help="input is stored transposed (EMNIST)")
    d.add_argument("--idx", action="store_true", help="write clipped, quantized IDX files")
    d.set_defaults(func=cmd_make_dataset)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, DataError, OSError) as exc:
        print(f"tisvm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
