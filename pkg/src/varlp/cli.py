"""Command-line harness for the desk-scale experiments.

Each subcommand resolves a config (defaults <- optional TOML/JSON file <-
flags), runs one experiment, writes <out>/<name>.csv, a JSON summary, and a
PNG figure (unless --no-plots), prints one PASS/FAIL line per assertion, and
exits 0 iff every assertion passed.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    load_config,
    run_aploc,
    run_cz_oscillation,
    run_equivalence,
    run_maximal_comparison,
    run_modular_failure,
    run_norm,
    run_vector_valued,
    write_result,
)
from .experiments.runners import MODULAR_P_DEFAULT

RUNNERS = {
    "equivalence": run_equivalence,
    "modular-failure": run_modular_failure,
    "maximal": run_maximal_comparison,
    "vector-valued": run_vector_valued,
    "cz": run_cz_oscillation,
    "aploc": run_aploc,
    "norm": run_norm,
}

# Subcommand-specific default overrides (applied only when the flag and the
# config file are silent).
DEFAULTS = {
    "modular-failure": {"p": MODULAR_P_DEFAULT, "w": "one"},
    "maximal": {"p": "const:2", "w": "exp:1", "r": 8},
    "vector-valued": {"p": "step:2:3:0:1", "w": "exp:1", "r": 8},
    "cz": {"p": "step:2:3:0:1", "w": "exp:1", "r": 9},
}


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="TOML or JSON config file")
    sub.add_argument("--L", type=int, help="domain half-width (default 4)")
    sub.add_argument("--r", type=int, help="grid resolution, step 2^-r (default 10)")
    sub.add_argument("--p", help="exponent descriptor, e.g. const:2 or step:2:3:0:1")
    sub.add_argument("--w", help="weight descriptor: one, exp:a, pow:A")
    sub.add_argument("--N", type=int, help="wavelet support parameter (default 3)")
    sub.add_argument("--J", type=int, help="base expansion level (default 0)")
    sub.add_argument("--jmax", type=int, dest="j_max", help="top wavelet level (default r-2)")
    sub.add_argument("--rc", type=int, dest="r_c", help="cascade resolution (default 12)")
    sub.add_argument("--seed", type=int, help="corpus seed (default 0)")
    sub.add_argument("--corpus-size", type=int, dest="corpus_size", help="corpus size (default 20)")
    sub.add_argument("--out", help="output directory (default ./out)")
    sub.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub.add_argument("--check-refinement", action="store_true", dest="check_refinement",
                     help="re-run at r+1 and check band stability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varlp",
        description="weighted variable-exponent Lebesgue space experiments",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("equivalence", help="square-function norm equivalence bands")
    _add_common(sub)

    sub = subs.add_parser("modular-failure", help="modular inequality failure for non-constant exponents")
    _add_common(sub)
    sub.add_argument("--jstar", type=int, dest="j_star", help="projection level (default 0)")

    sub = subs.add_parser("maximal", help="local vs full maximal operator comparison")
    _add_common(sub)
    sub.add_argument("--Ls", dest="maximal_Ls", help="comma-separated half-widths (default 4,6,8)")

    sub = subs.add_parser("vector-valued", help="vector-valued maximal inequality ratios")
    _add_common(sub)
    sub.add_argument("--m", type=int, dest="family_size", help="family size (default 8)")
    sub.add_argument("--trials", type=int, help="number of random families (default 20)")

    sub = subs.add_parser("cz", help="local Calderon-Zygmund kernel checks")
    _add_common(sub)
    sub.add_argument("--kernel", help="hilbert-cut:gamma or wavelet-proj:jstar")

    sub = subs.add_parser("aploc", help="local Muckenhoupt constant over the aligned cube family")
    _add_common(sub)
    sub.add_argument("--stride", type=int, dest="aploc_stride", help="offset stride (default 1)")

    sub = subs.add_parser("norm", help="Luxemburg norm of a catalog function")
    _add_common(sub)
    sub.add_argument("--f", help="function descriptor, e.g. gauss:1:0 or chi:0:1")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    no_plots = args.pop("no_plots", False)
    if isinstance(args.get("maximal_Ls"), str):
        args["maximal_Ls"] = tuple(int(v) for v in args["maximal_Ls"].split(","))
    overrides = {k: v for k, v in args.items() if v is not None}
    for key, value in DEFAULTS.get(command, {}).items():
        overrides.setdefault(key, value)
    cfg = load_config(config_path, **overrides)
    if no_plots:
        cfg.plots = False

    result = RUNNERS[command](cfg)
    paths = write_result(result, cfg.out, plots=cfg.plots)
    for name, ok in result.passes.items():
        print(f"{'PASS' if ok else 'FAIL'}  {result.name}.{name}")
    for kind, path in paths.items():
        print(f"wrote {kind}: {path}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
