"""
Command-line front end.

Exit codes: 0 success, 1 bad input (parse or usage), 2 numerical failure,
3 identifiability failure. Warnings go to standard error.
"""

import argparse
import sys
import warnings

import numpy as np

from . import io as tio
from .asymptotics import all_mode_asv, expected_limit_mdi, tfobi_asv
from .errors import IdentifiabilityError, NumericalError, ParseError
from .estimators import WHITENINGS, recover_sources, tfobi_fit
from .metrics import kron_mdi
from .simulation.studies import RUNNERS, make_config

EXIT_PARSE, EXIT_NUMERICAL, EXIT_IDENTIFIABILITY = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is our numerical-failure code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _variants(text, r):
    if text is None:
        return 0
    v = _int_list(text)
    if len(v) == 1:
        return v[0]
    if len(v) != r:
        raise UsageError(f"--variant needs 1 or {r} values, got {len(v)}")
    return v


def _print_matrix(M, out):
    for row in np.atleast_2d(M):
        print(" ".join(f"{x:.6g}" for x in row), file=out)


def cmd_fit(args, out):
    X = tio.read_tensor_sample(args.input)
    model = tfobi_fit(X, _variants(args.variant, X.ndim - 1), whitening=args.whitening)
    tio.write_model(args.out, model)
    print(f"fitted {model.order}-mode model on n={model.n}, dims {model.dims}", file=out)


def cmd_transform(args, out):
    model = tio.read_model(args.model)
    X = tio.read_tensor_sample(args.input)
    tio.write_tensor_sample(args.out, recover_sources(model, X))
    print(f"wrote {X.shape[0]} recovered source tensors to {args.out}", file=out)


def cmd_mdi(args, out):
    if len(args.gamma) != len(args.omega):
        raise UsageError("need the same number of --gamma and --omega files")
    gammas = [tio.read_matrix(p) for p in args.gamma]
    omegas = [tio.read_matrix(p) for p in args.omega]
    res = kron_mdi(gammas, omegas, args.n)
    print(f"mdi {float(res.d)!r}", file=out)
    print(f"transformed {float(res.transformed)!r}", file=out)


def cmd_asv(args, out):
    profile = tio.read_grid_spec(args.grid)
    r = len(profile.dims)
    variants = _variants(args.variant, r)
    if args.mode is not None:
        if not 1 <= args.mode <= r:
            raise UsageError(f"--mode must be in 1..{r}, got {args.mode}")
        v = variants if np.isscalar(variants) else variants[args.mode - 1]
        tables = [tfobi_asv(profile, args.mode, v)]
    else:
        tables = all_mode_asv(profile, variants)
    for t in tables:
        print(f"mode {t.mode} variant {t.variant}", file=out)
        _print_matrix(t.asv, out)
        print(f"E {float(t.e_sum)!r}", file=out)
    if args.mode is None:
        print(f"limit {float(expected_limit_mdi(tables, profile.dims))!r}", file=out)


def cmd_study(args, out):
    mapping = tio.read_config(args.config) if args.config else {}
    try:
        cfg = make_config(
            args.study, mapping, seed=args.seed, reps=args.reps, workers=args.workers,
            **({"ns": args.n} if args.n and args.study != "classify" else {}),
        )
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc.args[0] if exc.args else exc)) from None
    result = RUNNERS[args.study](cfg)
    if args.out:
        result.to_csv(args.out)
    else:
        out.write(result.to_csv())
    print(f"{len(result.rows)} rows", file=sys.stderr)


def cmd_semeion(args, out):
    images, labels = tio.read_semeion(args.input)
    images, labels = tio.filter_digits(images, labels, args.digits)
    if labels.size == 0:
        raise UsageError(f"no records with digits {args.digits}")
    tio.write_tensor_sample(args.out, images)
    label_path = args.labels or args.out + ".labels.csv"
    tio.write_labels(label_path, labels)
    counts = ", ".join(f"{d}: {int(np.sum(labels == d))}" for d in args.digits)
    print(f"{labels.size} records ({counts})", file=out)


def build_parser():
    p = _Parser(prog="tfobi", description="Tensor FOBI unmixing, diagnostics and simulation studies.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fit", help="fit TFOBI to a tensor sample file")
    s.add_argument("input")
    s.add_argument("--variant", help="FOBI functional per mode, e.g. 0 or 0,1")
    s.add_argument("--whitening", choices=WHITENINGS, default="joint")
    s.add_argument("--out", required=True, help="model file to write")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("transform", help="recover sources with a fitted model")
    s.add_argument("model")
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("mdi", help="minimum distance index of a Kronecker unmixing estimate")
    s.add_argument("--gamma", nargs="+", required=True, help="unmixing matrix files, mode order")
    s.add_argument("--omega", nargs="+", required=True, help="mixing matrix files, mode order")
    s.add_argument("--n", type=int, default=1, help="sample size for the transformed index")
    s.set_defaults(func=cmd_mdi)

    s = sub.add_parser("asv", help="asymptotic variances for a source grid spec")
    s.add_argument("grid")
    s.add_argument("--mode", type=int)
    s.add_argument("--variant")
    s.set_defaults(func=cmd_asv)

    s = sub.add_parser("study", help="run a simulation study and emit CSV")
    s.add_argument("study", choices=sorted(RUNNERS))
    s.add_argument("--config", help="key=value config file")
    s.add_argument("--seed", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--n", type=_int_list, help="comma-separated sample sizes")
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("semeion", help="extract digits from semeion-format data")
    s.add_argument("input")
    s.add_argument("--digits", type=_int_list, default=(3, 8))
    s.add_argument("--out", required=True, help="tensor sample file to write")
    s.add_argument("--labels", help="label CSV (default: OUT.labels.csv)")
    s.set_defaults(func=cmd_semeion)
    return p


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _warn_to_stderr
        try:
            args.func(args, out)
        except (ParseError, UsageError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except IdentifiabilityError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IDENTIFIABILITY
        except NumericalError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
    return 0


if __name__ == "__main__":
    sys.exit(main())
