"""Command-line entry point: ``abld <command> ...``.

Exit codes: 0 success, 1 failed check (gradcheck, bench --check),
2 usage error, 3 bad input data, 4 numerical failure.

All randomness comes from ``--seed`` (env ``ABLD_SEED``); BLAS threads are
capped by ``--threads`` (env ``ABLD_THREADS``).
"""

import argparse
import csv
import json
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from .exceptions import DomainError

EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x):
    return repr(float(x))


def cmd_gen(args):
    from .data import WishartSpec, wishart_synth
    from .io import write_dataset

    ds = wishart_synth(WishartSpec(args.k, args.d, args.n_per, args.dof, args.seed))
    write_dataset(args.output, ds.samples, ds.labels)
    print(f"wrote {len(ds)} matrices of size {ds.dim} to {args.output}")
    return 0


def _labeled(path):
    from .io import read_dataset

    ds = read_dataset(path)
    if ds.labels is None:
        raise DomainError(f"{path} has no labels")
    return ds


def cmd_train(args):
    from .iddl import IDDLClassifier
    from .io import save_classifier

    ds = _labeled(args.dataset)
    clf = IDDLClassifier(
        n_atoms=args.n_atoms,
        loss=args.loss,
        tying=args.tying,
        gamma=args.gamma,
        margin=args.margin,
        ablation=args.ablation,
        init_params=args.init,
        orthant=args.orthant,
        max_iter=args.max_iter,
        random_state=args.seed,
    ).fit(ds.samples, ds.labels)
    report = clf.report_.to_dict()
    report["seed"] = args.seed
    save_classifier(args.output, clf, {"seed": args.seed})
    if args.report:
        _write_json(args.report, report)
    if args.trajectory:
        rows = []
        for t, (a, b) in enumerate(zip(clf.report_.alpha_trajectory, clf.report_.beta_trajectory)):
            rows += [(t + 1, k + 1, _fmt(ak), _fmt(bk)) for k, (ak, bk) in enumerate(zip(a, b))]
        _write_csv(args.trajectory, ["outer", "atom", "alpha", "beta"], rows)
    print(f"train accuracy {clf.score(ds.samples, ds.labels):.4f}")
    print(f"final objective {clf.report_.final_objective:.6g} ({clf.report_.termination})")
    return 0


def cmd_predict(args):
    from .io import load_classifier, read_dataset

    clf = load_classifier(args.model)
    ds = read_dataset(args.dataset)
    pred = clf.predict(ds.samples)
    if ds.labels is not None:
        rows = [(i, int(p), int(t)) for i, (p, t) in enumerate(zip(pred, ds.labels))]
        header = ["index", "predicted", "true"]
    else:
        rows = [(i, int(p)) for i, p in enumerate(pred)]
        header = ["index", "predicted"]
    if args.output:
        _write_csv(args.output, header, rows)
    if ds.labels is not None:
        print(f"accuracy {np.mean(pred == ds.labels):.4f}")
    return 0


def cmd_cluster(args):
    from .clustering import IdcOptions, ab_kmeans, f1_score, karcher_kmeans, le_kmeans
    from .io import read_dataset

    ds = read_dataset(args.dataset)
    report = None
    if args.alg == "ab-kmeans":
        opts = IdcOptions(mu=args.mu, max_outer=args.max_iter, orthant=args.orthant)
        part, report = ab_kmeans(ds.samples, args.k, args.variant, args.seed, opts)
    elif args.alg == "le-kmeans":
        part = le_kmeans(ds.samples, args.k, args.seed)
    else:
        part = karcher_kmeans(ds.samples, args.k, args.seed, args.max_iter)
    if args.output:
        # cluster ids are written 1-based
        _write_csv(args.output, ["index", "cluster"],
                   [(i, int(z) + 1) for i, z in enumerate(part.assignments)])
    if args.trace and report is not None:
        _write_csv(args.trace, ["outer", "block", "value"],
                   [(e["outer"], e["block"], _fmt(e["value"])) for e in report.objective_trace])
    if report is not None:
        p = part.params
        print(f"alpha {p.alpha:.6g} beta {p.beta:.6g} outer {report.n_outer} ({report.termination})")
    if ds.labels is not None:
        print(f"F1 {f1_score(part.assignments, ds.labels):.4f}")
    return 0


def cmd_sweep(args):
    from sklearn.model_selection import train_test_split

    from .iddl import PARAM_GRID, init_dictionary, param_sweep

    ds = _labeled(args.dataset)
    tr, te = train_test_split(
        np.arange(len(ds)), test_size=args.test_fraction, random_state=args.seed, stratify=ds.labels
    )
    train, test = ds.subset(tr), ds.subset(te)
    n_atoms = args.n_atoms or 5 * train.n_classes
    D = init_dictionary(train, n_atoms, "N", args.seed)
    grid = args.grid or list(PARAM_GRID)
    sign = 1.0 if args.orthant == "positive" else -1.0
    grid = [sign * g for g in grid]
    rows = param_sweep(train, test, D, grid, grid, args.gamma)
    _write_csv(args.output, ["alpha", "beta", "train_loss", "test_accuracy"],
               [(_fmt(r["alpha"]), _fmt(r["beta"]), _fmt(r["train_loss"]), _fmt(r["test_accuracy"]))
                for r in rows])
    best = max(rows, key=lambda r: r["test_accuracy"])
    print(f"best alpha {best['alpha']:g} beta {best['beta']:g} accuracy {best['test_accuracy']:.4f}")
    return 0


def cmd_gradcheck(args):
    from .audit import gradient_audit

    report = gradient_audit(seed=args.seed, trials=args.trials)
    for name, err in sorted(report.errors.items()):
        print(f"{name:<22} {err:.3e} {'ok' if err <= report.tol else 'FAIL'}")
    if args.output:
        _write_json(args.output, report.to_dict())
    return 0 if report.ok else EXIT_CHECK


def cmd_bench(args):
    from .bench import run_bench, slope_checks

    rows = run_bench(seed=args.seed, n_samples=args.n_samples, repeats=args.repeats,
                     threads=args.threads)
    if args.output:
        _write_csv(args.output, ["kind", "d", "n_atoms", "n_samples", "seconds"],
                   [(r.kind, r.d, r.n_atoms, r.n_samples, _fmt(r.seconds)) for r in rows])
    s = slope_checks(rows)
    print(f"slope vs d {s['slope_d']:.3f} ({'ok' if s['slope_d_ok'] else 'out of range'})")
    print(f"slope vs n {s['slope_n']:.3f} ({'ok' if s['slope_n_ok'] else 'out of range'})")
    if args.check and not (s["slope_d_ok"] and s["slope_n_ok"]):
        return EXIT_CHECK
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env_int(name, default):
    val = os.environ.get(name)
    return int(val) if val not in (None, "") else default


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_env_int("ABLD_SEED", 0))
    common.add_argument("--threads", type=int, default=_env_int("ABLD_THREADS", 1))

    p = _Parser(prog="abld", description="Divergence learning on SPD matrices")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="synthetic Wishart dataset")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n-per", type=int, required=True)
    g.add_argument("--dof", type=int, default=None)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", parents=[common], help="train an IDDL classifier")
    t.add_argument("dataset")
    t.add_argument("--loss", choices=("ridge", "ssvm"), default="ridge")
    t.add_argument("--tying", choices=("S", "V", "N", "A", "B"), default="V")
    t.add_argument("--n-atoms", type=int, default=None)
    t.add_argument("--ablation", choices=("joint", "fix_atoms", "fix_params"), default="joint")
    t.add_argument("--gamma", type=float, default=1e-3)
    t.add_argument("--margin", type=float, default=1.0)
    t.add_argument("--init", choices=("burg", "grid"), default="burg")
    t.add_argument("--orthant", choices=("positive", "negative"), default="positive")
    t.add_argument("--max-iter", type=int, default=50)
    t.add_argument("-o", "--output", required=True, help="model file (.npz)")
    t.add_argument("--report", help="training report JSON")
    t.add_argument("--trajectory", help="alpha/beta trajectory CSV")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", parents=[common], help="predict with a saved model")
    pr.add_argument("model")
    pr.add_argument("dataset")
    pr.add_argument("-o", "--output", help="labels CSV")
    pr.set_defaults(func=cmd_predict)

    c = sub.add_parser("cluster", parents=[common], help="cluster a dataset")
    c.add_argument("dataset")
    c.add_argument("--alg", choices=("ab-kmeans", "le-kmeans", "karcher"), default="ab-kmeans")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--variant", choices=("E", "NE"), default="E")
    c.add_argument("--mu", type=float, default=1.0)
    c.add_argument("--orthant", choices=("positive", "negative"), default="positive")
    c.add_argument("--max-iter", type=int, default=100)
    c.add_argument("-o", "--output", help="assignments CSV (1-based clusters)")
    c.add_argument("--trace", help="objective trace CSV")
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", parents=[common], help="accuracy over an (alpha, beta) grid")
    s.add_argument("dataset")
    s.add_argument("--n-atoms", type=int, default=None)
    s.add_argument("--gamma", type=float, default=1e-3)
    s.add_argument("--grid", type=float, nargs="+", default=None)
    s.add_argument("--orthant", choices=("positive", "negative"), default="positive")
    s.add_argument("--test-fraction", type=float, default=0.3)
    s.add_argument("-o", "--output", required=True, help="heatmap CSV")
    s.set_defaults(func=cmd_sweep)

    gc = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient audit")
    gc.add_argument("--trials", type=int, default=20)
    gc.add_argument("-o", "--output", help="report JSON")
    gc.set_defaults(func=cmd_gradcheck)

    b = sub.add_parser("bench", parents=[common], help="gradient timing vs d and atom count")
    b.add_argument("--n-samples", type=int, default=200)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--check", action="store_true", help="exit 1 if a slope is out of range")
    b.add_argument("-o", "--output", help="timings CSV")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    from .exceptions import DegenerateLogArgument, NonConvergence, SingularSystem
    from .io import DatasetFormatError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except (DatasetFormatError, DomainError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"abld: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonConvergence, SingularSystem, DegenerateLogArgument, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"abld: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"abld: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
