"""``chainreid`` command line: synth -> dist -> rerank -> mine -> fuse -> eval.

Every stage reads and writes files, so each intermediate can be inspected.
Failures print a single ``error: <code>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import io
from .chain import ChainConfig, direct_ranking, mine_chains
from .core import ChainReIDError, METRICS, pairwise_distances
from .evaluation import evaluate
from .fusion import fuse
from .rerank import RerankParams, k_reciprocal_rerank, rerank_gallery
from .synth import SynthConfig, generate


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def cmd_synth(args):
    cfg = SynthConfig(
        num_identities=args.identities,
        frames_per_identity=args.frames,
        dim=args.dim,
        center_sigma=args.center_sigma,
        step_sigma=args.step_sigma,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    queries, gallery, truth = generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_embeddings(out / "queries.csv", queries)
    io.write_embeddings(out / "gallery.csv", gallery)
    io.write_truth(out / "truth.csv", truth, queries.ids + gallery.ids)


def cmd_dist(args):
    queries = io.read_embeddings(args.queries)
    gallery = queries if args.gallery is None else io.read_embeddings(args.gallery)
    io.write_matrix(args.out, pairwise_distances(queries, gallery, args.metric))


def cmd_rerank(args):
    if args.out is None and args.gg_out is None:
        raise UsageError("give --out, --gg-out or both")
    params = RerankParams(args.k1, args.k2, args.lambda_value)
    qg, qq, gg = io.read_matrix(args.qg), io.read_matrix(args.qq), io.read_matrix(args.gg)
    if args.out is not None:
        io.write_matrix(args.out, k_reciprocal_rerank(qg, qq, gg, params))
    if args.gg_out is not None:
        io.write_matrix(args.gg_out, rerank_gallery(gg, params))


def cmd_mine(args):
    if args.variant == "direct":
        result = direct_ranking(io.read_matrix(args.qg))
    else:
        cfg = ChainConfig(args.variant, args.window, args.with_ref, args.aggregation)
        if args.gg is None:
            raise UsageError("--gg is required for chain variants")
        result = mine_chains(io.read_matrix(args.qg), io.read_matrix(args.gg), cfg)
    io.write_ranking(args.out, result)


def cmd_fuse(args):
    if len(args.rankings) != len(args.matrices):
        raise UsageError("--rankings and --matrices need the same number of files")
    matrices = [io.read_matrix(p) for p in args.matrices]
    results = [io.read_ranking(p, m.col_ids) for p, m in zip(args.rankings, matrices)]
    io.write_ranking(args.out, fuse(results, matrices, normalize=args.normalize))


def cmd_eval(args):
    result = io.read_ranking(args.ranking)
    truth = io.read_truth(args.truth)
    report = evaluate(result, truth, with_order=False if args.no_order else None)
    sys.stdout.write(report.to_kv() if args.format == "kv" else report.to_text())
    if args.out is not None:
        Path(args.out).write_text(report.to_kv(), encoding="utf-8")


def build_parser() -> Parser:
    parser = Parser(prog="chainreid", description="Chain retrieval pipeline for re-identification rankings.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("synth", help="generate drifting-identity embeddings")
    p.add_argument("--identities", type=int, default=20)
    p.add_argument("--frames", type=int, default=10, help="frames per identity (frame 0 is the query)")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--center-sigma", type=float, default=10.0)
    p.add_argument("--step-sigma", type=float, default=1.0)
    p.add_argument("--noise-sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True, help="writes queries.csv, gallery.csv, truth.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dist", help="pairwise distance matrix between two embedding files")
    p.add_argument("--queries", required=True)
    p.add_argument("--gallery", help="defaults to --queries (self distances)")
    p.add_argument("--metric", choices=sorted(METRICS), default="euclidean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("rerank", help="k-reciprocal re-ranking")
    p.add_argument("--qg", required=True)
    p.add_argument("--qq", required=True)
    p.add_argument("--gg", required=True)
    p.add_argument("--k1", type=int, default=20)
    p.add_argument("--k2", type=int, default=6)
    p.add_argument("--lambda", dest="lambda_value", type=float, default=0.3)
    p.add_argument("--out", help="re-ranked query-gallery matrix")
    p.add_argument("--gg-out", help="re-ranked gallery-gallery matrix")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("mine", help="chain retrieval (or direct ranking)")
    p.add_argument("--qg", required=True)
    p.add_argument("--gg")
    p.add_argument("--variant", choices=["local", "global", "direct"], default="local")
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--with-ref", action="store_true")
    p.add_argument("--aggregation", choices=["min", "mean"], default="min")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("fuse", help="vote fusion of several models' rankings")
    p.add_argument("--rankings", nargs="+", required=True)
    p.add_argument("--matrices", nargs="+", required=True, help="query-gallery matrix per model, same order")
    p.add_argument("--normalize", action="store_true", help="min-max scale matrix rows before tie breaks")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="mAP, CMC and frame-order consistency")
    p.add_argument("--ranking", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--format", choices=["text", "kv"], default="text")
    p.add_argument("--no-order", action="store_true", help="skip order metrics even if frames are known")
    p.add_argument("--out", help="also write the key=value report here")
    p.set_defaults(func=cmd_eval)
    return parser


def _fail(code: str, message: str, status: int) -> int:
    message = " ".join(str(message).split())
    print(f"error: {code}: {message}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except ChainReIDError as exc:
        return _fail(exc.code, exc, 1)
    except (UnicodeDecodeError, csv.Error) as exc:
        return _fail("bad-format", exc, 1)
    except FileNotFoundError as exc:
        return _fail("missing-file", f"{exc.filename}: no such file", 1)
    except OSError as exc:
        return _fail("io", exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
