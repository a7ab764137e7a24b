"""``relrep`` command line interface.

Every command writes its outputs atomically plus a ``<out>.manifest.json``
sidecar recording the resolved flags, seeds and input digests.  Errors are
reported as a single JSON line on stderr with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .anchors import DEFAULT_TOPK_SKIP, STRATEGIES, select
from .core import AnchorSet, RelRepError, center
from .io import (atomic_write, read_frequencies, read_id_list, read_space, sha256,
                 write_id_list, write_json, write_space)
from .metrics import alignment_report, latent_similarity_proxy
from .relative import project, project_quantized
from .stitch import (ProxyConfig, StitchConfig, anchor_sweep, make_blobs, proxy_experiment,
                     stitch_classification, stitch_reconstruction)
from .transforms import TransformSpec, apply

log = logging.getLogger("relrep")


class UsageError(RelRepError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _manifest(args, inputs, seeds=None) -> dict:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = time.gmtime(int(epoch)) if epoch else time.gmtime()
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    return {
        "command": args.command,
        "flags": flags,
        "seeds": seeds or {},
        "inputs": {str(p): sha256(p) for p in inputs},
        "tool": f"relrep {__version__}",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", ts),
    }


def _write_manifest(out, args, inputs, seeds=None):
    out = Path(out)
    path = out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")
    write_json(path, _manifest(args, inputs, seeds))


def _load_anchors(space, path) -> AnchorSet:
    return AnchorSet.from_ids(space, read_id_list(path))


def cmd_anchors(args):
    space = read_space(args.inp, args.format)
    freqs = None
    if args.strategy == "topk":
        if not args.freq:
            raise UsageError("anchors: --strategy topk requires --freq FILE")
        freqs = read_frequencies(args.freq)
    anchors = select(space, args.strategy, args.m, args.seed, freqs, args.skip)
    write_id_list(args.out, anchors.ids)
    inputs = [args.inp] + ([args.freq] if args.freq else [])
    _write_manifest(args.out, args, inputs, {"anchor_seed": args.seed})


def cmd_project(args):
    space = read_space(args.inp, args.in_format)
    if args.center:
        space, _ = center(space)
    anchors = _load_anchors(space, args.anchors)
    if args.quantize_threshold:
        rel = project_quantized(space, anchors, args.quantize_threshold)
    else:
        rel = project(space, anchors)
    write_space(args.out, rel.ids, rel.matrix, args.format, columns=anchors.ids)
    _write_manifest(args.out, args, [args.inp, args.anchors])


def _parallel_anchor_ids(src_path, tgt_path):
    a = read_id_list(src_path)
    b = read_id_list(tgt_path or src_path)
    if a != b:
        raise RelRepError("parallel anchor files must list the same ids in the same order")
    return a


def cmd_compare(args):
    src = read_space(args.source, args.format)
    tgt = read_space(args.target, args.format)
    if args.center:
        src, tgt = center(src)[0], center(tgt)[0]
    flags = {"centered": args.center, "relative": args.relative}
    inputs = [args.source, args.target]
    if args.relative:
        if not args.anchors_source:
            raise UsageError("compare: --relative requires --anchors-source")
        ids = _parallel_anchor_ids(args.anchors_source, args.anchors_target)
        src = project(src, AnchorSet.from_ids(src, ids)).as_space(src.name)
        tgt = project(tgt, AnchorSet.from_ids(tgt, ids)).as_space(tgt.name)
        flags["anchors"] = {"m": len(ids), "file": args.anchors_source}
        inputs += [p for p in (args.anchors_source, args.anchors_target) if p]
    report = alignment_report(src, tgt, args.k, flags=flags)
    write_json(args.out, report.to_dict())
    _write_manifest(args.out, args, inputs)


def cmd_proxy(args):
    space = read_space(args.space, args.format)
    ref = read_space(args.reference, args.format)
    if args.center:
        space, ref = center(space)[0], center(ref)[0]
    ids = _parallel_anchor_ids(args.anchors, args.anchors_reference)
    rs = project(space, AnchorSet.from_ids(space, ids))
    rr = project(ref, AnchorSet.from_ids(ref, ids))
    value = latent_similarity_proxy(rs, rr)
    write_json(args.out, {"proxy": value, "n": rs.n, "m": len(ids), "centered": args.center})
    _write_manifest(args.out, args, [args.space, args.reference, args.anchors])


def cmd_transform(args):
    space = read_space(args.inp, args.format)
    spec = TransformSpec.random(space.dim, args.seed, args.scale, args.translate)
    out = apply(space, spec)
    write_space(args.out, out.ids, out.matrix, args.format)
    atomic_write(str(args.out) + ".transform.json", spec.to_json() + "\n")
    _write_manifest(args.out, args, [args.inp], {"transform_seed": args.seed})


def cmd_blobs(args):
    data = make_blobs(args.classes, args.per_class, args.d, args.separation, args.seed,
                      args.spread)
    write_space(args.out, data.space.ids, data.space.matrix, args.format)
    lab = "".join(f"{i},{c}\n" for i, c in zip(data.space.ids, data.labels.tolist()))
    atomic_write(str(args.out) + ".labels.csv", "id,label\n" + lab)
    _write_manifest(args.out, args, [], {"dataset_seed": args.seed})


def _flat_rows(name, report):
    rows = []
    if name in ("classification", "reconstruction"):
        for mode in ("absolute", "relative"):
            for key, val in report[mode].items():
                rows.append((name, mode, key, val))
    elif name == "anchor_sweep":
        for m, res in report.items():
            for key, val in res.items():
                rows.append((name, f"m={m}", key, val))
    elif name == "proxy":
        for r in report["runs"]:
            for key in ("epsilon", "accuracy", "proxy"):
                rows.append((name, f"model{r['model']}", key, r[key]))
        rows.append((name, "all", "pearson", report["pearson"]))
    return rows


def cmd_stitch(args):
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(cfg, dict):
        raise RelRepError("stitch config must be a JSON object")
    unknown = set(cfg) - {"classification", "reconstruction", "proxy", "anchor_sweep"}
    if unknown:
        raise RelRepError(f"unknown stitch config sections: {sorted(unknown)}")
    sections = cfg or {"classification": {}, "reconstruction": {}, "proxy": {}}
    results = {}
    for name, body in sections.items():
        body = dict(body or {})
        if name == "classification":
            results[name] = stitch_classification(StitchConfig.from_dict(body))
        elif name == "reconstruction":
            results[name] = stitch_reconstruction(StitchConfig.from_dict(body))
        elif name == "anchor_sweep":
            ms = body.pop("ms", [4, 16, 64, 256])
            sweep = anchor_sweep(StitchConfig.from_dict(body), ms)
            results[name] = {str(m): v for m, v in sweep.items()}
        elif name == "proxy":
            results[name] = proxy_experiment(ProxyConfig.from_dict(body))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "run", "metric", "value"])
    for name, rep in results.items():
        write_json(out / f"{name}.json", rep)
        w.writerows((a, b, c, repr(float(v))) for a, b, c, v in _flat_rows(name, rep))
    atomic_write(out / "runs.csv", buf.getvalue())
    _write_manifest(out, args, [args.config])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relrep", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"relrep {__version__}")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fmt(sp):
        sp.add_argument("--format", choices=("vec", "csv"), default=None,
                        help="file format (default: from extension, .vec otherwise)")

    s = sub.add_parser("anchors", help="select anchors and write their ids")
    s.add_argument("--strategy", choices=STRATEGIES, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--freq", help="id,count CSV (topk only)")
    s.add_argument("--skip", type=int, default=DEFAULT_TOPK_SKIP,
                   help="most-frequent ids to drop before topk (default: %(default)s)")
    fmt(s)
    s.set_defaults(func=cmd_anchors)

    s = sub.add_parser("project", help="write the relative representation of a space")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--in-format", choices=("vec", "csv"), default=None)
    s.add_argument("--anchors", required=True)
    s.add_argument("--quantize-threshold", type=float, default=0.0)
    s.add_argument("--center", action=argparse.BooleanOptionalAction, default=False)
    s.add_argument("--out", required=True)
    fmt(s)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("compare", help="Jaccard@k / MRR / Cosine between two spaces")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--relative", action="store_true")
    s.add_argument("--anchors-source")
    s.add_argument("--anchors-target")
    s.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--out", required=True)
    fmt(s)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("proxy", help="latent similarity of a space to a reference")
    s.add_argument("--space", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--anchors", required=True)
    s.add_argument("--anchors-reference")
    s.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--out", required=True)
    fmt(s)
    s.set_defaults(func=cmd_proxy)

    s = sub.add_parser("transform", help="apply a seeded rotation/reflection, scale and shift")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--translate", type=float, default=0.0)
    s.add_argument("--out", required=True)
    fmt(s)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("stitch", help="run stitching experiments from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stitch)

    s = sub.add_parser("blobs", help="generate a labelled Gaussian-blob space")
    s.add_argument("--classes", type=int, required=True)
    s.add_argument("--per-class", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--separation", type=float, required=True)
    s.add_argument("--spread", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    fmt(s)
    s.set_defaults(func=cmd_blobs)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=args.log_level.upper(),
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except UsageError as e:
        print(json.dumps({"error": "usage", "message": str(e)}), file=sys.stderr)
        return 2
    except (RelRepError, OSError, json.JSONDecodeError, np.linalg.LinAlgError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
