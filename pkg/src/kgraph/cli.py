"""``kgraph`` command line.

Exit codes: 0 success, 1 a check failed, 2 input error, 3 ambiguous result,
4 propagation did not stabilize or the exact-sequence search ran out.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import crmod, graphs, kengine
from .crmod import GradedCRModule, ModuleError, UnsupportedTensor
from .graphs import EPGraph, GraphError
from .intlin import AbGroup
from .lessolver import BoundExhausted, LESState, deduce
from .relprop import NotStabilized

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_AMBIGUOUS, EXIT_LIMIT = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def load_graph_file(path: str):
    doc = _load_json(path)
    try:
        return graphs.load_graph(doc)
    except GraphError as e:
        raise InputError(f"{path}: {e}") from None


def load_module_file(path: str) -> GradedCRModule:
    doc = _load_json(path)
    try:
        return GradedCRModule.from_dict(doc)
    except ModuleError as e:
        raise InputError(f"{path}: {e}") from None


def parse_module_spec(text: str) -> GradedCRModule:
    try:
        return crmod.standard_module(text)
    except ModuleError as e:
        raise InputError(str(e)) from None


def _emit(args, data: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    G, inv = load_graph_file(args.path)
    rep = graphs.validate(G, inv)
    cert = graphs.simplicity_certificate(G) if G.rank == 1 else None
    ok = rep.ok and (cert is None or cert.ok)
    lines = [f"checks for {args.path}"]
    for name, passed, detail in rep.checks:
        lines.append(f"  [{'pass' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    if cert is not None:
        lines.append("simplicity certificate" + (" (heuristic)" if cert.heuristic else ""))
        for name, passed, detail in cert.checks:
            lines.append(f"  [{'pass' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
        lines.append("  granted" if cert.ok else "  not granted")
    data = {"ok": ok, "validation": rep.as_dict(), "simplicity": cert.as_dict() if cert else None}
    _emit(args, data, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def _ku_data(G, args):
    ck = kengine.complex_k(G, args.stabilize_window)
    data = {"K0": str(ck.k0), "K1": str(ck.k1), "H": [str(h) for h in ck.homology]}
    if ck.caveat:
        data["caveat"] = ck.caveat
    prop = ck.propagation
    if prop is not None:
        ker = prop.markings["ker"]
        coker = prop.markings["coker"]
        lab = ker.system.label
        data["periods"] = prop.periods
        data["coker_survivors"] = [coker.system.label(g) for g in coker.survivors]
        data["ker_survivors"] = [lab(g) for g in ker.survivors]
        data["kernel_basis"] = [
            {lab(g): v for g, v in zip(ker.system.generators, vec) if v} for vec in prop.kernel_vectors
        ]
        data["log"] = prop.log
    return ck, data


def cmd_ku(args) -> int:
    G, _ = load_graph_file(args.path)
    _, data = _ku_data(G, args)
    lines = [f"complex K-theory of {args.path}", f"  K_0 = {data['K0']}", f"  K_1 = {data['K1']}"]
    if len(data["H"]) > 2 or G.rank > 1:
        lines.append("  homology by degree: " + ", ".join(f"H_{p} = {h}" for p, h in enumerate(data["H"])))
    if "caveat" in data:
        lines.append(f"  note: {data['caveat']}")
    if "log" in data:
        if data["periods"]:
            lines.append(f"propagation stabilized on a window of {data['periods']} periods")
        lines.append(f"  cokernel survivors: {', '.join(data['coker_survivors']) or 'none'}")
        lines.append(f"  kernel survivors: {', '.join(data['ker_survivors']) or 'none'}")
        for vec in data["kernel_basis"]:
            lines.append("  kernel generator: " + ", ".join(f"{k} = {v}" for k, v in vec.items()))
        if args.log:
            Path(args.log).write_text("\n".join(data["log"]) + "\n", encoding="utf-8")
            lines.append(f"derivation log: {args.log} ({len(data['log'])} lines)")
        else:
            lines.append("derivation log:")
            lines += ["  " + x for x in data["log"]]
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def _ko_rank1(G, inv, args):
    ck = kengine.complex_k(G, args.stabilize_window)
    page = kengine.real_rows_rank1(G, inv, args.stabilize_window)
    asm = kengine.assemble(page, [ck.k0, ck.k1], True, args.les_bound)
    return ck, page, asm


def _les_trace(asm, ku) -> list[str]:
    if asm.status != "unique":
        return []
    st = deduce(LESState.from_groups(asm.ko, ku))
    return st.trace


def _forcing(asm) -> list[str]:
    """One rejection reason per (degree, wrong value), fewest differing degrees first."""
    if asm.status != "unique":
        return []
    best: dict = {}
    for cand, why in asm.rejected:
        diff = [j for j in range(8) if cand[j] is not None and cand[j] != asm.ko[j]]
        for j in diff:
            key = (j, cand[j])
            if key not in best or len(diff) < best[key][0]:
                best[key] = (len(diff), why)
    return [f"KO_{j} = {g} rejected: {why}" for (j, g), (_, why) in sorted(best.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))]


def cmd_ko(args) -> int:
    G, inv = load_graph_file(args.path)
    if G.rank == 2 and not isinstance(G, EPGraph):
        return _cmd_ko_rank2(G, inv, args)
    if G.rank != 1:
        raise InputError(f"ko supports rank 1 (finite or eventually periodic) and finite rank 2, got rank {G.rank}")
    ck, page, asm = _ko_rank1(G, inv, args)
    ku = [ck.k0, ck.k1]
    data = {
        "KU": [str(g) for g in ku],
        "page": page.as_dict(),
        "filtrations": [fp.describe() for fp in asm.problems],
        "status": asm.status,
        "KO": [str(g) if g is not None else None for g in asm.ko],
        "candidates": [[str(g) for g in c] for c in asm.candidates],
        "candidate_notes": list(asm.les_notes),
        "forcing": _forcing(asm),
        "les_trace": _les_trace(asm, ku),
    }
    if asm.note:
        data["note"] = asm.note
    lines = [f"real K-theory of {args.path}", "E^2 = E^infinity page:", page.render(), "filtrations:"]
    lines += ["  " + d for d in data["filtrations"]]
    if data["candidate_notes"]:
        lines.append("exact-sequence candidates:")
        lines += ["  " + x for x in data["candidate_notes"]]
    if data["forcing"]:
        lines.append("exact-sequence eliminations:")
        lines += ["  " + x for x in data["forcing"]]
    if asm.status == "unique":
        M = GradedCRModule(tuple(asm.ko), tuple(ku))
        data["module"] = M.as_dict()
        data["matches"] = crmod.identify(M, args.catalog_max_n)
        lines.append(crmod.format_table(M, "result:"))
        if data["matches"]:
            lines.append("matches: " + ", ".join(data["matches"]))
        if args.trace:
            lines.append("exact-sequence trace:")
            lines += ["  " + x for x in data["les_trace"]]
    else:
        lines.append(f"result is {asm.status}; candidate KO tables:")
        for c in data["candidates"]:
            lines.append("  (" + ", ".join(c) + ")")
    if asm.note:
        lines.append(f"note: {asm.note}")
    _emit(args, data, "\n".join(lines))
    if asm.status == "inconsistent":
        return EXIT_FAIL
    return EXIT_OK if asm.status == "unique" else EXIT_AMBIGUOUS


def _cmd_ko_rank2(G, inv, args) -> int:
    page = kengine.real_rows_rank2(G, inv)
    facts = []
    for q in (3, 5, 7):
        facts.append(f"E_{{p,{q}}} = 0 for all p: {all(page.known(p, q) and page.get(p, q).is_zero for p in range(3))}")
    for q in (0, 4, 6):
        st = page.status.get((2, q))
        free = st == kengine.FREE or (st == kengine.COMPUTED and page.get(2, q).is_free)
        facts.append(f"E_{{2,{q}}} torsion-free: {free}")
    d2 = {str(q): page.d2.get(q, "unknown") for q in range(8)}
    data = {"page": page.as_dict(), "facts": facts, "d2": d2, "status": "partial"}
    lines = [f"real spectral rows of {args.path} (rank 2)", page.render(), "facts:"] + ["  " + f for f in facts]
    lines.append("d2 status: " + ", ".join(f"q={q}: {v}" for q, v in d2.items()))
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def _module_for(args) -> tuple[GradedCRModule, str]:
    if args.module:
        return parse_module_spec(args.module), args.module
    if not args.path:
        raise InputError("identify needs a graph file, a module file or --module")
    doc = _load_json(args.path)
    if isinstance(doc, dict) and "ko" in doc:
        try:
            return GradedCRModule.from_dict(doc), args.path
        except ModuleError as e:
            raise InputError(f"{args.path}: {e}") from None
    try:
        G, inv = graphs.load_graph(doc)
    except GraphError as e:
        raise InputError(f"{args.path}: {e}") from None
    if G.rank != 1:
        raise InputError("identify computes modules for rank-1 graphs only; pass a module file otherwise")
    ck, _, asm = _ko_rank1(G, inv, args)
    if asm.status != "unique":
        raise kengine.Ambiguous(asm.candidates)
    return GradedCRModule(tuple(asm.ko), (ck.k0, ck.k1)), args.path


def cmd_identify(args) -> int:
    M, label = _module_for(args)
    matches = crmod.identify(M, args.catalog_max_n)
    r1 = crmod.rank1_obstruction(M)
    r2 = crmod.rank2_obstruction(M)
    data = {"module": M.as_dict(), "matches": matches, "rank1": r1.as_dict(), "rank2": r2.as_dict()}
    lines = [crmod.format_table(M, f"module of {label}:")]
    lines.append("matches: " + (", ".join(matches) if matches else "none"))
    lines.append("  (compared by graded groups; for catalog modules the groups determine the maps)")
    lines.append(f"rank-1 realizability: {r1.status}" + (f" ({r1.witness})" if r1.witness else ""))
    lines.append(f"rank-2 realizability: {r2.status}" + (f" ({r2.witness})" if r2.witness else ""))
    lines += ["  " + t for t in r2.trace]
    _emit(args, data, "\n".join(lines))
    return EXIT_FAIL if "inconsistent" in (r1.status, r2.status) else EXIT_OK


def cmd_product(args) -> int:
    if len(args.paths) < 2:
        raise InputError("product needs at least two graph files")
    loaded = [load_graph_file(p) for p in args.paths]
    for p, (G, _) in zip(args.paths, loaded):
        if isinstance(G, EPGraph):
            raise InputError(f"{p}: eventually-periodic graphs cannot be multiplied; use `kgraph kunneth` on modules")
    G, inv = loaded[0]
    for H, jnv in loaded[1:]:
        G, inv = graphs.product(G, H, inv, jnv)
    doc = graphs.dump_graph(G, inv)
    out = json.dumps(doc, indent=1, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    f, g, _ = inv.partition(G)
    data = {"out": args.out, "rank": G.rank, "vertices": G.size, "fixed": len(f), "graph": doc}
    text = f"rank-{G.rank} product with {G.size} vertices ({len(f)} fixed)"
    text += f" written to {args.out}" if args.out else "\n" + out.rstrip()
    _emit(args, data, text)
    return EXIT_OK


def cmd_kunneth(args) -> int:
    try:
        shifts = [int(x) for x in args.shifts.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--shifts: expected comma-separated integers, got {args.shifts!r}") from None
    if not shifts:
        raise InputError("--shifts must name at least one factor")
    M = load_module_file(args.module_file) if args.module_file else parse_module_spec(args.with_)
    try:
        T = crmod.tensor_free(shifts, M)
    except UnsupportedTensor as e:
        raise InputError(str(e)) from None
    matches = crmod.identify(T, args.catalog_max_n)
    left = " (x) ".join(crmod.suspension_name("K(R)", a) for a in shifts)
    data = {"module": T.as_dict(), "matches": matches, "free_factor": str(crmod.FreeSpec.product(*shifts))}
    lines = [f"{left} = {data['free_factor']}", crmod.format_table(T, "tensor product:")]
    lines.append("matches: " + (", ".join(matches) if matches else "none"))
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def corpus_dir() -> Path:
    return Path(str(resources.files("kgraph") / "corpus"))


def _subset(expected, actual) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and _subset(v, actual[k]) for k, v in expected.items())
    return expected == actual


def cmd_corpus(args) -> int:
    import contextlib
    import io

    base = Path(args.dir) if args.dir else corpus_dir()
    manifest = _load_json(str(base / "manifest.json"))
    results = []
    for case in manifest["cases"]:
        argv = [case["cmd"]] + [str(base / a) if a.endswith(".json") else a for a in case.get("args", [])]
        argv += ["--format", "json", "--stabilize-window", str(args.stabilize_window), "--les-bound", str(args.les_bound)]
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(argv)
        ok = code == case.get("exit", 0)
        detail = "" if ok else f"exit {code}, expected {case.get('exit', 0)}"
        if ok and "expected" in case:
            want = _load_json(str(base / case["expected"]))
            try:
                got = json.loads(buf.getvalue())
            except json.JSONDecodeError:
                got = None
            if not _subset(want, got):
                ok, detail = False, "output differs from fixture"
        results.append({"case": case["name"], "ok": ok, "detail": detail})
    lines = [f"[{'pass' if r['ok'] else 'FAIL'}] {r['case']}" + (f": {r['detail']}" if r["detail"] else "") for r in results]
    npass = sum(r["ok"] for r in results)
    lines.append(f"{npass}/{len(results)} corpus cases pass")
    _emit(args, {"results": results}, "\n".join(lines))
    return EXIT_OK if npass == len(results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _window(text: str) -> int:
    v = _positive(text)
    if v < 3:
        raise argparse.ArgumentTypeError("the stabilization window needs at least 3 periods")
    return v


def _catalog_n(text: str) -> int:
    v = _positive(text)
    if v < 3:
        raise argparse.ArgumentTypeError("--catalog-max-n must be at least 3")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--stabilize-window", type=_window, default=16, metavar="N", help="max periods for propagation (default 16)")
    common.add_argument("--les-bound", type=_positive, default=8, metavar="N", help="free-entry bound in the exact-sequence search (default 8)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--catalog-max-n", type=_catalog_n, default=9, metavar="N", help="largest n of E(n) in the catalog (default 9)")

    p = argparse.ArgumentParser(prog="kgraph", description="K-theory of higher-rank graphs with involution")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("check", parents=[common], help="validate a graph file")
    s.add_argument("path")
    s = sub.add_parser("ku", parents=[common], help="complex K-theory")
    s.add_argument("path")
    s.add_argument("--log", metavar="PATH", help="write the derivation log to PATH")
    s = sub.add_parser("ko", parents=[common], help="real K-theory")
    s.add_argument("path")
    s.add_argument("--trace", action="store_true", help="print the exact-sequence rule trace")
    s = sub.add_parser("identify", parents=[common], help="match a module against the catalog")
    s.add_argument("path", nargs="?")
    s.add_argument("--module", metavar="SPEC", help="standard module such as R, C, E(5), E(5)@6")
    s = sub.add_parser("product", parents=[common], help="cartesian product of finite graphs")
    s.add_argument("paths", nargs="+")
    s.add_argument("--out", metavar="PATH")
    s = sub.add_parser("kunneth", parents=[common], help="tensor a module with free factors")
    s.add_argument("--shifts", required=True, help="comma-separated suspension degrees of K(R) tensor factors")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--with", dest="with_", metavar="SPEC", help="standard module, e.g. E(5)@6")
    g.add_argument("--module-file", metavar="PATH")
    s = sub.add_parser("corpus", parents=[common], help="run the regression corpus")
    s.add_argument("--dir", metavar="PATH", help="corpus directory (default: bundled)")
    return p


COMMANDS = {
    "check": cmd_check,
    "ku": cmd_ku,
    "ko": cmd_ko,
    "identify": cmd_identify,
    "product": cmd_product,
    "kunneth": cmd_kunneth,
    "corpus": cmd_corpus,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (NotStabilized, BoundExhausted) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except kengine.Ambiguous as e:
        print(f"ambiguous: {len(e.candidates)} candidate KO tables", file=sys.stderr)
        for c in e.candidates:
            print("  (" + ", ".join(map(str, c)) + ")", file=sys.stderr)
        return EXIT_AMBIGUOUS


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
