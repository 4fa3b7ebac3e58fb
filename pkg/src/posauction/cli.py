"""Command-line front end.

Exit status: 0 success, 1 a check found a violation, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from typing import Any, Callable, Optional, Sequence

from . import oracle
from .core import AuctionError, AuctionInstance, BidProfile, Outcome, TooLarge
from .equilibrium import check_envy_free, check_nash, construct_equilibrium_bids
from .general_bids import run_general_auction, vcg_price_formula
from .generate import random_bid_matrix, random_generic_prefix_instance, random_prefix_instance
from .io import InstanceDocument, load_document
from .mechanisms import (
    MECHANISMS,
    check_min_pay,
    run_gsp,
    run_range_topdown,
    run_topdown,
    run_topdown_flawed,
)
from .vcg import solve_max_matching, vcg_outcome

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class Report:
    """Collects text lines and a JSON payload; prints one of them."""

    def __init__(self, command: str) -> None:
        self.lines: list[str] = []
        self.payload: dict[str, Any] = {"command": command}

    def text(self, line: str = "") -> None:
        self.lines.append(line)

    def emit(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2) + "\n"
        return "\n".join(self.lines) + "\n"


def outcome_table(outcome: Outcome) -> list[str]:
    rows = [("slot", "bidder", "ppc", "total")]
    for j in range(1, outcome.k + 1):
        if j in outcome.assignment:
            rows.append((str(j), str(outcome.assignment[j]), str(outcome.ppc[j]), str(outcome.total_price[j])))
        else:
            rows.append((str(j), "FILLER" if j in outcome.fillers else "-", "-", "-"))
    widths = [max(len(r[c]) for r in rows) for c in range(4)]
    return ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def _outcome(report: Report, outcome: Outcome, key: str = "outcome") -> None:
    report.lines.extend(outcome_table(outcome))
    report.payload[key] = outcome.to_dict()


def _mechanism_command(run: Callable[[AuctionInstance, BidProfile], Outcome]):
    def command(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
        _outcome(report, run(doc.instance, doc.declared))
        return EXIT_OK

    return command


def cmd_flawed(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    _outcome(report, run_topdown_flawed(doc.instance, doc.declared, args.variant))
    return EXIT_OK


def cmd_vcg(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    result = vcg_outcome(doc.instance, doc.bids)
    report.text(f"OPT = {result.opt_value}")
    _outcome(report, result.to_outcome())
    report.text()
    report.text("bidder  OPT_-i  vcg_price")
    for i, _ in result.allocation.pairs:
        report.text(f"{i}  {result.opt_minus[i]}  {result.prices[i]}")
    report.payload["vcg"] = result.to_dict()
    return EXIT_OK


def cmd_equilibrium(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    eq = construct_equilibrium_bids(doc.instance)
    report.text("bidder  opt_slot  bid  stated_cutoff")
    for i, d in eq.profile.declarations.items():
        slot = eq.slot_of.get(i)
        report.text(f"{i}  {slot if slot is not None else '-'}  {d.bid}  {d.stated_cutoff}")
    if eq.degenerate:
        report.text("note: all VCG prices are zero; the top bid is arbitrary")
    report.text()
    out = run_topdown(doc.instance, eq.profile)
    _outcome(report, out)
    vcg_out = eq.vcg.to_outcome()
    matches = dict(out.assignment) == dict(vcg_out.assignment) and dict(out.total_price) == dict(
        vcg_out.total_price
    )
    report.text(f"matches VCG: {'yes' if matches else 'no'}")
    report.payload["equilibrium"] = eq.to_dict()
    report.payload["matches_vcg"] = matches
    return EXIT_OK if matches else EXIT_VIOLATION


def cmd_check_envy(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    out = run_topdown(doc.instance, doc.declared)
    _outcome(report, out)
    env = check_envy_free(doc.instance, out)
    report.text()
    report.text("envy-free" if env.envy_free else "envy found:")
    for v in env.violations:
        report.text(f"  bidder {v.envier} envies slot {v.target_slot}: {v.target_utility} > {v.current_utility}")
    report.payload["envy"] = env.to_dict()
    return EXIT_OK if env.envy_free else EXIT_VIOLATION


def cmd_check_nash(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    nash = check_nash(doc.instance, doc.declared)
    report.text("bidder  baseline  best  bid  stated_cutoff")
    for d in nash.deviations:
        bid = "withdraw" if d.bid is None else str(d.bid)
        cut = "-" if d.stated_cutoff is None else str(d.stated_cutoff)
        report.text(f"{d.bidder}  {d.baseline}  {d.best}  {bid}  {cut}")
    report.text("equilibrium" if nash.equilibrium else "not an equilibrium")
    report.payload["nash"] = nash.to_dict()
    return EXIT_OK if nash.equilibrium else EXIT_VIOLATION


def cmd_check_minpay(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    mp = check_min_pay(doc.instance, doc.declared, args.mechanism)
    report.text(f"mechanism: {args.mechanism}")
    report.text("bidder  slot  charged  retaining  status")
    for e in mp.entries:
        report.text(f"{e.bidder}  {e.slot}  {e.charged_ppc}  {e.retaining_bid}  {e.violation or 'ok'}")
    report.payload["minpay"] = mp.to_dict()
    return EXIT_OK if mp.ok else EXIT_VIOLATION


def cmd_general(doc: InstanceDocument, args: argparse.Namespace, report: Report) -> int:
    if doc.bid_matrix is None:
        raise AuctionError("document has no bid_matrix")
    out = run_general_auction(doc.bid_matrix, doc.instance.slots)
    _outcome(report, out)
    formula = vcg_price_formula(doc.bid_matrix, doc.instance.slots)
    agree = all(out.total_price[j] == formula[i] for j, i in out.assignment.items())
    report.text(f"VCG formula agrees: {'yes' if agree else 'no'}")
    report.payload["vcg_formula_prices"] = {str(i): str(p) for i, p in formula.items()}
    report.payload["agrees"] = agree
    return EXIT_OK if agree else EXIT_VIOLATION


def _verify_instance(doc: InstanceDocument, report: Report) -> bool:
    inst = doc.instance
    ok = True
    checks = [("valuations", None)]
    if doc.bids is not None:
        checks.append(("declared bids", doc.bids))
    for name, bids in checks:
        solver = solve_max_matching(inst, bids).value
        brute = oracle.brute_force_matching(inst, bids).value
        good = solver == brute
        ok &= good
        report.text(f"matching value ({name}): solver {solver}, brute force {brute}: {'ok' if good else 'MISMATCH'}")
    if inst.is_prefix and doc.declared.is_prefix:
        nash = check_nash(inst, doc.declared)
        for d in nash.deviations:
            try:
                brute = oracle.exhaustive_deviation_check(inst, doc.declared, d.bidder)
            except TooLarge:
                report.text(f"bidder {d.bidder}: deviation grid too large, skipped")
                continue
            good = brute == d.best
            ok &= good
            report.text(
                f"bidder {d.bidder} best deviation: breakpoints {d.best}, exhaustive {brute}: "
                f"{'ok' if good else 'MISMATCH'}"
            )
    return ok


def _verify_suite(seed: int, trials: int, report: Report) -> bool:
    rng = random.Random(seed)
    counts = {"matching": [0, 0], "equilibrium": [0, 0], "general": [0, 0]}
    for _ in range(trials):
        inst = random_prefix_instance(rng, max_bidders=7)
        counts["matching"][1] += 1
        counts["matching"][0] += solve_max_matching(inst).value == oracle.brute_force_matching(inst).value

        inst = random_generic_prefix_instance(rng)
        eq = construct_equilibrium_bids(inst)
        out = run_topdown(inst, eq.profile)
        vcg_out = eq.vcg.to_outcome()
        good = (
            dict(out.assignment) == dict(vcg_out.assignment)
            and dict(out.total_price) == dict(vcg_out.total_price)
            and check_envy_free(inst, out).envy_free
            and check_nash(inst, eq.profile).equilibrium
        )
        counts["equilibrium"][1] += 1
        counts["equilibrium"][0] += good

        matrix, slots = random_bid_matrix(rng)
        auction = run_general_auction(matrix, slots)
        formula = vcg_price_formula(matrix, slots)
        counts["general"][1] += 1
        counts["general"][0] += all(auction.total_price[j] == formula[i] for j, i in auction.assignment.items())
    for name, (passed, total) in counts.items():
        report.text(f"{name}: {passed}/{total} passed")
    report.payload["suite"] = {name: {"passed": p, "total": t} for name, (p, t) in counts.items()}
    return all(p == t for p, t in counts.values())


def cmd_oracle_verify(doc: Optional[InstanceDocument], args: argparse.Namespace, report: Report) -> int:
    if doc is not None:
        ok = _verify_instance(doc, report)
    else:
        report.text(f"seed {args.seed}, {args.trials} trials")
        ok = _verify_suite(args.seed, args.trials, report)
    report.payload["ok"] = ok
    return EXIT_OK if ok else EXIT_VIOLATION


COMMANDS: dict[str, Callable[..., int]] = {
    "gsp": _mechanism_command(run_gsp),
    "topdown": _mechanism_command(run_topdown),
    "topdown-flawed": cmd_flawed,
    "range-topdown": _mechanism_command(run_range_topdown),
    "vcg": cmd_vcg,
    "equilibrium": cmd_equilibrium,
    "check-envy": cmd_check_envy,
    "check-nash": cmd_check_nash,
    "check-minpay": cmd_check_minpay,
    "general": cmd_general,
    "oracle-verify": cmd_oracle_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="path to an instance document (JSON)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for generator-backed suites")
    parser = argparse.ArgumentParser(prog="posauction", description="Position auction toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "topdown-flawed":
            p.add_argument("--variant", choices=("before", "after"), required=True)
        if name == "check-minpay":
            p.add_argument("--mechanism", choices=sorted(MECHANISMS), default="topdown")
        if name == "oracle-verify":
            p.add_argument("--trials", type=int, default=50)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    report = Report(args.command)
    try:
        doc = None
        if args.instance is not None:
            doc = load_document(args.instance)
        elif args.command != "oracle-verify":
            raise AuctionError("--instance is required")
        status = COMMANDS[args.command](doc, args, report)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (AuctionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report.emit(args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
