"""
Command-line entry point

Exit codes: 0 success, 1 domain error, 2 usage, parse or config error.
Data goes to stdout only when the command succeeds; diagnostics go to stderr.
"""

import argparse
import asyncio
import io
import random
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO

import structlog

from agora import __version__
from agora.assets import dump_descriptors, iter_descriptors
from agora.catalog import (
    MarketIndex,
    Marketplace,
    QualityBound,
    Request,
    aggregate,
    load_marketplace,
    match_request,
    search,
)
from agora.catalog.matchmaking import rank_summary
from agora.config import Settings, default_config, load_config
from agora.demo import run_demo
from agora.errors import AgoraError, NoCompliantPlan, UsageError
from agora.escrow import SimNetConfig, run_session
from agora.execution import (
    AuthorityRegistry,
    builtin_variants,
    default_nodes,
    execute_plan,
    generate_database,
    load_node_registry,
    load_variants,
    select_variants,
    variant_classes,
)
from agora.metering import (
    Ledger,
    UsageTracker,
    certified_reporters,
    load_pricing,
    load_usage_log,
    make_invoice,
    parse_period,
)
from agora.metering.invoicing import Pricing
from agora.metering.settlement import InMemoryPaymentBackend, PaymentStatus
from agora.models.money import Money
from agora.observability import configure_logging
from agora.planner import NC_VERDICT, plan_query, render_plan
from agora.query import compile_program

logger = structlog.get_logger(__name__)

Handler = Callable[[argparse.Namespace, Settings, TextIO], int]


def _money(text: str) -> Money:
    try:
        return Money.of(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _bound(text: str) -> QualityBound:
    try:
        return QualityBound.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _chunks(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a chunk list: {text!r}") from exc


def load_markets(settings: Settings) -> List[Marketplace]:
    return [load_marketplace(name, path) for name, path in sorted(settings.marketplaces.items())]


def catalog_index(settings: Settings) -> MarketIndex:
    return aggregate(load_markets(settings))


def authority_registry(settings: Settings) -> AuthorityRegistry:
    if settings.authority_registry is None:
        return AuthorityRegistry()
    return AuthorityRegistry.load(str(settings.authority_registry))


def cmd_catalog_publish(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    markets = {m.name: m for m in load_markets(settings)}
    market = markets.setdefault(args.market, Marketplace(args.market))
    with open(args.file, "rb") as handle:
        published = [market.publish(d) for d in iter_descriptors(handle)]
    # cross-market id collisions surface here
    aggregate(markets.values())
    for asset_id in published:
        out.write(f"published {asset_id} market={market.name}\n")
    if args.output:
        Path(args.output).write_bytes(dump_descriptors(market.snapshot()))
    return 0


def cmd_catalog_search(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    index = catalog_index(settings)
    for asset_id in search(index, args.keywords):
        descriptor = index.descriptors[asset_id]
        out.write(
            f"{asset_id} market={index.provenance[asset_id]} kind={descriptor.kind.value} "
            f"goal={descriptor.signature.goal}\n"
        )
    return 0


def cmd_catalog_match(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    request = Request(
        goal=args.goal,
        required_output=args.output_type,
        quality_bounds=tuple(args.bound),
        budget=args.budget,
        keywords=tuple(args.keyword),
    )
    result = match_request(catalog_index(settings), request, settings.match_weights)
    for line in rank_summary(result, args.limit):
        out.write(line + "\n")
    out.write(f"matches={len(result)}\n")
    return 0


def cmd_plan(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    program = compile_program(Path(args.sql).read_text(encoding="utf-8"))
    policies = [] if args.no_policies else program.policies
    for spec in program.queries:
        optimized = plan_query(spec, program.registry, policies, settings.cost_model)
        out.write(render_plan(optimized.plan, optimized.cost, explain=args.explain))
    return 0


def cmd_run(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    program = compile_program(Path(args.sql).read_text(encoding="utf-8"))
    nodes_path = args.nodes or settings.node_registry
    variants = builtin_variants()
    if settings.variants is not None:
        variants.extend(load_variants(str(settings.variants)))
    classes = variant_classes(variants)
    registry = authority_registry(settings)
    db = generate_database(program.registry, seed=args.seed, max_rows=args.max_rows)

    for number, spec in enumerate(program.queries, start=1):
        optimized = plan_query(spec, program.registry, program.policies, settings.cost_model)
        if nodes_path is not None:
            nodes = load_node_registry(str(nodes_path))
        else:
            regions = {program.registry.region(t) for t in program.registry.names()}
            if spec.target_region is not None:
                regions.add(spec.target_region)
            nodes = default_nodes(regions)
        bound = select_variants(
            optimized.plan, classes, nodes, args.budget, registry=registry, now=args.now
        )
        result = execute_plan(bound, db, program.registry, run_id=f"q{number}", at=args.now)
        out.write(render_plan(optimized.plan, optimized.cost))
        for line in bound.describe():
            out.write(line + "\n")
        out.write(
            f"estimated runtime={bound.estimated_runtime:.4f} price={bound.estimated_price}\n"
        )
        out.write(" | ".join(result.labels) + "\n")
        for row in sorted(result.rows, key=repr):
            out.write(" | ".join("NULL" if v is None else str(v) for v in row) + "\n")
        out.write(f"rows={len(result.rows)} usage_events={len(result.events)}\n")
    return 0


def cmd_bill(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    start, end = parse_period(args.period)
    events = load_usage_log(args.usage)
    verifier = None
    if args.verify_reporters:
        if settings.node_registry is None:
            raise UsageError("--verify-reporters needs a node registry in the config")
        verifier = certified_reporters(
            load_node_registry(str(settings.node_registry)),
            authority_registry(settings),
            end,
            settings.trusted_authorities,
        )
    tracker = UsageTracker(settings.window_s, verifier)
    tracker.track_all(events)
    counters = tracker.flush_window(end + settings.window_s)

    pricing: Dict[str, Pricing] = {}
    metered = {c.asset for c in counters}
    if settings.marketplaces:
        catalog = catalog_index(settings).descriptors
        pricing.update({a: catalog[a].pricing for a in metered if a in catalog})
    for path in (settings.pricing, args.pricing):
        if path is not None:
            pricing.update(load_pricing(path))

    invoice = make_invoice(counters, pricing, (start, end))
    out.write(invoice.document() + "\n" if args.json else invoice.render())
    return 0


def cmd_escrow_simulate(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    if args.input:
        data = Path(args.input).read_bytes()
    else:
        data = random.Random(args.seed).randbytes(args.size)
    net = SimNetConfig(
        seed=args.seed,
        drop_rate=args.drop_rate,
        dup_rate=args.dup_rate,
        max_delay_steps=args.max_delay,
        max_retries=args.max_retries,
        tamper_chunks=tuple(args.tamper),
    )
    ledger = Ledger(settings.ledger_url)
    try:
        transcript = asyncio.run(
            run_session(
                data,
                net,
                InMemoryPaymentBackend(),
                chunk_bytes=args.chunk_bytes,
                price_per_chunk=args.price,
                ledger=ledger,
            )
        )
        if args.summary:
            out.write(transcript.render().splitlines()[-1] + "\n")
        else:
            out.write(transcript.render())
        paid = sum(
            (r.txn.amount for r in transcript.payments if r.status == PaymentStatus.CONFIRMED),
            Money.zero(),
        )
        out.write(f"payments={len(transcript.payments)} paid={paid}\n")
    finally:
        ledger.close()
    return 0


def cmd_demo(args: argparse.Namespace, settings: Settings, out: TextIO) -> int:
    for line in run_demo(args.persona, seed=args.seed):
        out.write(line + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agora", description="Agora asset ecosystem kernel")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, default=0, help="seed for generated data")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    catalog = commands.add_parser("catalog", help="publish, search and match assets")
    catalog_commands = catalog.add_subparsers(dest="catalog_command", required=True)
    publish = catalog_commands.add_parser("publish", help="publish descriptor documents")
    publish.add_argument("file", help="newline-delimited descriptor documents")
    publish.add_argument("--market", default="default")
    publish.add_argument("--output", help="write the resulting marketplace here")
    publish.set_defaults(handler=cmd_catalog_publish)
    find = catalog_commands.add_parser("search", help="keyword search across marketplaces")
    find.add_argument("keywords", nargs="*")
    find.set_defaults(handler=cmd_catalog_search)
    match = catalog_commands.add_parser("match", help="declarative matchmaking")
    match.add_argument("--goal", required=True)
    match.add_argument("--output-type", default=None)
    match.add_argument("--bound", type=_bound, action="append", default=[],
                       help='quality bound such as "mae<=5000"')
    match.add_argument("--budget", type=_money)
    match.add_argument("--keyword", action="append", default=[])
    match.add_argument("--limit", type=int)
    match.set_defaults(handler=cmd_catalog_match)

    plan = commands.add_parser("plan", help="compliant geo-distributed plan for SQL")
    plan.add_argument("--sql", "--plan", dest="sql", required=True)
    plan.add_argument("--explain", action="store_true", help="annotate rows and bytes")
    plan.add_argument("--no-policies", action="store_true", help="ignore DENY/ALLOW statements")
    plan.set_defaults(handler=cmd_plan)

    run = commands.add_parser("run", help="plan, bind and execute SQL over generated data")
    run.add_argument("--sql", "--plan", dest="sql", required=True)
    run.add_argument("--nodes", help="node registry, overriding the config")
    run.add_argument("--budget", type=_money)
    run.add_argument("--now", type=int, default=0, help="timestamp for certificate expiry")
    run.add_argument("--max-rows", type=int, default=200)
    run.set_defaults(handler=cmd_run)

    bill = commands.add_parser("bill", help="aggregate a usage log and invoice it")
    bill.add_argument("--usage", required=True, help="newline-delimited usage events")
    bill.add_argument("--period", required=True, help="<start>..<end> in seconds")
    bill.add_argument("--pricing", help="JSON object of asset id to pricing model")
    bill.add_argument("--json", action="store_true")
    bill.add_argument("--verify-reporters", action="store_true")
    bill.set_defaults(handler=cmd_bill)

    escrow = commands.add_parser("escrow", help="escrowed transfer protocol")
    escrow_commands = escrow.add_subparsers(dest="escrow_command", required=True)
    simulate = escrow_commands.add_parser("simulate", help="run one simulated session")
    simulate.add_argument("--input", help="file to transfer; random bytes otherwise")
    simulate.add_argument("--bytes", "--size", dest="size", type=int, default=16384)
    simulate.add_argument("--chunk", "--chunk-bytes", dest="chunk_bytes", type=int, default=4096)
    simulate.add_argument("--price", type=_money, default=Money.of("0.01"))
    simulate.add_argument("--drop", "--drop-rate", dest="drop_rate", type=float, default=0.0)
    simulate.add_argument("--dup-rate", type=float, default=0.0)
    simulate.add_argument("--max-delay", type=int, default=3)
    simulate.add_argument("--max-retries", type=int, default=10)
    simulate.add_argument("--tamper", type=_chunks, default=[], help="chunk indices, e.g. 0,2")
    simulate.add_argument("--summary", action="store_true", help="outcome line only")
    # SUPPRESS keeps a global --seed when the subcommand does not repeat it
    simulate.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="network seed")
    simulate.set_defaults(handler=cmd_escrow_simulate)

    demo = commands.add_parser("demo", help="scripted persona walkthroughs")
    demo.add_argument("persona", choices=("bob", "alice", "charlie"))
    demo.set_defaults(handler=cmd_demo)
    return parser


def run_command(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    configure_logging(args.verbose)
    buffer = io.StringIO()
    handler: Handler = args.handler
    try:
        settings = load_config(args.config) if args.config else default_config()
        code = handler(args, settings, buffer)
    except NoCompliantPlan as exc:
        stdout.write(NC_VERDICT + "\n")
        stderr.write(f"error: {exc}\n")
        return 1
    except AgoraError as exc:
        stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except (OSError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    logger.debug("command_finished", command=args.command, code=code)
    if code == 0:
        stdout.write(buffer.getvalue())
    return code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
