"""Command-line entry point.

Subcommands: infer, classify, stats, indicators, synth, fetch-rdap, report.
Exit status 0 on success, 1 on data errors, 2 on usage errors.  Every
command that writes outputs also writes a manifest with input digests and
the effective configuration; re-running with unchanged inputs reproduces
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .classify import batch_classify
from .config import RunConfig, load_config
from .dataio import (
    DatasetManifest,
    iter_observation_groups,
    load_epochs,
    load_linkage_records,
    load_rdap,
    load_serving,
    load_verdicts,
    manifest_entry,
    save_epochs,
    save_verdicts,
)
from .days import parse_day
from .epochs import infer_epochs
from .errors import DataFormatError, DnsZombiesError
from .indicators import (
    ServingIndex,
    agp_death_stats,
    ecosystem_evidence,
    indicator_matrix,
    maven_activity_breakdown,
    revocation_comparison,
    served_after_death,
    served_after_rereg,
)
from .linkages import (
    ECOSYSTEMS,
    ENS_ONCHAIN,
    MAVEN,
    WEBPKI,
    linkages_from_certificates,
    linkages_from_ens_claims,
    linkages_from_maven_index,
    match_gasless_txt,
)
from .stats import (
    CohortSpec,
    cohort_lifespans,
    duration_distributions,
    kaplan_meier,
    mann_whitney_u,
    registration_to_linkage_gaps,
    zombie_fraction_series,
)
from .suffixes import SuffixRules
from . import reports

log = logging.getLogger(__name__)

OUT_DIR_ENV = "DNSZOMBIES_OUT_DIR"
CACHE_DIR_ENV = "DNSZOMBIES_CACHE_DIR"


def _day_arg(text: str) -> date:
    try:
        return parse_day(text)
    except DataFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _gap_threshold_arg(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("gap threshold must be >= 1 day")
    return value


def _grace_arg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("grace window must be >= 0 days")
    return value


def _out_dir(path: str) -> Path:
    base = os.environ.get(OUT_DIR_ENV)
    candidate = Path(path)
    if base and not candidate.is_absolute():
        candidate = Path(base) / candidate
    candidate.mkdir(parents=True, exist_ok=True)
    return candidate


def _effective_config(args) -> RunConfig:
    config = load_config(getattr(args, "config", None))
    if getattr(args, "gap_threshold", None) is not None:
        config.gap_threshold_days = args.gap_threshold
    if getattr(args, "grace", None) is not None:
        config.grace_window_days = args.grace
    if getattr(args, "agp_days", None) is not None:
        config.agp_days = args.agp_days
    return config


def _config_echo(args, config: RunConfig) -> dict:
    echo = {"effective": config.to_dict()}
    if getattr(args, "config", None):
        echo["config_file"] = str(args.config)
    flags = {
        name: getattr(args, name)
        for name in ("gap_threshold", "grace", "agp_days")
        if getattr(args, name, None) is not None
    }
    if flags:
        echo["flags"] = flags
    return echo


# -- infer ----------------------------------------------------------------------


def cmd_infer(args) -> int:
    if (args.window_start is None) != (args.window_end is None):
        print("error: --window-start and --window-end must be given together", file=sys.stderr)
        return 2
    config = _effective_config(args)
    window = None
    if args.window_start and args.window_end:
        window = (args.window_start, args.window_end)
    rdap_by_domain: dict[str, list] = {}
    if args.rdap:
        for record in load_rdap(args.rdap):
            rdap_by_domain.setdefault(record.domain, []).append(record)

    count = 0
    observation_rows = 0

    def timelines():
        nonlocal count, observation_rows
        for domain, zone, scan in iter_observation_groups(args.obs):
            observation_rows += len(zone) + len(scan)
            timeline = infer_epochs(
                domain,
                zone,
                scan,
                rdap_by_domain.get(domain, ()),
                config.params_for(domain),
                window,
            )
            count += 1
            yield timeline

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_epochs(timelines(), out)

    files = dict(
        [
            manifest_entry("observations", args.obs, observation_rows),
            manifest_entry("epochs", out, count),
        ]
    )
    if args.rdap:
        name, entry = manifest_entry("rdap", args.rdap, sum(map(len, rdap_by_domain.values())))
        files[name] = entry
    manifest = DatasetManifest(files=files, config=_config_echo(args, config), window=window)
    manifest.save(str(out) + ".manifest.json")
    print(f"inferred epochs for {count} domain(s) -> {out}")
    return 0


# -- classify --------------------------------------------------------------------


def _adapt_linkages(args, config: RunConfig, records):
    rules = SuffixRules.from_file(args.suffix_rules) if args.suffix_rules else SuffixRules.bundled()
    if args.ecosystem == WEBPKI:
        return linkages_from_certificates(records, rules)
    if args.ecosystem == ENS_ONCHAIN:
        return linkages_from_ens_claims(records)
    if args.ecosystem == MAVEN:
        return linkages_from_maven_index(records, rules)
    return match_gasless_txt(records, config.gasless_txt_prefix)


def cmd_classify(args) -> int:
    config = _effective_config(args)
    timelines = load_epochs(args.epochs)
    records = load_linkage_records(args.linkages, args.ecosystem)
    linkages = _adapt_linkages(args, config, records)
    verdicts, summary = batch_classify(linkages, timelines, args.as_of)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_verdicts(verdicts, out)

    echo = _config_echo(args, config)
    echo["as_of"] = args.as_of.isoformat()
    echo["ecosystem"] = args.ecosystem
    echo["summary"] = {
        ecosystem: {
            "total": bucket.total,
            "active": bucket.active,
            "zombie": bucket.zombie,
            "exempt": bucket.exempt,
            "indeterminate": bucket.indeterminate,
        }
        for ecosystem, bucket in sorted(summary.items())
    }
    files = dict(
        [
            manifest_entry("epochs", args.epochs, len(timelines)),
            manifest_entry("linkages", args.linkages, len(records)),
            manifest_entry("verdicts", out, len(verdicts)),
        ]
    )
    DatasetManifest(files=files, config=echo).save(str(out) + ".manifest.json")
    for ecosystem, bucket in sorted(summary.items()):
        print(
            f"{ecosystem}: total={bucket.total} active={bucket.active} "
            f"zombie={bucket.zombie} fraction={bucket.fraction:.4f}"
        )
    return 0


# -- stats -----------------------------------------------------------------------


def _load_km_input(path: Path):
    import csv as _csv

    durations = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = _csv.reader(handle)
        header = next(reader, None)
        if header != ["time", "observed"]:
            raise DataFormatError("expected header 'time,observed'", str(path), 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or row[1] not in ("true", "false"):
                raise DataFormatError("expected 'time,observed(true|false)'", str(path), lineno)
            durations.append((float(row[0]), row[1] == "true"))
    return durations


def _load_mwu_input(path: Path):
    import csv as _csv

    groups: dict[str, list[float]] = {"a": [], "b": []}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = _csv.reader(handle)
        header = next(reader, None)
        if header != ["group", "value"]:
            raise DataFormatError("expected header 'group,value'", str(path), 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or row[0] not in groups:
                raise DataFormatError("expected 'group(a|b),value'", str(path), lineno)
            groups[row[0]].append(float(row[1]))
    return groups["a"], groups["b"]


def cmd_stats(args) -> int:
    if args.stat == "km":
        curve = kaplan_meier(_load_km_input(args.input))
        reports.write_km_csv(args.out, curve)
    elif args.stat == "mwu":
        group_a, group_b = _load_mwu_input(args.input)
        if not group_a or not group_b:
            raise DataFormatError("both groups must be non-empty")
        result = mann_whitney_u(group_a, group_b, method=args.method)
        reports.write_mwu_csv(args.out, result)
    else:
        verdicts = load_verdicts(args.verdicts)
        if args.stat == "fraction":
            start = args.start or min(v.linkage.birth for v in verdicts)
            series = zombie_fraction_series(verdicts, start, args.as_of)
            reports.write_series_csv(args.out, series)
        elif args.stat == "cohorts":
            curves = cohort_lifespans(verdicts, CohortSpec(args.width_years), args.as_of)
            reports.write_lifespans_csv(args.out, curves)
        elif args.stat == "durations":
            report = duration_distributions(verdicts, args.as_of)
            reports.write_durations_csv(args.out, report)
            reports.write_durations_summary_csv(_suffixed(args.out, ".summary"), report)
        elif args.stat == "gaps":
            report = registration_to_linkage_gaps(verdicts)
            reports.write_gaps_csv(args.out, report)
            reports.write_gaps_summary_csv(_suffixed(args.out, ".summary"), report)
    print(f"wrote {args.out}")
    return 0


def _suffixed(path: str | Path, suffix: str) -> Path:
    path = Path(path)
    return path.with_name(path.stem + suffix + path.suffix)


# -- indicators --------------------------------------------------------------------


def cmd_indicators(args) -> int:
    config = load_config(args.design_config)
    if args.agp_days is not None:
        config.agp_days = args.agp_days
    verdicts = []
    input_counts: dict[str, int] = {}
    for path in args.verdicts:
        loaded = load_verdicts(path)
        input_counts[str(path)] = len(loaded)
        verdicts.extend(loaded)
    if not verdicts:
        raise DataFormatError("no verdicts found in inputs")
    outdir = _out_dir(args.out)

    ecosystems = sorted({v.linkage.ecosystem for v in verdicts})
    agp_stats = {
        ecosystem: agp_death_stats(
            [v for v in verdicts if v.linkage.ecosystem == ecosystem], config.agp_days
        )
        for ecosystem in ecosystems
    }
    counts = {"agp_stats": reports.write_agp_csv(outdir / "agp_stats.csv", agp_stats)}

    breakdown = None
    if MAVEN in ecosystems:
        breakdown = maven_activity_breakdown(verdicts, args.as_of)
        counts["maven_activity"] = reports.write_breakdown_csv(
            outdir / "maven_activity.csv", breakdown
        )

    if WEBPKI in ecosystems:
        webpki_verdicts = [v for v in verdicts if v.linkage.ecosystem == WEBPKI]
        counts["revocation_comparison"] = reports.write_revocation_csv(
            outdir / "revocation_comparison.csv", revocation_comparison(webpki_verdicts)
        )
        if args.serving:
            serving = ServingIndex(load_serving(args.serving))
            counts["served_after_death"] = reports.write_served_csv(
                outdir / "served_after_death.csv",
                served_after_death(serving, webpki_verdicts, args.as_of),
            )
            counts["served_after_rereg"] = reports.write_rereg_csv(
                outdir / "served_after_rereg.csv",
                served_after_rereg(serving, webpki_verdicts, args.as_of),
            )

    evidence = ecosystem_evidence(verdicts, args.as_of, config.agp_days, breakdown)
    matrix = indicator_matrix(evidence, config.designs, config.design_overrides)
    counts["attack_indicator_matrix"] = reports.write_matrix_csv(
        outdir / "attack_indicator_matrix.csv", matrix
    )

    files = dict(
        manifest_entry(name, outdir / f"{name}.csv", rows, base_dir=outdir)
        for name, rows in counts.items()
    )
    for i, path in enumerate(args.verdicts):
        name, entry = manifest_entry(f"verdicts_{i}", path, input_counts[str(path)])
        files[name] = entry
    echo = {"effective": config.to_dict(), "as_of": args.as_of.isoformat()}
    DatasetManifest(files=files, config=echo).save(outdir / "manifest.json")
    print(f"wrote indicator reports -> {outdir}")
    return 0


# -- synth ------------------------------------------------------------------------


def cmd_synth(args) -> int:
    from .synth import NoiseModel, WorldParams, emit_observations, generate_world

    kwargs = {}
    if args.params:
        from .config import tomllib

        with open(args.params, "rb") as handle:
            payload = tomllib.load(handle)
        valid = set(WorldParams.__dataclass_fields__)
        unknown = set(payload) - valid
        if unknown:
            raise DataFormatError(f"unknown world parameter(s) {sorted(unknown)}")
        kwargs = payload
    for key in ("window_start", "window_end"):
        if key in kwargs and isinstance(kwargs[key], str):
            kwargs[key] = parse_day(kwargs[key])
    if args.n_domains is not None:
        kwargs["n_domains"] = args.n_domains
    try:
        params = WorldParams(**kwargs)
        noise = NoiseModel(
            zone_coverage_p=args.zone_coverage,
            scan_coverage_p=args.scan_coverage,
            rdap_coverage_p=args.rdap_coverage,
            rdap_date_omission_p=args.rdap_date_omission,
        )
    except ValueError as exc:
        raise DataFormatError(str(exc))
    world = generate_world(params, args.seed)
    outdir = _out_dir(args.out)
    emit_observations(world, noise, outdir, include_truth=not args.no_truth)
    print(
        f"world seed={args.seed}: {len(world.domains)} domains, "
        f"{len(world.linkages)} linkages -> {outdir}"
    )
    return 0


# -- fetch-rdap ----------------------------------------------------------------------


def cmd_fetch_rdap(args) -> int:
    from .rdap_client import RdapFetcher, load_endpoint_map

    endpoints = load_endpoint_map(args.endpoints)
    cache_dir = args.cache_dir or os.environ.get(CACHE_DIR_ENV)
    if cache_dir is None:
        raise DataFormatError(f"--cache-dir or ${CACHE_DIR_ENV} is required")
    with open(args.domains, encoding="utf-8") as handle:
        domains = [line.strip() for line in handle if line.strip()]
    fetcher = RdapFetcher(
        endpoints,
        cache_dir=cache_dir,
        min_interval=1.0 / args.rate_per_sec if args.rate_per_sec else 0.0,
        max_retries=args.max_retries,
        offline=args.offline,
    )
    records, skipped = fetcher.fetch_many(domains)
    from .dataio import save_rdap

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_rdap(out, records)
    print(f"fetched {len(records)} record(s), skipped {skipped} -> {out}")
    return 0


# -- report ---------------------------------------------------------------------------


def cmd_report(args) -> int:
    indir = Path(args.in_dir)
    verdict_paths = sorted(indir.glob("verdicts*.jsonl"))
    if not verdict_paths:
        raise DataFormatError(f"no verdicts*.jsonl files under {indir}")
    verdicts = []
    for path in verdict_paths:
        verdicts.extend(load_verdicts(path))

    as_of = args.as_of
    if as_of is None:
        manifest_path = indir / "manifest.json"
        candidates = sorted(indir.glob("*.manifest.json"))
        if manifest_path.exists():
            candidates.insert(0, manifest_path)
        for candidate in candidates:
            loaded = DatasetManifest.load(candidate).config.get("as_of")
            if loaded:
                as_of = parse_day(loaded)
                break
    if as_of is None:
        raise DataFormatError("--as-of not given and no manifest in the input directory records it")

    config = load_config(args.config)
    outdir = _out_dir(args.out)
    counts: dict[str, int] = {}
    ecosystems = sorted({v.linkage.ecosystem for v in verdicts})

    for ecosystem in ecosystems:
        eco_verdicts = [v for v in verdicts if v.linkage.ecosystem == ecosystem]
        start = min(v.linkage.birth for v in eco_verdicts)
        series = zombie_fraction_series(eco_verdicts, start, as_of)
        counts[f"zombie_fraction_{ecosystem}"] = reports.write_series_csv(
            outdir / f"zombie_fraction_{ecosystem}.csv", series
        )
        curves = cohort_lifespans(eco_verdicts, CohortSpec(args.cohort_years), as_of)
        if curves.overall.n:
            counts[f"lifespan_survival_{ecosystem}"] = reports.write_lifespans_csv(
                outdir / f"lifespan_survival_{ecosystem}.csv", curves
            )
        gaps = registration_to_linkage_gaps(eco_verdicts)
        if gaps.zombie_gaps or gaps.nonzombie_gaps:
            counts[f"registration_gaps_{ecosystem}"] = reports.write_gaps_csv(
                outdir / f"registration_gaps_{ecosystem}.csv", gaps
            )
            reports.write_gaps_summary_csv(
                outdir / f"registration_gaps_{ecosystem}.summary.csv", gaps
            )

    breakdown = None
    if MAVEN in ecosystems:
        breakdown = maven_activity_breakdown(verdicts, as_of)
        counts["maven_activity"] = reports.write_breakdown_csv(
            outdir / "maven_activity.csv", breakdown
        )
    if WEBPKI in ecosystems:
        webpki_verdicts = [v for v in verdicts if v.linkage.ecosystem == WEBPKI]
        durations = duration_distributions(webpki_verdicts, as_of)
        counts["zombie_durations"] = reports.write_durations_csv(
            outdir / "zombie_durations.csv", durations
        )
        reports.write_durations_summary_csv(outdir / "zombie_durations.summary.csv", durations)
        counts["revocation_comparison"] = reports.write_revocation_csv(
            outdir / "revocation_comparison.csv", revocation_comparison(webpki_verdicts)
        )
        serving_path = indir / "serving.csv"
        if serving_path.exists():
            serving = ServingIndex(load_serving(serving_path))
            counts["served_after_death"] = reports.write_served_csv(
                outdir / "served_after_death.csv",
                served_after_death(serving, webpki_verdicts, as_of),
            )
            counts["served_after_rereg"] = reports.write_rereg_csv(
                outdir / "served_after_rereg.csv",
                served_after_rereg(serving, webpki_verdicts, as_of),
            )

    agp_stats = {
        ecosystem: agp_death_stats(
            [v for v in verdicts if v.linkage.ecosystem == ecosystem], config.agp_days
        )
        for ecosystem in ecosystems
    }
    counts["agp_stats"] = reports.write_agp_csv(outdir / "agp_stats.csv", agp_stats)
    evidence = ecosystem_evidence(verdicts, as_of, config.agp_days, breakdown)
    matrix = indicator_matrix(evidence, config.designs, config.design_overrides)
    counts["attack_indicator_matrix"] = reports.write_matrix_csv(
        outdir / "attack_indicator_matrix.csv", matrix
    )

    files = {}
    for name, rows in sorted(counts.items()):
        key, entry = manifest_entry(name, outdir / f"{name}.csv", rows, base_dir=outdir)
        files[key] = entry
    echo = {"effective": config.to_dict(), "as_of": as_of.isoformat()}
    DatasetManifest(files=files, config=echo).save(outdir / "manifest.json")
    print(f"wrote {len(counts)} report file(s) -> {outdir}")
    return 0


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnszombies",
        description="DNS registration-epoch inference and zombie-linkage analysis",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="infer registration epochs from observations")
    p.add_argument("--obs", required=True, help="observation CSV (domain,date,source)")
    p.add_argument("--rdap", help="RDAP JSON-lines file")
    p.add_argument("--out", required=True, help="epochs JSON-lines output")
    p.add_argument("--gap-threshold", type=_gap_threshold_arg, default=None,
                   help="delegation gap threshold in days (default 80)")
    p.add_argument("--grace", type=_grace_arg, default=None,
                   help="grace window in days (default 2)")
    p.add_argument("--window-start", type=_day_arg, default=None)
    p.add_argument("--window-end", type=_day_arg, default=None)
    p.add_argument("--config", default=None, help="TOML config file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("classify", help="classify linkages against epoch timelines")
    p.add_argument("--epochs", required=True)
    p.add_argument("--linkages", required=True, help="ecosystem record JSON-lines file")
    p.add_argument("--ecosystem", required=True, choices=sorted(ECOSYSTEMS))
    p.add_argument("--as-of", type=_day_arg, required=True, dest="as_of")
    p.add_argument("--out", required=True, help="verdicts JSON-lines output")
    p.add_argument("--suffix-rules", default=None, help="public-suffix rules file")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("stats", help="statistical computations")
    stat_sub = p.add_subparsers(dest="stat", required=True)

    km = stat_sub.add_parser("km", help="Kaplan-Meier survival curve")
    km.add_argument("--input", required=True, type=Path, help="CSV time,observed")
    km.add_argument("--out", required=True)
    km.set_defaults(func=cmd_stats)

    mwu = stat_sub.add_parser("mwu", help="Mann-Whitney U test")
    mwu.add_argument("--input", required=True, type=Path, help="CSV group(a|b),value")
    mwu.add_argument("--method", choices=["auto", "normal", "exact"], default="auto")
    mwu.add_argument("--out", required=True)
    mwu.set_defaults(func=cmd_stats)

    fraction = stat_sub.add_parser("fraction", help="daily zombie fraction series")
    fraction.add_argument("--verdicts", required=True)
    fraction.add_argument("--start", type=_day_arg, default=None)
    fraction.add_argument("--as-of", type=_day_arg, required=True, dest="as_of")
    fraction.add_argument("--out", required=True)
    fraction.set_defaults(func=cmd_stats)

    cohorts = stat_sub.add_parser("cohorts", help="cohort lifespan survival curves")
    cohorts.add_argument("--verdicts", required=True)
    cohorts.add_argument("--width-years", type=int, default=2, dest="width_years")
    cohorts.add_argument("--as-of", type=_day_arg, required=True, dest="as_of")
    cohorts.add_argument("--out", required=True)
    cohorts.set_defaults(func=cmd_stats)

    durations = stat_sub.add_parser("durations", help="zombie duration distributions")
    durations.add_argument("--verdicts", required=True)
    durations.add_argument("--as-of", type=_day_arg, required=True, dest="as_of")
    durations.add_argument("--out", required=True)
    durations.set_defaults(func=cmd_stats)

    gaps = stat_sub.add_parser("gaps", help="registration-to-linkage gaps")
    gaps.add_argument("--verdicts", required=True)
    gaps.add_argument("--out", required=True)
    gaps.set_defaults(func=cmd_stats)

    p = sub.add_parser("indicators", help="attack-surface indicator reports")
    p.add_argument("--verdicts", required=True, nargs="+")
    p.add_argument("--serving", default=None, help="serving CSV (fingerprint,date,served)")
    p.add_argument("--design-config", default=None, dest="design_config")
    p.add_argument("--agp-days", type=int, default=None, dest="agp_days")
    p.add_argument("--as-of", type=_day_arg, required=True, dest="as_of")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth dataset")
    p.add_argument("--params", default=None, help="TOML world parameters")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-domains", type=int, default=None, dest="n_domains")
    p.add_argument("--zone-coverage", type=float, default=1.0)
    p.add_argument("--scan-coverage", type=float, default=1.0)
    p.add_argument("--rdap-coverage", type=float, default=1.0)
    p.add_argument("--rdap-date-omission", type=float, default=0.0)
    p.add_argument("--no-truth", action="store_true", help="omit ground-truth files")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fetch-rdap", help="cached, rate-limited RDAP lookups")
    p.add_argument("--domains", required=True, help="file with one domain per line")
    p.add_argument("--endpoints", required=True, help="TOML map: tld = base URL")
    p.add_argument("--cache-dir", default=None, help=f"cache directory (or ${CACHE_DIR_ENV})")
    p.add_argument("--rate-per-sec", type=float, default=2.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--offline", action="store_true", help="serve cached responses only")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fetch_rdap)

    p = sub.add_parser("report", help="emit all analysis CSVs from verdicts")
    p.add_argument("--in", required=True, dest="in_dir", help="directory with verdicts*.jsonl")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--as-of", type=_day_arg, default=None, dest="as_of")
    p.add_argument("--cohort-years", type=int, default=2, dest="cohort_years")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DnsZombiesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
