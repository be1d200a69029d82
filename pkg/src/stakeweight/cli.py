"""Command-line interface.

Exit codes: 0 success, 1 data or validation error, 2 network error.
"""

from __future__ import annotations

import functools
import logging
import secrets
import sys
from pathlib import Path

import click

from . import report as rpt
from .errors import FetchError, StakeweightError
from .ingest import ENDPOINT_ENV, ChainAdapter, fetch_validators, load_snapshot, write_snapshot
from .model import apply_weights
from .simulate import (
    DEFAULT_EPOCHS_PER_YEAR,
    MAX_SEED,
    PRNG_NAME,
    compare_proposer_concentration,
    proposer_distribution,
    simulate_rewards,
    trajectory_gini,
)
from .srsw import ADMISSION_RULES, EconParams, sybil_split_analysis

EXIT_DATA = 1
EXIT_NETWORK = 2


def _fail(msg: str, code: int = EXIT_DATA):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FetchError as exc:
            _fail(str(exc), EXIT_NETWORK)
        except (StakeweightError, ValueError, OSError) as exc:
            _fail(str(exc), EXIT_DATA)
    return wrapper


def parse_deltas(text: str) -> list[int]:
    try:
        deltas = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None
    bad = [d for d in deltas if not 0 <= d <= 100]
    if bad:
        raise click.BadParameter(f"delta values must lie in [0, 100]: {bad}")
    return deltas


def emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        click.echo(text, nl=False)


SCHEMES = click.Choice(["linear", "srsw", "both"], case_sensitive=False)
FORMATS = click.Choice(["table", "json", "csv"], case_sensitive=False)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Decentralization metrics for weighted-consensus validator sets."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command()
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--scheme", type=SCHEMES, default="linear", show_default=True)
@click.option("--delta", "deltas", default="0,50", show_default=True, help="Percentiles for epsilon, comma separated.")
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Write to a file instead of stdout.")
@handle_errors
def analyze(snapshot, scheme, deltas, fmt, out):
    """Compute every decentralization metric for one snapshot."""
    snap = load_snapshot(snapshot)
    deltas = parse_deltas(deltas)
    schemes = ["linear", "srsw"] if scheme == "both" else [scheme]
    reports = [rpt.analyze(snap, s, deltas) for s in schemes]
    if fmt == "json":
        text = rpt.render_json(reports[0].as_dict() if len(reports) == 1 else [r.as_dict() for r in reports])
    elif fmt == "csv":
        text = rpt.render_metrics_csv(reports)
    else:
        text = rpt.render_metrics_table(reports)
    emit(text, out)


@main.command()
@click.argument("snapshots", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--delta", "deltas", default="0,50", show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--partial", is_flag=True, help="Report on the readable snapshots even if some fail.")
@handle_errors
def compare(snapshots, deltas, fmt, out, partial):
    """Linear vs square-root weighting, one row per snapshot plus a mean row."""
    deltas = parse_deltas(deltas)
    rows, errors = [], []
    for path in snapshots:
        try:
            rows.append(rpt.compare_row(load_snapshot(path), deltas))
        except (StakeweightError, OSError) as exc:
            click.echo(f"error: {path}: {exc}", err=True)
            errors.append((str(path), str(exc)))
    if errors and not partial:
        _fail(f"{len(errors)} snapshot(s) could not be analyzed; pass --partial to report the rest")
    if not rows:
        _fail("no snapshot could be analyzed")
    rep = rpt.ComparisonReport(tuple(rows), tuple(errors))
    if fmt == "json":
        text = rpt.render_json(rep.as_dict())
    elif fmt == "csv":
        text = rpt.render_comparison_csv(rep)
    else:
        text = rpt.render_comparison_table(rep)
    emit(text, out)


@main.group()
def simulate():
    """Reward compounding and proposer selection simulations."""


@simulate.command()
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--scheme", type=click.Choice(["linear", "srsw"]), default="srsw", show_default=True)
@click.option("--alpha", type=float, help="Per-epoch inflation factor (0.0001 = 0.01% per epoch).")
@click.option("--alpha-annual", type=float, help="Annual inflation in percent (4.5 = 4.5%/year).")
@click.option("--epochs-per-year", type=int, default=DEFAULT_EPOCHS_PER_YEAR, show_default=True)
@click.option("--epochs", type=int, required=True)
@click.option("--cap-m", type=int, help="Validator-set cap M; the admission threshold is then recomputed every epoch.")
@click.option("--threshold-stake", type=int, help="Fixed admission threshold s_M (default 0 when --cap-m is absent).")
@click.option("--admission", type=click.Choice(ADMISSION_RULES), default="strict", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV path for epoch,validator_address,stake.")
@handle_errors
def rewards(snapshot, scheme, alpha, alpha_annual, epochs_per_year, epochs, cap_m, threshold_stake, admission, out):
    """Compound epoch rewards and write the stake trajectories."""
    if (alpha is None) == (alpha_annual is None):
        _fail("give exactly one of --alpha or --alpha-annual")
    snap = load_snapshot(snapshot)
    annual = alpha_annual / 100 if alpha_annual is not None else None
    params = EconParams(alpha=alpha if alpha is not None else annual / epochs_per_year,
                        cap_m=cap_m or snap.m, scheme=scheme, admission=admission)
    if threshold_stake is None and cap_m is None:
        threshold_stake = 0
    traj = simulate_rewards(snap, params, epochs, annual_rate=annual,
                            epochs_per_year=epochs_per_year if annual is not None else None,
                            threshold_stake=threshold_stake)
    if out:
        Path(out).write_text(traj.to_csv(), encoding="utf-8", newline="")
    growth = traj.growth()
    click.echo(f"scheme={scheme} alpha_per_epoch={traj.alpha:.10g} epochs={epochs} validators={snap.m}")
    click.echo(f"growth factor: max {max(growth):.6f}  min {min(growth):.6f}  "
               f"top validator {growth[0]:.6f}  bottom validator {growth[-1]:.6f}")
    click.echo(f"stake gini: initial {trajectory_gini(traj, 0):.6f}  final {trajectory_gini(traj):.6f}")


@simulate.command()
@click.argument("snapshot", type=click.Path(dir_okay=False))
@click.option("--scheme", type=SCHEMES, default="both", show_default=True)
@click.option("--draws", type=int, default=100_000, show_default=True)
@click.option("--seed", type=click.IntRange(0, MAX_SEED), help="Unsigned 64-bit seed; a random one is drawn and printed if absent.")
@click.option("--out", type=click.Path(dir_okay=False), help="CSV path (suffixed per scheme when --scheme both).")
@handle_errors
def proposers(snapshot, scheme, draws, seed, out):
    """Sample block proposers with probability proportional to weight."""
    if seed is None:
        seed = secrets.randbits(64)
    snap = load_snapshot(snapshot)
    click.echo(f"prng={PRNG_NAME} seed={seed} draws={draws}")
    if scheme == "both":
        cmp = compare_proposer_concentration(snap, draws, seed)
        hists = [cmp.linear, cmp.srsw]
        click.echo(f"expected-share gini: linear {cmp.linear_share_gini:.6f}  srsw {cmp.srsw_share_gini:.6f}")
    else:
        hists = [proposer_distribution(apply_weights(snap, scheme), draws, seed)]
    for h in hists:
        click.echo(f"[{h.scheme.value}] max expected share {max(h.expected_share):.6f}  "
                   f"max |empirical - expected| {h.max_deviation():.6f}")
        if out:
            path = Path(out)
            if len(hists) > 1:
                path = path.with_name(f"{path.stem}.{h.scheme.value}{path.suffix or '.csv'}")
            path.write_text(h.to_csv(), encoding="utf-8", newline="")


@main.command()
@click.option("--endpoint", envvar=ENDPOINT_ENV, help=f"REST base URL (default ${ENDPOINT_ENV}).")
@click.option("--chain", required=True, help="Chain label stored in the snapshot.")
@click.option("--limit", type=int, default=100, show_default=True, help="Page size.")
@click.option("--pagination", type=click.Choice(["key", "offset"]), default="key", show_default=True)
@click.option("--path", "api_path", default="/cosmos/staking/v1beta1/validators", show_default=True)
@click.option("--timeout", type=float, default=10.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@handle_errors
def fetch(endpoint, chain, limit, pagination, api_path, timeout, out):
    """Fetch the bonded validator set from a Cosmos-SDK REST endpoint."""
    if not endpoint:
        _fail(f"no endpoint: pass --endpoint or set ${ENDPOINT_ENV}", EXIT_NETWORK)
    adapter = ChainAdapter(chain, endpoint, pagination_limit=limit, path=api_path,
                           pagination=pagination, timeout=timeout)
    snap = fetch_validators(adapter)
    write_snapshot(snap, out)
    click.echo(f"wrote {snap.m} validators for {chain} to {out}")


@main.command()
@click.argument("stake", type=int)
@click.argument("threshold_stake", type=int)
@click.argument("alpha", type=float)
@click.argument("cost", type=float)
@click.argument("scheme", type=click.Choice(["linear", "srsw"], case_sensitive=False))
@click.option("--admission", type=click.Choice(ADMISSION_RULES), default="strict", show_default=True)
@handle_errors
def sybil(stake, threshold_stake, alpha, cost, scheme, admission):
    """Is splitting STAKE into two identities more profitable than keeping one?"""
    params = EconParams(alpha=alpha, cap_m=1, sybil_cost=cost, scheme=scheme, admission=admission)
    v = sybil_split_analysis(stake, params, threshold_stake)
    if v.best_split is None:
        click.echo(f"do not split ({v.single_reward:.3f}; stake cannot be split)")
        return
    if v.rational_to_split:
        click.echo(f"warning: split rational: {v.best_split} earns {v.best_split_reward:.3f} "
                   f"vs {v.single_reward:.3f} single; deterrence relies on a high Sybil cost C")
    else:
        click.echo(f"do not split ({v.single_reward:.3f} vs best split {v.best_split_reward:.3f})")


if __name__ == "__main__":
    main()
