"""Command line interface.

Every flag can also be set through an environment variable: group-level flags
use ``SALEDI_<FLAG>`` (``SALEDI_N_CUSTOMER``), subcommand flags use
``SALEDI_<SUBCOMMAND>_<FLAG>``. A JSON file passed with ``--config`` supplies
defaults for any flag, keyed by the flag's parameter name.

Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .events import group_events
from .exceptions import ConfigError, DataError, NumericalError, SalediError
from .ingest import (SystemProfile, filter_sustained, iso_to_minutes,
                     minutes_to_iso, outage_cmip, parse_outage_csv, write_outage_csv)
from .metrics import exceedance, log_normalized, resilience_metrics, track_sliding
from .synth import SyntheticSpec, generate_data, write_truth
from .tailfit import CandidatePolicy, gof_bootstrap, select_m_large
from .variability import M_MAX_DEFAULT, plan_n_year, rse_comparison

SCHEMA_VERSION = 1


class Run:
    """Effective configuration shared by all subcommands."""

    def __init__(self, **cfg):
        self.cfg = cfg

    def __getattr__(self, name):
        try:
            return self.cfg[name]
        except KeyError:
            raise AttributeError(name) from None

    def header(self, command: str, extra: dict | None = None) -> dict:
        # thread count and output path never change results, so they stay out
        # of the header and reports remain byte-identical across them
        config = {k: v for k, v in self.cfg.items() if k not in ("config_file", "jobs", "output")}
        config.update(extra or {})
        head = {"schema_version": SCHEMA_VERSION, "saledi_version": __version__,
                "command": command, "config": config}
        if self.timestamp:
            head["generated_at"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        return head


def _emit_json(payload: dict, out):
    out.write(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _emit_csv(head: dict, columns, rows, out):
    out.write(f"# schema_version: {head['schema_version']}\n")
    out.write("# config: " + json.dumps(head["config"], sort_keys=True) + "\n")
    if "generated_at" in head:
        out.write(f"# generated_at: {head['generated_at']}\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    out.write(buf.getvalue())


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _parse_time(text):
    if text is None:
        return None
    text = str(text)
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return iso_to_minutes(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load(run: Run, path):
    if run.n_customer is None:
        raise ConfigError("--n-customer is required")
    records = parse_outage_csv(path)
    profile = SystemProfile.from_records(records, run.n_customer,
                                         _parse_time(run.span_start), _parse_time(run.span_end))
    sustained = filter_sustained(records, run.sustained_threshold)
    return records, sustained, profile


def _catalog(run: Run, path):
    _, sustained, profile = _load(run, path)
    return group_events(sustained, profile, run.grouping_cap)


def _policy(run: Run) -> CandidatePolicy:
    return CandidatePolicy(min_quantile=run.min_quantile, min_tail=run.min_tail)


def _load_config(ctx, param, value):
    if value:
        try:
            data = json.loads(Path(value).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise click.BadParameter(f"cannot read config: {exc}")
        if not isinstance(data, dict):
            raise click.BadParameter("config file must hold a JSON object")
        default_map = {}
        for key, val in data.items():
            default_map[key.replace("-", "_")] = val
        sub = {k: v for k, v in default_map.items() if isinstance(v, dict)}
        top = {k: v for k, v in default_map.items() if not isinstance(v, dict)}
        ctx.default_map = {**top, **sub}
    return value


def _positive(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter("must be positive")
    return value


@click.group(context_settings={"auto_envvar_prefix": "SALEDI", "show_default": True})
@click.version_option(__version__)
@click.option("--config", "config_file", type=click.Path(dir_okay=False), callback=_load_config,
              is_eager=True, expose_value=True, help="JSON file of flag defaults.")
@click.option("--n-customer", type=int, callback=_positive, help="Customers served by the utility.")
@click.option("--span-start", default=None, help="Observation start (ISO minute or epoch minutes).")
@click.option("--span-end", default=None, help="Observation end (ISO minute or epoch minutes).")
@click.option("--grouping-cap", type=int, default=180, callback=_positive,
              help="Per-outage duration cap in minutes used only for event grouping.")
@click.option("--sustained-threshold", type=int, default=5, callback=_positive,
              help="Outages must last strictly longer than this many minutes.")
@click.option("--m-large", type=float, default=None, callback=_positive,
              help="Large-event threshold; selected from the data when omitted.")
@click.option("--m-max", type=float, default=M_MAX_DEFAULT, callback=_positive)
@click.option("--rse-target", type=float, default=0.1, callback=_positive)
@click.option("--bootstrap", type=int, default=1000, callback=_positive, help="Bootstrap replicates.")
@click.option("--seed", type=int, default=0)
@click.option("--min-quantile", type=float, default=0.5, help="Lowest quantile allowed as a threshold.")
@click.option("--min-tail", type=int, default=50, callback=_positive, help="Fewest tail points per candidate.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
              help="Output format; each subcommand has its own default.")
@click.option("--jobs", type=int, default=1, callback=_positive, help="Worker threads.")
@click.option("--timestamp/--no-timestamp", default=True, help="Include generated_at in reports.")
@click.option("-o", "--output", type=click.Path(dir_okay=False, allow_dash=True), default="-")
@click.pass_context
def cli(ctx, **cfg):
    """Large-event resilience metrics from utility outage records."""
    ctx.obj = Run(**cfg)


def _out(run: Run):
    return click.open_file(run.output, "w", encoding="utf-8")


@cli.command()
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.pass_obj
def validate(run: Run, input_csv):
    """Parse and summarize an outage CSV."""
    records, sustained, profile = _load(run, input_csv)
    payload = run.header("validate", {"input": str(input_csv)})
    payload["summary"] = {
        "n_records": len(records),
        "n_sustained": len(sustained),
        "n_momentary": len(records) - len(sustained),
        "span_start": minutes_to_iso(profile.span_start),
        "span_end": minutes_to_iso(profile.span_end),
        "n_year_all": profile.n_year_all,
        "total_cmip": math.fsum(outage_cmip(r, profile) for r in sustained),
    }
    with _out(run) as out:
        _emit_json(payload, out)


@cli.command()
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.pass_obj
def events(run: Run, input_csv):
    """Group sustained outages into events (CSV)."""
    catalog = _catalog(run, input_csv)
    head = run.header("events", {"input": str(input_csv)})
    rows = [(e.event_id, minutes_to_iso(e.start), minutes_to_iso(e.end), e.n_outage_in_event,
             _fmt(e.M)) for e in catalog.events]
    with _out(run) as out:
        if run.fmt == "json":
            head["events"] = [dict(zip(("event_id", "start", "end", "n_outages", "M"),
                                       (r[0], r[1], r[2], r[3], float(r[4])))) for r in rows]
            _emit_json(head, out)
        else:
            _emit_csv(head, ("event_id", "start", "end", "n_outages", "M"), rows, out)


@cli.command()
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.option("--gof/--no-gof", default=True, help="Run the bootstrap goodness-of-fit test.")
@click.pass_obj
def threshold(run: Run, input_csv, gof):
    """Select M_large by minimum KS distance and test the Pareto tail."""
    catalog = _catalog(run, input_csv)
    fit = select_m_large(catalog.cmip, _policy(run))
    p = None
    if gof:
        p = gof_bootstrap(catalog.cmip, fit, run.bootstrap, run.seed, _policy(run), run.jobs).p_value
    payload = run.header("threshold", {"input": str(input_csv), "gof": gof})
    payload.update({"M_large": fit.M_large, "alpha": fit.alpha, "ks_distance": fit.ks_distance,
                    "quantile_q": float(fit.quantile_q), "n_tail": fit.n_tail, "gof_p_value": p})
    with _out(run) as out:
        _emit_json(payload, out)


def _resolve_m_large(run: Run, catalog):
    if run.m_large is not None:
        return run.m_large, "override"
    return select_m_large(catalog.cmip, _policy(run)).M_large, "selected"


@cli.command()
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.option("--window-start", default=None, help="Defaults to the span start.")
@click.option("--window-end", default=None, help="Defaults to the span end.")
@click.pass_obj
def metrics(run: Run, input_csv, window_start, window_end):
    """SALEDI, ALED and companions over one window (JSON)."""
    catalog = _catalog(run, input_csv)
    m_large, source = _resolve_m_large(run, catalog)
    ws = _parse_time(window_start) if window_start is not None else catalog.profile.span_start
    we = _parse_time(window_end) if window_end is not None else catalog.profile.span_end
    report = resilience_metrics(catalog, m_large, (ws, we))
    payload = run.header("metrics", {"input": str(input_csv), "window_start": window_start,
                                     "window_end": window_end})
    body = report.to_dict()
    body["window_start"] = minutes_to_iso(report.window_start)
    body["window_end"] = minutes_to_iso(report.window_end)
    body["M_large_source"] = source
    body["n_allevent"] = catalog.n_allevent
    payload["report"] = body
    with _out(run) as out:
        _emit_json(payload, out)


@cli.command()
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.option("--n-year", type=int, default=None, callback=_positive,
              help="Window length in years; planned from the data and --rse-target when omitted.")
@click.option("--step-months", type=int, default=1, callback=_positive)
@click.pass_obj
def track(run: Run, input_csv, n_year, step_months):
    """Sliding-window SALEDI series (CSV)."""
    catalog = _catalog(run, input_csv)
    m_large, source = _resolve_m_large(run, catalog)
    if n_year is None:
        n_large_all = sum(1 for M in catalog.cmip if M >= m_large)
        if n_large_all == 0:
            raise DataError("no large events; cannot plan a window length")
        n_year = plan_n_year(n_large_all / catalog.profile.n_year_all, run.rse_target).n_year
    reports = track_sliding(catalog, m_large, n_year, step_months, n_jobs=run.jobs)
    head = run.header("track", {"input": str(input_csv), "n_year": n_year, "step_months": step_months,
                                "M_large_effective": m_large, "M_large_source": source})
    cols = ("window_start", "window_end", "n_large", "f_large", "ALED", "SALEDI")
    rows = [(minutes_to_iso(r.window_start), minutes_to_iso(r.window_end), r.n_large,
             _fmt(r.f_large), _fmt(r.ALED), _fmt(r.SALEDI)) for r in reports]
    with _out(run) as out:
        if run.fmt == "json":
            head["windows"] = [r.to_dict() for r in reports]
            _emit_json(head, out)
        else:
            _emit_csv(head, cols, rows, out)


@cli.command()
@click.option("--f-large", type=float, required=True, callback=_positive,
              help="Annual frequency of large events over all data.")
@click.option("--rse", "rse_local", type=float, default=None, callback=_positive,
              help="Target RSE; overrides the group-level --rse-target.")
@click.pass_obj
def plan(run: Run, f_large, rse_local):
    """Fewest whole years that meet the RSE target."""
    target = run.rse_target if rse_local is None else rse_local
    result = plan_n_year(f_large, target)
    payload = run.header("plan", {"f_large": f_large, "rse": rse_local})
    payload.update(result.to_dict())
    with _out(run) as out:
        _emit_json(payload, out)


@cli.command()
@click.option("--alpha", type=float, required=True, callback=_positive)
@click.option("--mu", type=float, default=None, help="Bounded lognormal mu of ln(M / M_large).")
@click.option("--sigma", type=float, default=None, callback=_positive)
@click.pass_obj
def rse(run: Run, alpha, mu, sigma):
    """RSE of SALEDI against SPLEDI under bounded tail models."""
    if run.m_large is None:
        raise ConfigError("--m-large is required for rse")
    if (mu is None) != (sigma is None):
        raise ConfigError("--mu and --sigma must be given together")
    table = rse_comparison(alpha, run.m_large, run.m_max, mu, sigma)
    head = run.header("rse", {"alpha": alpha, "mu": mu, "sigma": sigma})
    with _out(run) as out:
        if run.fmt == "csv":
            _emit_csv(head, ("quantity", "value"), [(k, _fmt(v)) for k, v in table.items()], out)
        else:
            head["table"] = table
            _emit_json(head, out)


@cli.command()
@click.argument("output_csv", type=click.Path(dir_okay=False))
@click.option("--truth", "truth_path", type=click.Path(dir_okay=False), default=None,
              help="Sidecar JSON path (default: OUTPUT_CSV with .truth.json).")
@click.option("--years", type=float, default=6.0, callback=_positive)
@click.option("--event-rate", type=float, default=900.0, callback=_positive)
@click.option("--tail-fraction", type=float, default=0.15)
@click.option("--threshold", "tail_threshold", type=float, default=0.1, callback=_positive)
@click.option("--tail-model", type=click.Choice(["pareto", "bounded-pareto", "bounded-lognormal"]),
              default="pareto")
@click.option("--alpha", type=float, default=0.8, callback=_positive)
@click.option("--p-max", type=float, default=None)
@click.option("--tail-mu", type=float, default=0.0)
@click.option("--tail-sigma", type=float, default=1.0)
@click.option("--timestamps", type=click.Choice(["iso", "epoch"]), default="iso")
@click.pass_obj
def simulate(run: Run, output_csv, truth_path, years, event_rate, tail_fraction, tail_threshold,
             tail_model, alpha, p_max, tail_mu, tail_sigma, timestamps):
    """Write a synthetic outage CSV and a ground-truth sidecar."""
    spec = SyntheticSpec(seed=run.seed, years=years, event_rate=event_rate, tail_fraction=tail_fraction,
                         threshold=tail_threshold, tail_model=tail_model, alpha=alpha, p_max=p_max,
                         tail_mu=tail_mu, tail_sigma=tail_sigma,
                         n_customer=run.n_customer or SyntheticSpec.n_customer)
    data = generate_data(spec)
    write_outage_csv(data.records, output_csv, style=timestamps)
    truth_path = truth_path or str(Path(output_csv).with_suffix(".truth.json"))
    write_truth(data, spec, truth_path)
    payload = run.header("simulate", {"output_csv": str(output_csv), "truth": truth_path})
    payload.update({"n_outages": len(data.records), "n_events": len(data.magnitudes),
                    "n_customer": spec.n_customer, "span_start": minutes_to_iso(data.profile.span_start),
                    "span_end": minutes_to_iso(data.profile.span_end)})
    with _out(run) as out:
        _emit_json(payload, out)


@cli.command("exceedance")
@click.argument("input_csv", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(["probability", "frequency"]), default="probability")
@click.option("--variable", type=click.Choice(["event", "outage", "log-tail"]), default="event",
              help="event CMIp, outage CMIp, or ln(M / M_large) over large events.")
@click.pass_obj
def exceedance_cmd(run: Run, input_csv, kind, variable):
    """Empirical exceedance curve (CSV value,exceedance)."""
    catalog = _catalog(run, input_csv)
    extra = {"input": str(input_csv), "kind": kind, "variable": variable}
    if variable == "event":
        values = catalog.cmip
    elif variable == "outage":
        values = [m for e in catalog.events for m in e.member_cmip]
    else:
        m_large, source = _resolve_m_large(run, catalog)
        extra.update(M_large_effective=m_large, M_large_source=source)
        values = log_normalized([M for M in catalog.cmip if M >= m_large], m_large)
    curve = exceedance(values, kind, catalog.profile.n_year_all)
    head = run.header("exceedance", extra)
    with _out(run) as out:
        if run.fmt == "json":
            head["points"] = [{"value": v, "exceedance": e} for v, e in curve.points]
            _emit_json(head, out)
        else:
            _emit_csv(head, ("value", "exceedance"), [(_fmt(v), _fmt(e)) for v, e in curve.points], out)


def _diagnostic(kind, code, message):
    message = " ".join(str(message).split())
    click.echo(f"saledi: error kind={kind} exit={code} message={json.dumps(message)}", err=True)


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="saledi", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        _diagnostic("abort", 1, "aborted")
        return 1
    except click.ClickException as exc:
        _diagnostic("config", ConfigError.exit_code, exc.format_message())
        return ConfigError.exit_code
    except SalediError as exc:
        _diagnostic(exc.kind, exc.exit_code, exc)
        return exc.exit_code
    except (ArithmeticError, FloatingPointError) as exc:
        _diagnostic(NumericalError.kind, NumericalError.exit_code, exc)
        return NumericalError.exit_code
    except OSError as exc:
        _diagnostic(DataError.kind, DataError.exit_code, exc)
        return DataError.exit_code
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
