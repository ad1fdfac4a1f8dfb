"""Command-line front end.

Verbs: ``relativities``, ``hmse-scan``, ``bayes``, ``simulate``, ``verify``,
``reproduce-table``.  A run is configured by an optional bundled preset plus
an optional JSON config file (the file overlays the preset), plus flag
overrides.  Exit codes: 0 ok, 2 config error, 3 numeric failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bayes import (
    MixtureBayesModel,
    bayes_agg_premium_freqhist,
    bayes_agg_premium_fullhist,
    bayes_freq_premium,
)
from .errors import BonusMalusError, ModelValidationError
from .hmse import threshold_scan
from .model import (
    ClaimHistory,
    DegenerateEffects,
    FreqRule,
    GammaSeverity,
    LognormalCopulaEffects,
    MixtureExponentialEffects,
    ModelSpec,
    PoissonSeverity,
    Portfolio,
    RiskClass,
    SeverityRule,
    validate_model,
    validate_rule,
)
from .presets import get_preset
from .quadrature import severity_marginal_quantile
from .relativity import (
    optimal_relativity_dependent,
    optimal_relativity_frequency,
    optimal_relativity_severity,
)
from .simulate import SimConfig, empirical_relativity, simulate_paths
from .verify import oracle_agreement_battery

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration loading


def _deep_merge(base: dict, overlay: dict) -> dict:
    out = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(preset: str | None, config_path: str | None) -> dict:
    cfg: dict = {}
    if preset:
        try:
            cfg = get_preset(preset)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            user = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = _deep_merge(cfg, user)
    if not cfg:
        raise ConfigError("no configuration given; pass --config and/or --preset")
    return cfg


def parse_model(cfg: dict) -> ModelSpec:
    try:
        section = cfg["model"]
        if "classes_template" in section:
            weights = section.get("weights") or cfg.get("weights")
            cells = section["classes_template"]
            if not weights:
                raise ConfigError(
                    "this preset needs class weights: supply 'model.weights' "
                    f"({len(cells)} values, one per listed cell)"
                )
            if len(weights) != len(cells):
                raise ConfigError(f"expected {len(cells)} weights, got {len(weights)}")
            classes = [
                RiskClass(float(w), float(c["freq_rate"]), float(c["sev_rate"]))
                for w, c in zip(weights, cells)
            ]
        else:
            classes = [
                RiskClass(float(c["weight"]), float(c["freq_rate"]), float(c["sev_rate"]))
                for c in section["classes"]
            ]
        sev_cfg = section["severity"]
        kind = sev_cfg.get("kind", "gamma")
        if kind == "gamma":
            severity = GammaSeverity(float(sev_cfg["dispersion"]))
        elif kind == "poisson":
            severity = PoissonSeverity()
        else:
            raise ConfigError(f"unknown severity kind {kind!r}")
        eff_cfg = section["effects"]
        eff_kind = eff_cfg.get("kind", "lognormal_copula")
        if eff_kind == "lognormal_copula":
            effects = LognormalCopulaEffects(
                float(eff_cfg["corr"]),
                float(eff_cfg["log_var1"]),
                float(eff_cfg["log_var2"]),
            )
        elif eff_kind == "mixture_exponential":
            effects = MixtureExponentialEffects(
                float(eff_cfg["weight1"]), float(eff_cfg["rate1"]), float(eff_cfg["rate2"])
            )
        elif eff_kind == "degenerate":
            effects = DegenerateEffects()
        else:
            raise ConfigError(f"unknown effects kind {eff_kind!r}")
        return validate_model(ModelSpec(Portfolio(classes), severity, effects))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad model configuration: {exc}") from exc


def resolve_rules(cfg: dict, model: ModelSpec, nodes: int) -> list:
    """Instantiate rules; severity rules fan out over thresholds and quantiles."""
    thresholds = [float(t) for t in cfg.get("thresholds", [])]
    for q in cfg.get("quantiles", []):
        thresholds.append(severity_marginal_quantile(float(q), model, nodes))
    rules = []
    for entry in cfg.get("rules", []):
        try:
            if "step" in entry:
                rules.append(validate_rule(FreqRule(int(entry["max_level"]), int(entry["step"]))))
            elif "threshold" in entry:
                rules.append(
                    validate_rule(
                        SeverityRule(
                            int(entry["max_level"]),
                            int(entry["small_step"]),
                            int(entry["large_step"]),
                            float(entry["threshold"]),
                        )
                    )
                )
            else:
                if not thresholds:
                    raise ConfigError(
                        "severity rule without explicit threshold needs "
                        "'thresholds' or 'quantiles'"
                    )
                for phi in thresholds:
                    rules.append(
                        validate_rule(
                            SeverityRule(
                                int(entry["max_level"]),
                                int(entry["small_step"]),
                                int(entry["large_step"]),
                                phi,
                            )
                        )
                    )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad rule entry {entry!r}: {exc}") from exc
    if not rules:
        raise ConfigError("no transition rules configured")
    return rules


def parse_history(cfg: dict) -> ClaimHistory:
    section = cfg.get("history")
    if section is None:
        raise ConfigError("no claim history configured")
    try:
        if isinstance(section, dict):
            history = ClaimHistory(section.get("counts", []), section.get("aggregates"))
        else:
            history = ClaimHistory([row[0] for row in section], [row[1] for row in section])
        return history.validate()
    except (TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"bad claim history: {exc}") from exc


def parse_bayes_model(cfg: dict) -> MixtureBayesModel:
    try:
        section = cfg["bayes"]
        effects = MixtureExponentialEffects(
            float(section["weight1"]), float(section["rate1"]), float(section["rate2"])
        )
        model = MixtureBayesModel(
            float(section["freq_rate"]),
            float(section["sev_rate"]),
            effects,
            bool(section.get("unit_severity_effect", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad bayes model configuration: {exc}") from exc
    from .model import _validate_effects

    _validate_effects(model.effects)
    if model.freq_rate <= 0 or model.sev_rate <= 0:
        raise ConfigError("bayes model rates must be positive")
    return model


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x, precision: int) -> str:
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return "undefined"
    if precision < 0:
        return repr(x)
    return f"{x:.{precision}f}"


def _jnum(x, precision: int):
    if x is None:
        return None
    x = float(x)
    if np.isnan(x):
        return None
    return x if precision < 0 else round(x, precision)


def _rule_tag(rule) -> str:
    if isinstance(rule, FreqRule):
        return f"h{rule.step}"
    return f"h{rule.small_step}_{rule.large_step}_phi{rule.threshold:g}"


def _rule_name(rule) -> str:
    if isinstance(rule, FreqRule):
        return f"-1/+{rule.step}"
    return f"-1/+{rule.small_step}/+{rule.large_step} (threshold {rule.threshold:g})"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(path)


def _table_csv(table, precision: int) -> str:
    lines = ["level,relativity,stationary_prob"]
    for lvl in range(table.rule.max_level, -1, -1):
        lines.append(
            f"{lvl},{_fmt(table.relativities[lvl], precision)},"
            f"{_fmt(table.stationary[lvl], precision)}"
        )
    lines.append(f"hmse_raw,{_fmt(table.hmse_raw, precision)},")
    lines.append(f"hmse_normalized,{_fmt(table.hmse_normalized, precision)},")
    return "\n".join(lines) + "\n"


def _table_json(table, precision: int) -> str:
    payload = {
        "rule": _rule_name(table.rule),
        "threshold": table.threshold,
        "family": table.family,
        "quadrature_nodes": table.nodes,
        "levels": [
            {
                "level": lvl,
                "relativity": _jnum(table.relativities[lvl], precision),
                "stationary_prob": _jnum(table.stationary[lvl], precision),
            }
            for lvl in range(table.rule.max_level, -1, -1)
        ],
        "hmse_raw": _jnum(table.hmse_raw, precision),
        "hmse_normalized": _jnum(table.hmse_normalized, precision),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _compute_table(model: ModelSpec, rule, family: str, nodes: int):
    if isinstance(rule, SeverityRule):
        return optimal_relativity_severity(model, rule, nodes)
    if family == "frequency":
        return optimal_relativity_frequency(model, rule, nodes)
    return optimal_relativity_dependent(model, rule, nodes)


# ---------------------------------------------------------------------------
# verbs


def cmd_relativities(cfg: dict, args) -> int:
    model = parse_model(cfg)
    nodes = cfg["quadrature_nodes"]
    family = cfg.get("family", "aggregate")
    out = Path(args.out)
    for rule in resolve_rules(cfg, model, nodes):
        table = _compute_table(model, rule, family, nodes)
        name = f"relativities_{_rule_tag(rule)}.{cfg['format']}"
        if cfg["format"] == "csv":
            _write(out / name, _table_csv(table, cfg["precision"]))
        else:
            _write(out / name, _table_json(table, cfg["precision"]))
    return EXIT_OK


def cmd_hmse_scan(cfg: dict, args) -> int:
    model = parse_model(cfg)
    nodes = cfg["quadrature_nodes"]
    precision = cfg["precision"]
    quantiles = [float(q) for q in cfg.get("quantiles", [])]
    thresholds = [float(t) for t in cfg.get("thresholds", [])]
    thresholds += [
        float(e["threshold"]) for e in cfg.get("rules", []) if "threshold" in e
    ]
    quantile_of = {}
    for q in quantiles:
        phi = severity_marginal_quantile(q, model, nodes)
        quantile_of[phi] = q
        thresholds.append(phi)
    thresholds = list(dict.fromkeys(thresholds))
    if not thresholds:
        raise ConfigError("hmse-scan needs 'thresholds', 'quantiles', or explicit rule thresholds")
    sev_templates = [
        SeverityRule(int(e["max_level"]), int(e["small_step"]), int(e["large_step"]), 1.0)
        for e in cfg.get("rules", [])
        if "step" not in e
    ]
    if not sev_templates:
        raise ConfigError("hmse-scan needs at least one severity-aware rule")
    rows = []
    for template in sev_templates:
        for entry in threshold_scan(model, template, thresholds, nodes):
            rows.append((template, entry))
    rows.sort(key=lambda pair: (pair[1].report.hmse_raw, pair[1].threshold))
    out = Path(args.out)
    if cfg["format"] == "csv":
        lines = ["rule,threshold,quantile,hmse_raw,hmse_normalized"]
        for template, entry in rows:
            q = quantile_of.get(entry.threshold)
            lines.append(
                f"-1/+{template.small_step}/+{template.large_step},"
                f"{_fmt(entry.threshold, precision)},{'' if q is None else q},"
                f"{_fmt(entry.report.hmse_raw, precision)},"
                f"{_fmt(entry.report.hmse_normalized, precision)}"
            )
        _write(out / "hmse_scan.csv", "\n".join(lines) + "\n")
    else:
        payload = [
            {
                "rule": f"-1/+{template.small_step}/+{template.large_step}",
                "threshold": _jnum(entry.threshold, precision),
                "quantile": quantile_of.get(entry.threshold),
                "hmse_raw": _jnum(entry.report.hmse_raw, precision),
                "hmse_normalized": _jnum(entry.report.hmse_normalized, precision),
            }
            for template, entry in rows
        ]
        _write(out / "hmse_scan.json", json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_bayes(cfg: dict, args) -> int:
    model = parse_bayes_model(cfg)
    history = parse_history(cfg)
    precision = cfg["precision"]
    freq = bayes_freq_premium(history, model)
    agg_freq = bayes_agg_premium_freqhist(history, model)
    values = [("frequency_premium", freq), ("aggregate_premium_count_history", agg_freq)]
    if history.aggregates is not None or history.years == 0:
        values.append(
            ("aggregate_premium_full_history", bayes_agg_premium_fullhist(history, model))
        )
    out = Path(args.out)
    if cfg["format"] == "csv":
        lines = ["premium,value"] + [f"{k},{_fmt(v, precision)}" for k, v in values]
        _write(out / "bayes_premiums.csv", "\n".join(lines) + "\n")
    else:
        _write(
            out / "bayes_premiums.json",
            json.dumps({k: _jnum(v, precision) for k, v in values}, indent=2) + "\n",
        )
    return EXIT_OK


def cmd_simulate(cfg: dict, args) -> int:
    model = parse_model(cfg)
    nodes = cfg["quadrature_nodes"]
    rule = resolve_rules(cfg, model, nodes)[0]
    sim = cfg.get("simulation", {})
    summary = simulate_paths(
        SimConfig(
            model,
            rule,
            int(sim.get("paths", 100_000)),
            int(sim.get("seed", 0)),
            burn_in_years=int(sim.get("burn_in_years", 120)),
            start_level=int(sim.get("start_level", 0)),
        )
    )
    precision = cfg["precision"]
    dist = summary.level_distribution
    ses = summary.level_se
    try:
        rel, rel_se = empirical_relativity(summary)
    except BonusMalusError:
        rel = rel_se = None
    out = Path(args.out)
    lines = ["level,stationary_prob,stationary_se,relativity,relativity_se"]
    for lvl in range(rule.max_level, -1, -1):
        rel_s = "" if rel is None else _fmt(rel[lvl], precision)
        rel_se_s = "" if rel_se is None else _fmt(rel_se[lvl], precision)
        lines.append(
            f"{lvl},{_fmt(dist[lvl], precision)},{_fmt(ses[lvl], precision)},{rel_s},{rel_se_s}"
        )
    _write(out / f"simulation_{_rule_tag(rule)}.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(cfg: dict, args) -> int:
    model = parse_model(cfg)
    nodes = cfg["quadrature_nodes"]
    rules = resolve_rules(cfg, model, nodes)
    sim = cfg.get("simulation", {})
    report = oracle_agreement_battery(
        [(model, rule) for rule in rules],
        n_paths=int(sim.get("paths", 1_000_000)),
        seed=int(sim.get("seed", 20260809)),
        nodes=max(nodes, 64),
    )
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_reproduce_table(cfg: dict, args) -> int:
    model = parse_model(cfg)
    nodes = cfg["quadrature_nodes"]
    precision = cfg["precision"]
    rules = resolve_rules(cfg, model, nodes)
    tables = [(rule, _compute_table(model, rule, "aggregate", nodes)) for rule in rules]
    out = Path(args.out)
    if cfg["format"] == "csv":
        header = ["level"]
        for rule, _ in tables:
            header += [f"r_{_rule_tag(rule)}", f"p_{_rule_tag(rule)}"]
        lines = [",".join(header)]
        max_level = rules[0].max_level
        for lvl in range(max_level, -1, -1):
            row = [str(lvl)]
            for _, table in tables:
                row += [
                    _fmt(table.relativities[lvl], precision),
                    _fmt(table.stationary[lvl], precision),
                ]
            lines.append(",".join(row))
        for label, attr in (("hmse_raw", "hmse_raw"), ("hmse_normalized", "hmse_normalized")):
            row = [label]
            for _, table in tables:
                row += [_fmt(getattr(table, attr), precision), ""]
            lines.append(",".join(row))
        _write(out / f"table_{args.preset or 'custom'}.csv", "\n".join(lines) + "\n")
    else:
        payload = [json.loads(_table_json(table, precision)) for _, table in tables]
        _write(out / f"table_{args.preset or 'custom'}.json", json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bonusmalus",
        description="Design and evaluate bonus-malus systems under a dependent "
        "frequency-severity risk model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("relativities", "emit optimal relativity tables per rule and threshold"),
        ("hmse-scan", "rank thresholds of severity-aware rules by score"),
        ("bayes", "closed-form credibility premiums for a claim history"),
        ("simulate", "run the Monte Carlo simulator for the first configured rule"),
        ("verify", "oracle-agreement battery (exits 4 on disagreement)"),
        ("reproduce-table", "emit a study-layout table for a preset"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="JSON config file (overlays the preset)")
        cmd.add_argument("--preset", help="bundled preset id, e.g. ex2a")
        cmd.add_argument("--format", choices=["csv", "json"], help="output format")
        cmd.add_argument("--precision", type=int, help="decimal places (-1 for full)")
        cmd.add_argument("--seed", type=int, help="master simulation seed")
        cmd.add_argument("--quadrature-nodes", type=int, help="nodes per dimension")
        cmd.add_argument("--out", default=".", help="output directory")
    return parser


_COMMANDS = {
    "relativities": cmd_relativities,
    "hmse-scan": cmd_hmse_scan,
    "bayes": cmd_bayes,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "reproduce-table": cmd_reproduce_table,
}


def _apply_overrides(cfg: dict, args) -> dict:
    cfg.setdefault("format", "csv")
    cfg.setdefault("precision", 3)
    cfg.setdefault("quadrature_nodes", 32)
    if args.format:
        cfg["format"] = args.format
    if args.precision is not None:
        cfg["precision"] = args.precision
    if args.quadrature_nodes is not None:
        cfg["quadrature_nodes"] = args.quadrature_nodes
    if args.seed is not None:
        cfg.setdefault("simulation", {})
        cfg["simulation"]["seed"] = args.seed
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.preset, args.config), args)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, ModelValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BonusMalusError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
