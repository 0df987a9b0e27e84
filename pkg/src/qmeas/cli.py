"""``qmeas`` experiment runner.

    qmeas <experiment> --config <path> [--seed N] [--samples N] [--out <path>]

Experiments: epr, martens, chsh, subquantum, collective.  A config is a JSON
object ``{"inputs": {...}, "samples": N, "seed": N, "output_path": ...}``;
command-line flags override it.  Each run writes its report atomically plus
``<report>.manifest.json`` holding the resolved config, so
``qmeas <experiment> --config <report>.manifest.json`` reproduces it.

Exit codes: 0 success, 2 invalid config/inputs, 3 numerical anomaly,
4 I/O failure.
"""
import argparse
import csv
import io as _io
import json
import os
import sys
import tempfile
import time

import jsonschema
import numpy as np

from . import __version__, collectives, epr, joint_nonideal, subquantum
from . import io as qio
from .errors import QMeasError
from .states import singlet

EXPERIMENTS = ("epr", "martens", "chsh", "subquantum", "collective")
DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 0
EXIT_OK, EXIT_SCHEMA, EXIT_ANOMALY, EXIT_IO = 0, 2, 3, 4

_OBJ = {"type": "object"}
_ANGLES = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
INPUT_SCHEMAS = {
    "epr": {"type": "object", "required": ["state", "first", "second"],
            "properties": {"state": _OBJ, "first": _OBJ, "second": _OBJ}},
    "martens": {"type": "object", "required": ["grid", "p", "q"],
                "properties": {"grid": _OBJ, "p": _OBJ, "q": _OBJ}},
    "chsh": {"type": "object",
             "properties": {"state": _OBJ, "angles": _ANGLES,
                            "settings": {"type": "array", "items": _OBJ,
                                         "minItems": 4, "maxItems": 4}}},
    "subquantum": {"type": "object", "required": ["model"],
                   "properties": {"model": {"enum": ["noncontextual_sphere",
                                                     "contextual_reference"]},
                                  "angles": _ANGLES}},
    "collective": {
        "type": "object", "required": ["scenario", "rules"],
        "properties": {
            "scenario": {"type": "object", "required": ["kind"],
                         "properties": {"kind": {"enum": ["epr", "proper_mixture", "iid"]}}},
            "rules": {"type": "array", "minItems": 1, "items": {
                "type": "object", "required": ["kind"],
                "properties": {"kind": {"enum": ["every_kth", "side_label", "previous_value"]}}}},
            "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        }},
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "inputs": {"type": "object"},
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "output_path": {"type": "string"},
    },
}
CHSH_ANGLES = [0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4]


class ConfigError(Exception):
    pass


class Anomaly(Exception):
    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


def fmt(x):
    """Shortest round-trip decimal for floats; everything else via str."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def to_csv(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return _jsonable(np.stack([x.real, x.imag], axis=-1))
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def to_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".qmeas-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- experiments ------------------------------------------------------------

def run_epr(inputs, samples, seed):
    state = qio.state_from_json(inputs["state"])
    s = epr.EPRScenario(state, qio.povm_from_json(inputs["first"], pvm=True),
                        qio.povm_from_json(inputs["second"], pvm=True))
    rep = epr.analyze(s)
    labels = list(s.first_observable.labels)
    report = {
        "first_labels": labels,
        "second_labels": list(s.second_observable.labels),
        "joint_probability": rep.joint,
        "first_marginal": rep.first_marginal,
        "conditional_probability": [
            {"condition": k, "distribution": v} for k, v in rep.conditionals.items()],
        "conditionally_prepared_states": [
            {"condition": k, "matrix": qio.matrix_to_json(v.matrix)}
            for k, v in rep.prepared_states.items()],
        "contextual_state_pair": qio.matrix_to_json(rep.contextual_pair.matrix),
        "contextual_state_first": qio.matrix_to_json(rep.contextual_first.matrix),
        "contextual_state_second": qio.matrix_to_json(rep.contextual_second.matrix),
    }
    return to_json(report), None


def run_martens(inputs, samples, seed):
    r = qio.bivariate_from_json(inputs["grid"])
    p = qio.povm_from_json(inputs["p"], pvm=True)
    q = qio.povm_from_json(inputs["q"], pvm=True)
    rep = joint_nonideal.verify_martens(r, p, q)
    text = to_csv(["J_lambda", "J_mu", "bound", "margin"],
                  [[rep.j_lambda, rep.j_mu, rep.bound, rep.margin]])
    anomaly = None
    if not rep.satisfied:
        anomaly = Anomaly("entropic nonideality sum below the bound",
                          {"J_lambda": rep.j_lambda, "J_mu": rep.j_mu, "bound": rep.bound})
    return text, anomaly


def _table_rows(table):
    e = table.correlators()
    err = table.stderr if table.stderr is not None else [None] * 4
    return [[name, float(v), None if s is None else float(s)]
            for name, v, s in zip(subquantum.PAIR_NAMES, e, err)]


def run_chsh(inputs, samples, seed):
    state = qio.state_from_json(inputs["state"]) if "state" in inputs else singlet()
    if "settings" in inputs:
        settings = tuple(qio.povm_from_json(o, pvm=True) for o in inputs["settings"])
    else:
        settings = subquantum.chsh_settings(inputs.get("angles", CHSH_ANGLES))
    table = subquantum.quantum_correlation_table(state, settings)
    lp = subquantum.joint_distribution_exists(table)
    rows = _table_rows(table)
    rows.append(["S", subquantum.chsh_value(table), 0.0])
    rows.append(["lp_feasible", lp.feasible, None])
    return to_csv(["setting_pair", "E", "stderr"], rows), None


def run_subquantum(inputs, samples, seed):
    angles = inputs.get("angles", CHSH_ANGLES)
    settings = ("a1", "b1", "a2", "b2")
    if inputs["model"] == "noncontextual_sphere":
        model = subquantum.noncontextual_sphere_model(angles)
        table = subquantum.hv_correlation_table(model, settings, samples, seed)
    else:
        model = subquantum.contextual_reference_model(angles)
        table = subquantum.trajectory_correlation(model, settings, samples, seed)
    s = subquantum.chsh_value(table)
    sigma = subquantum.chsh_sigma(table)
    within = s <= subquantum.LOCAL_BOUND + 5 * sigma
    lp = subquantum.joint_distribution_exists(table)
    rows = _table_rows(table)
    rows.append(["S", s, sigma])
    rows.append(["S_bound_check", "within" if within else "exceeds", None])
    rows.append(["lp_feasible", lp.feasible, None])
    anomaly = None
    if inputs["model"] == "noncontextual_sphere" and not within:
        anomaly = Anomaly("instantaneous hidden-variable model exceeds the CHSH bound",
                          {"S": s, "sigma": sigma})
    return to_csv(["setting_pair", "E", "stderr"], rows), anomaly


def _rule_from_json(obj):
    kind = obj["kind"]
    if kind == "every_kth":
        return collectives.EveryKth(obj.get("k", 2), obj.get("offset", 0))
    if kind == "side_label":
        return collectives.SideLabel(obj["label"])
    return collectives.PreviousValue(obj["value"])


def run_collective(inputs, samples, seed):
    sc = inputs["scenario"]
    kind = sc["kind"]
    if kind == "epr":
        state = qio.state_from_json(sc["state"])
        seq1, seq2 = collectives.generate_epr_sequences(
            state, qio.povm_from_json(sc["first"], pvm=True),
            qio.povm_from_json(sc["second"], pvm=True), samples, seed)
        seq = seq2 if sc.get("sequence", 2) == 2 else seq1
    elif kind == "proper_mixture":
        preps = [qio.state_from_json(p) for p in sc["preparations"]]
        weights = sc.get("weights", [1.0] * len(preps))
        seq = collectives.generate_proper_mixture(
            preps, weights, qio.povm_from_json(sc["observable"]), samples, seed)
    else:
        seq = collectives.iid_sequence(sc.get("probabilities", [0.5, 0.5]), samples, seed)
    rules = [_rule_from_json(r) for r in inputs["rules"]]
    rep = collectives.homogeneity_test(seq, rules, inputs.get("alpha", 0.01))
    rows = [[r.rule, r.outcome, r.freq_full, r.freq_sub, r.z, r.verdict] for r in rep.rows]
    return to_csv(["rule", "outcome", "freq_full", "freq_sub", "z", "verdict"], rows), None


RUNNERS = {
    "epr": run_epr,
    "martens": run_martens,
    "chsh": run_chsh,
    "subquantum": run_subquantum,
    "collective": run_collective,
}


# -- driver -----------------------------------------------------------------

def resolve_config(experiment, raw, seed=None, samples=None, out=None):
    """Apply defaults and overrides; validate against the experiment schema."""
    if "resolved_config" in raw:
        raw = raw["resolved_config"]
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message}") from None
    if raw.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for experiment {raw['experiment']!r}, not {experiment!r}")
    inputs = raw.get("inputs", {})
    try:
        jsonschema.validate(inputs, INPUT_SCHEMAS[experiment])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"inputs: {exc.message}") from None
    ext = ".json" if experiment == "epr" else ".csv"
    return {
        "experiment": experiment,
        "inputs": inputs,
        "samples": int(samples if samples is not None else raw.get("samples", DEFAULT_SAMPLES)),
        "seed": int(seed if seed is not None else raw.get("seed", DEFAULT_SEED)),
        "output_path": out or raw.get("output_path") or f"{experiment}_report{ext}",
    }


def run(config):
    """Execute a resolved config. Returns the exit status."""
    start = time.perf_counter()
    experiment = config["experiment"]
    try:
        text, anomaly = RUNNERS[experiment](config["inputs"], config["samples"], config["seed"])
    except (QMeasError, ValueError, KeyError, TypeError) as exc:
        print(f"qmeas: invalid inputs: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out = config["output_path"]
    manifest = {
        "experiment": experiment,
        "resolved_config": config,
        "toolkit_version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "report": os.path.basename(out),
    }
    try:
        write_atomic(out, text)
        if anomaly is not None:
            manifest["anomaly"] = {"message": str(anomaly), **anomaly.details}
            write_atomic(out + ".anomaly.json", to_json(manifest["anomaly"]))
        write_atomic(out + ".manifest.json", to_json(manifest))
    except OSError as exc:
        print(f"qmeas: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    if anomaly is not None:
        print(f"qmeas: anomaly: {anomaly}", file=sys.stderr)
        return EXIT_ANOMALY
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="qmeas", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="experiment config JSON")
    parser.add_argument("--seed", type=int, help="64-bit seed (overrides config)")
    parser.add_argument("--samples", type=int, help="Monte Carlo sample count")
    parser.add_argument("--out", help="report path (overrides config)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        print(f"qmeas: malformed config: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"qmeas: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    if not isinstance(raw, dict):
        print("qmeas: config must be a JSON object", file=sys.stderr)
        return EXIT_SCHEMA
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("qmeas: seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_SCHEMA
    if args.samples is not None and args.samples < 1:
        print("qmeas: samples must be positive", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        config = resolve_config(args.experiment, raw, args.seed, args.samples, args.out)
    except ConfigError as exc:
        print(f"qmeas: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
