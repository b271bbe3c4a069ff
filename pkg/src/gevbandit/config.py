"""Experiment configuration files and the built-in presets.

A configuration is a YAML mapping. Arms are numbered from 1 in files::

    label: env1-nl
    algorithm: bandit          # bandit | experts
    model:
      kind: nested-logit       # mnl | nested-logit | gnl
      nests:
        - {arms: [1, 3], mu: 0.05}
        - {arms: [2, 4], mu: 0.1}
    environment:
      preset: env1             # or  pis: [...]  or  rewards_csv: path
    eta: 1.0
    horizon: 10000
    repetitions: 100
    seed: 0
    mode: reward               # reward | loss
    estimator: sample-mean     # sample-mean | importance-weighted

A ``gnl`` model takes ``mu`` and nests with ``shares: {arm: share}``; an
``mnl`` model takes ``mu`` (and optionally ``n``). Unknown keys are
rejected.
"""
from __future__ import annotations

import copy
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from .choice_models import GnlModel, Nest, make_mnl, make_nested_logit
from .environments import AdversarialEnv, BernoulliEnv, env1, env2, env2_nesting
from .errors import ConfigError, InvalidParameterError, InvalidPartitionError
from .harness import ExperimentConfig

ENV_PRESETS = {"env1": env1, "env2": env2}

_TOP_KEYS = {"label", "algorithm", "model", "environment", "eta", "horizon", "repetitions",
             "seed", "mode", "estimator", "bound"}
_MODEL_KEYS = {"kind", "mu", "n", "nests"}
_NEST_KEYS = {"arms", "shares", "mu"}
_ENV_KEYS = {"preset", "pis", "rewards_csv", "bound", "name"}


def _nl(nests, **extra):
    return {"kind": "nested-logit",
            "nests": [{"arms": [i + 1 for i in arms], "mu": mu} for arms, mu in nests], **extra}


def _preset(label, model, env, **kw):
    base = {"label": label, "algorithm": "bandit", "model": model, "environment": {"preset": env},
            "eta": 1.0, "horizon": 10_000, "repetitions": 100, "seed": 0,
            "mode": "reward", "estimator": "sample-mean"}
    base.update(kw)
    return base


_ENV1_NL = [([0, 2], 0.05), ([1, 3], 0.1)]

PRESETS: dict[str, list[dict]] = {
    "env1-mnl": [_preset("env1-mnl", {"kind": "mnl", "mu": 0.25}, "env1")],
    "env1-nl": [_preset("env1-nl", _nl(_ENV1_NL), "env1")],
    "env1-mnl-exploit": [_preset("env1-mnl-exploit", {"kind": "mnl", "mu": 0.05}, "env1")],
    "env1-nl-retuned": [_preset("env1-nl-retuned", _nl([([0, 2], 0.15), ([1, 3], 0.2)]), "env1")],
    "env1-nl-as-mnl": [
        _preset("env1-nl-as-mnl", _nl([([0, 2], 0.998), ([1, 3], 0.998)]), "env1"),
        _preset("env1-mnl-mu1", {"kind": "mnl", "mu": 1.0}, "env1"),
    ],
    "env2-mnl": [_preset("env2-mnl", {"kind": "mnl", "mu": 0.25}, "env2")],
    "env2-nl": [_preset("env2-nl", _nl(env2_nesting()), "env2")],
}


def list_presets() -> list[str]:
    return list(PRESETS)


def _line_map(text: str) -> dict[str, int]:
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    lines: dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{path}.{k.value}" if path else str(k.value)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for j, v in enumerate(node.value):
                p = f"{path}[{j}]"
                lines[p] = v.start_mark.line + 1
                walk(v, p)

    if root is not None:
        walk(root, "")
    return lines


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"expected a mapping at {where or 'top level'}", field=where or None)
    unknown = sorted(set(d) - allowed)
    if unknown:
        name = f"{where}.{unknown[0]}" if where else str(unknown[0])
        raise ConfigError(f"unknown key {unknown[0]!r}", field=name)


def _arm_index(a, field, n=None) -> int:
    if isinstance(a, bool) or not isinstance(a, int) or a < 1 or (n is not None and a > n):
        raise ConfigError(f"arm labels are integers from 1, got {a!r}", field=field)
    return a - 1


def _build_environment(spec, base_dir: Path | None):
    _check_keys(spec, _ENV_KEYS, "environment")
    given = [k for k in ("preset", "pis", "rewards_csv") if k in spec]
    if len(given) != 1:
        raise ConfigError("environment needs exactly one of preset, pis, rewards_csv",
                          field="environment")
    try:
        if "preset" in spec:
            name = spec["preset"]
            if name not in ENV_PRESETS:
                raise ConfigError(f"unknown environment preset {name!r}", field="environment.preset")
            return ENV_PRESETS[name]()
        if "pis" in spec:
            return BernoulliEnv(tuple(spec["pis"]), name=spec.get("name", "bernoulli"))
        path = Path(spec["rewards_csv"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        rewards = np.loadtxt(path, delimiter=",", ndmin=2)
        return AdversarialEnv(rewards, bound=float(spec.get("bound", 1.0)),
                              name=spec.get("name", path.stem))
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field="environment") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read reward matrix: {exc}", field="environment.rewards_csv") from exc


def _build_model(spec, n_env: int) -> GnlModel:
    _check_keys(spec, _MODEL_KEYS, "model")
    kind = spec.get("kind")
    if kind == "mnl":
        n = spec.get("n", n_env)
        if "mu" not in spec:
            raise ConfigError("mnl model needs mu", field="model.mu")
        try:
            return make_mnl(int(n), float(spec["mu"]))
        except InvalidParameterError as exc:
            raise ConfigError(str(exc), field="model.mu", invariant="mu > 0") from exc
    nests = spec.get("nests")
    if not isinstance(nests, list) or not nests:
        raise ConfigError("model needs a nonempty list of nests", field="model.nests")
    for k, nest in enumerate(nests):
        _check_keys(nest, _NEST_KEYS, f"model.nests[{k}]")
        if "mu" not in nest:
            raise ConfigError("nest needs mu", field=f"model.nests[{k}].mu")
    n = int(spec.get("n", n_env))

    if kind == "nested-logit":
        if "mu" in spec and float(spec["mu"]) != 1.0:
            raise ConfigError("nested logit has top-level mu = 1", field="model.mu",
                              invariant="mu = 1 for nested logit")
        parts = []
        for k, nest in enumerate(nests):
            if "arms" not in nest or "shares" in nest:
                raise ConfigError("nested-logit nests list their arms", field=f"model.nests[{k}].arms")
            arms = [_arm_index(a, f"model.nests[{k}].arms", n) for a in nest["arms"]]
            mu_l = float(nest["mu"])
            if mu_l > 1.0:
                raise ConfigError(f"nest scale {mu_l} exceeds top-level mu = 1",
                                  field=f"model.nests[{k}].mu", invariant="mu_l <= mu")
            parts.append((arms, mu_l))
        try:
            return make_nested_logit(parts, n=n)
        except InvalidPartitionError as exc:
            raise ConfigError(str(exc), field="model.nests", invariant="nests partition the arms") from exc
        except InvalidParameterError as exc:
            raise ConfigError(str(exc), field="model.nests", invariant="0 < mu_l <= mu") from exc

    if kind == "gnl":
        if "mu" not in spec:
            raise ConfigError("gnl model needs mu", field="model.mu")
        mu = float(spec["mu"])
        built = []
        for k, nest in enumerate(nests):
            where = f"model.nests[{k}]"
            if "shares" in nest:
                shares = {_arm_index(a, f"{where}.shares", n): float(s) for a, s in nest["shares"].items()}
            elif "arms" in nest:
                shares = {_arm_index(a, f"{where}.arms", n): 1.0 for a in nest["arms"]}
            else:
                raise ConfigError("nest needs arms or shares", field=where)
            mu_l = float(nest["mu"])
            if mu_l > mu:
                raise ConfigError(f"nest scale {mu_l} exceeds top-level mu = {mu}",
                                  field=f"{where}.mu", invariant="mu_l <= mu")
            built.append(Nest.from_shares(mu_l, shares))
        try:
            return GnlModel(mu, tuple(built), n)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc), field="model", invariant="GNL share/scale constraints") from exc

    raise ConfigError(f"unknown model kind {kind!r}", field="model.kind")


def config_from_dict(d: dict, base_dir: Path | None = None) -> ExperimentConfig:
    """Validate a configuration mapping and build the experiment."""
    _check_keys(d, _TOP_KEYS, "")
    for key in ("model", "environment"):
        if key not in d:
            raise ConfigError(f"missing required key {key!r}", field=key)
    env = _build_environment(d["environment"], base_dir)
    model = _build_model(d["model"], env.n)
    kwargs = {k: d[k] for k in ("algorithm", "mode", "estimator", "label") if k in d}
    for k, cast in (("eta", float), ("bound", float), ("horizon", int), ("repetitions", int), ("seed", int)):
        if k in d:
            try:
                kwargs[k] = cast(d[k])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{k} must be a number, got {d[k]!r}", field=k) from exc
    if "horizon" not in kwargs and isinstance(env, AdversarialEnv):
        kwargs["horizon"] = env.horizon
    return ExperimentConfig(model=model, environment=env, **kwargs)


def parse_config(text: str, base_dir: Path | None = None) -> ExperimentConfig:
    """Parse YAML configuration text.

    Syntax errors and validation failures raise :class:`ConfigError`
    carrying the offending field and, where known, its line number.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"cannot parse configuration: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    try:
        return config_from_dict(data, base_dir)
    except ConfigError as exc:
        if exc.line is None and exc.field is not None:
            lines = _line_map(text)
            line = lines.get(exc.field)
            # fall back to the closest enclosing key
            field = exc.field
            while line is None and ("." in field or "[" in field):
                field = field.rsplit(".", 1)[0] if "." in field else field.rsplit("[", 1)[0]
                line = lines.get(field)
            if line is not None:
                raise ConfigError(str(exc).split("; ")[0], field=exc.field,
                                  invariant=exc.invariant, line=line) from exc
        raise


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def preset_configs(name: str) -> list[ExperimentConfig]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}", field="preset")
    return [config_from_dict(copy.deepcopy(d)) for d in PRESETS[name]]


def with_overrides(config: ExperimentConfig, seed=None, repetitions=None, horizon=None) -> ExperimentConfig:
    changes = {k: v for k, v in (("seed", seed), ("repetitions", repetitions), ("horizon", horizon))
               if v is not None}
    return replace(config, **changes) if changes else config
