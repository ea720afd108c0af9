"""Run configuration: JSON document -> validated :class:`RunConfig`.

Schema (every block except ``atoms`` is optional)::

    {
      "geometry": {"positions": {"A": [x, y, z], "B": [...], "C": [...]}}
               or {"sweep": {"family": "equilateral", "d_min": .., "d_max": ..,
                             "steps": n, "spacing": "linear" | "log", "normal_axis": 2}}
               or {"sweep": {"family": "line", "A": [...], "B": [...],
                             "C_from": [...], "C_to": [...], "steps": n}},
      "atoms": {"A": {"k_res": .., "mu": [..] | number, "excited": false}, "B": {..}, "C": {..}},
      "quadrature": {"rel_tol": .., "abs_tol": .., "max_subdivisions": .., "pv_window": ..,
                     "tail_panels": ..},
      "box": {"L": .., "k_cut": .., "regulator_ratio": .., "t_nodes": ..},
      "correlate": {"pairs": [{"r": [...], "r_prime": [...]}], "method": "laplace" | "pv"},
      "potential": {"method": "closed" | "symmetrized"},
      "verify": {"seed": .., "include_box": true},
      "units": {"reference_wavenumber": K},
      "output": {"format": "json" | "csv", "path": null}
    }

Without a ``units`` block lengths are read in units of ``1/k_res`` of the
excited atom and wavenumbers are divided by that ``k_res``. With one, lengths
are in units of ``1/K`` of the user's wavenumber unit: lengths are multiplied
and wavenumbers divided by ``K``.

Exactly one atom is excited. If it is not ``C`` the atoms are relabeled
cyclically so that it is; the mapping is recorded in the resolved config.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from cp3.errors import SchemaError, ValidationError
from cp3.geometry import UnitSystem, equilateral, triangle_from_positions
from cp3.oracle import BoxSpec
from cp3.polarizability import State, PolarizabilityModel
from cp3.quadrature import QuadratureSpec

LABELS = ("A", "B", "C")
_TOP_KEYS = {"geometry", "atoms", "quadrature", "box", "correlate", "potential", "verify", "units", "output"}

DEFAULT_BOX = {"L": 10.0, "k_cut": 28.0, "regulator_ratio": 3.5, "t_nodes": 32}
DEFAULT_QUADRATURE = QuadratureSpec().as_dict()


# -- small typed readers ------------------------------------------------------------


def _obj(node, path):
    if not isinstance(node, dict):
        raise SchemaError(path, "expected an object")
    return node


def _no_extra(node, allowed, path):
    extra = sorted(set(node) - set(allowed))
    if extra:
        raise SchemaError(f"{path}.{extra[0]}", "unknown key")


def _number(node, key, path, default=None, positive=False, required=False):
    if key not in node or node[key] is None:
        if required:
            raise SchemaError(f"{path}.{key}", "required")
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SchemaError(f"{path}.{key}", "expected a finite number")
    if positive and not v > 0:
        raise ValidationError(f"{path}.{key} must be positive, got {v}")
    return float(v)


def _integer(node, key, path, default=None, minimum=1):
    if key not in node:
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{path}.{key}", "expected an integer")
    if v < minimum:
        raise ValidationError(f"{path}.{key} must be >= {minimum}, got {v}")
    return v


def _choice(node, key, path, options, default):
    v = node.get(key, default)
    if v not in options:
        raise SchemaError(f"{path}.{key}", f"expected one of {list(options)}")
    return v


def _vector(v, path):
    if not isinstance(v, list) or len(v) != 3:
        raise SchemaError(path, "expected a list of three numbers")
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise SchemaError(f"{path}[{i}]", "expected a finite number")
    return [float(x) for x in v]


# -- geometry families (module level so scan rows can be pickled) -------------------


def _equilateral_row(d, *, scale, normal_axis):
    return equilateral(d * scale, normal_axis=normal_axis)


def _line_row(s, x_C, y_C, z_C, *, scale, r_A, r_B):
    return triangle_from_positions(np.asarray(r_A) * scale, np.asarray(r_B) * scale, np.array([x_C, y_C, z_C]) * scale)


@dataclass(frozen=True)
class Sweep:
    family: str
    rows: tuple
    factory: object

    def grid(self):
        return [(dict(p), self.factory) for p in self.rows]

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; positions and wavenumbers are already in natural units."""

    models: tuple
    positions: dict | None
    sweep: Sweep | None
    quadrature: QuadratureSpec
    box: BoxSpec
    correlate_pairs: tuple
    correlate_method: str
    potential_method: str
    verify_seed: int
    verify_include_box: bool
    output_format: str | None
    output_path: str | None
    resolved: dict = field(default_factory=dict)

    def triangle(self):
        if self.positions is None:
            raise ValidationError("geometry.positions is required for this command")
        return triangle_from_positions(self.positions["A"], self.positions["B"], self.positions["C"])

    def with_rel_tol(self, rel_tol):
        quad = self.quadrature.with_rel_tol(rel_tol)
        resolved = dict(self.resolved)
        resolved["quadrature"] = quad.as_dict()
        return replace(self, quadrature=quad, resolved=resolved)


def _atoms(node, path):
    node = _obj(node, path)
    _no_extra(node, LABELS, path)
    raw = {}
    for lab in LABELS:
        p = f"{path}.{lab}"
        if lab not in node:
            raise SchemaError(p, "required")
        atom = _obj(node[lab], p)
        _no_extra(atom, ("k_res", "mu", "excited"), p)
        k_res = _number(atom, "k_res", p, required=True, positive=True)
        mu = atom.get("mu", 1.0)
        if isinstance(mu, list):
            mu = _vector(mu, f"{p}.mu")
        else:
            mu = _number(atom, "mu", p, default=1.0)
        exc = atom.get("excited", False)
        if not isinstance(exc, bool):
            raise SchemaError(f"{p}.excited", "expected true or false")
        raw[lab] = {"k_res": k_res, "mu": mu, "excited": exc}
    excited = [lab for lab in LABELS if raw[lab]["excited"]]
    if len(excited) != 1:
        raise ValidationError(f"exactly one atom must be excited, found {len(excited)} ({', '.join(excited) or 'none'})")
    return raw, excited[0]


def _relabel(excited_label):
    """Cyclic map new label -> original label that puts the excited atom at C."""
    shift = {"C": 0, "A": 1, "B": 2}[excited_label]
    return {new: LABELS[(i + shift) % 3] for i, new in enumerate(LABELS)}


def parse_config(document):
    """Validate a config given as JSON text or an already-parsed dict.

    Raises
    ------
    SchemaError
        Malformed document; the message starts with the offending field path.
    ValidationError
        Well-formed but inconsistent values.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON ({exc.msg} at line {exc.lineno})") from None
    doc = _obj(document, "$")
    _no_extra(doc, _TOP_KEYS, "$")
    if "atoms" not in doc:
        raise SchemaError("$.atoms", "required")
    raw_atoms, excited_label = _atoms(doc["atoms"], "$.atoms")
    mapping = _relabel(excited_label)

    units_node = doc.get("units")
    if units_node is None:
        K = raw_atoms[excited_label]["k_res"]
        length_scale = 1.0
        units_resolved = {"lengths": "1/k_res of the excited atom", "reference_wavenumber": K}
    else:
        units_node = _obj(units_node, "$.units")
        _no_extra(units_node, ("reference_wavenumber",), "$.units")
        K = _number(units_node, "reference_wavenumber", "$.units", required=True, positive=True)
        length_scale = K
        units_resolved = {"lengths": "1/reference_wavenumber", "reference_wavenumber": K}
    units = UnitSystem(K)

    models = []
    for new in LABELS:
        a = raw_atoms[mapping[new]]
        models.append(
            PolarizabilityModel(
                float(units.wavenumber(a["k_res"])),
                a["mu"],
                State.EXCITED if a["excited"] else State.GROUND,
            )
        )

    def to_natural(v):
        return (np.asarray(v, dtype=float) * length_scale).tolist()

    # geometry
    positions = sweep = None
    geom_resolved = None
    if "geometry" in doc:
        g = _obj(doc["geometry"], "$.geometry")
        _no_extra(g, ("positions", "sweep"), "$.geometry")
        if ("positions" in g) == ("sweep" in g):
            raise SchemaError("$.geometry", "give exactly one of 'positions' or 'sweep'")
        if "positions" in g:
            pn = _obj(g["positions"], "$.geometry.positions")
            _no_extra(pn, LABELS, "$.geometry.positions")
            user = {}
            for lab in LABELS:
                if lab not in pn:
                    raise SchemaError(f"$.geometry.positions.{lab}", "required")
                user[lab] = _vector(pn[lab], f"$.geometry.positions.{lab}")
            positions = {new: to_natural(user[mapping[new]]) for new in LABELS}
            geom_resolved = {"positions": user}
        else:
            sweep, geom_resolved = _sweep(g["sweep"], "$.geometry.sweep", length_scale, mapping)

    quadrature = _quadrature(doc.get("quadrature", {}), "$.quadrature")
    box = _box(doc.get("box", {}), "$.box")

    corr = _obj(doc.get("correlate", {}), "$.correlate")
    _no_extra(corr, ("pairs", "method"), "$.correlate")
    method = _choice(corr, "method", "$.correlate", ("laplace", "pv"), "laplace")
    pairs_user = corr.get("pairs", [])
    if not isinstance(pairs_user, list):
        raise SchemaError("$.correlate.pairs", "expected a list")
    pairs = []
    for i, pr in enumerate(pairs_user):
        p = f"$.correlate.pairs[{i}]"
        pr = _obj(pr, p)
        _no_extra(pr, ("r", "r_prime"), p)
        if "r" not in pr or "r_prime" not in pr:
            raise SchemaError(p, "needs 'r' and 'r_prime'")
        pairs.append((to_natural(_vector(pr["r"], f"{p}.r")), to_natural(_vector(pr["r_prime"], f"{p}.r_prime"))))

    pot = _obj(doc.get("potential", {}), "$.potential")
    _no_extra(pot, ("method",), "$.potential")
    pot_method = _choice(pot, "method", "$.potential", ("closed", "symmetrized"), "closed")

    ver = _obj(doc.get("verify", {}), "$.verify")
    _no_extra(ver, ("seed", "include_box"), "$.verify")
    seed = _integer(ver, "seed", "$.verify", default=20240611, minimum=0)
    include_box = ver.get("include_box", True)
    if not isinstance(include_box, bool):
        raise SchemaError("$.verify.include_box", "expected true or false")

    out = _obj(doc.get("output", {}), "$.output")
    _no_extra(out, ("format", "path"), "$.output")
    fmt = out.get("format")
    if fmt is not None and fmt not in ("json", "csv"):
        raise SchemaError("$.output.format", "expected 'json' or 'csv'")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise SchemaError("$.output.path", "expected a string")

    resolved = {
        "geometry": geom_resolved,
        "atoms": {lab: raw_atoms[lab] for lab in LABELS},
        "relabeling": {new: mapping[new] for new in LABELS},
        "units": units_resolved,
        "quadrature": quadrature.as_dict(),
        "box": box.as_dict(),
        "correlate": {"pairs": pairs_user, "method": method},
        "potential": {"method": pot_method},
        "verify": {"seed": seed, "include_box": include_box},
        "output": {"format": fmt, "path": path},
    }
    return RunConfig(
        models=tuple(models),
        positions=positions,
        sweep=sweep,
        quadrature=quadrature,
        box=box,
        correlate_pairs=tuple(pairs),
        correlate_method=method,
        potential_method=pot_method,
        verify_seed=seed,
        verify_include_box=include_box,
        output_format=fmt,
        output_path=path,
        resolved=resolved,
    )


def _quadrature(node, path):
    node = _obj(node, path)
    _no_extra(node, DEFAULT_QUADRATURE, path)
    d = DEFAULT_QUADRATURE
    try:
        return QuadratureSpec(
            rel_tol=_number(node, "rel_tol", path, d["rel_tol"], positive=True),
            abs_tol=_number(node, "abs_tol", path, d["abs_tol"], positive=True),
            max_subdivisions=_integer(node, "max_subdivisions", path, d["max_subdivisions"]),
            pv_window=_number(node, "pv_window", path, d["pv_window"], positive=True),
            tail_panels=_integer(node, "tail_panels", path, d["tail_panels"], minimum=2),
        )
    except ValueError as exc:
        if isinstance(exc, (SchemaError, ValidationError)):
            raise
        raise ValidationError(f"{path}: {exc}") from None


def _box(node, path):
    node = _obj(node, path)
    _no_extra(node, DEFAULT_BOX, path)
    d = DEFAULT_BOX
    try:
        return BoxSpec(
            L=_number(node, "L", path, d["L"], positive=True),
            k_cut=_number(node, "k_cut", path, d["k_cut"], positive=True),
            regulator_ratio=_number(node, "regulator_ratio", path, d["regulator_ratio"], positive=True),
            t_nodes=_integer(node, "t_nodes", path, d["t_nodes"], minimum=2),
        )
    except ValueError as exc:
        if isinstance(exc, (SchemaError, ValidationError)):
            raise
        raise ValidationError(f"{path}: {exc}") from None


def _sweep(node, path, length_scale, mapping):
    node = _obj(node, path)
    family = _choice(node, "family", path, ("equilateral", "line"), None)
    if family == "equilateral":
        _no_extra(node, ("family", "d_min", "d_max", "steps", "spacing", "normal_axis"), path)
        d_min = _number(node, "d_min", path, required=True, positive=True)
        d_max = _number(node, "d_max", path, required=True, positive=True)
        steps = _integer(node, "steps", path, default=None)
        if steps is None:
            raise SchemaError(f"{path}.steps", "required")
        if d_max < d_min:
            raise ValidationError(f"{path}: empty range, d_max < d_min")
        spacing = _choice(node, "spacing", path, ("linear", "log"), "linear")
        axis = _integer(node, "normal_axis", path, default=2, minimum=0)
        if axis > 2:
            raise ValidationError(f"{path}.normal_axis must be 0, 1 or 2")
        ds = np.geomspace(d_min, d_max, steps) if spacing == "log" else np.linspace(d_min, d_max, steps)
        rows = tuple({"d": float(d)} for d in ds)
        factory = partial(_equilateral_row, scale=length_scale, normal_axis=axis)
        resolved = {"family": family, "d_min": d_min, "d_max": d_max, "steps": steps, "spacing": spacing, "normal_axis": axis}
        return Sweep(family, rows, factory), resolved
    _no_extra(node, ("family", "A", "B", "C_from", "C_to", "steps"), path)
    user = {}
    for key in ("A", "B", "C_from", "C_to"):
        if key not in node:
            raise SchemaError(f"{path}.{key}", "required")
        user[key] = _vector(node[key], f"{path}.{key}")
    if mapping["C"] != "C":
        raise ValidationError(f"{path}: the line family moves atom C, which must be the excited atom")
    steps = _integer(node, "steps", path, default=None)
    if steps is None:
        raise SchemaError(f"{path}.steps", "required")
    start, stop = np.array(user["C_from"]), np.array(user["C_to"])
    rows = []
    for s in np.linspace(0.0, 1.0, steps):
        x = start + s * (stop - start)
        rows.append({"s": float(s), "x_C": float(x[0]), "y_C": float(x[1]), "z_C": float(x[2])})
    factory = partial(_line_row, scale=length_scale, r_A=user["A"], r_B=user["B"])
    return Sweep(family, tuple(rows), factory), {"family": family, **user, "steps": steps}


def load_config(path):
    """Read and validate a config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError("$", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
