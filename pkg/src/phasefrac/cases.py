"""Benchmark case catalog: self-contained, serializable problem definitions.

A :class:`CaseDefinition` is pure data — mesh recipe, material, boundary
conditions, initial crack regions, solve configuration, monitor channel and
expected-output descriptors. Running a case never depends on code outside
this data, so serializing a case to its config file and re-running from the
parsed file reproduces identical records bit for bit.

Config file grammar (line oriented, diff friendly)::

    # comment                         blank lines and '#' comments ignored
    [section]                         case, mesh, material, solve, monitor,
                                      expected; 'bc' and 'initial_phi' repeat,
                                      one section per entry
    [variant <name>]                  flat override map, dotted keys
    key = value                       scalars: int, float, true/false, word
                                      vectors: whitespace-separated floats

Values round-trip exactly: floats are written with ``repr`` so the parsed
case compares equal to the original.

Override keys (used by ``[variant ...]`` sections and the command line):

* ``material.E|nu|Gc|ell|split|formulation|trace_convention``
* ``solve.scheme|n_increments|max_iterations|tol_rel|tol_abs|extrapolate|
  stagger_tol|workers`` (scheme accepts ``staggered`` for staggered-single)
* ``mesh.<generator parameter>``
* ``bc.<node_set>.<dof>.value`` (must match an existing constraint)
* ``monitor.node_set|dof`` and ``expected.<key>``
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .constitutive import (
    ElasticProps,
    Formulation,
    FractureProps,
    MaterialModel,
    SplitScheme,
    TraceConvention,
)
from .mesh_io import (
    BoundaryCondition,
    Mesh,
    generate_bar_strip,
    generate_cube,
    generate_notched_plate,
    nodes_in_box,
    nodes_near_segment,
    parse_native_mesh,
)
from .solver import Scheme, SolveConfig, RunResult, run

__all__ = [
    "CaseDefinition",
    "MeshSpec",
    "RegionSpec",
    "CaseError",
    "CATALOG",
    "get_case",
    "case_bar_1d_profile",
    "case_bar_1d_strength",
    "case_plate_tension",
    "case_plate_shear",
    "case_cube3d_smoke",
    "prepare",
    "run_case",
    "apply_overrides",
    "with_variant",
    "serialize_case",
    "parse_case_config",
]


class CaseError(ValueError):
    """A case definition or override that cannot be honored."""


_GENERATORS = {
    "bar_strip": generate_bar_strip,
    "notched_plate": generate_notched_plate,
    "cube": generate_cube,
}


@dataclass(frozen=True)
class MeshSpec:
    """Mesh source: either a named generator with parameters or a file."""

    generator: str | None = None
    params: tuple = ()  # sorted (key, value) pairs; dicts don't hash/compare
    file: str | None = None

    @staticmethod
    def from_generator(name: str, **params) -> "MeshSpec":
        if name not in _GENERATORS:
            raise CaseError(f"unknown mesh generator {name!r}")
        return MeshSpec(generator=name, params=tuple(sorted(params.items())))

    def build(self) -> Mesh:
        if self.file is not None:
            with open(self.file, "r", encoding="utf-8") as fh:
                return parse_native_mesh(fh.read())
        if self.generator is None:
            raise CaseError("mesh spec has neither generator nor file")
        return _GENERATORS[self.generator](**dict(self.params))


@dataclass(frozen=True)
class RegionSpec:
    """Geometric node-selection predicate for initial crack (phi = 1) seeds."""

    kind: str  # "box" | "segment"
    lo: tuple = ()  # box corners
    hi: tuple = ()
    p0: tuple = ()  # segment endpoints
    p1: tuple = ()
    halfwidth: float = 0.0

    def select(self, mesh: Mesh) -> np.ndarray:
        if self.kind == "box":
            ids = nodes_in_box(mesh, self.lo, self.hi)
        elif self.kind == "segment":
            ids = nodes_near_segment(mesh, self.p0, self.p1, self.halfwidth)
        else:
            raise CaseError(f"unknown region kind {self.kind!r}")
        if len(ids) == 0:
            raise CaseError(f"initial-phi region {self} selects no nodes")
        return ids


@dataclass(frozen=True)
class CaseDefinition:
    """Everything needed to run one benchmark problem."""

    name: str
    description: str
    mesh: MeshSpec
    material: MaterialModel
    boundary_conditions: tuple
    solve: SolveConfig
    monitor: tuple  # (node_set, dof) whose reaction is the reported force
    initial_phi: tuple = ()
    expected: tuple = ()  # sorted (key, value) descriptor pairs
    variants: tuple = ()  # sorted (name, override-map-as-pairs) entries

    def expected_map(self) -> dict:
        return dict(self.expected)

    def variant_names(self) -> tuple:
        return tuple(name for name, _ in self.variants)


def prepare(case: CaseDefinition):
    """Build the mesh and the full constraint list (seed regions resolved).

    Each initial-phi region becomes a node set ``phi_seed_<i>`` holding
    phi = 1 for the whole run; with the history drive this reproduces the
    stationary crack profile around the seeded nodes.
    """
    mesh = case.mesh.build()
    bcs = list(case.boundary_conditions)
    for i, region in enumerate(case.initial_phi):
        name = f"phi_seed_{i}"
        mesh.node_sets[name] = region.select(mesh)
        bcs.append(BoundaryCondition(name, "phi", 1.0))
    return mesh, bcs


def run_case(case: CaseDefinition, *, workers: int | None = None, on_increment=None) -> RunResult:
    """Run a case end to end; ``workers`` overrides the configured count."""
    mesh, bcs = prepare(case)
    config = case.solve
    if workers is not None and workers != config.workers:
        config = dataclasses.replace(config, workers=workers)
    return run(mesh, case.material, bcs, config, monitor=case.monitor, on_increment=on_increment)


# ---------------------------------------------------------------------------
# Overrides


def _coerce(text):
    """Best-effort typed value from a config token (already-typed passes through)."""
    if not isinstance(text, str):
        return text
    s = text.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    if re.fullmatch(r"[+-]?\d+", s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        pass
    parts = s.split()
    if len(parts) > 1:
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            pass
    return s


def _scheme(value) -> Scheme:
    if isinstance(value, Scheme):
        return value
    name = str(value).strip().lower()
    if name == "staggered":  # common shorthand for the single-pass scheme
        name = "staggered-single"
    try:
        return Scheme(name)
    except ValueError:
        raise CaseError(
            f"unknown scheme {value!r}; choose from "
            f"{[s.value for s in Scheme]} (or 'staggered')"
        ) from None


_SOLVE_FIELDS = {
    "scheme": _scheme,
    "n_increments": int,
    "max_iterations": int,
    "tol_rel": float,
    "tol_abs": float,
    "extrapolate": bool,
    "stagger_tol": float,
    "workers": int,
    "stop_on_nonconverged": bool,
}


def apply_overrides(case: CaseDefinition, overrides: dict) -> CaseDefinition:
    """Return a copy of ``case`` with dotted-path overrides applied.

    Values may be raw strings (command line) or typed (variant maps);
    they are coerced to the target field's type either way.
    """
    out = case
    for key, raw in overrides.items():
        value = _coerce(raw)
        head, _, rest = key.partition(".")
        if head == "solve" and rest in _SOLVE_FIELDS:
            conv = _SOLVE_FIELDS[rest]
            new_solve = dataclasses.replace(out.solve, **{rest: conv(value)})
            out = dataclasses.replace(out, solve=new_solve)
        elif head == "material":
            out = dataclasses.replace(out, material=_override_material(out.material, rest, value))
        elif head == "mesh":
            out = dataclasses.replace(out, mesh=_override_mesh(out.mesh, rest, value))
        elif head == "bc":
            out = dataclasses.replace(
                out, boundary_conditions=_override_bc(out.boundary_conditions, rest, value)
            )
        elif head == "monitor" and rest in ("node_set", "dof"):
            mset, mdof = out.monitor
            mset, mdof = (value, mdof) if rest == "node_set" else (mset, value)
            out = dataclasses.replace(out, monitor=(str(mset), str(mdof)))
        elif head == "expected" and rest:
            exp = dict(out.expected)
            exp[rest] = value
            out = dataclasses.replace(out, expected=tuple(sorted(exp.items())))
        else:
            raise CaseError(f"unknown override key {key!r}")
    return out


def _override_material(mat: MaterialModel, name: str, value) -> MaterialModel:
    if name in ("E", "nu"):
        elastic = dataclasses.replace(mat.elastic, **{name: float(value)})
        return dataclasses.replace(mat, elastic=elastic)
    if name in ("Gc", "ell"):
        fracture = dataclasses.replace(mat.fracture, **{name: float(value)})
        return dataclasses.replace(mat, fracture=fracture)
    try:
        if name == "split":
            return dataclasses.replace(mat, split=SplitScheme(str(value).lower()))
        if name == "formulation":
            return dataclasses.replace(mat, formulation=Formulation(str(value).lower()))
        if name == "trace_convention":
            return dataclasses.replace(mat, spectral_trace=TraceConvention(str(value).lower()))
    except ValueError as exc:
        raise CaseError(f"bad material.{name}: {exc}") from None
    raise CaseError(f"unknown override key 'material.{name}'")


def _override_mesh(spec: MeshSpec, name: str, value) -> MeshSpec:
    if name == "file":
        return MeshSpec(file=str(value))
    if name == "generator":
        if str(value) not in _GENERATORS:
            raise CaseError(f"unknown mesh generator {value!r}")
        return dataclasses.replace(spec, generator=str(value), file=None)
    if spec.generator is None:
        raise CaseError(f"cannot set mesh.{name}: case uses a mesh file")
    params = dict(spec.params)
    params[name] = value
    return dataclasses.replace(spec, params=tuple(sorted(params.items())))


def _override_bc(bcs: tuple, rest: str, value) -> tuple:
    parts = rest.split(".")
    if len(parts) != 3 or parts[2] != "value":
        raise CaseError(f"bc override must look like bc.<set>.<dof>.value, got 'bc.{rest}'")
    node_set, dof = parts[0], parts[1]
    out, hit = [], False
    for bc in bcs:
        if bc.node_set == node_set and bc.dof == dof:
            out.append(BoundaryCondition(node_set, dof, float(value), ramped=bc.ramped))
            hit = True
        else:
            out.append(bc)
    if not hit:
        raise CaseError(f"no constraint on set {node_set!r} dof {dof!r} to override")
    return tuple(out)


def with_variant(case: CaseDefinition, name: str) -> CaseDefinition:
    """Apply one of the case's named override maps."""
    table = dict(case.variants)
    if name not in table:
        raise CaseError(f"case {case.name!r} has no variant {name!r}; have {case.variant_names()}")
    out = apply_overrides(case, dict(table[name]))
    return dataclasses.replace(out, name=f"{case.name}:{name}")


# ---------------------------------------------------------------------------
# Serialization


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return " ".join(repr(float(v)) for v in value)
    if isinstance(value, (Scheme, SplitScheme, Formulation, TraceConvention)):
        return value.value
    return str(value)


def serialize_case(case: CaseDefinition) -> str:
    lines = ["# phasefrac case file", "[case]", f"name = {case.name}"]
    if case.description:
        lines.append(f"description = {case.description}")

    lines += ["", "[mesh]"]
    if case.mesh.file is not None:
        lines.append(f"file = {case.mesh.file}")
    else:
        lines.append(f"generator = {case.mesh.generator}")
        for key, value in case.mesh.params:
            lines.append(f"{key} = {_format_value(value)}")

    mat = case.material
    lines += [
        "",
        "[material]",
        f"E = {_format_value(mat.elastic.E)}",
        f"nu = {_format_value(mat.elastic.nu)}",
        f"Gc = {_format_value(mat.fracture.Gc)}",
        f"ell = {_format_value(mat.fracture.ell)}",
        f"split = {mat.split.value}",
        f"formulation = {mat.formulation.value}",
        f"trace_convention = {mat.spectral_trace.value}",
    ]

    for bc in case.boundary_conditions:
        lines += [
            "",
            "[bc]",
            f"node_set = {bc.node_set}",
            f"dof = {bc.dof}",
            f"value = {_format_value(float(bc.value))}",
            f"ramped = {_format_value(bc.ramped)}",
        ]

    for region in case.initial_phi:
        lines += ["", "[initial_phi]", f"kind = {region.kind}"]
        if region.kind == "box":
            lines.append(f"lo = {_format_value(region.lo)}")
            lines.append(f"hi = {_format_value(region.hi)}")
        else:
            lines.append(f"p0 = {_format_value(region.p0)}")
            lines.append(f"p1 = {_format_value(region.p1)}")
            lines.append(f"halfwidth = {_format_value(region.halfwidth)}")

    cfg = case.solve
    lines += ["", "[solve]"]
    for name in _SOLVE_FIELDS:
        lines.append(f"{name} = {_format_value(getattr(cfg, name))}")
    if cfg.load_schedule is not None:
        lines.append(f"load_schedule = {_format_value(cfg.load_schedule)}")

    lines += ["", "[monitor]", f"node_set = {case.monitor[0]}", f"dof = {case.monitor[1]}"]

    if case.expected:
        lines += ["", "[expected]"]
        lines += [f"{k} = {_format_value(v)}" for k, v in case.expected]

    for name, pairs in case.variants:
        lines += ["", f"[variant {name}]"]
        lines += [f"{k} = {_format_value(v)}" for k, v in pairs]

    return "\n".join(lines) + "\n"


def _sections(text: str):
    """Yield (header, {key: raw-string}, line_no) in file order."""
    header, body, start = None, {}, 0
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise CaseError(f"line {ln}: malformed section header {raw.strip()!r}")
            if header is not None:
                yield header, body, start
            header, body, start = line[1:-1].strip(), {}, ln
        elif "=" in line:
            if header is None:
                raise CaseError(f"line {ln}: key outside any [section]")
            key, _, value = line.partition("=")
            body[key.strip()] = value.strip()
        else:
            raise CaseError(f"line {ln}: expected 'key = value', got {raw.strip()!r}")
    if header is not None:
        yield header, body, start


def _require(body: dict, keys, header: str, ln: int):
    missing = [k for k in keys if k not in body]
    if missing:
        raise CaseError(f"line {ln}: [{header}] missing keys {missing}")


def _floats(value) -> tuple:
    coerced = _coerce(value)
    if isinstance(coerced, tuple):
        return coerced
    return (float(coerced),)


def parse_case_config(text: str) -> CaseDefinition:
    """Parse a case file back into a :class:`CaseDefinition`."""
    name, description = "unnamed", ""
    mesh_spec = None
    material = None
    bcs: list = []
    regions: list = []
    solve_kw: dict = {}
    monitor = None
    expected: dict = {}
    variants: list = []

    for header, body, ln in _sections(text):
        if header == "case":
            name = body.get("name", name)
            description = body.get("description", description)
        elif header == "mesh":
            if "file" in body:
                mesh_spec = MeshSpec(file=body["file"])
            else:
                _require(body, ["generator"], header, ln)
                params = {k: _coerce(v) for k, v in body.items() if k != "generator"}
                mesh_spec = MeshSpec.from_generator(body["generator"], **params)
        elif header == "material":
            _require(body, ["E", "nu", "Gc", "ell"], header, ln)
            try:
                material = MaterialModel(
                    ElasticProps(float(body["E"]), float(body["nu"])),
                    FractureProps(float(body["Gc"]), float(body["ell"])),
                    split=SplitScheme(body.get("split", "nosplit").lower()),
                    formulation=Formulation(body.get("formulation", "hybrid").lower()),
                    spectral_trace=TraceConvention(
                        body.get("trace_convention", "literal").lower()
                    ),
                )
            except ValueError as exc:
                raise CaseError(f"line {ln}: bad [material]: {exc}") from None
        elif header == "bc":
            _require(body, ["node_set", "dof", "value"], header, ln)
            try:
                bcs.append(
                    BoundaryCondition(
                        body["node_set"],
                        body["dof"],
                        float(body["value"]),
                        ramped=bool(_coerce(body.get("ramped", "true"))),
                    )
                )
            except ValueError as exc:
                raise CaseError(f"line {ln}: bad [bc]: {exc}") from None
        elif header == "initial_phi":
            _require(body, ["kind"], header, ln)
            kind = body["kind"]
            if kind == "box":
                _require(body, ["lo", "hi"], header, ln)
                regions.append(RegionSpec("box", lo=_floats(body["lo"]), hi=_floats(body["hi"])))
            elif kind == "segment":
                _require(body, ["p0", "p1", "halfwidth"], header, ln)
                regions.append(
                    RegionSpec(
                        "segment",
                        p0=_floats(body["p0"]),
                        p1=_floats(body["p1"]),
                        halfwidth=float(body["halfwidth"]),
                    )
                )
            else:
                raise CaseError(f"line {ln}: unknown initial_phi kind {kind!r}")
        elif header == "solve":
            for key, value in body.items():
                if key == "load_schedule":
                    solve_kw[key] = np.array(_floats(value))
                elif key in _SOLVE_FIELDS:
                    solve_kw[key] = _SOLVE_FIELDS[key](_coerce(value))
                else:
                    raise CaseError(f"line {ln}: unknown [solve] key {key!r}")
        elif header == "monitor":
            _require(body, ["node_set", "dof"], header, ln)
            monitor = (body["node_set"], body["dof"])
        elif header == "expected":
            expected.update({k: _coerce(v) for k, v in body.items()})
        elif header.startswith("variant"):
            parts = header.split(None, 1)
            if len(parts) != 2 or not parts[1].strip():
                raise CaseError(f"line {ln}: variant section needs a name: [variant <name>]")
            typed = {k: _coerce(v) for k, v in body.items()}
            variants.append((parts[1].strip(), tuple(sorted(typed.items()))))
        else:
            raise CaseError(f"line {ln}: unknown section [{header}]")

    problems = []
    if mesh_spec is None:
        problems.append("[mesh]")
    if material is None:
        problems.append("[material]")
    if not bcs:
        problems.append("[bc]")
    if monitor is None:
        problems.append("[monitor]")
    if problems:
        raise CaseError(f"case file incomplete: missing section(s) {', '.join(problems)}")

    try:
        solve = SolveConfig(**solve_kw)
    except (TypeError, ValueError) as exc:
        raise CaseError(f"bad [solve] section: {exc}") from None

    case = CaseDefinition(
        name=name,
        description=description,
        mesh=mesh_spec,
        material=material,
        boundary_conditions=tuple(bcs),
        solve=solve,
        monitor=monitor,
        initial_phi=tuple(regions),
        expected=tuple(sorted(expected.items())),
        variants=tuple(variants),
    )
    # Surface override errors (bad keys/values in variant maps) at parse time.
    for vname in case.variant_names():
        with_variant(case, vname)
    return case


# ---------------------------------------------------------------------------
# Catalog

# Shared plate parameters: steel-like elasticity, toughness and length scale
# sized so the square-millimeter specimen fails inside the prescribed ramp.
_E, _NU, _GC = 210_000.0, 0.3, 2.7
_PLATE_ELL = 0.024


def _expected(**kw) -> tuple:
    return tuple(sorted(kw.items()))


def _variants(**kw) -> tuple:
    return tuple(sorted((name, tuple(sorted(ov.items()))) for name, ov in kw.items()))


def case_bar_1d_profile() -> CaseDefinition:
    """Stationary crack profile on a long thin strip.

    A single column of nodes at x = 0 is held at phi = 1 with zero load;
    the converged field is the regularized profile exp(-|x|/ell), and the
    fracture energy equals Gc times the crack cross-section area.
    """
    ell = 0.1
    height = 0.01  # one element thick, element size = ell/10 both ways
    return CaseDefinition(
        name="bar_1d_profile",
        description="phi=1 seeded mid-strip relaxes to the exp(-|x|/ell) profile",
        mesh=MeshSpec.from_generator(
            "bar_strip", length=2.0, height=height, nx=200, ny=1, x0=-1.0
        ),
        material=MaterialModel(ElasticProps(_E, 0.0), FractureProps(_GC, ell)),
        boundary_conditions=(
            BoundaryCondition("left", "x", 0.0, ramped=False),
            BoundaryCondition("right", "x", 0.0, ramped=False),
            BoundaryCondition("bottom", "y", 0.0, ramped=False),
            BoundaryCondition("top", "y", 0.0, ramped=False),
        ),
        initial_phi=(RegionSpec("box", lo=(0.0, 0.0), hi=(0.0, height)),),
        solve=SolveConfig(scheme=Scheme.MONOLITHIC, n_increments=1, max_iterations=25),
        monitor=("right", "x"),
        expected=_expected(
            ell=ell,
            crack_area=height,
            profile_l2_rel=0.02,
            surface_energy_rel=0.03,
        ),
    )


def case_bar_1d_strength() -> CaseDefinition:
    """Unnotched bar pulled past its strength limit.

    With nu = 0 and no defect the pre-localization response follows the
    homogeneous closed form: peak nominal stress (9/16)*sqrt(E*Gc/(3*ell))
    at strain sqrt(Gc/(3*ell*E)). The ramp ends 25% past the peak strain so
    the maximum recorded force is the strength.
    """
    ell, length, height = 0.1, 1.0, 0.05
    eps_peak = math.sqrt(_GC / (3.0 * ell * _E))
    return CaseDefinition(
        name="bar_1d_strength",
        description="homogeneous bar strength vs the closed-form peak stress",
        mesh=MeshSpec.from_generator(
            "bar_strip", length=length, height=height, nx=40, ny=1, x0=0.0
        ),
        material=MaterialModel(ElasticProps(_E, 0.0), FractureProps(_GC, ell)),
        boundary_conditions=(
            BoundaryCondition("left", "x", 0.0, ramped=False),
            BoundaryCondition("bottom", "y", 0.0, ramped=False),
            BoundaryCondition("right", "x", 1.25 * eps_peak * length),
        ),
        solve=SolveConfig(scheme=Scheme.MONOLITHIC, n_increments=50, max_iterations=600),
        monitor=("right", "x"),
        expected=_expected(
            area=height,
            peak_stress_rel=0.02,
            prepeak_slope_rel=0.01,
        ),
        variants=_variants(ell_x4={"material.ell": 4.0 * ell}),
    )


def case_plate_tension() -> CaseDefinition:
    """Edge-cracked square plate pulled vertically: unstable mode-I failure.

    The seam crack spans the left half at mid-height; the fine band follows
    the straight crack path. Failure is catastrophic — the reaction drops to
    near zero within a couple of increments once the ligament breaks.
    """
    return CaseDefinition(
        name="plate_tension",
        description="edge-cracked plate, vertical ramp, unstable mode-I failure",
        mesh=MeshSpec.from_generator(
            "notched_plate",
            h_fine=0.0048,
            h_coarse=0.04,
            band_half=0.035,
            refinement="band",
            size=1.0,
            crack_length=0.5,
            ell=_PLATE_ELL,
        ),
        material=MaterialModel(ElasticProps(_E, _NU), FractureProps(_GC, _PLATE_ELL)),
        boundary_conditions=(
            BoundaryCondition("bottom", "x", 0.0, ramped=False),
            BoundaryCondition("bottom", "y", 0.0, ramped=False),
            BoundaryCondition("top", "x", 0.0, ramped=False),
            BoundaryCondition("top", "y", 6.0e-3),
        ),
        solve=SolveConfig(scheme=Scheme.MONOLITHIC, n_increments=100, max_iterations=2000),
        monitor=("top", "y"),
        expected=_expected(
            drop_increments=3,
            ligament_phi=0.95,
            runtime_s=300.0,
        ),
        variants=_variants(extrapolated={"solve.extrapolate": True}),
    )


def case_plate_shear() -> CaseDefinition:
    """Edge-cracked square plate sheared horizontally: stable crack growth.

    Uses the volumetric-deviatoric split (hybrid form) so the closing crack
    faces do not drive damage; the crack curves toward the bottom-right
    corner, so the whole lower half is refined. Ships staggered variants:
    the fine one (10^4 steps) tracks the monolithic response, the coarse one
    (10^3 steps) deviates on the softening branch.
    """
    return CaseDefinition(
        name="plate_shear",
        description="edge-cracked plate sheared at the top, crack curves down-right",
        mesh=MeshSpec.from_generator(
            "notched_plate",
            h_fine=0.016,
            h_coarse=0.04,
            band_half=0.035,
            refinement="lower",
            size=1.0,
            crack_length=0.5,
            ell=_PLATE_ELL,
        ),
        material=MaterialModel(
            ElasticProps(_E, _NU),
            FractureProps(_GC, _PLATE_ELL),
            split=SplitScheme.VOLDEV,
            formulation=Formulation.HYBRID,
        ),
        boundary_conditions=(
            BoundaryCondition("bottom", "x", 0.0, ramped=False),
            BoundaryCondition("bottom", "y", 0.0, ramped=False),
            BoundaryCondition("top", "y", 0.0, ramped=False),
            BoundaryCondition("top", "x", 1.5e-2),
        ),
        solve=SolveConfig(scheme=Scheme.MONOLITHIC, n_increments=100, max_iterations=5000),
        monitor=("top", "x"),
        expected=_expected(
            scheme_agreement_rel=0.05,
            coarse_peak_rel=0.05,
            coarse_softening_min_dev=0.05,
            runtime_s=900.0,
        ),
        variants=_variants(
            staggered_fine={
                "solve.scheme": "staggered-single",
                "solve.n_increments": 10_000,
                "solve.max_iterations": 50,
                "solve.extrapolate": False,
            },
            staggered_coarse={
                "solve.scheme": "staggered-single",
                "solve.n_increments": 1_000,
                "solve.max_iterations": 50,
                "solve.extrapolate": False,
            },
        ),
    )


def case_cube3d_smoke() -> CaseDefinition:
    """Small cube with a seeded mid-plane half-notch under axial tension.

    Exercises the full 3D pipeline with the spectral split in anisotropic
    form. All lateral faces are roller-constrained, so the compression
    variant (negated top displacement) is a uniaxial-strain state with no
    positive principal strain anywhere: the history field stays exactly
    zero and the phase field never leaves the seeded profile.
    """
    ell = 0.25
    return CaseDefinition(
        name="cube3d_smoke",
        description="3D spectral/anisotropic smoke test with a seeded notch plane",
        mesh=MeshSpec.from_generator("cube", n=6, size=1.0),
        material=MaterialModel(
            ElasticProps(_E, _NU),
            FractureProps(_GC, ell),
            split=SplitScheme.SPECTRAL,
            formulation=Formulation.ANISOTROPIC,
        ),
        boundary_conditions=(
            BoundaryCondition("bottom", "z", 0.0, ramped=False),
            BoundaryCondition("x0", "x", 0.0, ramped=False),
            BoundaryCondition("x1", "x", 0.0, ramped=False),
            BoundaryCondition("y0", "y", 0.0, ramped=False),
            BoundaryCondition("y1", "y", 0.0, ramped=False),
            BoundaryCondition("top", "z", 2.0e-3),
        ),
        initial_phi=(RegionSpec("box", lo=(0.0, 0.0, 0.5), hi=(0.5, 1.0, 0.5)),),
        solve=SolveConfig(scheme=Scheme.MONOLITHIC, n_increments=10, max_iterations=300),
        monitor=("top", "z"),
        expected=_expected(seed_phi=1.0),
        variants=_variants(
            compression={"bc.top.z.value": -2.0e-3},
            ell_doubled={"material.ell": 2.0 * ell},
        ),
    )


CATALOG = {
    "bar_1d_profile": case_bar_1d_profile,
    "bar_1d_strength": case_bar_1d_strength,
    "plate_tension": case_plate_tension,
    "plate_shear": case_plate_shear,
    "cube3d_smoke": case_cube3d_smoke,
}


def get_case(name: str) -> CaseDefinition:
    """Look up a catalog entry, accepting ``name`` or ``name:variant``."""
    base, _, variant = name.partition(":")
    if base not in CATALOG:
        raise CaseError(f"unknown case {base!r}; available: {sorted(CATALOG)}")
    case = CATALOG[base]()
    if variant:
        case = with_variant(case, variant)
    return case
