"""Mesh data model, structured generators, file formats and result writers.

Units are mm; meshes are single element kind (quad4 plane strain or hex8).

Native mesh format (plain text, line oriented, 0-based indices)::

    PFMESH 1
    # comment lines and blank lines are allowed anywhere
    NODES <count>
    <x> <y> [<z>]            one line per node
    ELEMENTS <kind> <count>  kind: quad4 | hex8
    <i0> <i1> ...            one line per element
    NSET <name> <count>
    <i> <i> ...              indices, any number per line, <count> total
    ELSET <name> <count>
    <i> ...

The ``PFMESH 1`` header versions the grammar. Parsing reports *all* errors
it can find (with line numbers), not just the first.

A small subset of Abaqus .inp is read too: *NODE, *ELEMENT (TYPE=CPE4T or
C3D8T), *NSET, *BOUNDARY. The temperature dof (11) in *BOUNDARY becomes a
held phase-field value (an initial crack); dofs 1-3 become displacement
constraints. Anything else produces a warning and is skipped, except unknown
element types, which are a hard error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .elements import ElementKind, InvertedElementError, jacobian_volumes

__all__ = [
    "Mesh",
    "BoundaryCondition",
    "MeshFormatError",
    "InpResult",
    "parse_native_mesh",
    "write_native_mesh",
    "parse_inp",
    "generate_notched_plate",
    "generate_bar_strip",
    "generate_cube",
    "nodes_in_box",
    "nodes_near_segment",
    "write_vtk",
    "write_history_csv",
]

_DOF_NAMES = ("x", "y", "z", "phi")


class MeshFormatError(ValueError):
    """Parse or validation failure; carries the full list of problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class BoundaryCondition:
    """A Dirichlet constraint on a named node set.

    dof 'x'/'y'/'z' constrain displacement components; value is the final
    magnitude, scaled by the load factor each increment when ``ramped``.
    dof 'phi' holds the phase field (an initial crack); it is never ramped.
    """

    node_set: str
    dof: str
    value: float
    ramped: bool = True

    def __post_init__(self):
        if self.dof not in _DOF_NAMES:
            raise ValueError(f"dof must be one of {_DOF_NAMES}, got {self.dof!r}")
        if self.dof == "phi":
            self.ramped = False


@dataclass
class Mesh:
    """Single-kind finite element mesh with named node/element sets.

    Treat instances as immutable once validated: the assembly layer caches
    geometry-derived arrays keyed on the instance.
    """

    kind: ElementKind
    nodes: np.ndarray
    elements: np.ndarray
    node_sets: dict = field(default_factory=dict)
    element_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.node_sets = {k: np.asarray(v, dtype=np.int64) for k, v in self.node_sets.items()}
        self.element_sets = {
            k: np.asarray(v, dtype=np.int64) for k, v in self.element_sets.items()
        }

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.kind.dim

    def validate(self) -> "Mesh":
        """Check structural invariants; list every violation found."""
        errors = []
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.kind.dim:
            errors.append(
                f"nodes must be (n, {self.kind.dim}) for {self.kind.value}, "
                f"got {self.nodes.shape}"
            )
        if self.elements.ndim != 2 or self.elements.shape[1] != self.kind.n_nodes:
            errors.append(
                f"elements must be (m, {self.kind.n_nodes}) for {self.kind.value}, "
                f"got {self.elements.shape}"
            )
        else:
            bad = (self.elements < 0) | (self.elements >= self.n_nodes)
            for e in np.nonzero(bad.any(axis=1))[0]:
                errors.append(f"element {e} references out-of-range node index")
            dup = (np.diff(np.sort(self.elements, axis=1), axis=1) == 0).any(axis=1)
            for e in np.nonzero(dup)[0]:
                errors.append(f"element {e} repeats a node index")
        for name, idx in self.node_sets.items():
            if idx.size and (idx.min() < 0 or idx.max() >= self.n_nodes):
                errors.append(f"node set {name!r} references out-of-range node index")
            if len(np.unique(idx)) != len(idx):
                errors.append(f"node set {name!r} contains duplicate indices")
        for name, idx in self.element_sets.items():
            if idx.size and (idx.min() < 0 or idx.max() >= self.n_elements):
                errors.append(f"element set {name!r} references out-of-range element index")
        if not errors:
            try:
                jacobian_volumes(self.nodes, self.elements, self.kind)
            except InvertedElementError as exc:
                errors.append(str(exc))
        if errors:
            raise MeshFormatError(errors)
        return self


# ---------------------------------------------------------------------------
# Native format
# ---------------------------------------------------------------------------

_NATIVE_HEADER = "PFMESH 1"


def parse_native_mesh(text: str) -> Mesh:
    """Parse the native line-oriented format; see the module docstring."""
    lines = text.splitlines()
    errors = []

    def significant(i):
        s = lines[i].strip()
        return s and not s.startswith("#")

    idx = [i for i in range(len(lines)) if significant(i)]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(idx):
            return None, len(lines)
        i = idx[pos]
        pos += 1
        return lines[i].strip(), i + 1  # 1-based line number

    first, ln = take()
    if first != _NATIVE_HEADER:
        raise MeshFormatError([f"line {ln}: expected header {_NATIVE_HEADER!r}, got {first!r}"])

    nodes = None
    kind = None
    conn = None
    node_sets = {}
    element_sets = {}

    def read_count_rows(count, parse_row, what, header_ln):
        rows = []
        for _ in range(count):
            line, ln = take()
            if line is None:
                errors.append(f"line {header_ln}: {what} promises {count} rows, file ended early")
                break
            try:
                rows.append(parse_row(line))
            except ValueError as exc:
                errors.append(f"line {ln}: bad {what} row: {exc}")
        return rows

    def read_indices(count, what, header_ln):
        vals = []
        while len(vals) < count:
            line, ln = take()
            if line is None:
                errors.append(f"line {header_ln}: {what} promises {count} indices, file ended early")
                break
            try:
                vals.extend(int(t) for t in line.split())
            except ValueError:
                errors.append(f"line {ln}: bad index in {what}")
                break
        if len(vals) > count:
            errors.append(f"line {header_ln}: {what} lists more indices than promised")
        return vals[:count]

    while True:
        line, ln = take()
        if line is None:
            break
        tok = line.split()
        key = tok[0].upper()
        if key == "NODES":
            if len(tok) != 2 or not tok[1].isdigit():
                errors.append(f"line {ln}: NODES needs a count")
                continue
            rows = read_count_rows(int(tok[1]), lambda s: [float(t) for t in s.split()], "node", ln)
            if rows:
                widths = {len(r) for r in rows}
                if len(widths) != 1 or widths - {2, 3}:
                    errors.append(f"line {ln}: node rows must have a uniform 2 or 3 coordinates")
                else:
                    nodes = np.array(rows)
        elif key == "ELEMENTS":
            if len(tok) != 3 or not tok[2].isdigit():
                errors.append(f"line {ln}: ELEMENTS needs a kind and a count")
                continue
            try:
                kind = ElementKind(tok[1].lower())
            except ValueError:
                errors.append(f"line {ln}: unknown element kind {tok[1]!r}")
                continue
            rows = read_count_rows(int(tok[2]), lambda s: [int(t) for t in s.split()], "element", ln)
            widths = {len(r) for r in rows}
            if rows and widths != {kind.n_nodes}:
                errors.append(f"line {ln}: {kind.value} rows need {kind.n_nodes} node indices")
            elif rows:
                conn = np.array(rows)
        elif key in ("NSET", "ELSET"):
            if len(tok) != 3 or not tok[2].isdigit():
                errors.append(f"line {ln}: {key} needs a name and a count")
                continue
            target = node_sets if key == "NSET" else element_sets
            if tok[1] in target:
                errors.append(f"line {ln}: duplicate {key} name {tok[1]!r}")
            target[tok[1]] = np.array(read_indices(int(tok[2]), f"{key} {tok[1]}", ln), dtype=int)
        else:
            errors.append(f"line {ln}: unknown section {tok[0]!r}")

    if nodes is None:
        errors.append("missing NODES section")
    if conn is None or kind is None:
        errors.append("missing ELEMENTS section")
    if errors:
        raise MeshFormatError(errors)

    if kind.dim != nodes.shape[1]:
        raise MeshFormatError(
            [f"{kind.value} needs {kind.dim}-coordinate nodes, file has {nodes.shape[1]}"]
        )
    return Mesh(kind, nodes, conn, node_sets, element_sets).validate()


def write_native_mesh(mesh: Mesh) -> str:
    """Serialize to the native format; parse_native_mesh round-trips exactly."""
    out = [_NATIVE_HEADER]
    out.append(f"NODES {mesh.n_nodes}")
    for row in mesh.nodes:
        out.append(" ".join(f"{x:.17g}" for x in row))
    out.append(f"ELEMENTS {mesh.kind.value} {mesh.n_elements}")
    for row in mesh.elements:
        out.append(" ".join(str(i) for i in row))
    for name, idxs in mesh.node_sets.items():
        out.append(f"NSET {name} {len(idxs)}")
        out.append(" ".join(str(i) for i in idxs))
    for name, idxs in mesh.element_sets.items():
        out.append(f"ELSET {name} {len(idxs)}")
        out.append(" ".join(str(i) for i in idxs))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Abaqus .inp subset
# ---------------------------------------------------------------------------

_INP_KIND = {"CPE4T": ElementKind.QUAD4, "C3D8T": ElementKind.HEX8}


@dataclass
class InpResult:
    mesh: Mesh
    boundary_conditions: list
    warnings: list


def _inp_keyword(line: str):
    parts = [p.strip() for p in line.lstrip("*").split(",")]
    params = {}
    for p in parts[1:]:
        if "=" in p:
            k, v = p.split("=", 1)
            params[k.strip().upper()] = v.strip()
        else:
            params[p.upper()] = True
    return parts[0].upper(), params


def parse_inp(text: str) -> InpResult:
    """Read the supported .inp subset; see the module docstring."""
    lines = text.splitlines()
    raw_nodes = {}  # original id -> coords
    raw_elements = []  # (original id, [node ids])
    kind = None
    raw_nsets = {}  # name -> list of original ids
    raw_bcs = []  # (target, first_dof, last_dof, value)
    warn_list = []
    errors = []

    i = 0
    section = None  # ('node',) ('element',) ('nset', name, generate) ('boundary',) (None,)
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("**"):
            continue
        if line.startswith("*"):
            key, params = _inp_keyword(line)
            if key == "NODE":
                section = ("node",)
            elif key == "ELEMENT":
                etype = params.get("TYPE", "")
                if etype.upper() not in _INP_KIND:
                    raise MeshFormatError(
                        [
                            f"line {i}: unsupported element type {etype!r} "
                            f"(supported: {', '.join(_INP_KIND)})"
                        ]
                    )
                new_kind = _INP_KIND[etype.upper()]
                if kind is not None and new_kind is not kind:
                    errors.append(f"line {i}: mixed element kinds are not supported")
                kind = new_kind
                section = ("element",)
            elif key == "NSET":
                name = params.get("NSET")
                if not name:
                    errors.append(f"line {i}: *NSET without NSET= name")
                    section = None
                    continue
                raw_nsets.setdefault(name, [])
                section = ("nset", name, bool(params.get("GENERATE")))
            elif key == "BOUNDARY":
                section = ("boundary",)
            else:
                warn_list.append(f"line {i}: skipping unsupported keyword *{key}")
                section = None
            continue

        if section is None:
            continue
        try:
            if section[0] == "node":
                parts = [p for p in line.replace(",", " ").split()]
                nid = int(parts[0])
                raw_nodes[nid] = [float(p) for p in parts[1:4]]
            elif section[0] == "element":
                parts = [p for p in line.rstrip(",").replace(",", " ").split()]
                vals = [int(p) for p in parts]
                while line.rstrip().endswith(","):  # continuation rows
                    line = lines[i].strip()
                    i += 1
                    vals.extend(int(p) for p in line.rstrip(",").replace(",", " ").split())
                raw_elements.append((vals[0], vals[1:]))
            elif section[0] == "nset":
                parts = [p for p in line.replace(",", " ").split()]
                ids = [int(p) for p in parts]
                if section[2]:  # GENERATE: first, last, step
                    step = ids[2] if len(ids) > 2 else 1
                    raw_nsets[section[1]].extend(range(ids[0], ids[1] + 1, step))
                else:
                    raw_nsets[section[1]].extend(ids)
            elif section[0] == "boundary":
                parts = [p.strip() for p in line.split(",")]
                target = parts[0]
                first = int(parts[1])
                last = int(parts[2]) if len(parts) > 2 and parts[2] else first
                value = float(parts[3]) if len(parts) > 3 and parts[3] else 0.0
                raw_bcs.append((target, first, last, value))
        except (ValueError, IndexError) as exc:
            errors.append(f"line {i}: cannot parse data line {line!r}: {exc}")

    if not raw_nodes:
        errors.append("no *NODE data found")
    if not raw_elements or kind is None:
        errors.append("no supported *ELEMENT data found")
    if errors:
        raise MeshFormatError(errors)

    id_order = sorted(raw_nodes)
    id_map = {nid: k for k, nid in enumerate(id_order)}
    nodes = np.array([raw_nodes[nid][: kind.dim] for nid in id_order])

    conn = []
    for eid, node_ids in raw_elements:
        if len(node_ids) != kind.n_nodes:
            errors.append(f"element {eid} has {len(node_ids)} nodes, expected {kind.n_nodes}")
            continue
        try:
            conn.append([id_map[n] for n in node_ids])
        except KeyError as missing:
            errors.append(f"element {eid} references unknown node {missing}")
    node_sets = {}
    for name, ids in raw_nsets.items():
        try:
            node_sets[name] = np.array(sorted(id_map[n] for n in set(ids)), dtype=int)
        except KeyError as missing:
            errors.append(f"node set {name!r} references unknown node {missing}")
    if errors:
        raise MeshFormatError(errors)

    bcs = []
    for target, first, last, value in raw_bcs:
        if target.isdigit():
            nid = int(target)
            if nid not in id_map:
                errors.append(f"*BOUNDARY references unknown node {nid}")
                continue
            set_name = f"_node_{nid}"
            node_sets.setdefault(set_name, np.array([id_map[nid]], dtype=int))
        else:
            set_name = target
            if set_name not in node_sets:
                errors.append(f"*BOUNDARY references unknown node set {set_name!r}")
                continue
        for dof_num in range(first, last + 1):
            if dof_num == 11:
                bcs.append(BoundaryCondition(set_name, "phi", value))
            elif 1 <= dof_num <= kind.dim:
                bcs.append(BoundaryCondition(set_name, "xyz"[dof_num - 1], value))
            else:
                warn_list.append(f"*BOUNDARY dof {dof_num} not supported, skipped")
    if errors:
        raise MeshFormatError(errors)

    mesh = Mesh(kind, nodes, np.array(conn), node_sets).validate()
    return InpResult(mesh, bcs, warn_list)


# ---------------------------------------------------------------------------
# Structured generators
# ---------------------------------------------------------------------------


def _graded_axis(breaks, counts):
    """Piecewise-uniform 1D grid through the given breakpoints."""
    parts = [np.array([breaks[0]])]
    for lo, hi, n in zip(breaks[:-1], breaks[1:], counts):
        parts.append(np.linspace(lo, hi, int(n) + 1)[1:])
    return np.concatenate(parts)


def _cells(span: float, h: float) -> int:
    return max(1, round(span / h))


def _tensor_quad_mesh(xs, ys):
    nx, ny = len(xs) - 1, len(ys) - 1
    xg, yg = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([xg.ravel(), yg.ravel()])  # node id = iy*(nx+1) + ix
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    n0 = iy.ravel() * (nx + 1) + ix.ravel()
    conn = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return nodes, conn


def _edge_sets(nodes, lo, hi, tol=1e-12):
    x, y = nodes[:, 0], nodes[:, 1]
    return {
        "left": np.nonzero(np.abs(x - lo[0]) < tol)[0],
        "right": np.nonzero(np.abs(x - hi[0]) < tol)[0],
        "bottom": np.nonzero(np.abs(y - lo[1]) < tol)[0],
        "top": np.nonzero(np.abs(y - hi[1]) < tol)[0],
    }


def generate_notched_plate(
    h_fine: float,
    h_coarse: float = 0.04,
    band_half: float = 0.035,
    refinement: str = "band",
    size: float = 1.0,
    crack_length: float = 0.5,
    ell: float | None = None,
) -> Mesh:
    """Square plate with a horizontal edge crack to the center at mid-height.

    The crack is a geometric seam: nodes on the crack segment (left edge to
    the tip, exclusive) are duplicated so the faces can separate; the tip
    node is shared. Refinement is piecewise-uniform along each axis:

    * ``refinement="band"``: fine strip of half-width ``band_half`` around
      mid-height, fine columns from just left of the tip to the right edge
      (the expected mode-I path).
    * ``refinement="lower"``: fine rows through the whole lower half plus a
      margin above the seam (shear-type crack paths curve downward).

    If ``ell`` is given, warns when h_fine exceeds ell/5 (band) or ell/10
    (lower), the resolution rule of thumb for the respective loadings.
    """
    if refinement not in ("band", "lower"):
        raise ValueError("refinement must be 'band' or 'lower'")
    rule = 5.0 if refinement == "band" else 10.0
    if ell is not None and h_fine > ell / rule + 1e-12:
        warnings.warn(
            f"fine mesh size {h_fine:g} exceeds ell/{rule:g} = {ell / rule:g}; "
            "the crack band will be under-resolved",
            stacklevel=2,
        )

    yc = 0.5 * size
    margin = 0.05 * size
    x_fine_from = max(crack_length - margin, 0.0)
    xs = _graded_axis(
        [0.0, x_fine_from, crack_length, size],
        [
            _cells(x_fine_from, h_coarse),
            _cells(crack_length - x_fine_from, h_fine),
            _cells(size - crack_length, h_fine),
        ],
    )
    if refinement == "band":
        ys = _graded_axis(
            [0.0, yc - band_half, yc, yc + band_half, size],
            [
                _cells(yc - band_half, h_coarse),
                _cells(band_half, h_fine),
                _cells(band_half, h_fine),
                _cells(yc - band_half, h_coarse),
            ],
        )
    else:
        ys = _graded_axis(
            [0.0, yc, yc + band_half, size],
            [
                _cells(yc, h_fine),
                _cells(band_half, h_fine),
                _cells(yc - band_half, h_coarse),
            ],
        )

    nodes, conn = _tensor_quad_mesh(xs, ys)
    nx = len(xs) - 1
    iyc = int(np.argmin(np.abs(ys - yc)))
    assert abs(ys[iyc] - yc) < 1e-12, "mid-height must be a grid line"

    # Duplicate seam nodes strictly left of the tip; elements above the seam
    # rewire their bottom edge onto the duplicates.
    tol = 1e-12
    seam_cols = np.nonzero(xs < crack_length - tol)[0]
    seam_nodes = iyc * (nx + 1) + seam_cols
    dup_ids = np.arange(len(nodes), len(nodes) + len(seam_nodes))
    nodes = np.vstack([nodes, nodes[seam_nodes]])
    remap = dict(zip(seam_nodes.tolist(), dup_ids.tolist()))
    for e in range(iyc * nx, (iyc + 1) * nx):  # element row sitting on the seam
        for a in (0, 1):  # bottom corners of quad (n0, n1, n2, n3)
            conn[e, a] = remap.get(conn[e, a], conn[e, a])

    sets = _edge_sets(nodes, (0.0, 0.0), (size, size))
    mesh = Mesh(ElementKind.QUAD4, nodes, conn, sets)
    return mesh.validate()


def generate_bar_strip(
    length: float, height: float, nx: int, ny: int = 1, x0: float = 0.0
) -> Mesh:
    """Rectangular strip of quads [x0, x0+length] x [0, height].

    Node sets: left/right/top/bottom edges plus ``center`` (the column of
    nodes closest to the strip's x midpoint, exact on even nx grids).
    """
    xs = np.linspace(x0, x0 + length, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    nodes, conn = _tensor_quad_mesh(xs, ys)
    sets = _edge_sets(nodes, (x0, 0.0), (x0 + length, height))
    xmid = xs[np.argmin(np.abs(xs - (x0 + 0.5 * length)))]
    sets["center"] = np.nonzero(np.abs(nodes[:, 0] - xmid) < 1e-12)[0]
    return Mesh(ElementKind.QUAD4, nodes, conn, sets).validate()


def generate_cube(n: int, size: float = 1.0) -> Mesh:
    """n x n x n hex mesh of a cube with face node sets."""
    xs = np.linspace(0.0, size, n + 1)
    zg, yg, xg = np.meshgrid(xs, xs, xs, indexing="ij")
    nodes = np.column_stack([xg.ravel(), yg.ravel(), zg.ravel()])
    npl = n + 1  # nodes per line

    def nid(ix, iy, iz):
        return (iz * npl + iy) * npl + ix

    conn = []
    for iz in range(n):
        for iy in range(n):
            for ix in range(n):
                conn.append(
                    [
                        nid(ix, iy, iz),
                        nid(ix + 1, iy, iz),
                        nid(ix + 1, iy + 1, iz),
                        nid(ix, iy + 1, iz),
                        nid(ix, iy, iz + 1),
                        nid(ix + 1, iy, iz + 1),
                        nid(ix + 1, iy + 1, iz + 1),
                        nid(ix, iy + 1, iz + 1),
                    ]
                )
    tol = 1e-12
    sets = {
        "bottom": np.nonzero(np.abs(nodes[:, 2]) < tol)[0],
        "top": np.nonzero(np.abs(nodes[:, 2] - size) < tol)[0],
        "x0": np.nonzero(np.abs(nodes[:, 0]) < tol)[0],
        "x1": np.nonzero(np.abs(nodes[:, 0] - size) < tol)[0],
        "y0": np.nonzero(np.abs(nodes[:, 1]) < tol)[0],
        "y1": np.nonzero(np.abs(nodes[:, 1] - size) < tol)[0],
    }
    return Mesh(ElementKind.HEX8, nodes, np.array(conn), sets).validate()


def nodes_in_box(mesh: Mesh, lo, hi) -> np.ndarray:
    """Indices of nodes inside the axis-aligned box [lo, hi] (inclusive)."""
    lo = np.asarray(lo, dtype=float)[: mesh.dim]
    hi = np.asarray(hi, dtype=float)[: mesh.dim]
    inside = ((mesh.nodes >= lo - 1e-12) & (mesh.nodes <= hi + 1e-12)).all(axis=1)
    return np.nonzero(inside)[0]


def nodes_near_segment(mesh: Mesh, p0, p1, halfwidth: float) -> np.ndarray:
    """Indices of nodes within ``halfwidth`` of the segment p0-p1."""
    p0 = np.asarray(p0, dtype=float)[: mesh.dim]
    p1 = np.asarray(p1, dtype=float)[: mesh.dim]
    d = p1 - p0
    denom = float(d @ d)
    if denom == 0.0:
        dist = np.linalg.norm(mesh.nodes - p0, axis=1)
    else:
        t = np.clip((mesh.nodes - p0) @ d / denom, 0.0, 1.0)
        dist = np.linalg.norm(mesh.nodes - (p0 + t[:, None] * d), axis=1)
    return np.nonzero(dist <= halfwidth + 1e-12)[0]


# ---------------------------------------------------------------------------
# Result writers
# ---------------------------------------------------------------------------


def write_vtk(path, mesh: Mesh, point_data=None, cell_data=None, title="phasefrac output"):
    """Write a legacy ASCII VTK unstructured grid file.

    point_data / cell_data map names to arrays: (n,) becomes SCALARS,
    (n, dim) becomes VECTORS (z-padded in 2D).
    """
    nn, ne = mesh.n_nodes, mesh.n_elements
    pts = np.zeros((nn, 3))
    pts[:, : mesh.dim] = mesh.nodes
    per_elem = mesh.kind.n_nodes

    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {nn} float\n")
        for p in pts:
            f.write(f"{p[0]:.9g} {p[1]:.9g} {p[2]:.9g}\n")
        f.write(f"CELLS {ne} {ne * (per_elem + 1)}\n")
        for row in mesh.elements:
            f.write(f"{per_elem} " + " ".join(str(i) for i in row) + "\n")
        f.write(f"CELL_TYPES {ne}\n")
        for _ in range(ne):
            f.write(f"{mesh.kind.vtk_cell_type}\n")

        def write_fields(fields, n):
            for name, arr in fields.items():
                arr = np.asarray(arr, dtype=float)
                if arr.ndim == 1:
                    f.write(f"SCALARS {name} float 1\n")
                    f.write("LOOKUP_TABLE default\n")
                    for v in arr:
                        f.write(f"{v:.9g}\n")
                else:
                    vec = np.zeros((n, 3))
                    vec[:, : arr.shape[1]] = arr
                    f.write(f"VECTORS {name} float\n")
                    for v in vec:
                        f.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")

        if point_data:
            f.write(f"POINT_DATA {nn}\n")
            write_fields(point_data, nn)
        if cell_data:
            f.write(f"CELL_DATA {ne}\n")
            write_fields(cell_data, ne)


def write_history_csv(path, records):
    """Write the per-increment history table.

    Columns: increment, displacement, force, iterations, converged (0/1),
    elastic_energy, fracture_energy, phi_max.
    """
    with open(path, "w") as f:
        f.write(
            "increment,displacement,force,iterations,converged,"
            "elastic_energy,fracture_energy,phi_max\n"
        )
        for r in records:
            f.write(
                f"{r.increment},{r.displacement:.10g},{r.force:.10g},"
                f"{r.iterations},{int(r.converged)},{r.elastic_energy:.10g},"
                f"{r.fracture_energy:.10g},{r.phi_max:.10g}\n"
            )
