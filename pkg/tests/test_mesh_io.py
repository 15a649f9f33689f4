"""Mesh model, generators, file formats, and result writers."""

import numpy as np
import pytest

from phasefrac.elements import ElementKind
from phasefrac.mesh_io import (
    BoundaryCondition,
    Mesh,
    MeshFormatError,
    generate_bar_strip,
    generate_cube,
    generate_notched_plate,
    nodes_in_box,
    nodes_near_segment,
    parse_inp,
    parse_native_mesh,
    write_history_csv,
    write_native_mesh,
    write_vtk,
)


def unit_square_mesh():
    nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    conn = np.array([[0, 1, 2, 3]])
    return Mesh(ElementKind.QUAD4, nodes, conn, {"left": np.array([0, 3])})


class TestBoundaryCondition:
    def test_rejects_unknown_dof(self):
        with pytest.raises(ValueError, match="dof"):
            BoundaryCondition("top", "w", 1.0)

    def test_phase_constraints_are_never_ramped(self):
        bc = BoundaryCondition("seed", "phi", 1.0, ramped=True)
        assert bc.ramped is False

    def test_displacement_defaults_to_ramped(self):
        assert BoundaryCondition("top", "y", 1.0).ramped is True


class TestMeshValidate:
    def test_valid_mesh_passes(self):
        unit_square_mesh().validate()

    def test_collects_all_errors(self):
        nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        conn = np.array([[0, 1, 2, 9], [0, 1, 1, 3]])
        mesh = Mesh(ElementKind.QUAD4, nodes, conn, {"bad": np.array([0, 0, 7])})
        with pytest.raises(MeshFormatError) as err:
            mesh.validate()
        text = str(err.value)
        assert "element 0 references out-of-range" in text
        assert "element 1 repeats" in text
        assert "duplicate indices" in text
        assert "out-of-range node index" in text

    def test_inverted_element_reported(self):
        nodes = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        mesh = Mesh(ElementKind.QUAD4, nodes, np.array([[0, 3, 2, 1]]))
        with pytest.raises(MeshFormatError, match="Jacobian"):
            mesh.validate()


class TestNativeFormat:
    def test_round_trip_random_meshes(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            nx, ny = rng.integers(1, 5, size=2)
            mesh = generate_bar_strip(float(nx), float(ny), int(nx), int(ny))
            mesh.nodes += rng.uniform(-0.05, 0.05, mesh.nodes.shape)
            mesh.element_sets["some"] = rng.permutation(mesh.n_elements)[:2]
            back = parse_native_mesh(write_native_mesh(mesh))
            assert back.kind is mesh.kind
            assert np.array_equal(back.nodes, mesh.nodes)
            assert np.array_equal(back.elements, mesh.elements)
            assert set(back.node_sets) == set(mesh.node_sets)
            for name in mesh.node_sets:
                assert np.array_equal(back.node_sets[name], mesh.node_sets[name])
            assert np.array_equal(back.element_sets["some"], mesh.element_sets["some"])

    def test_comments_and_blank_lines_ignored(self):
        text = (
            "PFMESH 1\n\n# a comment\nNODES 4\n0 0\n1 0\n1 1\n0 1\n"
            "# another\nELEMENTS quad4 1\n0 1 2 3\n"
        )
        mesh = parse_native_mesh(text)
        assert mesh.n_nodes == 4 and mesh.n_elements == 1

    def test_missing_header(self):
        with pytest.raises(MeshFormatError, match="PFMESH 1"):
            parse_native_mesh("NODES 0\n")

    def test_unknown_section_and_bad_row_all_reported(self):
        text = (
            "PFMESH 1\nNODES 2\n0 0\n1 zebra\nELEMENTS quad4 1\n0 1 2 3\nWHAT 3\n"
        )
        with pytest.raises(MeshFormatError) as err:
            parse_native_mesh(text)
        assert "line 4: bad node row" in str(err.value)
        assert "unknown section 'WHAT'" in str(err.value)

    def test_element_kind_must_be_known(self):
        text = "PFMESH 1\nNODES 1\n0 0\nELEMENTS tri3 1\n0 1 2\n"
        with pytest.raises(MeshFormatError, match="unknown element kind"):
            parse_native_mesh(text)

    def test_truncated_section(self):
        text = "PFMESH 1\nNODES 4\n0 0\n1 0\n"
        with pytest.raises(MeshFormatError, match="file ended early"):
            parse_native_mesh(text)

    def test_dimension_mismatch(self):
        text = "PFMESH 1\nNODES 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\nELEMENTS quad4 1\n0 1 2 3\n"
        with pytest.raises(MeshFormatError, match="2-coordinate"):
            parse_native_mesh(text)


INP_SAMPLE = """\
** comment line
*HEADING
ignored title text
*NODE
1, 0.0, 0.0
2, 1.0, 0.0
3, 1.0, 1.0
4, 0.0, 1.0
5, 2.0, 0.0
6, 2.0, 1.0
*ELEMENT, TYPE=CPE4T
1, 1, 2, 3, 4
2, 2, 5, 6, 3
*NSET, NSET=left
1, 4
*NSET, NSET=all, GENERATE
1, 6, 1
*BOUNDARY
left, 1, 2, 0.0
3, 2, 2, 0.25
*NSET, NSET=seed
2
*BOUNDARY
seed, 11, 11, 1.0
*OUTPUT, FIELD
whatever, data
"""


class TestInpParsing:
    def test_reads_mesh_and_sets(self):
        res = parse_inp(INP_SAMPLE)
        mesh = res.mesh
        assert mesh.kind is ElementKind.QUAD4
        assert mesh.n_nodes == 6 and mesh.n_elements == 2
        # ids remapped to 0-based in sorted order
        assert np.array_equal(mesh.node_sets["left"], [0, 3])
        assert np.array_equal(mesh.node_sets["all"], np.arange(6))
        assert np.array_equal(mesh.elements[0], [0, 1, 2, 3])

    def test_boundary_expansion(self):
        res = parse_inp(INP_SAMPLE)
        bcs = res.boundary_conditions
        disp = [(b.node_set, b.dof, b.value) for b in bcs if b.dof != "phi"]
        assert ("left", "x", 0.0) in disp and ("left", "y", 0.0) in disp
        assert ("_node_3", "y", 0.25) in disp
        node3 = res.mesh.node_sets["_node_3"]
        assert np.array_equal(node3, [2])

    def test_temperature_dof_becomes_phase_seed(self):
        res = parse_inp(INP_SAMPLE)
        phi = [b for b in res.boundary_conditions if b.dof == "phi"]
        assert len(phi) == 1
        assert phi[0].node_set == "seed" and phi[0].value == 1.0
        assert phi[0].ramped is False

    def test_unknown_keywords_warn(self):
        res = parse_inp(INP_SAMPLE)
        assert any("OUTPUT" in w for w in res.warnings)
        assert any("HEADING" in w for w in res.warnings)

    def test_unknown_element_type_is_hard_error(self):
        bad = "*NODE\n1, 0, 0\n*ELEMENT, TYPE=CPS3\n1, 1, 1, 1\n"
        with pytest.raises(MeshFormatError, match="CPS3"):
            parse_inp(bad)

    def test_unknown_nset_in_boundary(self):
        bad = INP_SAMPLE + "*BOUNDARY\nnope, 1, 1, 0.0\n"
        with pytest.raises(MeshFormatError, match="nope"):
            parse_inp(bad)

    def test_hex_sample(self):
        text = (
            "*NODE\n"
            + "\n".join(
                f"{i + 1}, {x}, {y}, {z}"
                for i, (x, y, z) in enumerate(
                    [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
                     (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)]
                )
            )
            + "\n*ELEMENT, TYPE=C3D8T\n1, 1, 2, 3, 4, 5, 6, 7, 8\n"
        )
        res = parse_inp(text)
        assert res.mesh.kind is ElementKind.HEX8
        assert res.mesh.n_elements == 1


class TestNotchedPlate:
    def test_seam_duplicates_crack_face_nodes(self):
        mesh = generate_notched_plate(h_fine=0.05, h_coarse=0.25, band_half=0.1)
        coords = mesh.nodes
        on_seam = np.abs(coords[:, 1] - 0.5) < 1e-12
        left_of_tip = coords[:, 0] < 0.5 - 1e-12
        # every seam position strictly left of the tip appears exactly twice
        seam_x = np.sort(coords[on_seam & left_of_tip, 0])
        assert len(seam_x) % 2 == 0
        assert np.allclose(seam_x[0::2], seam_x[1::2])
        # the tip itself is shared: exactly one node at (0.5, 0.5)
        tip = on_seam & (np.abs(coords[:, 0] - 0.5) < 1e-12)
        assert tip.sum() == 1

    def test_crack_faces_are_disconnected(self):
        mesh = generate_notched_plate(h_fine=0.05, h_coarse=0.25, band_half=0.1)
        coords = mesh.nodes
        crack = (np.abs(coords[:, 1] - 0.5) < 1e-12) & (coords[:, 0] < 0.5 - 1e-12)
        crack_ids = set(np.nonzero(crack)[0])
        # split crack-face nodes into those used below vs above the seam
        centroids_y = coords[mesh.elements, 1].mean(axis=1)
        used_below = set(mesh.elements[centroids_y < 0.5].ravel()) & crack_ids
        used_above = set(mesh.elements[centroids_y > 0.5].ravel()) & crack_ids
        assert used_below and used_above
        assert not used_below & used_above

    def test_band_refinement_and_sets(self):
        mesh = generate_notched_plate(h_fine=0.025, h_coarse=0.2, band_half=0.1)
        xs = np.unique(mesh.nodes[:, 0])
        dx_right = np.diff(xs[xs >= 0.45 - 1e-12])
        assert dx_right.max() < 0.025 + 1e-9
        for name in ("left", "right", "top", "bottom"):
            assert len(mesh.node_sets[name]) > 0
        assert np.allclose(mesh.nodes[mesh.node_sets["top"], 1], 1.0)

    def test_under_resolved_warning(self):
        with pytest.warns(UserWarning, match="under-resolved"):
            generate_notched_plate(h_fine=0.05, h_coarse=0.25, ell=0.1)
        with pytest.warns(UserWarning, match="under-resolved"):
            generate_notched_plate(
                h_fine=0.05, h_coarse=0.25, ell=0.3, refinement="lower"
            )

    def test_no_warning_when_resolved(self):
        import warnings as wmod

        with wmod.catch_warnings():
            wmod.simplefilter("error")
            generate_notched_plate(h_fine=0.02, h_coarse=0.25, ell=0.1)

    def test_lower_refinement_valid(self):
        mesh = generate_notched_plate(
            h_fine=0.05, h_coarse=0.25, band_half=0.1, refinement="lower"
        )
        ys = np.unique(mesh.nodes[:, 1])
        dy_low = np.diff(ys[ys <= 0.5 + 1e-12])
        assert dy_low.max() < 0.05 + 1e-9


class TestOtherGenerators:
    def test_bar_strip_counts_and_sets(self):
        mesh = generate_bar_strip(2.0, 0.2, nx=10, ny=2, x0=-1.0)
        assert mesh.n_elements == 20
        assert mesh.n_nodes == 11 * 3
        assert np.allclose(mesh.nodes[mesh.node_sets["left"], 0], -1.0)
        assert np.allclose(mesh.nodes[mesh.node_sets["center"], 0], 0.0)
        assert len(mesh.node_sets["center"]) == 3

    def test_cube_counts_and_sets(self):
        mesh = generate_cube(3)
        assert mesh.n_elements == 27
        assert mesh.n_nodes == 64
        for name in ("top", "bottom", "x0", "x1", "y0", "y1"):
            assert len(mesh.node_sets[name]) == 16
        assert np.allclose(mesh.nodes[mesh.node_sets["top"], 2], 1.0)

    def test_selection_helpers(self):
        mesh = generate_bar_strip(1.0, 1.0, nx=4, ny=4)
        box = nodes_in_box(mesh, (0.0, 0.0), (0.25, 1.0))
        assert np.allclose(mesh.nodes[box, 0] <= 0.25 + 1e-12, True)
        assert len(box) == 10
        seg = nodes_near_segment(mesh, (0.0, 0.5), (1.0, 0.5), halfwidth=0.1)
        assert np.allclose(mesh.nodes[seg, 1], 0.5)


class TestWriters:
    def test_vtk_structure(self, tmp_path):
        mesh = unit_square_mesh().validate()
        out = tmp_path / "state.vtk"
        write_vtk(
            out,
            mesh,
            point_data={
                "displacement": np.array([[0, 0], [0.1, 0], [0.1, 0.2], [0, 0.2]]),
                "phi": np.array([0.0, 0.5, 1.0, 0.25]),
            },
            cell_data={"history": np.array([3.5])},
        )
        lines = out.read_text().splitlines()
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert lines[2] == "ASCII"
        assert lines[3] == "DATASET UNSTRUCTURED_GRID"
        assert "POINTS 4 float" in lines
        assert "CELLS 1 5" in lines
        assert "CELL_TYPES 1" in lines
        assert "POINT_DATA 4" in lines
        assert "VECTORS displacement float" in lines
        assert "SCALARS phi float 1" in lines
        assert "CELL_DATA 1" in lines
        assert "SCALARS history float 1" in lines
        idx = lines.index("VECTORS displacement float")
        assert lines[idx + 2].split() == ["0.1", "0", "0"]  # z-padded 2D vector

    def test_vtk_hex_cell_type(self, tmp_path):
        mesh = generate_cube(1)
        out = tmp_path / "cube.vtk"
        write_vtk(out, mesh, point_data={"phi": np.zeros(mesh.n_nodes)})
        lines = out.read_text().splitlines()
        assert lines[lines.index("CELL_TYPES 1") + 1] == "12"

    def test_history_csv_header_and_rows(self, tmp_path):
        class Rec:
            def __init__(self, k):
                self.increment = k
                self.displacement = 0.001 * k
                self.force = 10.0 * k
                self.iterations = 3
                self.converged = k != 2
                self.elastic_energy = 0.5 * k
                self.fracture_energy = 0.25 * k
                self.phi_max = 0.1 * k

        out = tmp_path / "history.csv"
        write_history_csv(out, [Rec(1), Rec(2)])
        lines = out.read_text().splitlines()
        assert lines[0] == (
            "increment,displacement,force,iterations,converged,"
            "elastic_energy,fracture_energy,phi_max"
        )
        assert lines[1] == "1,0.001,10,3,1,0.5,0.25,0.1"
        assert lines[2] == "2,0.002,20,3,0,1,0.5,0.2"
        assert len(lines) == 3
