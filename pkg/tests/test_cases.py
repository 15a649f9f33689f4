import numpy as np
import pytest

from phasefrac.cases import (
    CATALOG,
    CaseDefinition,
    CaseError,
    MeshSpec,
    RegionSpec,
    apply_overrides,
    get_case,
    parse_case_config,
    prepare,
    run_case,
    serialize_case,
    with_variant,
)
from phasefrac.constitutive import Formulation, SplitScheme
from phasefrac.solver import Scheme

ALL_CASES = sorted(CATALOG)


class TestCatalog:
    def test_expected_members(self):
        assert ALL_CASES == [
            "bar_1d_profile",
            "bar_1d_strength",
            "cube3d_smoke",
            "plate_shear",
            "plate_tension",
        ]

    @pytest.mark.parametrize("name", ALL_CASES)
    def test_build(self, name):
        case = get_case(name)
        assert isinstance(case, CaseDefinition)
        assert case.name == name
        assert case.description
        assert case.expected_map()

    def test_unknown_case(self):
        with pytest.raises(CaseError, match="available"):
            get_case("no_such_case")

    def test_variant_via_colon(self):
        case = get_case("plate_tension:extrapolated")
        assert case.name == "plate_tension:extrapolated"
        assert case.solve.extrapolate is True
        # base case is untouched
        assert get_case("plate_tension").solve.extrapolate is False

    def test_unknown_variant(self):
        with pytest.raises(CaseError, match="no variant"):
            get_case("plate_tension:bogus")

    def test_shear_variants_swap_scheme(self):
        fine = get_case("plate_shear:staggered_fine")
        assert fine.solve.scheme is Scheme.STAGGERED_SINGLE
        assert fine.solve.n_increments == 10000
        coarse = with_variant(get_case("plate_shear"), "staggered_coarse")
        assert coarse.solve.n_increments == 1000

    def test_cube_compression_flips_load(self):
        comp = get_case("cube3d_smoke:compression")
        top = [b for b in comp.boundary_conditions if b.node_set == "top" and b.dof == "z"]
        assert len(top) == 1 and top[0].value < 0


class TestConfigRoundTrip:
    @pytest.mark.parametrize("name", ALL_CASES)
    def test_serialize_parse_identity(self, name):
        case = get_case(name)
        text = serialize_case(case)
        assert parse_case_config(text) == case

    def test_variants_survive_round_trip(self):
        case = get_case("plate_shear")
        again = parse_case_config(serialize_case(case))
        assert again.variant_names() == case.variant_names()
        assert with_variant(again, "staggered_coarse") == with_variant(
            case, "staggered_coarse"
        )

    def test_comments_and_blank_lines_ignored(self):
        text = serialize_case(get_case("bar_1d_profile"))
        noisy = "# leading comment\n\n" + text.replace(
            "[material]", "# about to start\n[material]"
        )
        assert parse_case_config(noisy) == get_case("bar_1d_profile")


class TestConfigErrors:
    def test_missing_section(self):
        text = serialize_case(get_case("bar_1d_profile"))
        broken = text.replace("[material]", "[materiall]")
        with pytest.raises(CaseError, match="unknown section"):
            parse_case_config(broken)

    def test_key_outside_section_reports_line(self):
        with pytest.raises(CaseError, match="line 1"):
            parse_case_config("stray = 1\n")

    def test_malformed_pair(self):
        text = serialize_case(get_case("bar_1d_profile")) + "\n[case]\njunk-line\n"
        with pytest.raises(CaseError, match="expected 'key = value'"):
            parse_case_config(text)

    def test_incomplete_file(self):
        with pytest.raises(CaseError, match="missing section"):
            parse_case_config("[case]\nname = x\ndescription = y\n")

    def test_bad_variant_key_caught_at_parse(self):
        text = serialize_case(get_case("bar_1d_profile"))
        text += "\n[variant broken]\nsolve.no_such_field = 1\n"
        with pytest.raises(CaseError, match="unknown override key"):
            parse_case_config(text)

    def test_unknown_solve_key(self):
        text = serialize_case(get_case("bar_1d_profile")).replace(
            "max_iterations", "max_iterationz"
        )
        with pytest.raises(CaseError, match="unknown \\[solve\\] key"):
            parse_case_config(text)


class TestOverrides:
    def test_solve_fields_with_string_values(self):
        case = get_case("plate_tension")
        out = apply_overrides(
            case,
            {
                "solve.n_increments": "7",
                "solve.extrapolate": "true",
                "solve.scheme": "staggered",
            },
        )
        assert out.solve.n_increments == 7
        assert out.solve.extrapolate is True
        assert out.solve.scheme is Scheme.STAGGERED_SINGLE

    def test_material_paths(self):
        out = apply_overrides(
            get_case("plate_tension"),
            {"material.ell": "0.048", "material.split": "voldev",
             "material.formulation": "anisotropic"},
        )
        assert out.material.fracture.ell == 0.048
        assert out.material.split is SplitScheme.VOLDEV
        assert out.material.formulation is Formulation.ANISOTROPIC

    def test_mesh_param(self):
        out = apply_overrides(get_case("plate_shear"), {"mesh.h_fine": "0.02"})
        assert dict(out.mesh.params)["h_fine"] == 0.02

    def test_bc_value(self):
        out = apply_overrides(
            get_case("plate_tension"), {"bc.top.y.value": "1e-3"}
        )
        top_y = [b for b in out.boundary_conditions if b.node_set == "top" and b.dof == "y"]
        assert top_y[0].value == 1e-3

    def test_bc_without_match_fails(self):
        with pytest.raises(CaseError, match="no constraint"):
            apply_overrides(get_case("plate_tension"), {"bc.left.x.value": "0"})

    def test_unknown_key(self):
        with pytest.raises(CaseError, match="unknown override key"):
            apply_overrides(get_case("plate_tension"), {"bogus.path": 1})

    def test_mesh_param_on_file_mesh_fails(self):
        case = get_case("plate_tension")
        filed = apply_overrides(case, {"mesh.file": "whatever.mesh"})
        assert filed.mesh.generator is None
        with pytest.raises(CaseError, match="mesh file"):
            apply_overrides(filed, {"mesh.h_fine": "0.01"})

    def test_monitor_and_expected(self):
        out = apply_overrides(
            get_case("plate_tension"),
            {"monitor.dof": "x", "expected.runtime_s": "120"},
        )
        assert out.monitor == ("top", "x")
        assert out.expected_map()["runtime_s"] == 120


class TestRegions:
    def setup_method(self):
        self.mesh = MeshSpec.from_generator(
            "bar_strip", length=1.0, height=0.1, nx=10, ny=2
        ).build()

    def test_box_selects_left_edge(self):
        ids = RegionSpec(kind="box", lo=(0.0, 0.0), hi=(0.0, 0.1)).select(self.mesh)
        assert np.allclose(self.mesh.nodes[ids, 0], 0.0)
        assert len(ids) == 3

    def test_segment_selects_band(self):
        region = RegionSpec(
            kind="segment", p0=(0.0, 0.05), p1=(1.0, 0.05), halfwidth=0.01
        )
        ids = region.select(self.mesh)
        assert np.allclose(self.mesh.nodes[ids, 1], 0.05)

    def test_empty_region_raises(self):
        with pytest.raises(CaseError, match="selects no nodes"):
            RegionSpec(kind="box", lo=(5.0, 5.0), hi=(6.0, 6.0)).select(self.mesh)

    def test_unknown_kind(self):
        with pytest.raises(CaseError, match="region kind"):
            RegionSpec(kind="sphere").select(self.mesh)


class TestPrepare:
    def test_seed_regions_become_held_sets(self):
        case = get_case("cube3d_smoke")
        mesh, bcs = prepare(case)
        assert "phi_seed_0" in mesh.node_sets
        seeds = [b for b in bcs if b.node_set == "phi_seed_0"]
        assert len(seeds) == 1
        assert seeds[0].dof == "phi" and seeds[0].value == 1.0
        assert seeds[0].ramped is False

    def test_no_seed_no_extra_sets(self):
        case = get_case("plate_tension")
        mesh, bcs = prepare(case)
        assert not any(s.startswith("phi_seed") for s in mesh.node_sets)
        assert len(bcs) == len(case.boundary_conditions)


class TestBarProfileEndToEnd:
    # cheap single-increment case: the relaxed phase field around a held
    # seed should match the stationary exponential profile and carry a
    # regularized surface energy of Gc per unit cracked area
    def test_profile_and_energy(self):
        case = get_case("bar_1d_profile")
        expected = case.expected_map()
        mesh, _ = prepare(case)
        result = run_case(case)
        assert result.converged

        ell = case.material.fracture.ell
        x = mesh.nodes[:, 0]
        target = np.exp(-np.abs(x) / ell)
        l2 = np.linalg.norm(result.state.phi - target) / np.linalg.norm(target)
        assert l2 <= expected["profile_l2_rel"]

        gc = case.material.fracture.Gc
        surface = result.records[-1].fracture_energy
        ref = gc * expected["crack_area"]
        assert abs(surface - ref) / ref <= expected["surface_energy_rel"]
