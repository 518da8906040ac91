import numpy as np
import pytest

import foamlab as fl
from foamlab.errors import EmptyModelError, MechanismError, SingularElementError
from foamlab.framefem import SHEAR_K, assemble_stiffness, solve_linear

from conftest import single_wall_geometry


def chain_model(length, n_elems, t, w, material, dirichlet):
    """Straight horizontal member subdivided into equal elements."""
    xs = np.linspace(0.0, length, n_elems + 1)
    nodes = np.column_stack([xs, np.zeros_like(xs)])
    conn = np.column_stack([np.arange(n_elems), np.arange(1, n_elems + 1)])
    return fl.FrameModel(
        nodes=nodes,
        elem_nodes=conn.astype(np.int64),
        elem_t=np.full(n_elems, t),
        elem_w=np.full(n_elems, w),
        material=material,
        dirichlet=dirichlet,
        ties=[],
        top_nodes=np.array([], dtype=np.int64),
        bottom_nodes=np.array([], dtype=np.int64),
        H=length,
        t_cell=t,
    )


class TestElementStiffness:
    mat = fl.WallMaterial(E0=1000.0, nu0=0.3)

    def test_symmetric(self):
        K = fl.element_stiffness((0.0, 0.0), (3.0, 4.0), 0.5, 0.5, self.mat)
        assert np.array_equal(K, K.T)

    def test_three_zero_energy_modes(self):
        K = fl.element_stiffness((1.0, 2.0), (4.0, 6.0), 0.5, 0.5, self.mat)
        ev = np.linalg.eigvalsh(K)
        assert np.all(np.abs(ev[:3]) < 1e-9 * ev[-1])
        assert np.all(ev[3:] > 1e-9 * ev[-1])

    def test_rigid_translations_no_force(self):
        K = fl.element_stiffness((0.0, 0.0), (2.0, 1.0), 0.4, 0.4, self.mat)
        for mode in ([1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0]):
            assert np.max(np.abs(K @ np.array(mode, dtype=float))) < 1e-9 * np.max(K)

    def test_rigid_rotation_no_force(self):
        pi, pj = np.array([1.0, 2.0]), np.array([4.0, 3.0])
        K = fl.element_stiffness(pi, pj, 0.4, 0.4, self.mat)
        mode = np.array([-pi[1], pi[0], 1.0, -pj[1], pj[0], 1.0])
        assert np.max(np.abs(K @ mode)) < 1e-9 * np.max(K)

    def test_zero_length_rejected(self):
        with pytest.raises(SingularElementError):
            fl.element_stiffness((1.0, 1.0), (1.0, 1.0), 0.5, 0.5, self.mat)

    def test_material_validation(self):
        with pytest.raises(SingularElementError):
            fl.WallMaterial(E0=-5.0)
        with pytest.raises(SingularElementError):
            fl.WallMaterial(E0=100.0, nu0=0.7)


class TestMemberOracles:
    mat = fl.WallMaterial(E0=1000.0, nu0=0.3)

    def test_timoshenko_cantilever(self):
        # stocky section so the shear term matters
        L_w, t, w, P = 10.0, 2.0, 2.0, 5.0
        model = chain_model(L_w, 8, t, w, self.mat,
                            dirichlet=[(0, 0, 0.0), (0, 1, 0.0), (0, 2, 0.0)])
        res = solve_linear(model, loads={(8, 1): P})
        tip = res.displacements[8, 1]
        A = t * w
        I = w * t**3 / 12.0
        G = self.mat.G0
        exact = P * L_w**3 / (3 * self.mat.E0 * I) + P * L_w / (SHEAR_K * G * A)
        assert tip == pytest.approx(exact, rel=1e-3)
        # the 2-node element is nodally exact for end loads
        assert tip == pytest.approx(exact, rel=1e-12)

    def test_axial_bar_exact_reaction(self):
        L_w, t, w, d = 10.0, 2.0, 2.0, 0.1
        model = chain_model(L_w, 4, t, w, self.mat,
                            dirichlet=[(0, 0, 0.0), (0, 1, 0.0), (0, 2, 0.0),
                                       (4, 0, d), (4, 1, 0.0), (4, 2, 0.0)])
        res = solve_linear(model)
        r_end = [f for (n, dof, f) in res.reactions if n == 4 and dof == 0][0]
        exact = self.mat.E0 * (t * w) * d / L_w
        assert abs(r_end - exact) <= 1e-12 * exact


class TestCompression:
    def test_single_vertical_wall_force(self, material):
        geom = single_wall_geometry(H=30.0, t=0.1142)
        model = fl.mesh_geometry(geom, material)
        res = fl.solve_compression(model)
        exact = 0.01 * material.E0 * 0.1142**2
        assert res.F_top == pytest.approx(exact, rel=1e-10)
        assert res.F_top == pytest.approx(8.046, abs=1e-3)

    def test_single_wall_modulus(self, material):
        geom = single_wall_geometry(H=30.0, t=0.1142)
        E = fl.homogenized_modulus(geom, material)
        assert E == pytest.approx(material.E0 * 0.1142 / 30.0, rel=1e-10)
        assert E == pytest.approx(234.9, abs=0.05)

    def test_linearity_in_E0(self, small_geom):
        E1 = fl.homogenized_modulus(small_geom, fl.WallMaterial(E0=61700.0))
        E2 = fl.homogenized_modulus(small_geom, fl.WallMaterial(E0=2 * 61700.0))
        assert E2 == pytest.approx(2 * E1, rel=1e-9)

    def test_equilibrium(self, small_geom, material):
        model = fl.mesh_geometry(small_geom, material)
        res = fl.solve_compression(model)
        assert res.reaction_balance < 1e-8

    def test_tied_dofs_equal(self, small_geom, material):
        model = fl.mesh_geometry(small_geom, material)
        assert model.ties, "expected periodic ties on this geometry"
        res = fl.solve_compression(model)
        u = res.displacements
        for (mn, sn, dofs) in model.ties:
            for d in dofs:
                assert u[sn, d] == u[mn, d]

    def test_compression_is_positive(self, small_geom, material):
        res = fl.solve_compression(fl.mesh_geometry(small_geom, material))
        assert res.F_top > 0

    def test_result_record(self, material):
        geom = single_wall_geometry()
        res = fl.solve_compression(fl.mesh_geometry(geom, material))
        rec = res.to_record(modulus=123.0)
        assert rec["modulus_mpa"] == 123.0
        assert rec["mesh"]["elements"] == res.n_elements
        assert len(rec["displacements"]) == res.n_nodes


class TestMeshing:
    def test_subdivision_count(self, material):
        geom = single_wall_geometry(H=10.0, t=0.5)
        model = fl.mesh_geometry(geom, material, target_h=3.0)
        assert len(model.elem_nodes) == 4     # ceil(10/3)
        assert len(model.nodes) == 5

    def test_minimum_two_elements(self, material):
        geom = single_wall_geometry(H=10.0, t=0.5)
        model = fl.mesh_geometry(geom, material, target_h=100.0)
        assert len(model.elem_nodes) == 2

    def test_default_element_length(self, small_geom, material):
        model = fl.mesh_geometry(small_geom, material)
        d = model.nodes[model.elem_nodes[:, 1]] - model.nodes[model.elem_nodes[:, 0]]
        assert np.max(np.hypot(d[:, 0], d[:, 1])) <= small_geom.H / 100.0 + 1e-12

    def test_ties_exclude_loaded_edges(self, small_geom, material):
        model = fl.mesh_geometry(small_geom, material)
        loaded = set(model.top_nodes) | set(model.bottom_nodes)
        for (mn, sn, dofs) in model.ties:
            assert mn not in loaded and sn not in loaded
            assert tuple(dofs) == (0, 1)

    def test_boundary_conditions(self, small_geom, material):
        model = fl.mesh_geometry(small_geom, material)
        bc = {(n, d): v for (n, d, v) in model.dirichlet}
        for v in small_geom.bottom_vertices:
            assert bc[(int(v), 0)] == 0 and bc[(int(v), 1)] == 0 and bc[(int(v), 2)] == 0
        for v in small_geom.top_vertices:
            assert bc[(int(v), 0)] == 0
            assert bc[(int(v), 1)] == pytest.approx(-0.01 * small_geom.H)
            assert (int(v), 2) not in bc   # rotation free by default

    def test_empty_geometry_rejected(self, material):
        g = single_wall_geometry()
        g.walls = np.empty((0, 2), dtype=np.int64)
        with pytest.raises(EmptyModelError):
            fl.mesh_geometry(g, material)


class TestAssembly:
    def test_global_symmetry_exact(self, small_geom, material):
        K = assemble_stiffness(fl.mesh_geometry(small_geom, material))
        assert (K - K.T).nnz == 0

    def test_mesh_convergence(self, material):
        # exact member stiffness: refinement must not move the modulus
        for seed in (1, 2, 3):
            g = fl.generate_rve(fl.RveConfig(H=30, n_cells=10, mu_target=0.0852,
                                             rng_seed=seed))
            e_coarse = fl.homogenized_modulus(g, material, target_h=g.H / 100.0)
            e_fine = fl.homogenized_modulus(g, material, target_h=g.H / 200.0)
            assert abs(e_fine - e_coarse) / e_coarse < 0.005

    def test_top_rotation_switch_reported(self, small_geom, material):
        e_free = fl.homogenized_modulus(small_geom, material)
        e_fixed = fl.homogenized_modulus(small_geom, material, fix_top_rotation=True)
        delta = (e_fixed - e_free) / e_free
        print(f"top-rotation clamping delta: {delta * 100:.4f}% "
              f"(free {e_free:.2f} MPa, fixed {e_fixed:.2f} MPa)")
        assert e_fixed >= e_free


class TestMechanism:
    def test_floating_substructure_named(self):
        mat = fl.WallMaterial(E0=1000.0)
        nodes = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 5.0], [10.0, 5.0]])
        model = fl.FrameModel(
            nodes=nodes,
            elem_nodes=np.array([[0, 1], [2, 3]], dtype=np.int64),
            elem_t=np.full(2, 0.5),
            elem_w=np.full(2, 0.5),
            material=mat,
            dirichlet=[(0, 0, 0.0), (0, 1, 0.0), (0, 2, 0.0)],
            ties=[],
            top_nodes=np.array([], dtype=np.int64),
            bottom_nodes=np.array([], dtype=np.int64),
            H=10.0,
            t_cell=0.5,
        )
        with pytest.raises(MechanismError, match="floating"):
            solve_linear(model)
