import numpy as np
import pytest

from sfrc import fem
from sfrc import materials as mm
from sfrc.errors import DomainError, SingularMatrixError, SolverError


def test_mesh_counts():
    mesh = fem.build_mesh(250, 10)
    assert mesh.n == 25
    assert mesh.n_nodes == 51**2
    assert mesh.n_dof == 2 * 51**2
    assert mesh.elements.shape == (625, 9)
    assert mesh.gauss_weights.sum() == pytest.approx(100.0)


def test_mesh_nodes_and_edges():
    mesh = fem.build_mesh(20, 10)
    xy = mesh.nodes
    np.testing.assert_allclose(xy[mesh.edge_nodes("right"), 0], 20.0)
    np.testing.assert_allclose(xy[mesh.edge_nodes("top"), 1], 20.0)
    assert mesh.boundary_nodes.size == 4 * 4
    # the first element covers [0, 10]^2 with the centre node at (5, 5)
    np.testing.assert_allclose(xy[mesh.elements[0, 4]], [5.0, 5.0])


@pytest.mark.parametrize("window, h", [(25, 10), (250, 0), (10, 20)])
def test_non_divisible_mesh(window, h):
    with pytest.raises((DomainError, ZeroDivisionError)):
        fem.build_mesh(window, h)


def test_gauss_points_lie_inside_their_elements():
    mesh = fem.build_mesh(30, 10)
    pts = mesh.gauss_points
    ey, ex = np.divmod(np.arange(mesh.n_elements), mesh.n)
    assert np.all(np.floor(pts[..., 0] / 10) == ex[:, None])
    assert np.all(np.floor(pts[..., 1] / 10) == ey[:, None])


def test_stiffness_is_symmetric_with_three_rigid_modes():
    mesh = fem.build_mesh(20, 10)
    mat = fem.assign_materials(mesh, np.eye(20, dtype=bool))
    K = fem.assemble_stiffness(mesh, mat).toarray()
    np.testing.assert_allclose(K, K.T, atol=1e-12 * np.abs(K).max())
    ev = np.linalg.eigvalsh(K)
    assert np.sum(np.abs(ev) < 1e-10 * ev.max()) == 3


@pytest.fixture(scope="module")
def homogeneous():
    mesh = fem.build_mesh(40, 10)
    D = mm.PBT.stiffness(mm.PLANE_STRESS)
    return mesh, fem.uniform_material(mesh, D), D


@pytest.mark.parametrize("case", [1, 2, 3])
def test_patch_test_kubc(homogeneous, case):
    mesh, mat, D = homogeneous
    sol = fem.solve(mesh, mat, fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.KUBC, case)))
    eps = np.zeros(3)
    eps[case - 1] = 1e-3
    np.testing.assert_allclose(sol.strain, np.broadcast_to(eps, sol.strain.shape), atol=1e-15)
    np.testing.assert_allclose(sol.mean_stress, D @ eps, rtol=1e-12, atol=1e-18)
    assert sol.hill_residual < 1e-12


@pytest.mark.parametrize("case", [1, 2, 3])
def test_patch_test_subc(homogeneous, case):
    mesh, mat, D = homogeneous
    spec = fem.LoadCaseSpec(fem.SUBC, case)
    sol = fem.solve(mesh, mat, fem.apply_load_case(mesh, spec))
    sig = fem.macro_stress(spec)
    np.testing.assert_allclose(sol.stress, np.broadcast_to(sig, sol.stress.shape), atol=1e-14)
    np.testing.assert_allclose(sol.mean_strain, np.linalg.solve(D, sig), rtol=1e-10, atol=1e-16)


def test_bc_aliases_and_validation():
    assert fem.LoadCaseSpec("pure_traction", 1).bc_kind == fem.SUBC
    with pytest.raises(DomainError):
        fem.LoadCaseSpec("periodic", 1)
    with pytest.raises(DomainError):
        fem.LoadCaseSpec(fem.KUBC, 4)


def test_kubc_prescribes_whole_boundary():
    mesh = fem.build_mesh(20, 10)
    bc = fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.KUBC, 3, 0.02))
    assert bc.fixed_dofs.size == 2 * mesh.boundary_nodes.size
    u = bc.fixed_values.reshape(-1, 2)
    np.testing.assert_allclose(u[:, 1], 0.02 * mesh.nodes[mesh.boundary_nodes, 0] / 20)


def test_subc_forces_are_self_equilibrated():
    mesh = fem.build_mesh(30, 10)
    for case in (1, 2, 3):
        bc = fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.SUBC, case))
        f = bc.forces.reshape(-1, 2)
        np.testing.assert_allclose(f.sum(axis=0), 0.0, atol=1e-15)
        xy = mesh.nodes
        moment = np.sum(xy[:, 0] * f[:, 1] - xy[:, 1] * f[:, 0])
        assert moment == pytest.approx(0.0, abs=1e-12)


def test_singular_material():
    mesh = fem.build_mesh(20, 10)
    mat = fem.uniform_material(mesh, np.zeros((3, 3)))
    with pytest.raises((SingularMatrixError, SolverError)):
        fem.solve(mesh, mat, fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.SUBC, 1)))


def test_iterative_path_agrees_with_direct():
    mesh = fem.build_mesh(40, 10)
    grid = np.zeros((40, 40), dtype=bool)
    grid[15:25, :] = True
    mat = fem.assign_materials(mesh, grid)
    bc = fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.KUBC, 1))
    a = fem.solve(mesh, mat, bc)
    b = fem.solve(mesh, mat, bc, direct_limit=0)
    np.testing.assert_allclose(b.displacement, a.displacement, atol=1e-10)


def test_assign_materials_shape_check():
    mesh = fem.build_mesh(20, 10)
    with pytest.raises(DomainError):
        fem.assign_materials(mesh, np.zeros((30, 30), dtype=bool))


def test_fiber_fraction_of_integration_points():
    mesh = fem.build_mesh(20, 10)
    grid = np.zeros((20, 20), dtype=bool)
    grid[:, :10] = True
    assert fem.assign_materials(mesh, grid).fiber_fraction(mesh) == pytest.approx(0.5)


def test_field_csv(homogeneous, tmp_path):
    mesh, mat, _ = homogeneous
    sol = fem.solve(mesh, mat, fem.apply_load_case(mesh, fem.LoadCaseSpec(fem.KUBC, 1)))
    path = tmp_path / "u.csv"
    sol.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (mesh.n_nodes, 4)
    np.testing.assert_allclose(data[:, 2], 1e-3 * data[:, 0], atol=1e-15)
