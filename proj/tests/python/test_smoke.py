import math

import numpy as np
import pytest

import esp


@pytest.fixture
def medium():
    return esp.Medium(1.0)


def test_version_string():
    assert esp.__version__


def test_green_dyadic_reciprocity(medium):
    rng = np.random.default_rng(7)
    for _ in range(20):
        r = rng.uniform(-5, 5, 3)
        if np.linalg.norm(r) < 0.1:
            continue
        forward = esp.green_dyadic(r, medium)
        backward = esp.green_dyadic(-r, medium)
        assert np.allclose(forward, backward.T, rtol=1e-12, atol=0)


def test_far_field_is_transverse(medium):
    elements = [
        esp.CurrentElement([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], 0.01, 1.0),
        esp.CurrentElement([0.4, 0.0, 0.0], [1.0, 0.0, 0.0], 0.01, 0.5 + 0.5j),
    ]
    direction = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    pattern = esp.far_field(elements, direction, medium)
    assert abs(np.vdot(direction, pattern)) < 1e-10 * np.linalg.norm(pattern)


def test_dof_formulas(medium):
    seg = esp.dof_unbounded(
        esp.ApertureGeometry.segment(6.0), medium, esp.DofMethod.formula
    )
    assert seg.value == pytest.approx(12.0)
    square = esp.dof_unbounded(
        esp.ApertureGeometry.rectangle(20.0, 20.0), medium, esp.DofMethod.lattice
    )
    ratio = square.lattice_count / 1600.0
    assert ratio == pytest.approx(math.pi / 4.0, rel=0.05)


def test_dft_codebook_unitary():
    cb = esp.dft_codebook(8)
    gram = cb.matrix.conj().T @ cb.matrix
    assert np.allclose(gram, np.eye(8), atol=1e-12)


def test_water_filling_sums_to_power():
    allocation = esp.water_filling(np.array([1.0, 0.25, 0.04]), 0.5, 2.0)
    assert allocation.powers.sum() == pytest.approx(2.0, rel=1e-9)
    assert (allocation.powers >= 0).all()


def test_impedance_symmetry_and_reflection_identity(medium):
    array = esp.DipoleArray.concentric_rings(1, 0.25, 0.02)
    z = esp.impedance_matrix(array, medium)
    assert np.allclose(z.z, z.z.T, rtol=1e-10)
    loads = esp.LoadVector.reactive(np.linspace(-1.0, 1.0, array.ports()))
    r = esp.reflection_matrix(z, loads)
    loaded = z.z + np.diag(loads.impedance())
    assert np.linalg.norm(r @ loaded + z.z) < 1e-10 * np.linalg.norm(z.z)


def test_sim_response_global_phase(medium):
    stack = esp.SimStack()
    stack.layers = 2
    stack.atoms_per_layer = 9
    stack.atom_pitch = 0.5
    stack.atom_area = 0.25
    stack.layer_spacing = 1.0
    stack.readout = esp.readout_matrix(stack, 4, medium)
    theta = np.zeros((2, 9))
    base = esp.sim_response(stack, esp.PhaseTensor(theta), medium)
    theta[1, :] += 0.7
    lifted = esp.sim_response(stack, esp.PhaseTensor(theta), medium)
    assert np.allclose(lifted, np.exp(0.7j) * base, rtol=1e-12)


def test_ris_profile_and_dof():
    profile = esp.anomalous_phase_profile(esp.Angle(0.0, 0.0), esp.Angle(0.0, 0.0), 8)
    assert np.abs(profile).max() == 0.0
    assert esp.ris_dof(4, esp.RisStructure.nondiagonal_reciprocal) == 6
    assert esp.ris_dof(4, esp.RisStructure.nondiagonal_nonreciprocal) == 16


def test_scm_noiseless_link_aligns():
    channel = esp.make_channel(12, 6, 1, np.array([1.0]), 3)
    params = esp.ScmParams()
    params.ap_antennas = 12
    params.cells = 6
    params.ap_noise = 0.0
    trajectory = esp.run_link(channel, params, [0.0] * 5, 11)
    assert trajectory.alignment[-1] > 1 - 1e-10
    assert trajectory.symbol_errors == 0


def test_channel_determinism():
    a = esp.make_channel(6, 5, 2, np.array([1.0, 0.5]), 42)
    b = esp.make_channel(6, 5, 2, np.array([1.0, 0.5]), 42)
    assert np.array_equal(a.h, b.h)


def test_bootstrap_snr():
    assert esp.bootstrap_snr_db(30.0, 1000) == pytest.approx(0.0)
