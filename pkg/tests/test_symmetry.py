import numpy as np
import pytest

from dptlab.errors import DimensionError, NotBlockDiagonalError
from dptlab.fock import annihilation, creation, number, parity, phase_rotation
from dptlab.lindblad import LindbladModel, dissipator_apply, liouvillian_apply
from dptlab.models import KerrConfig, LaserConfig, dephasing_jump, kerr_model, laser_model, parity_jump
from dptlab.symmetry import (
    sector_liouvillian,
    sector_project,
    sectors_for,
    ssb_removal_check,
    u1_sectors,
    verify_weak_symmetry,
    z2_sectors,
)

from conftest import random_state


def brute_block(model, sector):
    """Apply the generator to every sector dyad and read off sector coordinates."""
    cols = []
    for m, n in sector.basis:
        X = np.zeros((model.cutoff,) * 2, dtype=complex)
        X[m, n] = 1
        cols.append(sector.gather(liouvillian_apply(model, X)))
    return np.array(cols).T


def test_u1_sectors_are_diagonal_bands():
    secs = u1_sectors(5, kmax=4)
    assert sum(s.dim for s in secs) == 25
    band = {s.k: s for s in secs}
    assert [tuple(p) for p in band[2].basis] == [(2, 0), (3, 1), (4, 2)]
    assert [tuple(p) for p in band[-1].basis] == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert band[0].label == "U1:0"
    assert band[1].u(0.4) == pytest.approx(np.exp(0.4j))
    with pytest.raises(ValueError):
        band[1].u()
    with pytest.raises(ValueError):
        u1_sectors(5, kmax=5)


def test_z2_sectors_partition_by_offset_parity():
    even, odd = z2_sectors(6)
    assert even.dim == 18 and odd.dim == 18
    assert np.all((odd.basis[:, 0] - odd.basis[:, 1]) % 2 == 1)
    assert odd.u() == -1 and even.u() == 1
    mask = even.mask() | odd.mask()
    assert mask.all() and not (even.mask() & odd.mask()).any()


def test_sector_eigenvalue_of_symmetry_superoperator(rng):
    C = 6
    rho = random_state(C, rng)
    J = phase_rotation(0.9, C)
    for sec in u1_sectors(C, kmax=C - 1):
        part = sector_project(rho, sec)
        assert np.allclose(J @ part @ J.conj().T, sec.u(0.9) * part)
    P = parity(C)
    for sec in z2_sectors(C):
        part = sector_project(rho, sec)
        assert np.allclose(P @ part @ P, sec.u() * part)


def test_gather_scatter_roundtrip(rng):
    sec = u1_sectors(7, 2)[3]
    rho = random_state(7, rng)
    assert np.allclose(sec.scatter(sec.gather(rho)), sector_project(rho, sec))
    assert len(sec.complement()) == 49 - sec.dim
    with pytest.raises(DimensionError):
        sector_project(np.eye(3), sec)


@pytest.mark.parametrize("model", [
    laser_model(LaserConfig(A=1.25, N=5, eta=0.2, omega=0.4, C=12)),
    kerr_model(KerrConfig(G=3, N=3, zeta=0.2, C=8)),
])
def test_sector_blocks_match_brute_force(model):
    for sec in sectors_for(model, kmax=3):
        block = sector_liouvillian(model, sec)
        assert np.allclose(block.matrix, brute_block(model, sec), atol=1e-12)
        assert block.leakage < 1e-12


def test_block_refuses_symmetry_breaking_model():
    C = 8
    a = annihilation(C)
    H = 0.5 * (a + creation(C))  # linear drive breaks both symmetries
    model = LindbladModel(H, (a,), "U1")
    with pytest.raises(NotBlockDiagonalError):
        sector_liouvillian(model, u1_sectors(C, 1)[1])


def test_untagged_model_has_single_sector():
    model = LindbladModel(number(4), (annihilation(4),))
    (sec,) = sectors_for(model)
    assert sec.dim == 16
    assert np.allclose(sector_liouvillian(model, sec).matrix.shape, (16, 16))


def test_verify_weak_symmetry_on_presets_and_negative_control():
    laser = laser_model(LaserConfig(A=1.25, N=5, C=20))
    kerr = kerr_model(KerrConfig(G=12.5, N=2, C=16))
    for phi in (0.3, 1.7):
        assert verify_weak_symmetry(laser, phase_rotation(phi, 20)).passed
    assert verify_weak_symmetry(kerr, parity(16)).passed
    # the Kerr model has only the Z2 symmetry, not the full U(1)
    assert not verify_weak_symmetry(kerr, phase_rotation(0.3, 16)).passed
    a = annihilation(16)
    driven = LindbladModel(kerr.hamiltonian + 0.5 * (a + a.conj().T), kerr.jumps, "Z2")
    report = verify_weak_symmetry(driven, parity(16))
    assert not report.passed and report.leakage > 1e-3
    assert "FAIL" in str(report)


def test_verify_weak_symmetry_in_non_diagonal_basis(rng):
    # conjugate everything by a random unitary; the symmetry must still be found
    C = 8
    model = kerr_model(KerrConfig(G=3, N=3, C=C))
    Q, _ = np.linalg.qr(rng.normal(size=(C, C)) + 1j * rng.normal(size=(C, C)))
    rotated = LindbladModel(Q @ model.hamiltonian @ Q.conj().T,
                            tuple(Q @ L @ Q.conj().T for L in model.jumps))
    assert verify_weak_symmetry(rotated, Q @ parity(C) @ Q.conj().T, tol=1e-9).passed
    with pytest.raises(ValueError, match="unitary"):
        verify_weak_symmetry(model, 2 * np.eye(C))


def test_ssb_removal_shift_constants():
    C = 20
    laser = laser_model(LaserConfig(A=1.25, N=5, C=C))
    report = ssb_removal_check(laser, dephasing_jump(0.2, C), sectors_for(laser, 2))
    assert report.passed
    shifts = {s.k: s.uniform_shift for s in report.sectors}
    for k in (-2, -1, 1, 2):
        assert shifts[k] == pytest.approx(-0.2 * k * k / 8, abs=1e-13)
    assert shifts[0] == 0

    kerr = kerr_model(KerrConfig(G=3, N=3, C=12))
    report = ssb_removal_check(kerr, parity_jump(0.2, 12), sectors_for(kerr))
    assert report.passed
    assert report.sectors[1].uniform_shift == pytest.approx(-0.4, abs=1e-14)
    assert report.cross_leakage == 0

    bad = ssb_removal_check(kerr, np.sqrt(0.2) * annihilation(12), sectors_for(kerr))
    assert not bad.passed
    assert bad.sectors[0].max_action > 0.1
    assert "FAIL" in str(bad)
