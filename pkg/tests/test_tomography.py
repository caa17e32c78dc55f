import itertools

import numpy as np
import pytest

from mismatch_qpt import (
    ChiMatrix,
    MeasMatrix,
    apply_chi,
    chi_of_unitary,
    error_report,
    ideal_cnot_chi,
    matrix_from_chi,
    model,
    model_matrix,
    output_density,
    process_fidelity,
    read_chi_json,
    read_meas_csv,
    reconstruct_chi,
    state_vector,
    synthesize_measurement,
    write_chi_json,
    write_meas_csv,
)
from mismatch_qpt.engine import tau_array
from mismatch_qpt.errors import NumericalError, ValidationError
from mismatch_qpt.tomography import CNOT, PAULIS, RELAXED_BLOCK_TOL, TOMO_TOKENS

TABLE_TAUS = (0.2, -0.4, 0.3, -0.1, 0.25)


def test_ideal_matrix_pattern():
    m = model_matrix((0.0,) * 5).entries
    z_expected = np.zeros((4, 4))
    for r, out in enumerate(("00", "01", "11", "10")):
        z_expected[r, ("00", "01", "10", "11").index(out)] = 1.0
    np.testing.assert_allclose(m[:4, :4], z_expected, atol=1e-12)
    np.testing.assert_allclose(m[:4, 4:], 0.25, atol=1e-12)
    np.testing.assert_allclose(m[4:, :4], 0.25, atol=1e-12)
    x_expected = np.zeros((4, 4))
    for r, out in enumerate(("++", "--", "-+", "+-")):
        x_expected[r, ("++", "+-", "-+", "--").index(out)] = 1.0
    np.testing.assert_allclose(m[4:, 4:], x_expected, atol=1e-12)


def test_meas_matrix_validation():
    good = model_matrix((0.0,) * 5).entries
    bad = good.copy()
    bad[0, 0] -= 0.015
    with pytest.raises(ValidationError):
        MeasMatrix(bad)
    # the relaxed tolerance admits noisy, nearly normalized data
    MeasMatrix(bad, block_tol=RELAXED_BLOCK_TOL)
    with pytest.raises(ValidationError):
        MeasMatrix(bad * 10.0, block_tol=RELAXED_BLOCK_TOL)
    with pytest.raises(ValidationError):
        MeasMatrix(good[:7])
    with pytest.raises(ValidationError):
        MeasMatrix(np.where(good > 0.5, 1.2, good))


def test_reconstruct_chi_ideal():
    chi = reconstruct_chi((0.0,) * 5)
    np.testing.assert_allclose(chi.entries, ideal_cnot_chi().entries, atol=1e-12)
    assert chi.scale == pytest.approx(1.0 / 9.0, abs=1e-12)
    w = np.linalg.eigvalsh(chi.entries)
    assert w[-1] == pytest.approx(1.0, abs=1e-9)
    assert abs(w[:-1]).max() < 1e-9


def test_process_fidelity_anchors():
    ident = chi_of_unitary(np.eye(4))
    cnot = ideal_cnot_chi()
    assert process_fidelity(cnot, cnot) == pytest.approx(1.0, abs=1e-12)
    assert process_fidelity(cnot, ident) == pytest.approx(0.25, abs=1e-9)
    assert process_fidelity(ident, cnot) == pytest.approx(0.25, abs=1e-9)


def test_process_fidelity_symmetry_on_model_chis():
    a = reconstruct_chi(TABLE_TAUS)
    b = reconstruct_chi((0.0,) * 5)
    assert process_fidelity(a, b) == pytest.approx(process_fidelity(b, a), abs=1e-12)
    v = process_fidelity(a, b)
    assert 0.0 <= v <= 1.0


def test_apply_chi_reproduces_channel():
    # the scaled chi action must agree with the coefficient-decomposed
    # direct output densities on an arbitrary mixed input
    chi = reconstruct_chi(TABLE_TAUS)
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real

    toks = list(itertools.product(TOMO_TOKENS, repeat=2))
    basis = [state_vector(f"{c},{t}") for c, t in toks]
    s_mat = np.column_stack(
        [np.outer(p, p.conj()).ravel() for p in basis]
    )
    coeff = np.linalg.solve(s_mat, rho.ravel())
    mdl = model()
    direct = sum(
        c * mdl.density(tc, tt, tau_array(TABLE_TAUS))
        for c, (tc, tt) in zip(coeff, toks)
    )
    via_chi = apply_chi(chi, rho) * chi.scale
    np.testing.assert_allclose(via_chi, direct, atol=1e-12)


def test_sixteen_vs_larger_input_set():
    full36 = [
        f"{a},{b}"
        for a in ("0", "1", "+", "-", "+i", "-i")
        for b in ("0", "1", "+", "-", "+i", "-i")
    ]
    chi16 = reconstruct_chi(TABLE_TAUS)
    chi36 = reconstruct_chi(TABLE_TAUS, inputs=full36)
    np.testing.assert_allclose(chi16.entries, chi36.entries, atol=1e-8)
    assert chi16.scale == pytest.approx(chi36.scale, abs=1e-8)
    with pytest.raises(ValidationError):
        reconstruct_chi(TABLE_TAUS, inputs=full36[:8])


def test_matrix_from_chi_round_trip():
    for taus in ((0.0,) * 5, TABLE_TAUS):
        direct = model_matrix(taus)
        via_chi = matrix_from_chi(reconstruct_chi(taus))
        np.testing.assert_allclose(via_chi.entries, direct.entries, atol=1e-8)


def test_output_density_purity():
    # strong tau2 mismatch: control |1> decoheres the target superposition
    rho, success = output_density("11", (0.0, 10.0, 0.0, 0.0, 0.0))
    assert success == pytest.approx(1.0 / 3.0, abs=1e-9)
    purity = np.trace(rho @ rho).real
    assert purity == pytest.approx(7.0 / 9.0, abs=1e-9)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)

    # control |1> with target |+>: both interferometer paths land on the
    # same target state, so the output stays pure
    rho2, success2 = output_density("1+", (0.0, 10.0, 0.0, 0.0, 0.0))
    assert success2 == pytest.approx(5.0 / 9.0, abs=1e-9)
    assert np.trace(rho2 @ rho2).real == pytest.approx(1.0, abs=1e-9)


def test_chi_matrix_validation():
    # physicality violations surface as numerical errors
    good = ideal_cnot_chi()
    with pytest.raises(NumericalError):
        ChiMatrix(good.entries * 2.0)
    skew = good.entries.copy()
    skew[0, 1] += 1e-6
    with pytest.raises(NumericalError):
        ChiMatrix(skew)
    neg = np.diag(np.full(16, 1.01 / 15.0)).astype(complex)
    neg[15, 15] = -0.01
    with pytest.raises(NumericalError):
        ChiMatrix(neg)


def test_synthesize_statistics():
    m = synthesize_measurement(TABLE_TAUS, 10**9, seed=0)
    np.testing.assert_allclose(
        m.entries, model_matrix(TABLE_TAUS).entries, atol=1e-4
    )
    m1 = synthesize_measurement(TABLE_TAUS, 4600, seed=42)
    m2 = synthesize_measurement(TABLE_TAUS, 4600, seed=42)
    np.testing.assert_array_equal(m1.entries, m2.entries)
    assert not np.array_equal(
        m1.entries, synthesize_measurement(TABLE_TAUS, 4600, seed=43).entries
    )
    with pytest.raises(ValidationError):
        synthesize_measurement(TABLE_TAUS, 0)


def test_synthesized_noise_scale():
    # per-entry std at c=4600 should sit near sqrt(p(1-p)/c) ~ 1.5% for
    # p ~ 1/2; use the X block of a superposition row, p ~ 1/4 each
    probs = model_matrix(TABLE_TAUS).entries
    sel = (4, slice(4, 8))
    draws = np.stack(
        [synthesize_measurement(TABLE_TAUS, 4600, seed=s).entries[sel] for s in range(100)]
    )
    emp = draws.std(axis=0)
    expect = np.sqrt(probs[sel] * (1.0 - probs[sel]) / 4600.0)
    np.testing.assert_allclose(emp, expect, rtol=0.35)


def test_meas_csv_round_trip(tmp_path):
    m = synthesize_measurement(TABLE_TAUS, 4600, seed=9)
    path = tmp_path / "m.csv"
    write_meas_csv(m, path)
    m2 = read_meas_csv(path)
    np.testing.assert_array_equal(m.entries, m2.entries)
    write_meas_csv(m2, tmp_path / "m2.csv")
    assert (tmp_path / "m.csv").read_text() == (tmp_path / "m2.csv").read_text()


def test_meas_csv_rejects_bad_blocks(tmp_path):
    m = model_matrix((0.0,) * 5)
    bad = m.entries.copy()
    bad[2, :4] *= 0.9
    path = tmp_path / "bad.csv"
    lines = [",".join(repr(v) for v in row) for row in bad]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError):
        read_meas_csv(path)


def test_chi_json_round_trip(tmp_path):
    chi = reconstruct_chi(TABLE_TAUS)
    path = tmp_path / "chi.json"
    write_chi_json(chi, path)
    chi2 = read_chi_json(path)
    np.testing.assert_array_equal(chi.entries, chi2.entries)
    assert chi.scale == chi2.scale
    with pytest.raises(ValidationError):
        path2 = tmp_path / "bad.json"
        path2.write_text('{"real": [[1]]}')
        read_chi_json(path2)


def test_error_report():
    a = model_matrix((0.0,) * 5).entries
    b = a.copy()
    b[0, 0] -= 0.02
    b[0, 1] += 0.02
    rep = error_report(a, b)
    assert rep.e_max == pytest.approx(0.02, abs=1e-15)
    assert rep.e_mean == pytest.approx(0.04 / 64.0, abs=1e-15)
    assert rep.error_matrix.shape == (8, 8)


def test_state_vector_tokens():
    v = state_vector("0,0")
    np.testing.assert_allclose(v, [1, 0, 0, 0], atol=1e-15)
    vp = state_vector("+,+")
    np.testing.assert_allclose(vp, np.full(4, 0.5), atol=1e-15)
    vi = state_vector("+i,0")
    np.testing.assert_allclose(vi, [1 / np.sqrt(2), 0, 1j / np.sqrt(2), 0], atol=1e-15)
    with pytest.raises(ValidationError):
        state_vector("0,2")


def test_chi_of_unitary_cnot_matches_ideal():
    np.testing.assert_allclose(
        chi_of_unitary(CNOT).entries, ideal_cnot_chi().entries, atol=1e-15
    )
    # unitary channel: single unit eigenvalue in the Pauli basis
    w = np.linalg.eigvalsh(ideal_cnot_chi().entries)
    assert w[-1] == pytest.approx(1.0, abs=1e-12)
