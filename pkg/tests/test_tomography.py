import numpy as np
import pytest

from chanpurify.metrics import bell_fidelity
from chanpurify.purify import two_channel_purified_probs
from chanpurify.qcore import (
    KrausChannel,
    bell_state,
    bit_flip_channel,
    depolarizing_channel,
    is_cptp,
    ket,
    maximally_mixed,
    phase_flip_channel,
    plus_state,
    projector,
    random_cptp,
    random_density_matrix,
    trace_distance,
)
from chanpurify.experiments import distributed_state
from chanpurify.tomography import (
    EXACT,
    CountRecord,
    MeasurementSetting,
    ReconstructionUnderdetermined,
    apply_chi,
    apply_choi,
    apply_ptm,
    born_probabilities,
    channel_from_chi,
    channel_from_choi,
    chi_from_channel,
    chi_from_choi,
    chi_from_dict,
    chi_to_dict,
    chi_to_pauli_channel,
    choi_from_channel,
    choi_from_chi,
    mle_process,
    mle_state,
    process_frame,
    ptm_from_channel,
    records_from_jsonl,
    records_to_jsonl,
    sample_counts,
    simulate_process_tomography,
    simulate_state_tomography,
    state_frame,
)


def _assert_monotone(info):
    assert np.all(np.diff(info.loglik) >= 0), "log-likelihood decreased"


def test_chi_examples():
    np.testing.assert_allclose(chi_from_channel(KrausChannel.identity()), np.diag([1, 0, 0, 0]), atol=1e-14)
    np.testing.assert_allclose(chi_from_channel(depolarizing_channel(0.5)), np.diag([0.625, 0.125, 0.125, 0.125]), atol=1e-14)


def test_ptm_of_depolarizing():
    for p in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(ptm_from_channel(depolarizing_channel(p)), np.diag([1, p, p, p]), atol=1e-14)


def test_pauli_channel_chi_is_its_probability_vector(rng):
    from chanpurify.qcore import random_pauli_channel

    for n in (1, 2):
        pc = random_pauli_channel(n, rng)
        np.testing.assert_allclose(chi_from_channel(pc), np.diag(pc.vector()), atol=1e-14)
        np.testing.assert_allclose(chi_to_pauli_channel(chi_from_channel(pc)).vector(), pc.vector(), atol=1e-14)


def test_choi_trace_and_positivity(rng):
    ch = random_cptp(2, rng)
    choi = choi_from_channel(ch)
    assert np.trace(choi).real == pytest.approx(2)
    assert np.linalg.eigvalsh(choi).min() > -1e-12
    assert np.trace(chi_from_choi(choi)).real == pytest.approx(1)


def test_representations_agree_as_actions(rng):
    ch = random_cptp(2, rng)
    rho = random_density_matrix(2, rng)
    ref = ch(rho)
    chi = chi_from_channel(ch)
    np.testing.assert_allclose(apply_chi(chi, rho), ref, atol=1e-12)
    np.testing.assert_allclose(apply_choi(choi_from_channel(ch), rho), ref, atol=1e-12)
    np.testing.assert_allclose(apply_ptm(ptm_from_channel(ch), rho), ref, atol=1e-12)
    np.testing.assert_allclose(channel_from_chi(chi)(rho), ref, atol=1e-12)
    np.testing.assert_allclose(channel_from_choi(choi_from_chi(chi))(rho), ref, atol=1e-12)
    assert is_cptp(channel_from_chi(chi))[0]


def test_chi_dict_round_trip(rng):
    chi = chi_from_channel(random_cptp(2, rng))
    doc = chi_to_dict(chi)
    assert doc["basis"] == ["I", "X", "Y", "Z"]
    np.testing.assert_array_equal(chi_from_dict(doc), chi)


def test_frames():
    frame = process_frame(1)
    assert len(frame) == 12
    assert {s.preparation for s in frame} == {"0", "1", "+", "+i"}
    assert {s.basis for s in frame} == {"X", "Y", "Z"}
    assert len(state_frame(2)) == 9


def test_measurement_setting_validation():
    with pytest.raises(ValueError):
        MeasurementSetting("2", "Z")
    with pytest.raises(ValueError):
        MeasurementSetting(None, "W")
    with pytest.raises(ValueError):
        MeasurementSetting(None, "Z").input_state()


def test_sampling_examples():
    zero = projector(ket("0"))
    rec = sample_counts(zero, MeasurementSetting(None, "Z"), 1000, seed=1)
    assert rec.counts == {"0": 1000, "1": 0}
    rec = sample_counts(projector(plus_state()), MeasurementSetting(None, "Z"), 10**6, seed=2)
    assert abs(rec.frequencies()["0"] - 0.5) < 0.002
    for basis in "XYZ":
        rec = sample_counts(maximally_mixed(2), MeasurementSetting(None, basis), 10**6, seed=3)
        assert abs(rec.frequencies()["0"] - 0.5) < 0.002


def test_sampling_is_seeded():
    rho = projector(plus_state())
    a = sample_counts(rho, MeasurementSetting(None, "Y"), 500, seed=9)
    b = sample_counts(rho, MeasurementSetting(None, "Y"), 500, seed=9)
    assert a.counts == b.counts


def test_simulate_process_examples():
    for rec in simulate_process_tomography(KrausChannel.identity(), EXACT):
        assert rec.counts == born_probabilities(rec.setting.input_state(), rec.setting)
    for rec in simulate_process_tomography(depolarizing_channel(0), EXACT):
        for v in rec.counts.values():
            assert v == pytest.approx(0.5, abs=1e-15)
    rec = next(r for r in simulate_process_tomography(bit_flip_channel(0.5), EXACT) if r.setting == MeasurementSetting("0", "Z"))
    assert rec.counts["0"] == pytest.approx(0.5) and rec.counts["1"] == pytest.approx(0.5)


def test_count_record_validation():
    with pytest.raises(ValueError):
        CountRecord(MeasurementSetting(None, "Z"), {"0": 3, "1": 2}, 6)
    with pytest.raises(ValueError):
        CountRecord(MeasurementSetting(None, "Z"), {"0": -1, "1": 2}, 1)


def test_records_jsonl_round_trip():
    records = simulate_process_tomography(depolarizing_channel(0.4), 100, seed=5)
    again = records_from_jsonl(records_to_jsonl(records))
    assert [r.to_dict() for r in again] == [r.to_dict() for r in records]
    exact = simulate_process_tomography(depolarizing_channel(0.4), EXACT)
    again = records_from_jsonl(records_to_jsonl(exact))
    assert [r.to_dict() for r in again] == [r.to_dict() for r in exact]


def test_mle_state_exact_examples():
    for rho in (projector(ket("0")), maximally_mixed(2)):
        est, info = mle_state(simulate_state_tomography(rho, EXACT), full_output=True)
        assert trace_distance(est, rho) < 1e-6
        _assert_monotone(info)


def test_mle_state_two_qubit_shots():
    p = 0.33
    truth = p * projector(bell_state()) + (1 - p) * np.eye(4) / 4
    est, info = mle_state(simulate_state_tomography(truth, 10**6, seed=11), full_output=True)
    _assert_monotone(info)
    # fidelity between the states; the truth is full rank so use the root form
    w, v = np.linalg.eigh(truth)
    root = (v * np.sqrt(w)) @ v.conj().T
    s = np.linalg.eigvalsh(root @ est @ root)
    fid = np.sum(np.sqrt(np.clip(s, 0, None))) ** 2
    assert fid >= 0.995


def test_mle_state_output_is_density(rng):
    est, info = mle_state(simulate_state_tomography(random_density_matrix(2, rng), 50, seed=1), full_output=True)
    _assert_monotone(info)
    assert np.allclose(est, est.conj().T)
    assert np.trace(est).real == pytest.approx(1)
    assert np.linalg.eigvalsh(est).min() >= -1e-12


def test_mle_process_exact_examples():
    chi = mle_process(simulate_process_tomography(KrausChannel.identity(), EXACT))
    assert np.max(np.abs(chi - np.diag([1, 0, 0, 0]))) < 1e-6
    chi = mle_process(simulate_process_tomography(depolarizing_channel(0.5), EXACT))
    assert np.max(np.abs(chi - np.diag([0.625, 0.125, 0.125, 0.125]))) < 1e-6


def test_mle_process_rank_deficient_exact():
    for ch in (bit_flip_channel(0.3), phase_flip_channel(0.9)):
        chi, info = mle_process(simulate_process_tomography(ch, EXACT), full_output=True)
        assert np.max(np.abs(chi - chi_from_channel(ch))) < 1e-6
        _assert_monotone(info)


def test_mle_process_is_trace_preserving(rng):
    chi, info = mle_process(simulate_process_tomography(random_cptp(2, rng), 200, seed=4), full_output=True)
    _assert_monotone(info)
    ok, dev = is_cptp(channel_from_chi(chi))
    assert ok and dev < 1e-6


def test_mle_process_purified_branch_shots():
    plus, _, _ = two_channel_purified_probs(bit_flip_channel(0.5), phase_flip_channel(0.5))
    chi, info = mle_process(simulate_process_tomography(plus, 10**5, seed=21), full_output=True)
    _assert_monotone(info)
    assert abs(chi[0, 0].real - 0.6) < 0.02


def test_mle_consistency_over_shots():
    ch = depolarizing_channel(0.5)
    truth = chi_from_channel(ch)
    rho = distributed_state(depolarizing_channel(0.33))
    proc_err, state_err = [], []
    for shots in (10**3, 10**4, 10**5, 10**6):
        proc_err.append(np.max(np.abs(mle_process(simulate_process_tomography(ch, shots, seed=3)) - truth)))
        state_err.append(trace_distance(mle_state(simulate_state_tomography(rho, shots, seed=3)), rho))
    assert proc_err[-1] < proc_err[0]
    assert state_err[-1] < state_err[0]
    assert np.all(np.diff(proc_err) < 0)
    assert np.all(np.diff(state_err) < 0)


def test_incomplete_records_rejected():
    records = [r for r in simulate_state_tomography(maximally_mixed(2), EXACT) if r.setting.basis != "Y"]
    with pytest.raises(ReconstructionUnderdetermined):
        mle_state(records)
    records = [r for r in simulate_process_tomography(KrausChannel.identity(), EXACT) if r.setting.preparation != "+i"]
    with pytest.raises(ReconstructionUnderdetermined):
        mle_process(records)


def test_bell_state_reconstruction_fidelity():
    rho = distributed_state(depolarizing_channel(1.0))
    est = mle_state(simulate_state_tomography(rho, EXACT))
    assert bell_fidelity(est).value == pytest.approx(1.0, abs=1e-6)
