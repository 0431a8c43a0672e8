import math

import numpy as np
import pytest

import qfluct as qf
from qfluct.errors import ValidationError
from qfluct.holevo import OptimizeConfig
from qfluct.rand import random_density_matrix, random_povm

from oracles import enumeration_oracle

KET0 = np.array([1, 0], dtype=complex)
KETP = np.array([1, 1], dtype=complex) / np.sqrt(2)
P0 = np.outer(KET0, KET0.conj())
PPLUS = np.outer(KETP, KETP.conj())
Z_POVM_ELEMENTS = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]

I_CLOSED = 0.5 * math.log(4 / 3) + 0.25 * math.log(2 / 3) + 0.25 * math.log(2)
_x = (1 + 1 / math.sqrt(2)) / 2
CHI_CLOSED = -_x * math.log(_x) - (1 - _x) * math.log(1 - _x)


def zero_plus_instance():
    ens = qf.Ensemble.create([0.5, 0.5], [P0, PPLUS])
    return qf.CqChannelInstance.create(ens, qf.POVM.create(Z_POVM_ELEMENTS))


def orthogonal_instance():
    ens = qf.Ensemble.create([0.5, 0.5], [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)])
    return qf.CqChannelInstance.create(ens, qf.POVM.create(Z_POVM_ELEMENTS))


def identical_states_instance(seed=0):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(2, rng)
    ens = qf.Ensemble.create([0.3, 0.7], [rho, rho.copy()])
    return qf.CqChannelInstance.create(ens, random_povm(2, 3, rng))


def test_ensemble_strips_zero_priors():
    ens = qf.Ensemble.create([0.5, 0.0, 0.5], [P0, PPLUS, PPLUS])
    assert ens.n_words == 2
    assert np.allclose(ens.priors, [0.5, 0.5])


def test_ensemble_rejects_bad_priors():
    with pytest.raises(ValidationError, match="sum"):
        qf.Ensemble.create([0.6, 0.5], [P0, PPLUS])
    with pytest.raises(ValidationError, match="negative"):
        qf.Ensemble.create([1.2, -0.2], [P0, PPLUS])


def test_conditional_probabilities_patterns():
    assert np.abs(
        qf.conditional_probabilities(orthogonal_instance()) - np.eye(2)
    ).max() < 1e-12
    inst = identical_states_instance()
    cond = qf.conditional_probabilities(inst)
    assert np.abs(cond[0] - cond[1]).max() < 1e-12
    cond = qf.conditional_probabilities(zero_plus_instance())
    assert np.abs(cond - [[1.0, 0.0], [0.5, 0.5]]).max() < 1e-12


def test_mutual_information_cases():
    assert qf.mutual_information(identical_states_instance()) < 1e-12
    assert abs(qf.mutual_information(orthogonal_instance()) - math.log(2)) < 1e-12
    assert abs(qf.mutual_information(zero_plus_instance()) - I_CLOSED) < 1e-12


def test_mutual_information_decomposition():
    shannon, conditional = qf.mutual_information_decomposition(orthogonal_instance())
    assert abs(shannon - math.log(2)) < 1e-12
    assert abs(conditional) < 1e-12
    inst = identical_states_instance()
    shannon, conditional = qf.mutual_information_decomposition(inst)
    assert abs(conditional + shannon) < 1e-12  # posterior equals prior
    inst = qf.random_instance(2, 3, 3, seed=11)
    shannon, conditional = qf.mutual_information_decomposition(inst)
    assert abs((shannon + conditional) - qf.mutual_information(inst)) < 1e-10


def test_holevo_chi_cases():
    assert abs(qf.holevo_chi(orthogonal_instance().ensemble) - math.log(2)) < 1e-12
    assert qf.holevo_chi(identical_states_instance().ensemble) < 1e-12
    assert abs(qf.holevo_chi(zero_plus_instance().ensemble) - CHI_CLOSED) < 1e-12


def test_build_joint_state_properties():
    inst = zero_plus_instance()
    dil = qf.naimark_dilate(inst.povm)
    rho0 = qf.build_joint_state(inst.ensemble, dil)
    assert rho0.shape == (8, 8)
    assert abs(float(np.trace(rho0).real) - 1.0) < 1e-12
    assert float(np.linalg.eigvalsh(rho0)[0]) > -1e-12
    # partial trace over probe and message recovers the average state
    reduced = qf.partial_trace(rho0, [2, 2, 2], keep=[0])
    assert np.abs(reduced - inst.ensemble.average_state()).max() < 1e-12


def test_build_joint_state_single_word():
    rng = np.random.default_rng(1)
    rho = random_density_matrix(2, rng)
    ens = qf.Ensemble.create([1.0], [rho])
    povm = random_povm(2, 2, rng)
    dil = qf.naimark_dilate(povm)
    rho0 = qf.build_joint_state(ens, dil)
    probe0 = np.zeros((2, 2), dtype=complex)
    probe0[0, 0] = 1.0
    assert np.abs(rho0 - qf.kron(rho, probe0, np.eye(1))).max() < 1e-12


def test_build_observables_single_word_trivial():
    rng = np.random.default_rng(2)
    ens = qf.Ensemble.create([1.0], [random_density_matrix(2, rng)])
    povm = random_povm(2, 3, rng)
    rep = qf.analyze(qf.CqChannelInstance.create(ens, povm))
    assert abs(rep.mean_delta_a) < 1e-10
    assert abs(rep.gamma - 1.0) < 1e-10
    assert abs(rep.mutual_information) < 1e-12
    assert abs(rep.chi) < 1e-12


def test_build_observables_perfect_discrimination_single_atom():
    rep = qf.analyze(orthogonal_instance())
    values = [v for v, p in rep.atoms if p > 1e-12]
    assert len(values) == 1
    assert abs(values[0]) < 1e-10


def test_mean_identity_on_random_instances():
    for seed in range(10):
        inst = qf.random_instance(2 + seed % 2, 1 + seed % 3, 2 + seed % 3, seed=seed)
        internals = qf.prepare_instance(inst)
        a_f_mat = internals.a_f.finite_matrix()
        a_i_mat = internals.a_i.finite_matrix()
        mean_direct = float(np.trace(internals.rho0 @ (a_f_mat - a_i_mat)).real)
        chi = qf.holevo_chi(inst.ensemble)
        info = qf.mutual_information(inst)
        assert abs(mean_direct - (chi - info)) < 1e-9


def test_infinite_branch_unreachable():
    for seed in (0, 5):
        inst = qf.random_instance(2, 2, 3, seed=seed, state_kind="rank_deficient")
        internals = qf.prepare_instance(inst)
        leak = float(np.trace(internals.rho0 @ internals.a_f.infinite_projector()).real)
        assert abs(leak) <= 1e-12


def test_analyze_orthogonal_equality_case():
    rep = qf.analyze(orthogonal_instance())
    assert abs(rep.mutual_information - math.log(2)) < 1e-10
    assert abs(rep.chi - math.log(2)) < 1e-10
    assert abs(rep.gamma - 1.0) < 1e-10
    assert abs(rep.bound_slack) < 1e-8
    assert rep.equality_residual < 1e-8
    assert rep.passed


def test_analyze_identical_states():
    rep = qf.analyze(identical_states_instance())
    assert abs(rep.gamma - 1.0) < 1e-9
    assert rep.mutual_information < 1e-10
    assert rep.chi < 1e-10
    assert rep.equality_residual < 1e-8


def test_analyze_worked_example_against_oracle():
    inst = zero_plus_instance()
    rep = qf.analyze(inst)
    assert abs(rep.mutual_information - I_CLOSED) < 1e-10
    assert abs(rep.chi - CHI_CLOSED) < 1e-10
    assert rep.bound_slack > 0
    assert 0 < rep.neg_log_gamma < rep.chi - rep.mutual_information
    dil = qf.naimark_dilate(inst.povm)
    oracle = enumeration_oracle(
        inst.ensemble.priors, inst.ensemble.states, inst.povm.elements, dil.projectors
    )
    assert abs(rep.gamma - oracle["gamma"]) < 1e-8
    assert abs(rep.mean_delta_a - oracle["mean_delta_a"]) < 1e-8
    assert abs(rep.mutual_information - oracle["mutual_information"]) < 1e-10
    assert abs(rep.chi - oracle["chi"]) < 1e-10


def test_analyze_random_instance_against_oracle():
    for seed in (3, 4):
        inst = qf.random_instance(3, 2, 3, seed=seed, state_kind="mix")
        dil = qf.naimark_dilate(inst.povm)
        rep = qf.analyze(inst)
        oracle = enumeration_oracle(
            inst.ensemble.priors, inst.ensemble.states, inst.povm.elements, dil.projectors
        )
        assert abs(rep.gamma - oracle["gamma"]) < 1e-8
        assert abs(rep.mean_delta_a - oracle["mean_delta_a"]) < 1e-8


def test_gt_chain_random_qubit_instances():
    for seed in range(50):
        inst = qf.random_instance(2, 2, 1 + seed % 4, seed=100 + seed, state_kind="mix")
        rep = qf.analyze(inst)
        assert rep.gamma <= rep.chain.g1 + 1e-8
        assert rep.chain.g1 <= rep.chain.g2 + 1e-8
        assert abs(rep.chain.g2 - 1.0) < 1e-9


def test_gt_chain_tight_cases():
    rep = qf.analyze(orthogonal_instance())
    assert abs(rep.chain.g1 - 1.0) < 1e-9
    assert abs(rep.chain.g2 - 1.0) < 1e-9
    rep = qf.analyze(identical_states_instance())
    assert abs(rep.chain.g1 - 1.0) < 1e-9


def test_equality_residual_forward_and_backward():
    assert qf.analyze(orthogonal_instance()).equality_residual < 1e-8
    assert qf.analyze(identical_states_instance()).equality_residual < 1e-8
    rep = qf.analyze(zero_plus_instance())
    assert rep.bound_slack > 1e-4
    assert rep.equality_residual > 1e-6


def test_prior_permutation_covariance():
    inst = qf.random_instance(2, 3, 3, seed=21)
    perm = [2, 0, 1]
    permuted = qf.CqChannelInstance.create(
        qf.Ensemble.create(
            inst.ensemble.priors[perm], [inst.ensemble.states[i] for i in perm]
        ),
        inst.povm,
    )
    a, b = qf.analyze(inst), qf.analyze(permuted)
    assert abs(a.mutual_information - b.mutual_information) < 1e-10
    assert abs(a.chi - b.chi) < 1e-10
    assert abs(a.gamma - b.gamma) < 1e-10


def test_random_instance_determinism_and_validity():
    a = qf.random_instance(3, 2, 4, seed=77, state_kind="mix")
    b = qf.random_instance(3, 2, 4, seed=77, state_kind="mix")
    assert np.array_equal(a.ensemble.priors, b.ensemble.priors)
    for s, t in zip(a.ensemble.states, b.ensemble.states):
        assert np.array_equal(s, t)
    for m, n in zip(a.povm.elements, b.povm.elements):
        assert np.array_equal(m, n)
    # validity is enforced by the constructors; re-run them explicitly
    qf.POVM.create(a.povm.elements)
    qf.Ensemble.create(a.ensemble.priors, a.ensemble.states)


def test_supp_violation_is_rejected():
    # word supported outside the average state support cannot happen with
    # positive priors; simulate it by corrupting the prior vector handling
    rho_a = np.diag([1.0, 0.0]).astype(complex)
    rho_b = np.diag([0.0, 1.0]).astype(complex)
    ens = qf.Ensemble.create([1.0 - 1e-13, 1e-13], [rho_a, rho_b])
    # the second word was stripped (prior at the floor), so rho_b is gone
    assert ens.n_words == 1


def test_optimize_measurement_orthogonal_reaches_log2():
    ens = orthogonal_instance().ensemble
    povm, achieved = qf.optimize_measurement(
        ens, 2, OptimizeConfig(restarts=2, iterations=60, seed=1)
    )
    assert achieved >= math.log(2) - 1e-6
    qf.POVM.create(povm.elements)


def test_optimize_measurement_identical_states_zero():
    ens = identical_states_instance().ensemble
    _, achieved = qf.optimize_measurement(
        ens, 2, OptimizeConfig(restarts=2, iterations=40, seed=2)
    )
    assert achieved <= 1e-9


def test_optimize_measurement_beats_z_basis():
    inst = zero_plus_instance()
    ens = inst.ensemble
    z_value = qf.mutual_information(inst)
    chi = qf.holevo_chi(ens)
    povm, achieved = qf.optimize_measurement(
        ens, 2, OptimizeConfig(restarts=3, iterations=150, seed=3)
    )
    assert achieved >= z_value - 1e-12
    assert achieved <= chi + 1e-8


def test_optimize_measurement_monotone_in_iterations():
    ens = zero_plus_instance().ensemble
    results = []
    for iters in (10, 40, 160):
        _, achieved = qf.optimize_measurement(
            ens, 2, OptimizeConfig(restarts=2, iterations=iters, seed=4)
        )
        results.append(achieved)
    assert results[0] <= results[1] + 1e-12
    assert results[1] <= results[2] + 1e-12


def test_dilation_choice_harness():
    # whether -ln(gamma) depends on the Naimark dilation is an open
    # question; this harness reports the observed difference instead of
    # asserting invariance.
    inst = zero_plus_instance()
    canonical = qf.analyze(inst)
    randomized_dil = qf.naimark_dilate_randomized(inst.povm, np.random.default_rng(13))
    randomized = qf.analyze(inst, dilation=randomized_dil)
    diff = abs(canonical.neg_log_gamma - randomized.neg_log_gamma)
    assert math.isfinite(diff)
    assert randomized.passed  # the sharpened bound holds for either dilation
    print(f"\ndilation dependence of -ln(gamma): canonical={canonical.neg_log_gamma:.12g} "
          f"randomized={randomized.neg_log_gamma:.12g} diff={diff:.3e}")


def test_analyze_rejects_dimension_mismatch():
    ens = zero_plus_instance().ensemble
    with pytest.raises(ValidationError, match="mismatch"):
        qf.CqChannelInstance.create(ens, random_povm(3, 2, np.random.default_rng(0)))
