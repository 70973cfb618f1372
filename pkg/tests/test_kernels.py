import numpy as np
import pytest

from picardcert.kernels import (SamplePlan, check_convolution_form,
                                check_lambda_bound, check_lipschitz,
                                check_split_consistency,
                                check_vanishing_trends,
                                convolution_sinusoid_kernel,
                                exponential_kernel, gaussian_kernel,
                                split_exponential_kernel, zero_kernel)
from picardcert.quadrature import DecayEnvelope


def plan(orientation="delayed", dim=1, bound=1.0):
    return SamplePlan.build((-6.0, 6.0), orientation, dim, bound)


# -- envelope bound ---------------------------------------------------------------

def test_lambda_bound_zero_kernel_against_unit_envelope():
    k = zero_kernel()
    rep = check_lambda_bound(k, plan())
    assert rep.passed
    # against a strictly positive envelope the margin is the envelope itself
    k1 = exponential_kernel(1.0, cx=0.0, const=0.0)
    object.__setattr__(k1, "envelope", DecayEnvelope("exponential", 1.0, 1.0))
    rep = check_lambda_bound(k1, plan())
    assert rep.passed and rep.max_violation < 0


def test_lambda_bound_equality_case():
    # |e^{-(t-s)} x| with |x| <= 1 against the envelope e^{-(t-s)}: tight, passes
    k = exponential_kernel(1.0, cx=1.0, state_bound=1.0)
    rep = check_lambda_bound(k, plan())
    assert rep.passed
    assert rep.max_violation <= 1e-12  # equality case up to float noise


def test_lambda_bound_violation_with_halved_envelope():
    k = exponential_kernel(1.0, cx=1.0, state_bound=1.0)
    object.__setattr__(k, "envelope", DecayEnvelope("exponential", 0.5, 1.0))
    rep = check_lambda_bound(k, plan())
    assert not rep.passed
    assert rep.max_violation > 0.0
    assert "t" in rep.witness


def test_lambda_bound_requires_nonzero_translation():
    p = plan()
    bad = SamplePlan(np.zeros(3), p.ts_pairs, p.states)
    k = exponential_kernel(1.0, cx=1.0)
    with pytest.raises(ValueError):
        check_lambda_bound(k, bad)


# -- Lipschitz modulus --------------------------------------------------------------

def test_lipschitz_exact_linear_modulus():
    # C = e^{-(t-s)}(x+y)/4 has exact modulus e^{-(t-s)}/4
    k = exponential_kernel(1.0, cx=0.25, cy=0.25)
    rep = check_lipschitz(k, plan())
    assert rep.passed


def test_lipschitz_constant_kernel_zero_modulus():
    k = exponential_kernel(1.0, const=3.0)
    rep = check_lipschitz(k, plan())
    assert rep.passed
    assert rep.max_violation <= 1e-12


def test_lipschitz_fail_with_witness():
    k = exponential_kernel(1.0, cx=1.0)
    object.__setattr__(k, "lipschitz", DecayEnvelope("exponential", 0.5, 1.0))
    rep = check_lipschitz(k, plan())
    assert not rep.passed
    assert rep.witness["difference"] > rep.witness["allowed"]


def test_affine_kernel_modulus_boundary():
    # an affine kernel with coefficient row (cx, cy) passes exactly when the
    # declared modulus dominates max(|cx|, |cy|) e^{-r(t-s)} on samples
    for margin, expect in ((1.0, True), (0.999, False)):
        k = exponential_kernel(2.0, cx=0.3, cy=0.1)
        object.__setattr__(k, "lipschitz",
                           DecayEnvelope("exponential", 0.3 * margin, 2.0))
        rep = check_lipschitz(k, plan())
        assert rep.passed is expect


def test_limit_modulus_checked_when_supplied():
    k = exponential_kernel(1.5, cx=0.2)
    rep = check_lipschitz(k, plan(), use_limit=True)
    assert rep.passed and rep.check == "limit_lipschitz"


def test_limit_modulus_skipped_when_absent():
    k = exponential_kernel(1.5, cx=0.2)
    object.__setattr__(k, "limit_evaluator", None)
    rep = check_lipschitz(k, plan(), use_limit=True)
    assert rep.passed
    assert any("not checked" in n for n in rep.notes)


# -- convolution form ---------------------------------------------------------------

def test_convolution_form_machine_precision():
    k = convolution_sinusoid_kernel(1.0, cx=0.5, mod_amp=0.3, mod_omega=2.0)
    rep = check_convolution_form(k, plan())
    assert rep.passed
    assert rep.max_violation <= 1e-14


def test_gaussian_kernel_bound():
    k = gaussian_kernel(0.5, cx=1.0, state_bound=2.0)
    rep = check_lambda_bound(k, plan(dim=1, bound=2.0))
    assert rep.passed


# -- split kernels -------------------------------------------------------------------

def test_split_consistency_zero_ergodic():
    sk = split_exponential_kernel(1.0, aa_const=0.5, erg_const=0.0)
    rep = check_split_consistency(sk, plan("half_line_delayed"))
    assert rep.passed


def test_split_consistency_with_ergodic_part():
    sk = split_exponential_kernel(1.0, aa_cx=0.2, erg_cx=0.3, erg_const=0.1,
                                  erg_decay=1.0)
    rep = check_split_consistency(sk, plan("half_line_delayed"))
    assert rep.passed


def test_split_mismatch_detected():
    sk = split_exponential_kernel(1.0, aa_const=1.0, erg_const=0.5)
    # corrupt the envelope factorisation: claim a hat bound that is too small
    object.__setattr__(sk, "ergodic_hat",
                       lambda s, x, y: 0.1 * np.exp(-np.clip(s, 0, None)))
    rep = check_split_consistency(sk, plan("half_line_delayed"))
    assert not rep.passed
    assert rep.max_violation > 0.0


def test_vanishing_trends_decay():
    sk = split_exponential_kernel(1.0, aa_const=0.3, erg_cx=0.2, erg_decay=0.5)
    rep = check_vanishing_trends(sk, t_seq=np.array([5.0, 10.0, 20.0, 40.0]))
    assert rep.passed  # all three trend integrals decrease along the sequence
    assert any("trend" in n for n in rep.notes)
