import dataclasses

import numpy as np
import pytest

from cfmonitor import (
    default_ap_power_control, estimation_stats, generate_realization, reduced_params,
)
from cfmonitor.sinr import (
    PowerAllocation, QCoefficients, asymptotic_sinr_cpu_limit, asymptotic_sinr_ue_limit,
    q_coefficients, sinr_cpu, sinr_monitor, sinr_ue,
)


def _setup(params, index=0, **realization_changes):
    r = generate_realization(params, index)
    if realization_changes:
        r = dataclasses.replace(r, **realization_changes)
    st = estimation_stats(r)
    return r, st, default_ap_power_control(r, st)


def test_power_allocation_validation():
    with pytest.raises(ValueError):
        PowerAllocation(0.7, 0.4, 1.0)
    with pytest.raises(ValueError):
        PowerAllocation(-0.1, 0.0, 1.0)
    a = PowerAllocation.from_eta(0.01, 0.02, 8, 3e-3, 2e-2, 5.0)
    assert a.eta_pm_t(8, 3e-3) == pytest.approx(0.01)
    assert a.eta_pm_1(8, 2e-2) == pytest.approx(0.02)


def test_power_control_normalisation(small):
    n = small.params.n_ap
    assert np.allclose((small.eta.c * n * small.st.gamma).sum(axis=1), 1.0)
    assert np.allclose(small.eta.s * n * small.r.zeta_st, 1.0)
    r, st, eta = _setup(reduced_params(k_ues=1))
    assert np.allclose(eta.c[:, 0] * r.params.n_ap * st.gamma[:, 0], 1.0)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_ue_passive_has_no_jamming(small, k):
    p = small.params
    a = sinr_ue(k, small.r, small.st, PowerAllocation(0, 0, 123.0), small.eta)
    b = sinr_ue(k, small.r, small.st, PowerAllocation.passive(), small.eta)
    assert a.js_s == a.js_c == 0
    assert a == b


def test_ue_without_reflection(small):
    r, st, eta = _setup(small.params, alpha=0.0)
    p = r.params
    alloc = PowerAllocation(0.4, 0.3, p.rho_pm)
    b = sinr_ue(1, r, st, alloc, eta)
    assert b.is_ == pytest.approx(p.rho_s * p.n_ap * np.sum(eta.s * r.beta_st_ue[:, 1] * r.zeta_st))
    assert b.js_s == pytest.approx(0.4 * p.rho_pm * r.beta_pm_ue[1])


def test_monitor_passive_terms_do_not_depend_on_rho(small):
    a = sinr_monitor(small.r, small.st, PowerAllocation(0, 0, 1.0), small.eta)
    b = sinr_monitor(small.r, small.st, PowerAllocation(0, 0, 1e9), small.eta)
    assert a.js_s == a.js_c == 0
    assert a == b


def test_monitor_single_user_has_no_iu():
    r, st, eta = _setup(reduced_params(m_c=1, k_ues=1))
    b = sinr_monitor(r, st, PowerAllocation.passive(), eta)
    assert b.iu == 0
    assert b.ds > 0 and b.bu > 0 and b.is_ > 0 and b.noise > 0


def test_cpu_passive(small):
    b = sinr_cpu(small.r, small.st, PowerAllocation(0, 0, 10.0), small.eta)
    assert b.js_s == b.js_c == 0
    assert b.sinr == pytest.approx(b.ds / (b.iu + b.noise))


def test_cpu_single_transmit_sap():
    r, st, eta = _setup(reduced_params(m_st=1))
    p = r.params
    b = sinr_cpu(r, st, PowerAllocation.passive(), eta)
    amp = np.sum(eta.s[0] * p.rho_s * r.zeta_st[0] ** 2 * r.zeta_sr * r.alpha * p.n_ap**3)
    assert np.sqrt(b.ds) == pytest.approx(amp)


def test_q_coefficients_reproduce_direct_forms(small, rng):
    p = small.params
    q = q_coefficients(small.r, small.st, small.eta, p.rho_pm)
    assert q.q9 / q.q12 == pytest.approx(sinr_cpu(small.r, small.st, PowerAllocation.passive(), small.eta).sinr, rel=1e-12)
    for _ in range(100):
        w = rng.dirichlet([1, 1, 1])
        alloc = PowerAllocation(w[0], w[1], p.rho_pm)
        mon = sinr_monitor(small.r, small.st, alloc, small.eta).sinr
        ue = sinr_ue(0, small.r, small.st, alloc, small.eta).sinr
        assert q.sinr_cpu(w[0], w[1]) == pytest.approx(sinr_cpu(small.r, small.st, alloc, small.eta).sinr, rel=1e-10)
        assert q.sinr_monitor(w[0], w[1]) == pytest.approx(mon, rel=1e-10)
        assert q.sinr_ue1(w[0], w[1]) == pytest.approx(ue, rel=1e-10)
        if abs(mon - ue) > 1e-9 * max(mon, ue):
            assert np.sign(q.monitoring_margin(w[0], w[1])) == np.sign(mon - ue)


def test_q_primed_scaling():
    q = QCoefficients(*range(1, 13), rho_pm=4.0)
    qp = q.primed()
    assert qp.rho_pm == 1.0
    assert (qp.q2, qp.q3, qp.q6, qp.q7, qp.q10, qp.q11) == (0.5, 0.75, 1.5, 1.75, 2.5, 2.75)
    assert qp.sinr_cpu(2.0, 1.0) == pytest.approx(q.sinr_cpu(0.5, 0.25))
    with pytest.raises(ValueError):
        QCoefficients(*([1.0] * 11 + [float("nan")]))


def test_cpu_limit_properties(full):
    r, st, eta = full.r, full.st, full.eta
    base = sinr_cpu(r, st, PowerAllocation.passive(), eta).sinr
    assert asymptotic_sinr_cpu_limit(r, st, eta, 0.0) == pytest.approx(base)
    vals = [asymptotic_sinr_cpu_limit(r, st, eta, P) for P in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_cpu_limit_convergence(full):
    p = full.params.replace(n_pm=2**14)
    r, st, eta = _setup(p)
    alloc = PowerAllocation(0.5, 0.5, 3.0 / p.noise_power / p.n_pm)
    lim = asymptotic_sinr_cpu_limit(r, st, eta, 3.0)
    assert sinr_cpu(r, st, alloc, eta).sinr == pytest.approx(lim, rel=0.01)
    for k in range(p.k_ues):
        assert sinr_ue(k, r, st, alloc, eta).sinr == pytest.approx(asymptotic_sinr_ue_limit(k, r, st, eta, 3.0), rel=0.02)
