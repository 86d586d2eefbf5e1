import numpy as np
import pytest

from affgen import Metric
from affgen.config import euler_top_integrals, load_scenario
from affgen.dynamics import (
    DriftReport,
    Scenario,
    Trajectory,
    audit,
    cumulative_simpson,
    integrate,
    perturb,
    rk4_step,
    synthesize,
)
from affgen.errors import DomainError, IntegrationDivergedError, RankDeficiencyError
from affgen.riemann import MetricField, ScalarField, VectorFieldHandle

HALF_SQ2 = ScalarField(2, [(0.5, (2, 0)), (0.5, (0, 2))])
MINUS_SQ2 = ScalarField(2, [(-1, (2, 0)), (-1, (0, 2))])


def damped(rate=MINUS_SQ2, **kw):
    base = dict(dim=2, metric=MetricField.identity(2), dissipated=(HALF_SQ2,), rates=(rate,), x0=(1.0, 0.0))
    base.update(kw)
    return Scenario(**base)


def linear(a):
    return VectorFieldHandle(len(a), lambda x: -np.asarray(a) * x, "decay")


def test_damped_radial_field_is_minus_x(rng):
    X = synthesize(damped())
    for x in rng.normal(size=(5, 2)):
        np.testing.assert_allclose(X(x), -x, atol=1e-14)


def test_synthesize_zero_parts_gives_zero_field():
    sc = damped(rate=ScalarField.zero(2))
    np.testing.assert_array_equal(synthesize(sc)([0.5, 2]), [0, 0])
    with pytest.raises(RankDeficiencyError):
        synthesize(sc)([0, 0])


def test_euler_top_perturbation_dissipates_only_d():
    I1, I2 = euler_top_integrals()
    base = synthesize(load_scenario("euler-top"))
    # conserve I1, dissipate I2 at rate -I2: the base field conserves both
    sc = Scenario(3, Metric.identity(3), conserved=(I1,), dissipated=(I2,), rates=(-I2,), x0=(1.0, 1.0, 1.0))
    X = perturb(base, sc)
    for x in [(1.0, 0.3, -0.4), (0.2, 1.0, 0.7)]:
        v = X(x)
        assert abs(v @ I1.gradient(x)) < 1e-12
        assert v @ I2.gradient(x) == pytest.approx(-I2(x), abs=1e-12)
    flat = Scenario(3, Metric.identity(3), conserved=(I1,), dissipated=(I2,), rates=(ScalarField.zero(3),), x0=(1, 1, 1))
    traj = integrate(perturb(base, flat), flat.x0, 1e-3, 500, flat)
    assert audit(traj, flat).worst() < 1e-9


def test_perturb_zero_base_equals_synthesize():
    sc = damped()
    a = perturb(VectorFieldHandle.zero(2), sc)
    np.testing.assert_allclose(a([0.3, 0.4]), synthesize(sc)([0.3, 0.4]))


def test_rk4_linear_decay_accuracy():
    traj = integrate(linear([1.0]), [1.0], 1e-3, 1000)
    assert abs(traj.states[-1, 0] - np.exp(-1)) < 1e-10
    assert traj.times[-1] == pytest.approx(1.0)


def test_rk4_fourth_order():
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        x = integrate(linear([1.0]), [1.0], dt, round(1 / dt)).states[-1, 0]
        errs.append(abs(x - np.exp(-1)))
    for coarse, fine in zip(errs, errs[1:]):
        assert 8 <= coarse / fine <= 32


def test_rk4_step_is_exact_for_constant_field():
    f = VectorFieldHandle.constant([1.0, -2.0])
    np.testing.assert_allclose(rk4_step(f, np.zeros(2), 0.5), [0.5, -1.0])


def test_zero_field_constant_trajectory():
    traj = integrate(VectorFieldHandle.zero(3), [1, 2, 3], 0.1, 10)
    assert np.all(traj.states == [1, 2, 3])


def test_divergence_carries_partial_trajectory():
    blowup = VectorFieldHandle(1, lambda x: x**2 * 1e10, "blowup")
    with pytest.raises(IntegrationDivergedError) as info:
        integrate(blowup, [1e100], 1.0, 50)
    err = info.value
    assert err.step >= 1
    assert len(err.partial) == err.step
    assert np.all(np.isfinite(err.partial.states))


def test_integrate_validates_arguments():
    f = VectorFieldHandle.zero(2)
    with pytest.raises(DomainError):
        integrate(f, [0, 0], 0.0, 10)
    with pytest.raises(DomainError):
        integrate(f, [0, 0, 0], 0.1, 10)


def test_cumulative_simpson():
    t = np.linspace(0, 1, 11)
    out = cumulative_simpson(t**2, 0.1)
    np.testing.assert_allclose(out[::2], t[::2] ** 3 / 3, atol=1e-15)
    # odd node count closes with one trapezoid
    assert out[1] == pytest.approx(0.5 * 0.1 * 0.01)
    np.testing.assert_allclose(cumulative_simpson(np.ones((4, 2)), 0.5)[-1], [1.5, 1.5])


def test_audit_damped_radial():
    sc = damped()
    traj = integrate(synthesize(sc), sc.x0, 1e-3, 1000, sc)
    D = traj.dissipated[:, 0]
    assert D[-1] == pytest.approx(D[0] * np.exp(-2), abs=1e-6)
    rep = audit(traj, sc)
    assert rep.conservation == ()
    assert rep.dissipation[0] < 1e-6
    assert rep.passed(1e-6)


def test_audit_detects_corruption():
    sc = damped()
    traj = integrate(synthesize(sc), sc.x0, 1e-3, 100, sc)
    states = traj.states.copy()
    states[50] *= 1.01
    rep = audit(Trajectory(traj.times, states), sc)
    assert rep.dissipation[0] > 1e-3
    assert not rep.passed(1e-6)


def test_audit_single_step_zero_field():
    sc = damped(rate=ScalarField.zero(2))
    traj = integrate(synthesize(sc), sc.x0, 1e-3, 1, sc)
    assert audit(traj, sc).worst() == 0.0


def test_drift_report_format():
    text = DriftReport((1e-9,), (2e-3,)).format(1e-6)
    assert "I_1" in text and "D_1" in text and "FAIL" in text


def test_scenario_validation():
    with pytest.raises(DomainError):
        damped(x0=(1.0,))
    with pytest.raises(DomainError):
        damped(rates=())
    with pytest.raises(RankDeficiencyError):
        damped(x0=(0.0, 0.0))
    with pytest.raises(DomainError):
        damped(direction_coeffs=(ScalarField.constant(2, 1.0),) * 2)
