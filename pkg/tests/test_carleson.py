import numpy as np
import pytest

from coronalab.ball import Tent, ball_of, in_tent_batch, set_measure
from coronalab.carleson import (
    MeasureField, StabilityReport, carleson_ratios, embedding_check, power_density, tent_mass,
    tent_rule,
)
from coronalab.quad import ball_rule
from coronalab.spaces import HardyNormParams, hardy_norm
from coronalab.fields import PolyHolo
from coronalab.weights import Weight

e1 = np.array([1.0, 0.0], complex)
light = dict(order=4, n_psi=6, n_xi=4)


def test_tent_rule_nodes_lie_in_the_tent():
    tent = Tent(ball_of(0.8 * e1), 1.0)
    rule = tent_rule(tent, 6, **light)
    assert len(rule) > 0 and np.all(in_tent_batch(rule.nodes, tent))


def test_tent_volume_agrees_with_global_rule():
    # a fat tent, so the global ball rule resolves it; the two estimates must be close
    tent = Tent(ball_of(0.3 * e1), 1.0)
    local = tent_mass(power_density(1.0, 2), tent, 10)
    glob = set_measure(tent, ball_rule(2, 14))
    assert local == pytest.approx(glob, rel=0.05)


def test_measure_rejects_negative_density():
    with pytest.raises(ValueError):
        MeasureField(lambda w: -np.ones(w.shape[:-1]), 2)(np.zeros((1, 2)))


def test_volume_measure_ratio_decays_toward_the_sphere():
    # nu(T(I_z)) ~ (1 - |z|^2) sigma(I_z)
    one = Weight.constant(2)
    pts = [0.9 * e1, 0.99 * e1]
    r = carleson_ratios(power_density(1.0, 2), one, pts, depth=8, **light)
    assert r[1] / r[0] == pytest.approx(0.1, rel=0.3)


def test_stability_report_flags():
    ok = StabilityReport(np.ones(3), np.ones(3), 1.0, 0.0)
    bad = StabilityReport(np.ones(3), np.ones(3), 30.0, 2.0)
    assert ok.stable() and not ok.divergent()
    assert bad.divergent() and not bad.stable()


def test_embedding_ratio_for_volume_measure():
    # the volume measure embeds H^2: the ratios stay within a bounded band
    one = Weight.constant(2)
    params = HardyNormParams(2.0, one)
    tests = [PolyHolo.parse(e, 2) for e in ("1", "z1", "z1*z2")]
    r = embedding_check(power_density(1.0, 2), one, 2.0, tests, lambda f: ball_rule(2, 10),
                        lambda f: hardy_norm(f, params))
    assert np.all(r > 0) and np.max(r) / np.min(r) < 10
