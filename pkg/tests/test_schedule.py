import warnings

import numpy as np
import pytest

from annealbench.schedule import (K_B_GHZ_PER_MK, AnnealFunctions, Schedule, anneal_functions,
                                  build_schedule, classify_regimes, load_schedule, regimes, scales,
                                  synthetic_dw2k, synthetic_dwa)
from annealbench.validation import ContractError


def linear_functions(kT=0.25, n=401):
    s = np.linspace(0, 1, n)
    return AnnealFunctions(tuple(s), tuple(1 - s), tuple(s), kT / K_B_GHZ_PER_MK, "linear")


class TestSchedule:
    def test_linear(self):
        sch = build_schedule(1.0)
        assert sch.breakpoints == ((0.0, 0.0), (1.0, 1.0))
        assert sch.t_tot == 1.0

    def test_pause(self):
        sch = build_schedule(1.0, (0.4, 0.2))
        assert sch.s_at(0.4) == pytest.approx(0.4)
        assert sch.s_at(0.6) == pytest.approx(0.4)
        assert sch.s_at(1.2) == pytest.approx(1.0)
        assert sch.t_tot == pytest.approx(1.2)
        assert sch.pause() == pytest.approx((0.4, 0.2))

    def test_too_short(self):
        with pytest.raises(ContractError):
            build_schedule(0.5)

    @pytest.mark.parametrize("t_a,sp,tp", [(1, 0.3, 0.2), (2, 0.5, 1.0), (5, 0.45, 0.0), (1, 0.9, 3)])
    def test_builder_output_valid(self, t_a, sp, tp):
        sch = build_schedule(t_a, (sp, tp))
        assert sch.violations() == []
        assert sch.t_tot == pytest.approx(t_a + tp)

    def test_validator_rejects(self):
        with pytest.raises(ContractError):
            Schedule(((0, 0), (0.5, 0.6), (1, 0.5), (2, 1)))
        with pytest.raises(ContractError):
            Schedule(((0, 0), (0.5, 1)))

    def test_csv_round_trip(self, tmp_path):
        sch = build_schedule(1.0, (0.4, 0.2))
        p = tmp_path / "s.csv"
        p.write_text(sch.to_csv())
        assert load_schedule(p).breakpoints == sch.breakpoints


class TestScales:
    def test_linear_half(self):
        s, Q, C = scales(linear_functions())
        k = np.argmin(np.abs(s - 0.5))
        assert Q[k] == pytest.approx(1.0)
        assert C[k] == pytest.approx(0.5)

    def test_zero_temperature(self):
        f = linear_functions().with_temperature(0.0)
        assert np.all(scales(f)[2] == 0)

    def test_dw2k_temperature(self):
        assert synthetic_dw2k().temperature_mK == 12.1
        assert anneal_functions("dw2k").name == synthetic_dw2k().name

    def test_csv_round_trip(self, tmp_path):
        f = synthetic_dwa(21)
        p = tmp_path / "f.csv"
        p.write_text(f.to_csv())
        g = anneal_functions(str(p))
        np.testing.assert_allclose(g.A, f.A)
        assert g.temperature_mK == f.temperature_mK

    def test_monotonicity_checked(self):
        with pytest.raises(ContractError):
            AnnealFunctions((0, 0.5, 1), (1, 0.2, 0.5), (0, 0.5, 1), 10.0)


class TestRegimes:
    def test_linear_crossing(self):
        # (1 - s) / s = 0.25 / s solves to s = 0.75
        rep = regimes(linear_functions())
        assert rep.s_star == pytest.approx(0.75, abs=1e-9)

    def test_infinite_threshold(self):
        rep = classify_regimes(*scales(linear_functions()), rho=np.inf)
        assert set(rep.labels) == {"II"}

    def test_faster_decay_crosses_earlier(self):
        assert regimes(synthetic_dwa()).s_star < regimes(synthetic_dw2k()).s_star

    def test_labels_ordered(self):
        rep = regimes(linear_functions())
        order = {"I": 0, "II": 1, "III": 2}
        ranks = [order[x] for x in rep.labels]
        assert ranks == sorted(ranks)
