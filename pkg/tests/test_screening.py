import io

import numpy as np
import pytest

from gclm.errors import DomainError, ParseError
from gclm.moments import SummaryCalculator
from gclm.screening import (DataMatrix, bottom_k, export_marginal_plot_data,
                            load_matrix, ranked_list_to_tsv, screen)

TOY = "id\ts1\ts2\ts3\ts4\ng1\t1\t2\t3\t4\ng2\t5\t6\t7\t8\ng3\t9\t10\t11\t12\n"


def make_matrix(values, prefix="v"):
    values = np.asarray(values, dtype=float)
    ids = tuple(f"{prefix}{i:03d}" for i in range(values.shape[0]))
    samples = tuple(f"s{j}" for j in range(values.shape[1]))
    return DataMatrix(ids, samples, values, np.zeros_like(values, dtype=bool))


def fast_calculator():
    return SummaryCalculator(bias_replicates=1000, use_cache=False)


class TestLoadMatrix:
    def test_toy_dimensions(self):
        m = load_matrix(io.StringIO(TOY))
        assert (m.p, m.n) == (3, 4)
        assert m.variable_ids == ("g1", "g2", "g3")

    def test_na_cell_becomes_missing(self):
        text = TOY.replace("g2\t5", "g2\tNA")
        m = load_matrix(io.StringIO(text))
        assert m.missing[1, 0]
        assert not m.missing[0, 0]
        np.testing.assert_array_equal(m.row_values("g2"), [6.0, 7.0, 8.0])

    def test_duplicate_id_rejected(self):
        text = TOY.replace("g3", "g1")
        with pytest.raises(ParseError, match="g1"):
            load_matrix(io.StringIO(text))

    def test_ragged_row_rejected(self):
        with pytest.raises(ParseError, match="line 3"):
            load_matrix(io.StringIO("id\ts1\ts2\ng1\t1\t2\ng2\t3\n"))

    def test_empty_file_rejected(self):
        with pytest.raises(ParseError):
            load_matrix(io.StringIO(""))

    def test_custom_delimiter(self):
        m = load_matrix(io.StringIO(TOY.replace("\t", ",")), delimiter=",")
        assert m.p == 3


class TestScreen:
    def test_planted_skew_found(self):
        rng = np.random.default_rng(17)
        values = rng.standard_normal((100, 200))
        values[42] = -rng.exponential(size=200)
        m = make_matrix(values)
        ranked = screen(m, ["l_skewness"], direction="ascending",
                        calculator=fast_calculator())["l_skewness"]
        assert ranked.entries[0][0] == "v042"

    def test_thread_count_invariance(self):
        rng = np.random.default_rng(18)
        m = make_matrix(rng.standard_normal((30, 60)))
        calc = fast_calculator()
        a = screen(m, ["skewness", "hl_kurtosis"], calculator=calc, threads=1)
        b = screen(m, ["skewness", "hl_kurtosis"], calculator=calc, threads=8)
        for stat in a:
            assert ranked_list_to_tsv(a[stat]) == ranked_list_to_tsv(b[stat])

    def test_excluded_accounting(self):
        rng = np.random.default_rng(19)
        values = rng.standard_normal((10, 40))
        values[3] = 1.0  # constant: no scale
        m = make_matrix(values)
        ranked = screen(m, ["l_skewness"], calculator=fast_calculator())["l_skewness"]
        assert len(ranked.entries) + len(ranked.excluded) == m.p
        assert ranked.excluded[0][0] == "v003"

    def test_affine_invariance_of_order(self):
        rng = np.random.default_rng(20)
        values = rng.exponential(size=(20, 80))
        calc = fast_calculator()
        base = screen(make_matrix(values), ["skewness"], calculator=calc)
        moved = screen(make_matrix(3.0 * values + 7.0), ["skewness"],
                       calculator=calc)
        assert base["skewness"].variable_ids == moved["skewness"].variable_ids

    def test_negation_reverses_skewness_order(self):
        rng = np.random.default_rng(21)
        values = rng.exponential(size=(15, 60))
        calc = fast_calculator()
        pos = screen(make_matrix(values), ["l_skewness"], calculator=calc)
        neg = screen(make_matrix(-values), ["l_skewness"], calculator=calc)
        assert pos["l_skewness"].variable_ids == neg["l_skewness"].variable_ids[::-1]

    def test_unknown_statistic(self):
        m = make_matrix(np.random.default_rng(0).standard_normal((5, 20)))
        with pytest.raises(DomainError, match="unknown"):
            screen(m, ["not_a_stat"])


class TestBottomK:
    def ranked(self):
        rng = np.random.default_rng(22)
        m = make_matrix(rng.standard_normal((12, 40)))
        return screen(m, ["skewness"], calculator=fast_calculator())["skewness"]

    def test_seven_entries_nondecreasing(self):
        sel = bottom_k(self.ranked(), 7)
        metrics = [m for _, m in sel]
        assert len(sel) == 7
        assert metrics == sorted(metrics)

    def test_zero_and_full(self):
        r = self.ranked()
        assert bottom_k(r, 0) == ()
        assert len(bottom_k(r, len(r.entries))) == len(r.entries)

    def test_k_too_large(self):
        with pytest.raises(DomainError):
            bottom_k(self.ranked(), 999)


class TestMarginalPlotData:
    def test_mixture_identity(self):
        rng = np.random.default_rng(23)
        values = np.concatenate([rng.normal(-2, 1, 100),
                                 rng.normal(3, 1, 100)])[None, :]
        m = make_matrix(values)
        labels = ["a"] * 100 + ["b"] * 100
        doc = export_marginal_plot_data(m, ["v000"], labels=labels)
        var = doc["variables"][0]
        total = np.asarray(var["density"])
        parts = sum(np.asarray(c["sub_density"]) for c in var["classes"])
        assert np.max(np.abs(total - parts)) <= 0.02 * np.max(total)

    def test_single_class_equals_overall(self):
        rng = np.random.default_rng(24)
        m = make_matrix(rng.standard_normal((1, 80)))
        doc = export_marginal_plot_data(m, ["v000"], labels=["x"] * 80)
        var = doc["variables"][0]
        np.testing.assert_allclose(var["classes"][0]["sub_density"],
                                   var["density"], atol=1e-12)

    def test_density_normalized(self):
        rng = np.random.default_rng(25)
        m = make_matrix(rng.standard_normal((1, 817)))
        var = export_marginal_plot_data(m, ["v000"])["variables"][0]
        integral = np.trapezoid(var["density"], var["grid"])
        assert integral == pytest.approx(1.0, abs=0.01)

    def test_unknown_variable(self):
        m = make_matrix(np.zeros((2, 20)))
        with pytest.raises(DomainError, match="unknown variable"):
            export_marginal_plot_data(m, ["nope"])
