import json
from pathlib import Path

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from aspecttag.evaluation import (EvaluationError, conll_lines, conlleval_f1, decouple, evaluate,
                                  sentiment_class_f1, ttest_two_sided)

GOLDEN = Path(__file__).parent / "data" / "conlleval_golden.json"
AESC = ["O", "B-ASP+", "I-ASP+", "B-ASP-", "I-ASP-", "B-ASP0", "I-ASP0"]


class TestConlleval:
    def test_perfect(self):
        s = conlleval_f1([["B-ASP", "I-ASP", "O"]], [["B-ASP", "I-ASP", "O"]])
        assert (s.precision, s.recall, s.f1) == (100.0, 100.0, 100.0)

    def test_half(self):
        s = conlleval_f1([["B-ASP", "O", "B-ASP", "I-ASP"]], [["B-ASP", "O", "B-ASP", "O"]])
        assert (s.precision, s.recall, s.f1) == (50.0, 50.0, 50.0)

    def test_all_outside(self):
        s = conlleval_f1([["B-ASP", "O"]], [["O", "O"]])
        assert (s.recall, s.f1) == (0.0, 0.0)

    def test_length_mismatch_names_sentence(self):
        with pytest.raises(EvaluationError, match="sentence 1"):
            conlleval_f1([["O"], ["O", "O"]], [["O"], ["O"]])

    @pytest.mark.parametrize("mode", ["AE", "AESC"])
    def test_golden(self, mode):
        for case in json.loads(GOLDEN.read_text())[mode]:
            s = conlleval_f1(case["gold"], case["pred"])
            assert (s.precision, s.recall, s.f1) == (case["precision"], case["recall"], case["f1"])


class TestDecouple:
    def test_projection(self):
        ae, spans, dis = decouple(["B-ASP+", "I-ASP+", "O"])
        assert ae == ["B-ASP", "I-ASP", "O"] and spans == [(0, 2, "+")] and dis == 0

    def test_all_outside(self):
        assert decouple(["O", "O"]) == (["O", "O"], [], 0)

    def test_disagreement_counted(self):
        ae, spans, dis = decouple(["B-ASP-", "I-ASP+"])
        assert dis == 1
        assert spans == [(0, 1, "-"), (1, 2, "+")]
        assert ae == ["B-ASP", "B-ASP"]


class TestClassF1:
    def test_perfect(self):
        spans = [[(0, 1, "+"), (2, 4, "0")]]
        out = sentiment_class_f1(spans, spans)
        assert out["+"]["f1"] == 100.0 and out["0"]["f1"] == 100.0

    def test_wrong_polarity(self):
        out = sentiment_class_f1([[(0, 2, "+")]], [[(0, 2, "-")]])
        assert (out["-"]["predicted"], out["-"]["correct"]) == (1, 0)
        assert (out["+"]["gold"], out["+"]["correct"]) == (1, 0)
        assert out["+"]["f1"] == out["-"]["f1"] == 0.0

    def test_missing_class(self):
        out = sentiment_class_f1([[(0, 1, "-"), (2, 3, "+")]], [[(2, 3, "+")]])
        assert out["-"]["f1"] == 0.0 and out["+"]["f1"] == 100.0


class TestReport:
    def test_ae(self):
        r = evaluate([["B-ASP", "O"]], [["B-ASP", "O"]], "AE")
        assert r.single_f1 == r.joint_f1 == r.f1 == 100.0
        assert "F1" in r.table()

    def test_aesc(self):
        r = evaluate([["B-ASP+", "I-ASP+", "O", "B-ASP-"]], [["B-ASP+", "I-ASP+", "O", "B-ASP0"]], "AESC")
        assert r.single_f1 == 100.0 and r.joint_f1 == 50.0
        assert r.per_class["-"]["f1"] == 0.0
        assert json.loads(r.to_json())["joint_f1"] == 50.0
        assert "Classification" in r.table()

    @given(st.lists(st.integers(1, 10), min_size=1, max_size=6).flatmap(
        lambda ns: st.tuples(*[st.tuples(st.lists(st.sampled_from(AESC), min_size=n, max_size=n),
                                         st.lists(st.sampled_from(AESC), min_size=n, max_size=n)) for n in ns])))
    def test_joint_never_exceeds_single(self, pairs):
        r = evaluate([g for g, _ in pairs], [p for _, p in pairs], "AESC")
        assert r.joint_f1 <= r.single_f1

    def test_conll_lines(self):
        assert conll_lines(["a", "b"], ["B-ASP", "O"], ["O", "O"]) == ["a\tB-ASP\tO", "b\tO\tO"]


def mp_welch_p(a, b):
    """Two-sided Welch p-value by direct integration of the t density."""
    with mpmath.workdps(40):
        a = [mpmath.mpf(x) for x in a]
        b = [mpmath.mpf(x) for x in b]
        ma, mb = sum(a) / len(a), sum(b) / len(b)
        va = sum((x - ma) ** 2 for x in a) / (len(a) - 1) / len(a)
        vb = sum((x - mb) ** 2 for x in b) / (len(b) - 1) / len(b)
        t = (ma - mb) / mpmath.sqrt(va + vb)
        df = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
        pdf = lambda x: mpmath.gamma((df + 1) / 2) / (mpmath.sqrt(df * mpmath.pi) * mpmath.gamma(df / 2)) \
            * (1 + x * x / df) ** (-(df + 1) / 2)
        return float(2 * mpmath.quad(pdf, [abs(t), mpmath.inf]))


class TestTtest:
    def test_identical(self):
        r = ttest_two_sided([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
        assert r.t == 0.0 and r.p == 1.0

    def test_reference_pair(self):
        a = [70.1, 71.3, 69.8, 70.5, 70.9]
        b = [72.0, 72.5, 71.8, 72.2, 72.6]
        r = ttest_two_sided(a, b)
        assert round(r.p, 4) == round(mp_welch_p(a, b), 4)
        assert abs(r.p - sps.ttest_ind(a, b, equal_var=False).pvalue) < 1e-12

    def test_zero_variance(self):
        same = ttest_two_sided([3, 3, 3], [3, 3, 3])
        diff = ttest_two_sided([3, 3, 3], [4, 4, 4])
        assert (same.p, same.degenerate) == (1.0, True)
        assert (diff.p, diff.degenerate) == (0.0, True)

    def test_too_small(self):
        with pytest.raises(ValueError):
            ttest_two_sided([1], [2, 3])
