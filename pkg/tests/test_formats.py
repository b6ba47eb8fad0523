import numpy as np
import pytest

from treeid import formats
from treeid.estimation import pulse_input, simulate
from treeid.oracle import indistinguishable, search_counterexample
from treeid.recovery import recover_weights
from treeid.system import MarkovSequence, build_system, markov_parameters


def test_markov_csv_round_trip(t1):
    q = markov_parameters(build_system(t1, [4, 1, 3]))
    text = formats.markov_to_csv(q)
    assert text.splitlines()[0] == "j,Q_1,Q_3,Q_4"
    assert text.splitlines()[1] == "0,1.0,0.0,0.0"
    back = formats.markov_from_csv(text)
    assert back.sensors == (1, 3, 4)
    np.testing.assert_array_equal(back.values, q.values)


def test_markov_csv_exact_bits():
    q = MarkovSequence((2,), np.array([[0.1 + 0.2], [1e-300], [-3.141592653589793]]))
    back = formats.markov_from_csv(formats.markov_to_csv(q))
    np.testing.assert_array_equal(back.values, q.values)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("", "empty"),
        ("k,Q_1\n0,1\n", "header"),
        ("j,Y_1\n0,1\n", "column name"),
        ("j,Q_3,Q_1\n0,1,0\n", "ascending"),
        ("j,Q_1\n0,1\n2,1\n", "without gaps"),
        ("j,Q_1\n0,1,2\n", "fields"),
        ("j,Q_1\n0,abc\n", "non-numeric"),
        ("j,Q_1\n", "no Markov rows"),
    ],
)
def test_markov_csv_errors(text, fragment):
    with pytest.raises(formats.FormatError, match=fragment):
        formats.markov_from_csv(text)


def test_record_csv_round_trip(t1):
    rec = simulate(build_system(t1, [1, 3, 4]), pulse_input(30, 0.01), 0.01)
    text = formats.record_to_csv(rec)
    assert text.splitlines()[0] == "t,u,y_1,y_3,y_4"
    back = formats.record_from_csv(text)
    assert back.dt == rec.dt and back.sensors == (1, 3, 4)
    np.testing.assert_array_equal(back.y, rec.y)
    np.testing.assert_array_equal(back.u, rec.u)
    assert formats.record_to_csv(back) == text


def test_record_csv_bad_time():
    with pytest.raises(formats.FormatError, match="time column"):
        formats.record_from_csv("t,u,y_1\n0.0,1,0\n0.1,0,1\n0.3,0,1\n")


def test_format_recovered(t1):
    q = markov_parameters(build_system(t1, [1, 3, 4]))
    text = formats.format_recovered(recover_weights(t1, None, q))
    lines = text.splitlines()
    assert len(lines) == 6
    assert lines[0].startswith("edge 1 2 ")
    assert lines[-1].startswith("residual ")


def test_format_report(star3):
    cex = search_counterexample(star3, star3.weights, [1, 2], attempts=1)
    rep = indistinguishable(star3, star3.weights, cex.weights, [1, 2])
    text = formats.format_report(rep, cex, star3.edges)
    assert "verdict: indistinguishable" in text
    assert "edge 1 3 3.0" in text and "edge 1 4 2.0" in text
