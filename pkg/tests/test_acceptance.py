"""One test per acceptance criterion; tolerances live in tfdecay.suite."""
import pytest

from tfdecay.suite import CRITERIA

TITLES = {
    1: "coefficient_closed_forms",
    2: "pl_sandwich",
    3: "young_conjugate",
    4: "hermite_engine",
    5: "bargmann_stft_identity",
    6: "t2_chain",
    7: "gi_dichotomy",
    8: "counterexample_t_a",
    9: "log_case_closure",
    10: "property_suites",
}


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=[f"{k}-{TITLES[k]}" for k in sorted(CRITERIA)])
def test_criterion(number, acceptance_log):
    res = CRITERIA[number]()
    acceptance_log.append(res.headline())
    print(res.report())
    assert res.passed, res.report()
