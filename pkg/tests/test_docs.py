import doctest

import wiretap.estimator


def test_estimator_doctest():
    result = doctest.testmod(wiretap.estimator)
    assert result.attempted > 0 and result.failed == 0
