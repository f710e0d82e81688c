import numpy as np
import pytest

import glrtlab as g


@pytest.fixture
def fig2_instance():
    """d=20, 10% strong coordinates: the error-vs-attack-strength setup."""
    tpl = g.TwoLevelTemplate(d=20, p=0.1, a=1.1, b=0.9, eps_des=1.0)
    return g.BinaryInstance(mu=g.build_two_level_template(tpl),
                            sigma=1.0, eps_des=1.0)


@pytest.fixture
def fig3_template():
    """d=20, 30% strong coordinates: the predicted-error-vs-noise setup."""
    return g.TwoLevelTemplate(d=20, p=0.3, a=1.1, b=0.9, eps_des=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
