import pytest

from deformed_multinomial.algebra import make_preset_algebra

PRESET_PARAMS = {
    "q-standard": (None, 0.5),
    "biedenharn-macfarlane": (None, 0.7),
    "jagannathan-srinivasa": (0.9, 0.5),
    "chakrabarty-jagannathan": (0.9, 0.5),
    "quesne": (0.9, 0.7),
}
# presets where tau2 < tau1, so second-kind trials stay valid for every n
DECREASING = ("q-standard", "jagannathan-srinivasa", "chakrabarty-jagannathan")


def preset(name, precision=None):
    p, q = PRESET_PARAMS[name]
    return make_preset_algebra(name, p, q, precision=precision)


@pytest.fixture(params=sorted(PRESET_PARAMS))
def any_algebra(request):
    return preset(request.param)


@pytest.fixture(params=DECREASING)
def decreasing_algebra(request):
    return preset(request.param)


@pytest.fixture
def qstd():
    return make_preset_algebra("q-standard", q=0.5)


@pytest.fixture
def js():
    return make_preset_algebra("jagannathan-srinivasa", 0.9, 0.5)
