import importlib.resources as resources

import pytest

from tangleproof.genfunc import PolyBall


@pytest.fixture(scope="session")
def s_star():
    """The committed degree-20 fixed point (regenerable via the CLI)."""
    ref = resources.files("tangleproof") / "data" / "s_star_deg20.txt"
    return PolyBall.from_text(ref.read_text())


@pytest.fixture(scope="session")
def map_star(s_star):
    from tangleproof.maps import MapHandle

    return MapHandle(s_star)
