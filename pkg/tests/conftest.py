import pytest

from runnercover.conditions import make_profile
from runnercover.covertab import admissible_candidates, build_table, make_params


@pytest.fixture(scope="session")
def instance():
    """Builder for (params, profile, table, candidates), cached per session."""
    cache = {}

    def build(k, d, c, mode):
        key = (k, d, c, mode)
        if key not in cache:
            params = make_params(k, d, c)
            profile = make_profile(params, mode)
            table = build_table(params)
            cands = admissible_candidates(params, profile)
            cache[key] = (params, profile, table, cands)
        return cache[key]

    return build
