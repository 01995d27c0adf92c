from hypothesis import given, settings, strategies as st

from clearance.simnet import load_scenario, ReplayMessage, run_scenario

from ..utils import SCENARIOS

REQUESTS = 3

replays = st.lists(st.builds(ReplayMessage,
                             seq=st.integers(0, 4 * REQUESTS + 3),
                             delay=st.integers(0, 600)),
                   max_size=6)


def counter_scenario():
    doc = load_scenario(SCENARIOS / 'honest.json')
    hit = {'action': 'request', 'user': 'alice', 'server': 'S', 'resource': 'hits',
           'expect': 'ok'}
    doc['steps'] = [dict(hit, expect_answer=str(i + 1)) for i in range(REQUESTS)] + [
        {'action': 'assert_counter', 'server': 'S', 'resource': 'hits', 'value': REQUESTS},
    ]
    return doc


DOC = counter_scenario()


@settings(max_examples=100)
@given(replays)
def test_counter_counts_honest_requests_only(schedule):
    report = run_scenario(DOC, adversary=schedule)
    assert report.ok, [s.to_dict() for s in report.mismatches()]
    assert report.steps[-1].outcome == str(REQUESTS)
