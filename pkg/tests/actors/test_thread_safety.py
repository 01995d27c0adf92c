import random
import threading
import time
from typing import Callable, List

from clearance.core import FailureCode, Grant, ProtocolFailure, use_limit
from clearance.actors import ResourceKind
from .test_center import blob
from ..utils import Deployment

BUDGET = 100


class ThreadSafetyTest:
    n_threads = 8

    @classmethod
    def run(cls, target: Callable[[int], object], n_threads=None):
        threads = [threading.Thread(target=target, args=(i,))
                   for i in range(n_threads or cls.n_threads)]

        for thread in threads:
            thread.start()

        for thread in threads:
            thread.join()

    @staticmethod
    def random_delay(a=0.001, b=None):
        b = b or a
        time.sleep(a + b * random.random())


def test_concurrent_commits_never_overdraw():
    d = Deployment()
    read = d.ticket('read')
    d.agree({'staff': [Grant(read, [use_limit(BUDGET)])]})
    alice = d.user('alice', ['staff'])
    clearance = blob(d, alice)
    committed: List[int] = []
    exhausted: List[int] = []

    def worker(i: int) -> None:
        for _ in range(20):
            decision = d.center.decide(d.server.id, clearance, frozenset({read.token}), d.now)
            if decision.failure is not None:
                assert decision.failure.code is FailureCode.DEBIT_EXHAUSTED
                exhausted.append(i)
                continue
            ThreadSafetyTest.random_delay()
            result = d.center.debit_commit(decision.grant.correlator, 1, d.now)
            if result.failure is None:
                committed.append(i)
            else:
                assert result.failure.code is FailureCode.DEBIT_EXHAUSTED
                exhausted.append(i)

    ThreadSafetyTest.run(worker)

    assert len(committed) == BUDGET
    assert len(committed) + len(exhausted) == 8 * 20
    assert list(d.center.ledger().values()) == [0]


def test_concurrent_requests_are_served_once_per_use():
    d = Deployment(direct=True)
    counter = d.resource('hits', ResourceKind.COUNTER)
    read = d.ticket('read')
    d.allow(read, counter)
    d.agree({'staff': [Grant(read, [use_limit(30)])]})
    users = [d.user(f'user{i}', ['staff']) for i in range(ThreadSafetyTest.n_threads)]
    served: List[bytes] = []
    denied: List[FailureCode] = []

    def worker(i: int) -> None:
        for _ in range(6):
            try:
                served.append(d.request(users[i], counter))
            except ProtocolFailure as e:
                denied.append(e.code)

    ThreadSafetyTest.run(worker)

    assert len(served) == 30
    assert sorted(int(s) for s in served) == list(range(1, 31))
    assert d.server.counter(counter) == 30
    assert set(denied) <= {FailureCode.DEBIT_EXHAUSTED}
    assert len(denied) == 8 * 6 - 30
