import pytest
from hypothesis import given, strategies as st

from crowddtn.engine import run
from crowddtn.metrics import (
    METRIC_COLUMNS,
    Event,
    EventKind,
    EventLog,
    compute_report,
    delivered_per_destination,
    delivery_probability,
    latency_avg,
    messages_per_destination,
    overhead_ratio,
)
from crowddtn.scenario import RouterKind, ScenarioConfig

C, R, D = EventKind.CREATE, EventKind.RELAY, EventKind.DELIVER


def make_log(records):
    log = EventLog()
    for rec in sorted(records, key=lambda r: r[0]):
        log.append(*rec)
    return log


def synthetic(created, delivered, extra_relays=0):
    """``created`` messages at t=0; the first ``delivered`` reach node 1 at t=10+i."""
    recs = [(0.0, C, m, 0, 1) for m in range(created)]
    for m in range(delivered):
        recs += [(10.0 + m, R, m, 0, 1), (10.0 + m, D, m, 0, 1)]
    recs += [(5.0, R, 0, 0, 2)] * extra_relays
    return make_log(recs)


class TestDeliveryProbability:
    def test_three_of_four(self):
        assert delivery_probability(synthetic(4, 3)) == 0.75

    def test_all(self):
        assert delivery_probability(synthetic(5, 5)) == 1.0

    def test_nothing_created_is_flagged(self):
        report = compute_report(EventLog(), 10)
        assert report.delivery_probability == 0.0 and report.degenerate

    def test_duplicate_delivery_counts_once(self):
        log = make_log([(0, C, 0, 0, 1), (3, R, 0, 0, 1), (3, D, 0, 0, 1), (8, R, 0, 2, 1), (8, D, 0, 2, 1)])
        assert delivery_probability(log) == 1.0
        assert latency_avg(log) == 3.0


class TestOverhead:
    def test_thirty_relays_ten_deliveries(self):
        log = synthetic(10, 10, extra_relays=20)
        assert log.count(R) == 30 and log.count(D) == 10
        assert overhead_ratio(log) == 2.0

    def test_every_relay_a_delivery(self):
        assert overhead_ratio(synthetic(3, 3)) == 0.0

    def test_undefined_without_deliveries(self):
        log = synthetic(3, 0, extra_relays=5)
        assert overhead_ratio(log) is None
        assert compute_report(log, 3).overhead_ratio is None


class TestLatency:
    def test_single(self):
        assert latency_avg(make_log([(0, C, 0, 0, 1), (12, R, 0, 0, 1), (12, D, 0, 0, 1)])) == 12.0

    def test_mean(self):
        log = make_log([(0, C, 0, 0, 1), (0, C, 1, 0, 2), (10, D, 0, 0, 1), (20, D, 1, 0, 2)])
        assert latency_avg(log) == 15.0

    def test_undefined(self):
        assert latency_avg(synthetic(2, 0)) is None


class TestPerDestination:
    @pytest.mark.parametrize("created,audience,expected", [(450, 100, 4.5), (0, 5, 0.0), (288, 1000, 0.288)])
    def test_ratio(self, created, audience, expected):
        assert messages_per_destination(synthetic(created, 0), audience) == expected

    def test_delivered_per_destination(self):
        assert delivered_per_destination(synthetic(10, 4), 8) == 0.5


class TestEventLog:
    def test_rejects_time_travel(self):
        log = EventLog()
        log.append(5.0, C, 0, 0, 1)
        with pytest.raises(ValueError):
            log.append(4.0, C, 1, 0, 1)

    def test_line_format(self):
        assert Event(600.0, EventKind.DROP_TTL, 7, 3).to_line() == "600.0,DROP_TTL,7,3,"
        assert Event.from_line("1.5,RELAY,2,0,4\n") == Event(1.5, R, 2, 0, 4)

    @pytest.mark.parametrize("kind", list(RouterKind))
    def test_report_survives_trace_round_trip(self, kind):
        cfg = ScenarioConfig(audience_count=25, sim_duration=1200, buffer_capacity=6000, router_kind=kind)
        log = run(cfg)
        again = EventLog.loads(log.dumps())
        assert again.events == log.events
        assert compute_report(again, 25) == compute_report(log, 25)


def test_report_row_has_metric_columns():
    row = compute_report(synthetic(4, 3), 2).metric_row()
    assert tuple(row) == METRIC_COLUMNS and len(row) == 7


workloads = st.lists(
    st.tuples(st.integers(0, 3), st.booleans(), st.integers(1, 50)),
    min_size=1,
    max_size=30,
)


def _from_workload(items, offset=0):
    recs = []
    for m, (extra, delivered, delay) in enumerate(items):
        mid = m + offset
        recs.append((0.0, C, mid, 0, 1))
        recs += [(1.0, R, mid, 0, 2)] * extra
        if delivered:
            recs += [(float(delay), R, mid, 2, 1), (float(delay), D, mid, 2, 1)]
    return recs


@given(workloads)
def test_identities(items):
    log = make_log(_from_workload(items))
    report = compute_report(log, 7)
    assert 0.0 <= report.delivery_probability <= 1.0
    assert report.delivered_unique <= report.created
    assert report.delivery_probability * report.created == pytest.approx(report.delivered_unique, abs=0)
    assert report.messages_per_destination == report.created / 7
    assert report.copies_created == report.created + report.relays - report.delivered_unique


@given(workloads)
def test_overhead_is_scale_free(items):
    single = make_log(_from_workload(items))
    doubled = make_log(_from_workload(items) + _from_workload(items, offset=len(items)))
    a, b = overhead_ratio(single), overhead_ratio(doubled)
    assert (a is None) == (b is None)
    if a is not None:
        assert b == pytest.approx(a, rel=1e-12)
