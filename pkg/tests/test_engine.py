import statistics

import pytest

from hbds.config import desk_profile
from hbds.engine import prepare_environment, run
from hbds.ledger import audit_trace
from hbds.metrics import compute_metrics, parse_trace_line
from hbds.model import Role


def quick_cfg(**kw):
    base = dict(n_terminal_nodes=20, n_relay_nodes=1, sim_duration=3600.0,
                rng_seed=3, protocol="HBDS")
    base.update(kw)
    return desk_profile(**base)


@pytest.fixture(scope="module")
def hbds_run():
    cfg = quick_cfg(selfish_fraction=0.3)
    return cfg, run(cfg)


class TestBasicRuns:
    def test_no_packets_means_zero_counts(self):
        cfg = quick_cfg(sim_duration=10.0)   # shorter than the first interval draw
        result = run(cfg)
        m = result.metrics
        assert m.packets_created == m.packets_delivered == m.packets_dropped == 0
        assert m.overhead_ratio is None

    def test_same_seed_byte_identical_trace(self):
        cfg = quick_cfg(selfish_fraction=0.4)
        a = run(cfg)
        b = run(cfg)
        assert a.trace_text() == b.trace_text()
        assert a.metrics == b.metrics

    def test_different_seeds_differ(self):
        a = run(quick_cfg(rng_seed=1))
        b = run(quick_cfg(rng_seed=2))
        assert a.trace_text() != b.trace_text()

    def test_backends_produce_identical_traces(self):
        pytest.importorskip("numba")
        cfg = quick_cfg(selfish_fraction=0.4, sim_duration=2400.0)
        a = run(cfg, backend="numpy")
        b = run(cfg, backend="numba")
        assert a.trace_text() == b.trace_text()

    def test_selfishness_degrades_delivery(self):
        seeds = (1, 2, 3)
        healthy, sick = [], []
        for s in seeds:
            env = prepare_environment(quick_cfg(rng_seed=s))
            healthy.append(run(quick_cfg(rng_seed=s, protocol="NoIncentive",
                                         selfish_fraction=0.0), env=env)
                           .metrics.delivery_probability)
            sick.append(run(quick_cfg(rng_seed=s, protocol="NoIncentive",
                                      selfish_fraction=0.8), env=env)
                        .metrics.delivery_probability)
        assert statistics.fmean(sick) < statistics.fmean(healthy)


class TestInvariants:
    def test_packet_accounting_reconciles(self, hbds_run):
        _, result = hbds_run
        m = result.metrics
        assert m.packets_created == (m.packets_delivered + m.packets_dropped
                                     + m.packets_in_flight)
        assert m.packets_in_flight >= 0

    def test_no_accepted_forward_after_expiry(self, hbds_run):
        _, result = hbds_run
        created = {}
        ttls = {}
        for line in result.trace:
            f = parse_trace_line(line)
            if f.get("kind") == "pkt_create":
                created[f["pkt"]] = float(f["t"])
                ttls[f["pkt"]] = float(f["ttl"])
            elif f.get("kind") == "fwd" and f.get("accepted") == "1":
                t = float(f["t"])
                assert t - created[f["pkt"]] <= ttls[f["pkt"]] + 1e-9

    def test_no_duplicate_custody(self, hbds_run):
        # an accepted replication must never target a node already holding it
        _, result = hbds_run
        holders = {}
        for line in result.trace:
            f = parse_trace_line(line)
            kind = f.get("kind")
            if kind == "pkt_create":
                holders[f["pkt"]] = {f["src"]}
            elif kind == "fwd" and f.get("accepted") == "1":
                held = holders.setdefault(f["pkt"], set())
                assert f["to"] not in held
                held.add(f["to"])
            elif kind == "deliver":
                holders.pop(f["pkt"], None)
            elif kind == "ttl_expiry":
                holders.pop(f["pkt"], None)

    def test_metrics_recomputable_from_trace(self, hbds_run):
        _, result = hbds_run
        assert compute_metrics(result.trace) == result.metrics

    def test_ledger_audit_passes(self, hbds_run):
        _, result = hbds_run
        report = audit_trace(result.trace)
        assert report.ok, report.summary()

    def test_rtable_views_identical_after_broadcast(self, hbds_run):
        cfg, _ = hbds_run
        from hbds.engine import Simulation, prepare_environment as prep
        sim = Simulation(cfg, prep(cfg))
        sim.run()
        members = [n for n in cfg.terminal_ids() if not sim.is_expelled(n)]
        views = [sim.views[m] for m in members]
        assert views and views[0], "expected at least one broadcast"
        for view in views[1:]:
            assert view == views[0]


class TestElectionsInEngine:
    def test_heads_elected_and_roles_assigned(self, hbds_run):
        _, result = hbds_run
        roles = [s.role for s in result.nodes.values()]
        assert roles.count(Role.CH) <= 1
        election_lines = [l for l in result.trace if "kind=election " in l]
        assert election_lines, "expected at least one settled election"
        first = parse_trace_line(election_lines[0])
        heads = {first["ch"], first["ach"], first["ih"]}
        assert len(heads) == 3

    def test_no_elections_for_baselines(self):
        result = run(quick_cfg(protocol="NoIncentive", selfish_fraction=0.2))
        assert not any("kind=election" in l for l in result.trace)
        assert not any("kind=rep_delta" in l for l in result.trace)


@pytest.fixture(scope="module")
def expelled_run():
    cfg = quick_cfg(selfish_fraction=0.5, selfish_drop_probability=1.0,
                    sim_duration=5400.0)
    return run(cfg)


class TestExpulsion:
    def test_expulsions_happen_under_heavy_selfishness(self, expelled_run):
        expels = [l for l in expelled_run.trace if "kind=expel" in l]
        assert expels, "three-strike escalation should expel someone"

    def test_expelled_nodes_stay_silent_until_readmission(self, expelled_run):
        expelled_at = {}
        readmitted_at = {}
        for line in expelled_run.trace:
            f = parse_trace_line(line)
            t = float(f["t"])
            kind = f.get("kind")
            if kind == "expel":
                expelled_at.setdefault(f["node"], []).append(t)
            elif kind == "readmit":
                readmitted_at.setdefault(f["node"], []).append(t)

        def banned(node, t):
            starts = expelled_at.get(node, [])
            ends = readmitted_at.get(node, [])
            for i, start in enumerate(starts):
                end = ends[i] if i < len(ends) else float("inf")
                if start < t < end:
                    return True
            return False

        for line in expelled_run.trace:
            f = parse_trace_line(line)
            kind = f.get("kind")
            t = float(f["t"])
            if kind == "contact_up":
                assert not banned(f["a"], t) and not banned(f["b"], t)
            elif kind == "fwd" and f.get("sent") == "1":
                assert not banned(f["src"], t) and not banned(f["to"], t)
            elif kind == "wd_report":
                assert not banned(f["wn"], t) or f["basis"] == "default"

    def test_readmission_resets_reputation(self, expelled_run):
        for line in expelled_run.trace:
            f = parse_trace_line(line)
            if f.get("kind") == "readmit":
                node = f["node"]
                # the settlement delta brings the node exactly to zero
                deltas = [parse_trace_line(l) for l in expelled_run.trace
                          if f"node={node} " in l and "reason=readmit_settlement" in l]
                assert deltas
                break
        report = audit_trace(expelled_run.trace)
        assert report.ok


class TestBufferPolicy:
    def test_tiny_buffers_evict_oldest_first(self):
        cfg = quick_cfg(terminal_buffer=1_500_000, relay_buffer=1_500_000,
                        selfish_fraction=0.0, sim_duration=2400.0)
        result = run(cfg)
        evictions = [l for l in result.trace if "kind=buf_evict" in l]
        assert evictions, "tiny buffers must overflow"
        # occupancy check: replay buffer contents and verify capacity holds
        sizes = {}
        used = {}
        for line in result.trace:
            f = parse_trace_line(line)
            kind = f.get("kind")
            if kind == "pkt_create":
                sizes[f["pkt"]] = int(f["size"])
                used.setdefault(f["src"], {})[f["pkt"]] = sizes[f["pkt"]]
            elif kind == "fwd" and f.get("accepted") == "1":
                used.setdefault(f["to"], {})[f["pkt"]] = sizes[f["pkt"]]
            elif kind in ("buf_evict",):
                used.get(f["node"], {}).pop(f["pkt"], None)
            elif kind in ("deliver", "ttl_expiry"):
                for buf in used.values():
                    buf.pop(f["pkt"], None)
        for node, buf in used.items():
            assert sum(buf.values()) <= cfg.terminal_buffer

    def test_audit_still_passes_under_eviction_pressure(self):
        cfg = quick_cfg(terminal_buffer=1_500_000, selfish_fraction=0.4,
                        sim_duration=2400.0)
        assert audit_trace(run(cfg).trace).ok
