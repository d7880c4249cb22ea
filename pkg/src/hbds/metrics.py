"""Run metrics recomputed from the event trace.

delivery probability = delivered / created; delay averages over delivered
packets only; overhead is (transmissions - deliveries) / deliveries and is
reported as an undefined marker when nothing was delivered. Drop counts are
packet-terminal: a packet is dropped when its TTL expires undelivered or its
last live copy disappears, so created = delivered + dropped + in-flight holds
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

UNDEFINED = "NA"


@dataclass(frozen=True)
class MetricsReport:
    delivery_probability: float
    avg_delivery_delay: float
    overhead_ratio: float | None
    packets_dropped: int
    packets_created: int
    packets_delivered: int
    relay_transmissions: int

    @property
    def packets_in_flight(self) -> int:
        return self.packets_created - self.packets_delivered - self.packets_dropped

    def as_dict(self) -> dict:
        return {
            "delivery_probability": self.delivery_probability,
            "avg_delivery_delay": self.avg_delivery_delay,
            "overhead_ratio": self.overhead_ratio,
            "packets_dropped": self.packets_dropped,
            "packets_created": self.packets_created,
            "packets_delivered": self.packets_delivered,
            "relay_transmissions": self.relay_transmissions,
        }


def parse_trace_line(line: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for part in line.split():
        if "=" in part:
            key, value = part.split("=", 1)
            fields[key] = value
    return fields


def compute_metrics(trace: list[str]) -> MetricsReport:
    created = 0
    delivered: set[str] = set()
    delay_sum = 0.0
    transmissions = 0
    dropped = 0

    for line in trace:
        fields = parse_trace_line(line)
        kind = fields.get("kind")
        if kind == "pkt_create":
            created += 1
        elif kind == "deliver":
            pkt = fields["pkt"]
            if pkt not in delivered:
                delivered.add(pkt)
                delay_sum += float(fields["delay"])
        elif kind == "fwd":
            if fields.get("sent") == "1":
                transmissions += 1
        elif kind == "pkt_drop":
            dropped += 1

    n_delivered = len(delivered)
    return MetricsReport(
        delivery_probability=(n_delivered / created) if created else 0.0,
        avg_delivery_delay=(delay_sum / n_delivered) if n_delivered else 0.0,
        overhead_ratio=((transmissions - n_delivered) / n_delivered) if n_delivered else None,
        packets_dropped=dropped,
        packets_created=created,
        packets_delivered=n_delivered,
        relay_transmissions=transmissions,
    )
