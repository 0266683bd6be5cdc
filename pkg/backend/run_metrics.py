"""
Run metrics for toolkit commands.
Thread-safe counters and timers whose summary is attached to run reports.
"""

import logging
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, asdict
from datetime import datetime, timezone
from enum import Enum
from typing import Dict, List, Any, Optional

logger = logging.getLogger(__name__)


class EventType(Enum):
    """Milestones recorded during a run."""
    COMMAND_STARTED = "command_started"
    COMMAND_FINISHED = "command_finished"
    SWEEP_CELL = "sweep_cell"
    TRIAL_FINISHED = "trial_finished"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass
class RunEvent:
    timestamp: str
    event_type: str
    message: str
    metadata: Optional[Dict[str, Any]] = None


class RunMetrics:
    """Collects counters and timings for one command invocation."""

    def __init__(self, max_events: int = 1000):
        self.max_events = max_events
        self.counters = defaultdict(int)
        self.timers = defaultdict(list)
        self.events: List[RunEvent] = []
        self.lock = threading.Lock()
        self.started = time.perf_counter()

    def increment_counter(self, metric_name: str, value: int = 1):
        with self.lock:
            self.counters[metric_name] += value

    def record_timing(self, metric_name: str, duration_ms: float):
        with self.lock:
            self.timers[metric_name].append(duration_ms)

    def record_event(self, event_type: EventType, message: str, metadata: Dict[str, Any] = None):
        entry = RunEvent(
            timestamp=datetime.now(timezone.utc).isoformat(),
            event_type=event_type.value,
            message=message,
            metadata=metadata,
        )
        with self.lock:
            if len(self.events) < self.max_events:
                self.events.append(entry)
        logger.debug(f"{event_type.value}: {message}")

    def get_counter(self, metric_name: str) -> int:
        with self.lock:
            return self.counters.get(metric_name, 0)

    @contextmanager
    def timed(self, metric_name: str):
        """Record the wall time of a block in milliseconds."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.record_timing(metric_name, (time.perf_counter() - start) * 1000.0)

    def wall_time_s(self) -> float:
        return time.perf_counter() - self.started

    def get_metrics_summary(self) -> Dict[str, Any]:
        with self.lock:
            return {
                'counters': dict(sorted(self.counters.items())),
                'timings_ms': {
                    name: {'count': len(values), 'total': round(sum(values), 3)}
                    for name, values in sorted(self.timers.items()) if values
                },
                'events': [asdict(event) for event in self.events],
            }


def create_run_metrics() -> RunMetrics:
    """Factory function: one metrics collector per command invocation."""
    return RunMetrics()
