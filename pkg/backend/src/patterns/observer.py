"""
Observer Pattern Implementation
Monitors Monte Carlo runs: chunk progress, rejected draws, run metrics
"""

from abc import ABC, abstractmethod
from typing import List, Dict, Any
from datetime import datetime
import logging
import threading

logger = logging.getLogger(__name__)


class Observer(ABC):
    """Abstract observer interface"""

    @abstractmethod
    def update(self, event: Dict[str, Any]):
        """Receive update from subject"""
        pass


class Subject:
    """Subject that notifies observers of events"""

    def __init__(self):
        self._observers: List[Observer] = []
        self._lock = threading.Lock()

    def attach(self, observer: Observer):
        """Attach an observer"""
        if observer not in self._observers:
            self._observers.append(observer)
            logger.debug(f"Observer attached: {observer.__class__.__name__}")

    def detach(self, observer: Observer):
        """Detach an observer"""
        if observer in self._observers:
            self._observers.remove(observer)
            logger.debug(f"Observer detached: {observer.__class__.__name__}")

    def notify(self, event: Dict[str, Any]):
        """Notify all observers of an event (workers call this concurrently)"""
        with self._lock:
            for observer in self._observers:
                observer.update(event)


class RunLogObserver(Observer):
    """Observer that writes run events to the log"""

    def update(self, event: Dict[str, Any]):
        event_type = event.get('event_type', 'unknown')
        if event_type in ('run_started', 'run_finished'):
            logger.info(f"MC {event.get('run')}: {event_type} - {event.get('description', '')}")
        else:
            logger.debug(f"MC {event.get('run')}: {event_type} - {event.get('description', '')}")


class MetricsObserver(Observer):
    """Observer that tracks draw counts per run"""

    def __init__(self):
        self.metrics = {
            'total_events': 0,
            'draws': 0,
            'rejected': 0,
            'chunks_done': 0,
            'last_event_time': None
        }

    def update(self, event: Dict[str, Any]):
        self.metrics['total_events'] += 1
        self.metrics['last_event_time'] = datetime.now()

        event_type = event.get('event_type')
        metadata = event.get('metadata', {})
        if event_type == 'chunk_done':
            self.metrics['chunks_done'] += 1
            self.metrics['draws'] += metadata.get('draws', 0)
        elif event_type == 'draws_rejected':
            self.metrics['rejected'] += metadata.get('rejected', 0)

    def get_metrics(self) -> Dict[str, Any]:
        """Get current metrics"""
        return self.metrics.copy()


class RejectionAlertObserver(Observer):
    """Observer that warns when too many draws are rejected"""

    def __init__(self, alert_fraction: float = 1e-3):
        self.alert_fraction = alert_fraction
        self.alerted = False

    def update(self, event: Dict[str, Any]):
        if event.get('event_type') != 'draws_rejected':
            return
        metadata = event.get('metadata', {})
        requested = max(metadata.get('requested', 1), 1)
        fraction = metadata.get('rejected', 0) / requested
        if fraction > self.alert_fraction and not self.alerted:
            logger.warning(
                f"ALERT: {event.get('run')} rejected {fraction:.2%} of draws "
                f"(threshold {self.alert_fraction:.2%})"
            )
            self.alerted = True


class MonteCarloMonitor(Subject):
    """Central monitor for Monte Carlo runs using the observer pattern"""

    def __init__(self, run: str = 'mc'):
        super().__init__()
        self.run = run
        self.log_observer = RunLogObserver()
        self.metrics_observer = MetricsObserver()
        self.alert_observer = RejectionAlertObserver()

        self.attach(self.log_observer)
        self.attach(self.metrics_observer)
        self.attach(self.alert_observer)

    def log_event(self, event_type: str, description: str = '',
                  severity: str = 'info', metadata: Dict[str, Any] = None):
        """Log an event and notify observers"""
        event = {
            'run': self.run,
            'event_type': event_type,
            'description': description,
            'severity': severity,
            'metadata': metadata or {},
            'timestamp': datetime.now()
        }
        self.notify(event)

    def get_metrics(self) -> Dict[str, Any]:
        """Get current run metrics"""
        return self.metrics_observer.get_metrics()
