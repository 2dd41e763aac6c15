import json

import pytest

from src.errors import DimensionMismatchError, DomainError, PreconditionError
from src.models.distributions import KWDist
from src.patterns.chain_of_responsibility import ValidationPipeline
from src.patterns.observer import MetricsObserver, MonteCarloMonitor, Observer, RejectionAlertObserver, Subject


def dist_request(command, **options):
    base = {'p': 2, 'nu': 7.0, 'q': 1.5, 'theta': 0.7, 's': 1.0, 'sigma': None}
    base.update(options)
    return {'command': command, 'needs_dist': True, 'options': base}


class TestValidationPipeline:

    def test_builds_distribution(self):
        request = ValidationPipeline().process(dist_request('moments'))
        assert isinstance(request['dist'], KWDist)
        assert request['dist'].n == 8

    def test_missing_degrees_of_freedom(self):
        with pytest.raises(DomainError):
            ValidationPipeline().process(dist_request('moments', nu=None))

    def test_distribution_file(self, tmp_path, kw_nonnormal):
        path = tmp_path / "dist.json"
        path.write_text(kw_nonnormal.to_json(), encoding="utf-8")
        request = ValidationPipeline().process({'command': 'moments', 'dist_file': str(path)})
        assert request['dist'] == kw_nonnormal

    def test_unreadable_distribution_file(self, tmp_path):
        path = tmp_path / "dist.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(DomainError):
            ValidationPipeline().process({'command': 'moments', 'dist_file': str(path)})

    def test_sampling_needs_integer_nu(self):
        with pytest.raises(DomainError):
            ValidationPipeline().process(dist_request('sample', nu=7.5))

    def test_negative_count(self):
        request = dist_request('sample')
        request['count'] = -1
        with pytest.raises(DomainError):
            ValidationPipeline().process(request)

    def test_closed_forms_need_unit_power(self):
        with pytest.raises(DomainError):
            ValidationPipeline().process(dist_request('pdf', s=2.0))

    def test_eigen_precondition(self):
        request = dist_request('eig')
        request['grid'] = [0.5, 1.0]
        assert ValidationPipeline().process(request)['m'] == 2
        bad = dist_request('eig', nu=6.0)
        bad['grid'] = [0.5]
        with pytest.raises(PreconditionError):
            ValidationPipeline().process(bad)

    def test_eigen_grid(self):
        request = dist_request('eig')
        request['grid'] = [0.5, -1.0]
        with pytest.raises(DomainError):
            ValidationPipeline().process(request)

    def test_risk_sample_size(self):
        with pytest.raises(DomainError):
            ValidationPipeline().process(dist_request('risk', nu=3.0))

    def test_matrix_dimension(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_text("1 0 0\n0 1 0\n0 0 1\n", encoding="utf-8")
        request = dist_request('pdf')
        request['matrix_file'] = str(path)
        with pytest.raises(DimensionMismatchError):
            ValidationPipeline().process(request)

    def test_commands_without_distribution(self, tmp_path):
        path = tmp_path / "z.txt"
        path.write_text(json.dumps({'dim': 1, 'rows': [[2.0]]}), encoding="utf-8")
        request = ValidationPipeline().process({'command': 'varma', 'needs_dist': False, 'matrix_file': str(path)})
        assert request['matrix'].dim == 1
        assert 'dist' not in request


class RecordingObserver(Observer):

    def __init__(self):
        self.events = []

    def update(self, event):
        self.events.append(event['event_type'])


class TestObservers:

    def test_attach_detach(self):
        subject = Subject()
        observer = RecordingObserver()
        subject.attach(observer)
        subject.attach(observer)
        subject.notify({'event_type': 'chunk_done'})
        subject.detach(observer)
        subject.notify({'event_type': 'chunk_done'})
        assert observer.events == ['chunk_done']

    def test_metrics(self):
        metrics = MetricsObserver()
        metrics.update({'event_type': 'chunk_done', 'metadata': {'draws': 40}})
        metrics.update({'event_type': 'draws_rejected', 'metadata': {'rejected': 2}})
        result = metrics.get_metrics()
        assert (result['draws'], result['rejected'], result['chunks_done']) == (40, 2, 1)

    def test_rejection_alert(self):
        alert = RejectionAlertObserver(alert_fraction=0.01)
        alert.update({'event_type': 'draws_rejected', 'metadata': {'rejected': 1, 'requested': 1000}})
        assert not alert.alerted
        alert.update({'event_type': 'draws_rejected', 'metadata': {'rejected': 50, 'requested': 1000}})
        assert alert.alerted

    def test_monitor_events(self):
        monitor = MonteCarloMonitor(run='unit')
        monitor.log_event('draws_rejected', metadata={'rejected': 3, 'requested': 10})
        assert monitor.get_metrics()['rejected'] == 3
        assert monitor.alert_observer.alerted
