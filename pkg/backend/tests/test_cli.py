import io
import json

import numpy as np
import pandas as pd
import pytest

from cli.app import COMMANDS, build_parser, main


def run_cli(capsys, *argv):
    code = main(['--log-level', 'error', *argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestSample:

    def test_empty_sample(self, capsys):
        code, out, _ = run_cli(capsys, 'sample', '--nu', '7', '--p', '2', '--count', '0')
        assert code == 0
        assert json.loads(out)['result'] == []

    def test_reproducible_csv(self, capsys):
        argv = ('--seed', '3', '--workers', '2', '--format', 'csv',
                'sample', '--nu', '7', '--p', '2', '--q', '1.5', '--theta', '0.7', '--count', '5')
        _, first, _ = run_cli(capsys, *argv)
        _, second, _ = run_cli(capsys, *argv)
        assert first == second
        frame = pd.read_csv(io.StringIO(first))
        assert list(frame.columns) == ['draw', 'a11', 'a12', 'a21', 'a22']
        assert (frame['a12'] == frame['a21']).all()

    def test_non_integer_nu(self, capsys):
        code, _, err = run_cli(capsys, 'sample', '--nu', '7.5', '--p', '2', '--count', '3')
        assert code == 2
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'DomainError'


class TestDistributionCommands:

    def test_moments_envelope(self, capsys):
        code, out, _ = run_cli(capsys, 'moments', '--nu', '7', '--p', '2', '--t', '1', '2')
        assert code == 0
        payload = json.loads(out)
        assert set(payload) == {'command', 'version', 'config', 'result'}
        assert payload['command'] == 'moments'
        rows = {(row['quantity'], row['index']): row['value'] for row in payload['result']}
        assert rows[('c1', '')] == pytest.approx(7.0)
        assert rows[('c0', '')] == pytest.approx(4.0)
        assert rows[('inverse_mean', '1,1')] == pytest.approx(0.25)
        assert rows[('inverse_mean', '1,2')] == pytest.approx(0.0, abs=1e-15)
        assert ('gen_variance_moment', 't=2') in rows

    def test_missing_nu(self, capsys):
        code, _, _ = run_cli(capsys, 'moments', '--p', '2')
        assert code == 2

    def test_distribution_file(self, capsys, tmp_path, kw_nonnormal):
        spec = write(tmp_path, "dist.json", kw_nonnormal.to_json())
        code, out, _ = run_cli(capsys, 'moments', '--dist', spec)
        assert code == 0
        assert json.loads(out)['result'][0]['quantity'] == 'c1'

    def test_pdf_rejects_non_spd_point(self, capsys, tmp_path):
        matrix = write(tmp_path, "a.txt", "1 2\n2 1\n")
        code, out, err = run_cli(capsys, 'pdf', '--nu', '7', '--p', '2', '--matrix', matrix)
        assert code == 2
        assert out == ''
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'NotPositiveDefiniteError'

    def test_pdf_with_normalization(self, capsys, tmp_path):
        matrix = write(tmp_path, "a.txt", "2.0\n")
        code, out, _ = run_cli(capsys, 'pdf', '--nu', '5', '--p', '1', '--q', '1.5', '--theta', '0.8',
                               '--matrix', matrix, '--integrate')
        assert code == 0
        row = json.loads(out)['result'][0]
        assert row['integral'] == pytest.approx(1.0, rel=1e-6)
        assert row['pdf'] > 0

    def test_eig_precondition(self, capsys):
        code, _, err = run_cli(capsys, 'eig', '--nu', '6', '--p', '2', '--grid', '0.5')
        assert code == 3
        assert 'PreconditionError' in err

    def test_eig_table(self, capsys):
        code, out, _ = run_cli(capsys, '--format', 'csv', 'eig', '--nu', '7', '--p', '2', '--q', '1.5',
                               '--theta', '0.7', '--grid', '2.0', '0.5')
        assert code == 0
        frame = pd.read_csv(io.StringIO(out))
        assert list(frame['x']) == [0.5, 2.0]
        assert (frame['survival'] + frame['cdf']).tolist() == pytest.approx([1.0, 1.0])

    def test_risk_normal_case(self, capsys):
        code, out, _ = run_cli(capsys, '--mc-samples', '400', 'risk', '--nu', '7', '--p', '2')
        assert code == 0
        rows = json.loads(out)['result']
        assert len(rows) == 3
        assert rows[1]['c0'] == pytest.approx(4.0)
        assert rows[1]['closed_risk'] == pytest.approx(3.0 / 7.0)


class TestOtherCommands:

    def test_varma_scalar_power_det(self, capsys, tmp_path):
        z = write(tmp_path, "z.txt", "1.7\n")
        code, out, _ = run_cli(capsys, 'varma', 'power-det', '--z', z, '--q', '1.5', '--n', '4')
        assert code == 0
        row = json.loads(out)['result'][0]
        assert row['method'] == 'quadrature'
        assert row['estimate'] == pytest.approx(row['closed_form'], rel=1e-6)

    def test_varma_divergence(self, capsys, tmp_path):
        z = write(tmp_path, "z.txt", "0.5 0\n0 0.5\n")
        code, _, err = run_cli(capsys, '--max-degree', '10', 'varma', 'hypergeom', '--z', z, '--n', '5')
        assert code == 4
        assert 'DivergenceError' in err

    def test_varma_needs_n(self, capsys, tmp_path):
        z = write(tmp_path, "z.txt", "1.7\n")
        code, _, _ = run_cli(capsys, 'varma', 'power-det', '--z', z)
        assert code == 2

    def test_selftest_quick(self, capsys):
        code, out, _ = run_cli(capsys, 'selftest')
        assert code == 0
        assert all(row['passed'] for row in json.loads(out)['result'])

    def test_config_table(self, capsys):
        code, out, _ = run_cli(capsys, '--seed', '11', 'config')
        assert code == 0
        rows = json.loads(out)['result']
        assert {'source': 'run', 'name': 'seed', 'value': '11'} in rows

    def test_config_plain(self, capsys):
        code, out, _ = run_cli(capsys, 'config', '--plain')
        assert code == 0
        assert 'Configuration' in out

    def test_bad_run_file(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, '--config', str(tmp_path / "missing.yaml"), 'config')
        assert code == 2

    def test_parser_rejects_unknown_transform(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['varma', 'bessel', '--z', 'z.txt'])


class TestErrorMapping:

    def test_unknown_log_level(self, capsys):
        code = main(['--log-level', 'bogus', 'config'])
        err = capsys.readouterr().err
        assert code == 2
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'DomainError'

    def test_pdf_needs_unit_power(self, capsys, tmp_path):
        matrix = write(tmp_path, "a.txt", "2 0\n0 1\n")
        code, out, err = run_cli(capsys, 'pdf', '--nu', '7', '--p', '2', '--s', '2', '--matrix', matrix)
        assert code == 2
        assert out == ''
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'DomainError'

    def test_linear_algebra_failure(self, capsys, monkeypatch):
        def singular(facade, request, args):
            raise np.linalg.LinAlgError("Singular matrix")

        monkeypatch.setitem(COMMANDS, 'moments', singular)
        code, _, err = run_cli(capsys, 'moments', '--nu', '7', '--p', '2')
        assert code == 4
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'ConvergenceError'

    def test_stray_value_error(self, capsys, monkeypatch):
        def bad_value(facade, request, args):
            raise ValueError("math domain error")

        monkeypatch.setitem(COMMANDS, 'moments', bad_value)
        code, _, err = run_cli(capsys, 'moments', '--nu', '7', '--p', '2')
        assert code == 2
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'DomainError'

    def test_unexpected_error(self, capsys, monkeypatch):
        def broken(facade, request, args):
            raise KeyError('degree')

        monkeypatch.setitem(COMMANDS, 'moments', broken)
        code, out, err = run_cli(capsys, 'moments', '--nu', '7', '--p', '2')
        assert code == 1
        assert out == ''
        assert json.loads(err.strip().splitlines()[-1])['error'] == 'KeyError'
