#!/usr/bin/env python3
"""
Tests for configuration, the report service and the command-line surface
"""

import json
import math
import os
import sys
from fractions import Fraction
from unittest.mock import Mock, patch

import pandas as pd
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import main
from src.models.domain_models import INFINITY, ReportRow, Regime, parse_p
from src.services.report_service import ReportService, parse_scalar
from src.services.verification_service import VerificationService
from src.utils.config import load_config, validate_config
from src.utils.exceptions import DomainError


def run_cli(*argv):
    """Run main() and return its exit code"""
    with pytest.raises(SystemExit) as info:
        main.main(list(argv))
    return info.value.code


class TestConfig:
    """Test configuration loading and validation"""

    def test_defaults(self):
        """Test the default knobs"""
        config = load_config()
        assert config['ABS_TOL'] == 1e-10
        assert config['MAX_MOVES'] == 10000
        assert config['LOG_FILE'] == 'toric-radii.log'
        assert validate_config(config)

    def test_file_overrides(self, tmp_path):
        """Test a dotenv file overrides defaults with typed values"""
        path = tmp_path / "radii.env"
        path.write_text("CURVE_SAMPLES=129\nFLOW_DT=0.002\nUNRELATED=1\n")
        config = load_config(str(path))
        assert config['CURVE_SAMPLES'] == 129
        assert config['FLOW_DT'] == 0.002
        assert 'UNRELATED' not in config

    def test_environment_is_ignored(self):
        """Test process environment variables are not read"""
        with patch.dict(os.environ, {'MAX_MOVES': '3'}):
            assert load_config()['MAX_MOVES'] == 10000

    def test_invalid_values(self, tmp_path, capsys):
        """Test non-positive and malformed values fail validation"""
        path = tmp_path / "bad.env"
        path.write_text("ABS_TOL=-1\nK_MAX=many\n")
        assert not validate_config(load_config(str(path)))
        assert "ABS_TOL" in capsys.readouterr().out


class TestParsing:
    """Test parsing of exponents and scalars"""

    def test_parse_p(self):
        """Test decimals, fractions and infinity"""
        assert parse_p("4.5") == 4.5
        assert parse_p("9/2") == 4.5
        assert parse_p("inf") == INFINITY
        with pytest.raises(DomainError):
            parse_p("0.5")
        with pytest.raises(DomainError):
            parse_p("abc")

    def test_parse_scalar(self):
        """Test fractions stay exact and decimals become floats"""
        assert parse_scalar("1/6") == Fraction(1, 6)
        assert parse_scalar("2") == Fraction(2)
        assert isinstance(parse_scalar("0.05"), float)


class TestReportService:
    """Test report assembly"""

    def setup_method(self):
        """Setup test fixtures"""
        config = load_config()
        config['CURVE_SAMPLES'] = 65
        self.report = ReportService(config)

    def test_wired_from_config(self, small_config):
        """Test config knobs reach the services"""
        small_config['MAX_MOVES'] = 7
        report = ReportService(small_config)
        assert report.lagrangian_service.curve_samples == 129
        assert report.symplectic_service.curve_samples == 129
        assert report.packing_service.max_moves == 7

    def test_radii_rows(self):
        """Test lagrangian and symplectic rows"""
        rows = self.report.radii_rows([3.0, 6.0], 'lagrangian')
        assert rows[0].regime == Regime.RIGID
        assert rows[1].regime == Regime.NON_RIGID
        symplectic = self.report.radii_rows([1.5], 'symplectic')[0]
        expected = (1.0 + 2.0 ** (1.5 / (1.5 - 2.0))) ** (1.0 - 2.0 / 1.5)
        assert symplectic.r_outer == pytest.approx(expected, rel=1e-11)

    def test_row_round_trip(self):
        """Test rows survive a JSON round trip, including p = inf"""
        for row in self.report.radii_rows([2.0, INFINITY], 'lagrangian'):
            data = json.loads(json.dumps(row.to_dict()))
            assert ReportRow.from_dict(data) == row
        assert self.report.radii_rows([INFINITY])[0].to_dict()['p'] == "inf"

    def test_row_invariant(self):
        """Test a row with inner above outer is rejected"""
        with pytest.raises(DomainError):
            ReportRow('lagrangian', 2.0, 5.0, 4.0, Regime.RIGID, Regime.RIGID, 1.0, 1.0)

    def test_curve_ordered_by_x(self):
        """Test curve points increase in x"""
        curve = self.report.curve_points(6.0, 33)
        xs = [x for x, _ in curve['points']]
        assert xs == sorted(xs)
        assert len(curve['points']) == 33

    def test_square_keeps_vertical_edge(self):
        """Test the B_inf square keeps decreasing y along x = 1"""
        curve = self.report.curve_points(INFINITY, 17, domain='symplectic')
        assert curve['p'] == "inf"
        assert curve['points'][-1] == [1.0, 0.0]

    def test_render_csv(self):
        """Test CSV rendering of a curve"""
        text = self.report.render({'p': 2.0, 'points': [[0.0, 1.0], [1.0, 0.0]]}, 'csv')
        assert text.splitlines()[0] == "p,x,y"

    def test_failure_dict(self):
        """Test errors come back as failure dicts"""
        result = self.report.pack(0, [Fraction(1, 2)])
        assert result['success'] is False
        assert 'error' in result


class TestVerification:
    """Test the verification runner on its cheap checks"""

    def setup_method(self):
        """Setup test fixtures"""
        self.verification = VerificationService(ReportService(load_config()))

    def test_unknown_suite(self):
        """Test an unknown suite name"""
        assert self.verification.run('bogus')['success'] is False

    def test_exact_checks(self):
        """Test the exact-rational checks pass"""
        checks = self.verification._exact_rationals()
        assert all(check['passed'] for check in checks)

    def test_union_check(self):
        """Test the DP-versus-enumeration check passes"""
        assert self.verification._union_against_compositions()['passed']


class TestCommandLine:
    """Test main() exit codes and outputs"""

    @pytest.fixture(autouse=True)
    def in_tmp(self, tmp_path, monkeypatch):
        """Run every command inside a scratch directory"""
        monkeypatch.chdir(tmp_path)
        self.tmp_path = tmp_path

    def test_radii_json(self):
        """Test radii as JSON with the regime labels"""
        out = self.tmp_path / "radii.json"
        assert run_cli('radii', '3', '6', '--format', 'json', '--output', str(out)) == 0
        rows = json.loads(out.read_text())
        assert [row['regime'] for row in rows] == ['rigid', 'non-rigid']

    def test_radii_csv(self):
        """Test radii as CSV"""
        out = self.tmp_path / "radii.csv"
        assert run_cli('radii', '1.5', '--domain', 'symplectic', '--format', 'csv',
                       '--output', str(out)) == 0
        frame = pd.read_csv(out)
        assert frame.loc[0, 'regime'] == 'non-rigid'

    def test_radii_table(self, capsys):
        """Test the coloured table"""
        assert run_cli('radii', 'inf') == 0
        assert "inf" in capsys.readouterr().out

    def test_invalid_p(self):
        """Test invalid exponents exit with 2"""
        assert run_cli('radii', '0.5') == 2

    def test_curve_json(self):
        """Test the curve JSON schema"""
        out = self.tmp_path / "curve.json"
        assert run_cli('curve', '2', '--samples', '17', '--output', str(out)) == 0
        data = json.loads(out.read_text())
        assert data['p'] == 2.0
        for x, y in data['points']:
            assert x + y == pytest.approx(math.pi, abs=1e-8)

    def test_unwritable_output(self):
        """Test an unwritable output path exits with 2"""
        out = self.tmp_path / "missing" / "curve.json"
        assert run_cli('curve', '2', '--samples', '17', '--output', str(out)) == 2

    def test_pack_exit_codes(self):
        """Test embeddable, not embeddable and inconclusive"""
        assert run_cli('pack', '--c', '1', '--balls', '1,1') == 1
        assert run_cli('pack', '--c', '7/60', '--balls', '1/20,1/30,1/30') == 0
        assert run_cli('pack', '--c', '1', '--balls', '3/5,1/2,2/5', '--max-moves', '0') == 3

    def test_pack_float_vector(self):
        """Test the float form of a reduced vector"""
        balls = ','.join(['0.05'] + ['0.0333'] * 6)
        assert run_cli('pack', '--c', '0.11667', '--balls', balls) == 0

    def test_pack_trace(self, capsys):
        """Test --trace prints every step"""
        balls = '1/12,1/12,1/20,1/20,1/30,1/30,1/30,1/30'
        assert run_cli('pack', '--c', '1/6', '--balls', balls, '--trace') == 0
        out = capsys.readouterr().out
        assert "(7/60; 1/20" in out

    def test_pack_preset(self):
        """Test B_1 into an ellipsoid"""
        assert run_cli('pack', '--preset', 'b1-ellipsoid', '0.5', '0.667') == 0
        assert run_cli('pack', '--preset', 'b1-ellipsoid', '0.5', '0.6') == 1
        assert run_cli('pack', '--preset', 'other', '1', '1') == 2

    def test_pack_malformed(self):
        """Test malformed ball lists exit with 2"""
        assert run_cli('pack', '--c', '1', '--balls', '1,x') == 2
        assert run_cli('pack', '--c', '1') == 2

    def test_verify_unknown_suite(self):
        """Test argparse rejects an unknown suite"""
        assert run_cli('verify', '--suite', 'bogus') == 2

    def test_verify_failure_exit_code(self):
        """Test a failed check exits with 1"""
        failing = {'success': True, 'passed': False, 'failed': 1, 'checks': [
            {'suite': 'gp', 'check': 'stub', 'passed': False,
             'deviation': 1.0, 'tolerance': 1e-9},
        ]}
        with patch('main.VerificationService') as service:
            service.return_value = Mock(run=Mock(return_value=failing))
            assert run_cli('verify', '--suite', 'gp') == 1
            service.return_value.run.assert_called_once_with('gp')

    def test_bad_config(self):
        """Test an invalid config file exits with 2"""
        path = self.tmp_path / "bad.env"
        path.write_text("MAX_MOVES=0\n")
        assert run_cli('--config', str(path), 'radii', '2') == 2

    def test_missing_config(self, capsys):
        """Test a config path that does not exist exits with 2"""
        assert run_cli('--config', 'missing.env', 'radii', '2') == 2
        assert "missing.env" in capsys.readouterr().err


if __name__ == "__main__":
    pytest.main([__file__])
