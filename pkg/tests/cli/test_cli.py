import json

import pytest
import structlog
from click.testing import CliRunner

from clearance.cli import CliConfig, EXIT_IO, EXIT_MISMATCH, EXIT_OK, EXIT_VALIDATION, main
from clearance.core import ConfigurationError
from clearance.envelope import Scheme
from clearance.simnet import Transcript

from ..utils import SCENARIOS

HONEST = str(SCENARIOS / 'honest.json')
DEBIT = str(SCENARIOS / 'debit.json')


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    structlog.reset_defaults()


@pytest.fixture()
def state(tmp_path):
    return tmp_path / 'state'


@pytest.fixture()
def cli(state):
    runner = CliRunner()

    def invoke(*args, expect=EXIT_OK):
        result = runner.invoke(main, ['--state-dir', str(state), *args])
        assert result.exit_code == expect, result.output
        return result

    return invoke


def write_grants(tmp_path, grants, implications=()):
    path = tmp_path / 'grants.json'
    path.write_text(json.dumps({'grants': grants, 'implications': list(implications)}))
    return str(path)


@pytest.fixture()
def deployed(cli, tmp_path):
    """ acme and its staff may read doc and hits on S, cleared by C. """
    for role, name in [('org', 'acme'), ('center', 'C'), ('server', 'S')]:
        cli('keygen', role, name)
    cli('agree', 'acme', 'C', write_grants(tmp_path, [
        {'enrollment': 'staff', 'ticket': 'read'},
        {'enrollment': 'staff', 'ticket': 'print',
         'modifiers': [{'type': 'use_limit', 'uses': 1}]},
    ]))
    cli('acl', 'S', 'C', 'read=doc', '--kind', 'fetch', '--content', 'hello')
    cli('acl', 'S', 'C', 'read=hits', '--kind', 'counter')
    cli('acl', 'S', 'C', 'print=copy', '--kind', 'fetch', '--content', 'paper')
    cli('enroll', 'acme', 'alice', '-g', 'staff', '--now', '0')
    return cli


def test_config():
    config = CliConfig('state')
    assert config.scheme() is Scheme.ED25519_X25519
    with pytest.raises(ConfigurationError):
        config.scheme(Scheme.MARKER)
    assert CliConfig('state', unsafe=True).scheme(Scheme.MARKER) is Scheme.MARKER
    assert CliConfig('state', backend=Scheme.MARKER, unsafe=True).scheme() is Scheme.MARKER
    with pytest.raises(ConfigurationError):
        CliConfig('state', seed=-1)
    with pytest.raises(ConfigurationError):
        CliConfig('state', output_format='xml')


def test_keygen(cli, state):
    result = cli('--format', 'json', 'keygen', 'org', 'acme')
    record = json.loads(result.output)
    assert record['role'] == 'org'
    assert record['name'] == 'acme'
    assert (state / 'acme.id').exists()
    assert (state / 'acme.pub').exists()

    # same seed, same identity
    again = cli('--format', 'json', 'keygen', 'org', 'acme')
    assert json.loads(again.output) == record
    other = cli('--seed', '9', '--format', 'json', 'keygen', 'org', 'acme')
    assert json.loads(other.output)['id'] != record['id']


def test_marker_crypto_needs_the_unsafe_flag(cli):
    result = cli('--backend', 'marker', 'keygen', 'org', 'acme', expect=EXIT_VALIDATION)
    assert '--unsafe-marker-crypto' in result.output
    cli('--backend', 'marker', '--unsafe-marker-crypto', 'keygen', 'org', 'acme')


def test_request(deployed, state):
    result = deployed('--format', 'json', 'request', 'alice', 'S', 'doc', '--center', 'C',
                      '--now', '10')
    record = json.loads(result.output)
    assert record['answer'] == 'hello'
    assert record['messages'] == 4

    transcript = Transcript.decode((state / 'alice.transcript').read_bytes())
    assert transcript.digest() == record['transcript_sha256']

    result = deployed('request', 'alice', 'S', 'hits', '--center', 'C', '--now', '10')
    assert result.output.strip() == '1'


def test_ledger_survives_between_requests(deployed):
    result = deployed('--format', 'json', 'request', 'alice', 'S', 'copy', '--center', 'C',
                      '--now', '10')
    assert json.loads(result.output)['messages'] == 5
    result = deployed('request', 'alice', 'S', 'copy', '--center', 'C', '--now', '20',
                      expect=EXIT_MISMATCH)
    assert 'denied: DebitExhausted' in result.output


def test_denied_requests(deployed):
    result = deployed('request', 'alice', 'S', 'secret', '--center', 'C', '--now', '10',
                      expect=EXIT_MISMATCH)
    assert 'denied: NotAuthorized' in result.output

    result = deployed('request', 'alice', 'S', 'doc', '--center', 'C', '--now', '100000',
                      expect=EXIT_MISMATCH)
    assert 'denied: Expired' in result.output


def test_enroll_refusals(deployed):
    deployed('enroll', 'acme', 'bob', expect=EXIT_VALIDATION)
    deployed('enroll', 'C', 'bob', '-g', 'staff', expect=EXIT_VALIDATION)
    # alice is in the roster now, no need to repeat her groups
    deployed('enroll', 'acme', 'alice', '--now', '50')


def test_invalid_grants(deployed, tmp_path):
    result = deployed('agree', 'acme', 'C',
                      write_grants(tmp_path, [{'enrollment': 'staff'}]),
                      expect=EXIT_VALIDATION)
    assert '$.grants[0]' in result.output


def test_params(deployed):
    deployed('acl', 'S', 'C', 'read=echo', '--kind', 'echo')
    deployed('request', 'alice', 'S', 'echo', '--center', 'C', '-p', 'seat=A1')
    deployed('request', 'alice', 'S', 'echo', '--center', 'C', '-p', 'seat',
             expect=EXIT_VALIDATION)


def test_run(cli, tmp_path):
    report_path = tmp_path / 'report.json'
    transcript_path = tmp_path / 'run.transcript'
    result = cli('run', HONEST, '--report', str(report_path),
                 '--transcript', str(transcript_path))
    assert 'transcript sha256' in result.output
    report = json.loads(report_path.read_text())
    assert report['ok'] is True
    transcript = Transcript.decode(transcript_path.read_bytes())
    assert transcript.digest() == report['transcript_sha256']


def test_run_seed(cli):
    def digest(*args):
        return json.loads(cli(*args, '--format', 'json', 'run', HONEST).output)[
            'transcript_sha256']

    # the scenario's own seed unless one is given
    assert digest() == digest('--seed', '42')
    assert digest() != digest('--seed', '0')


def test_run_mismatch(cli, tmp_path):
    doc = json.loads((SCENARIOS / 'honest.json').read_text())
    doc['steps'][0]['expect'] = 'NotAuthorized'
    path = tmp_path / 'wrong.json'
    path.write_text(json.dumps(doc))
    result = cli('run', str(path), expect=EXIT_MISMATCH)
    assert 'step 0 (request): expected NotAuthorized, got ok' in result.output


def test_run_errors(cli, tmp_path):
    path = tmp_path / 'invalid.json'
    path.write_text(json.dumps({'version': 1, 'steps': [{'action': 'fly'}]}))
    result = cli('run', str(path), expect=EXIT_VALIDATION)
    assert '$.steps[0].action' in result.output

    cli('run', str(tmp_path / 'missing.json'), expect=EXIT_IO)
    cli('inspect', str(tmp_path / 'missing.transcript'), expect=EXIT_IO)


def test_marker_scenario(cli):
    cli('run', DEBIT, expect=EXIT_VALIDATION)
    result = cli('--unsafe-marker-crypto', 'run', DEBIT)
    assert 'privacy: 0 leak(s)' in result.output


@pytest.mark.parametrize('attack', ['replay', 'tamper', 'steal-cert'])
def test_attack(cli, attack):
    result = cli('--format', 'json', 'attack', HONEST, '--attack', attack)
    report = json.loads(result.output)
    assert any(step['attack'] for step in report['steps'])


def test_inspect(cli, tmp_path):
    transcript_path = tmp_path / 'run.transcript'
    cli('run', HONEST, '--transcript', str(transcript_path))

    result = cli('--format', 'json', 'inspect', str(transcript_path))
    records = [json.loads(line) for line in result.output.splitlines()]
    assert [r['seq'] for r in records] == list(range(len(records)))
    assert records[0]['type'] == 'RequestEnvelope'
    assert all(r['sealed'] == [] for r in records)

    result = cli('inspect', str(transcript_path))
    assert result.output.startswith('#0')


def test_inspect_marker_seals(cli, tmp_path):
    transcript_path = tmp_path / 'run.transcript'
    cli('--unsafe-marker-crypto', 'run', DEBIT, '--transcript', str(transcript_path))
    result = cli('--format', 'json', 'inspect', str(transcript_path))
    records = [json.loads(line) for line in result.output.splitlines()]
    assert records[0]['sealed']
    assert any(r['piggyback'] for r in records)
