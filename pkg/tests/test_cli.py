import csv
import json
import os

import pytest


def write_config(tmp_path, name='config.json', **fields):
    path = tmp_path / name
    path.write_text(json.dumps(fields))
    return str(path)


def read_rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def snapshot(directory):
    return {name: (directory / name).read_bytes() for name in sorted(os.listdir(directory))}


def test_simulate_writes_every_output(runner, tmp_path):
    config = write_config(
        tmp_path, algorithm='fair_bandits', family='lower_bound', k=10, delta=0.1, horizon=10 ** 4, seed=7)
    out = tmp_path / 'run'
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(out)])
    assert result.exit_code == 0, result.output
    assert sorted(os.listdir(out)) == [
        'audit.json', 'config.json', 'instance_000.json', 'intervals_000.csv', 'regret.csv', 'trace_000.csv']

    trace = read_rows(out / 'trace_000.csv')
    assert len(trace) == 10 ** 4
    assert list(trace[0]) == ['t', 'chosen', 'reward'] + [f'p_{j}' for j in range(10)] + ['contexts']
    regret = read_rows(out / 'regret.csv')
    assert list(regret[0]) == ['t', 'mean', 'stderr']
    assert len(regret) == 10 ** 4
    intervals = read_rows(out / 'intervals_000.csv')
    assert len(intervals) == 10 * 10 ** 4

    summary = json.loads((out / 'audit.json').read_text())
    assert summary['trials'] == 1
    assert summary['runs'][0]['run_id'] == 0
    instance = json.loads((out / 'instance_000.json').read_text())
    assert instance['k'] == 10 and len(instance['means']) == 10

    first = snapshot(out)
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(out)])
    assert result.exit_code == 0
    assert snapshot(out) == first


def test_parallel_trials_match_serial(runner, tmp_path):
    config = write_config(
        tmp_path, algorithm='ucb', family='lower_bound', k=4, horizon=500, trials=3, seed=5)
    serial, parallel = tmp_path / 'serial', tmp_path / 'parallel'
    assert runner.invoke(args=['simulate', '--config', config, '--out', str(serial), '--jobs', '1']).exit_code == 0
    assert runner.invoke(args=['simulate', '--config', config, '--out', str(parallel), '--jobs', '2']).exit_code == 0
    assert snapshot(serial) == snapshot(parallel)
    assert "jobs" not in json.loads((serial / "config.json").read_text())


def test_learner_runs_write_kwik_table(runner, tmp_path):
    config = write_config(tmp_path, algorithm='enum_conjunction', family='adversarial_conjunction', d=5, trials=2)
    out = tmp_path / 'kwik'
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(out)])
    assert result.exit_code == 0, result.output
    rows = read_rows(out / 'kwik.csv')
    assert [int(row['dont_know']) for row in rows] == [31, 31]
    assert all(row['bound'] == '31' for row in rows)


def test_unknown_key_is_a_config_error(runner, tmp_path):
    config = write_config(tmp_path, algorithm='fair_bandits', family='lower_bound', nope=1)
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(tmp_path / 'x')])
    assert result.exit_code == 2
    assert 'nope' in result.output


@pytest.mark.parametrize('fields', [
    {'algorithm': 'fair_bandits', 'family': 'lower_bound', 'delta': 1.5},
    {'algorithm': 'fair_bandits', 'family': 'linear'},
    {'algorithm': 'thompson', 'family': 'lower_bound'},
    {'family': 'lower_bound'},
])
def test_invalid_configs_exit_with_two(runner, tmp_path, fields):
    config = write_config(tmp_path, **fields)
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(tmp_path / 'x')])
    assert result.exit_code == 2


def test_malformed_json_exits_with_two(runner, tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"algorithm": ')
    result = runner.invoke(args=['simulate', '--config', str(path)])
    assert result.exit_code == 2


def test_unwritable_output_exits_with_three(runner, tmp_path):
    config = write_config(tmp_path, algorithm='uniform', family='lower_bound', k=3, horizon=10)
    blocker = tmp_path / 'file.txt'
    blocker.write_text('')
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(blocker / 'sub')])
    assert result.exit_code == 3


def test_missing_config_file_exits_with_three(runner, tmp_path):
    result = runner.invoke(args=['simulate', '--config', str(tmp_path / 'absent.json')])
    assert result.exit_code == 3


def test_sweep_over_k(runner, tmp_path):
    config = write_config(tmp_path, algorithm='fair_bandits', family='lower_bound', horizon=300, trials=2)
    out = tmp_path / 'sweep'
    result = runner.invoke(args=[
        'sweep', '--config', config, '--out', str(out), '--axis', 'k', '--values', '5,10,20'])
    assert result.exit_code == 0, result.output
    rows = read_rows(out / 'sweep_k.csv')
    assert [row['k'] for row in rows] == ['5', '10', '20']
    assert list(rows[0]) == [
        'k', 'mean_regret', 'per_round_regret', 'violation_fraction', 'dont_know_mean', 'dont_know_max']


def test_sweep_over_d_counts_dont_knows(runner, tmp_path):
    config = write_config(tmp_path, algorithm='enum_conjunction', family='adversarial_conjunction', d=4)
    out = tmp_path / 'sweep'
    result = runner.invoke(args=[
        'sweep', '--config', config, '--out', str(out), '--axis', 'd', '--values', '4,6,8'])
    assert result.exit_code == 0, result.output
    rows = read_rows(out / 'sweep_d.csv')
    assert [int(row['dont_know_max']) for row in rows] == [15, 63, 255]
    assert all(row['mean_regret'] == row['per_round_regret'] == row['violation_fraction'] == '' for row in rows)


def test_sweep_over_horizon_is_nondecreasing(runner, tmp_path):
    config = write_config(tmp_path, algorithm='fair_bandits', family='bernoulli', means=[0.8, 0.5, 0.2])
    out = tmp_path / 'sweep'
    result = runner.invoke(args=[
        'sweep', '--config', config, '--out', str(out), '--axis', 'T', '--values', '100,200,400'])
    assert result.exit_code == 0, result.output
    regret = [float(row['mean_regret']) for row in read_rows(out / 'sweep_T.csv')]
    assert regret == sorted(regret)


@pytest.mark.parametrize('values', ['', '10,5'])
def test_sweep_rejects_bad_values(runner, tmp_path, values):
    config = write_config(tmp_path, algorithm='fair_bandits', family='lower_bound', horizon=50)
    result = runner.invoke(args=[
        'sweep', '--config', config, '--out', str(tmp_path / 's'), '--axis', 'k', '--values', values])
    assert result.exit_code == 2


def test_audit_recomputes_stored_report(runner, tmp_path):
    config = write_config(
        tmp_path, algorithm='uniform', family='bernoulli', means=[0.7, 0.3], horizon=200, trials=2)
    out = tmp_path / 'run'
    assert runner.invoke(args=['simulate', '--config', config, '--out', str(out)]).exit_code == 0
    result = runner.invoke(args=['audit', '--out', str(out)])
    assert result.exit_code == 0, result.output
    stored = json.loads((out / 'audit.json').read_text())
    again = json.loads((out / 'reaudit.json').read_text())
    assert again['runs'] == stored['runs']
    assert again['violated_runs'] == stored['violated_runs'] == 0


def test_audit_of_missing_directory(runner, tmp_path):
    result = runner.invoke(args=['audit', '--out', str(tmp_path / 'nothing')])
    assert result.exit_code == 3


def test_kwik_bound_on_generated_sequence(runner):
    result = runner.invoke(args=['kwik-bound', '--learner', 'enum_conjunction', '--d', '4'])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report['dont_know'] == report['bound'] == 15
    assert report['mistakes'] == 0


def test_kwik_bound_on_sequence_file(runner, tmp_path):
    path = tmp_path / 'sequence.json'
    path.write_text(json.dumps([[[0, 0], 0], [[1, 0], 1], [[1, 1], 1]]))
    result = runner.invoke(args=[
        'kwik-bound', '--learner', 'enum_conjunction', '--d', '2', '--sequence', str(path)])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert (report['dont_know'], report['rounds'], report['mistakes']) == (2, 3, 0)


def test_kwik_bound_rejects_malformed_sequence(runner, tmp_path):
    path = tmp_path / 'sequence.json'
    path.write_text(json.dumps([[[0, 2], 0]]))
    result = runner.invoke(args=[
        'kwik-bound', '--learner', 'enum_conjunction', '--d', '2', '--sequence', str(path)])
    assert result.exit_code == 2


def test_kwik_bound_rejects_sequence_of_wrong_dimension(runner, tmp_path):
    path = tmp_path / 'sequence.json'
    path.write_text(json.dumps([[[1, 0, 1], 1]]))
    result = runner.invoke(args=[
        'kwik-bound', '--learner', 'enum_conjunction', '--d', '2', '--sequence', str(path)])
    assert result.exit_code == 2
    assert 'dimension 3' in result.output


@pytest.mark.parametrize('family', ['adversarial_conjunction', 'conjunction'])
def test_enumeration_learner_needs_two_variables(runner, tmp_path, family):
    config = write_config(tmp_path, algorithm='enum_conjunction', family=family, d=1)
    result = runner.invoke(args=['simulate', '--config', config, '--out', str(tmp_path / 'x')])
    assert result.exit_code == 2


def test_kwik_bound_with_one_variable_is_a_config_error(runner):
    result = runner.invoke(args=['kwik-bound', '--learner', 'enum_conjunction', '--d', '1'])
    assert result.exit_code == 2
