from click.testing import CliRunner
from redent.cli import cli

def test_version():
    runner = CliRunner()
    with runner.isolated_filesystem():
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert result.output.startswith("cli, version ")


def test_help_lists_commands():
    runner = CliRunner()
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("run", "regen", "list-checks"):
        assert command in result.output


def test_list_checks():
    runner = CliRunner()
    result = runner.invoke(cli, ["list-checks"])
    assert result.exit_code == 0
    assert "check_gt_hp [p]" in result.output
    assert "check_reduced_jensen [-]" in result.output
    assert result.output.rstrip().endswith("checks")
