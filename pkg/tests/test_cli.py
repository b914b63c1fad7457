import numpy as np
import pytest

from adr_split import cli
from adr_split.errors import ConfigError

TINY = """
beta1 = "-5*(y+1)"
beta2 = "5*(x+1)"
f     = "5"
steps = 2
curves_beta  = 17
curves_gamma = 17
kx = 8
ky = 8
h_trace = 0.01
h_fem   = 0.125
"""

REPO_CONFIG = __file__.rsplit("/", 2)[0] + "/configs/rotating_flow.cfg"


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigParsing:
    def test_shipped_benchmark_config(self):
        cfg = cli.load_config(REPO_CONFIG)
        assert cfg.scheme.theta == 0.5
        assert cfg.scheme.dt == 0.001
        assert cfg.scheme.steps == 50
        assert cfg.disc.curves_beta == 129 and cfg.disc.curves_gamma == 129
        assert cfg.disc.kx == 64 and cfg.disc.ky == 64
        assert cfg.ref_cells_x == 15 and cfg.ref_cells_y == 15
        prob = cfg.problem
        assert prob.mu(0.3, 0.4) == 1.0
        assert prob.sigma(0.3, 0.4) == 1.0
        assert prob.f(0.3, 0.4) == 5.0
        assert prob.beta1(0.0, 0.0) == -5.0
        assert prob.beta2(0.0, 0.0) == 5.0
        assert prob.u0 is None

    def test_defaults_applied_for_omitted_keys(self, tmp_path):
        cfg = cli.load_config(write_cfg(tmp_path, 'beta1 = "1"\nbeta2 = "0"\n'))
        assert cfg.disc.kx == 64
        assert cfg.scheme.theta == 0.5
        assert cfg.tol_linf == 0.10 and cfg.tol_l1 == 0.05
        assert cfg.mode == "transient"

    def test_theta_out_of_range_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.load_config(write_cfg(tmp_path, 'beta1="1"\nbeta2="0"\ntheta = 1.5\n'))

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.load_config(write_cfg(tmp_path, 'beta1="1"\nbeta2="0"\nbogus = 3\n'))
        assert "bogus" in str(err.value)

    def test_missing_advection_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.load_config(write_cfg(tmp_path, 'beta1="1"\n'))

    def test_bad_expression_names_field(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            cli.load_config(write_cfg(tmp_path, 'beta1="1+"\nbeta2="0"\n'))
        assert "beta1" in str(err.value)

    def test_duplicate_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.load_config(write_cfg(tmp_path, 'beta1="1"\nbeta1="2"\nbeta2="0"\n'))

    def test_comments_and_quotes(self, tmp_path):
        text = '# full line\nbeta1 = "-5*(y+1)"  # inline\nbeta2 = \'5*(x+1)\'\n'
        cfg = cli.load_config(write_cfg(tmp_path, text))
        assert cfg.problem.beta1(0.0, 0.0) == -5.0

    def test_nonexistent_path(self):
        with pytest.raises(ConfigError):
            cli.load_config("/no/such/file.cfg")


class TestMain:
    def test_missing_config_flag_exits_2(self, capsys):
        assert cli.main(["solve"]) == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_no_subcommand_exits_2(self):
        assert cli.main([]) == 2

    def test_nonexistent_config_exits_2(self, tmp_path, capsys):
        code = cli.main(["solve", "--config", str(tmp_path / "nope.cfg")])
        assert code == 2
        assert "configuration error" in capsys.readouterr().err

    def test_solve_zero_source_writes_zero_csv(self, tmp_path):
        cfg = write_cfg(tmp_path, TINY.replace('f     = "5"', 'f = "0"\nu0 = "0"'))
        code = cli.main(["solve", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        u = np.loadtxt(tmp_path / "out" / "solution.csv", delimiter=",",
                       skiprows=1, usecols=2)
        assert u.shape == (81,)
        assert np.all(u == 0.0)
        assert (tmp_path / "out" / "report.txt").exists()

    def test_solve_with_snapshots_and_vtk(self, tmp_path):
        cfg = write_cfg(tmp_path, TINY)
        out = tmp_path / "out"
        code = cli.main(["solve", "--config", cfg, "--out", str(out),
                         "--snapshots", "1", "--vtk"])
        assert code == 0
        assert (out / "solution.vtk").exists()
        assert (out / "snapshot_0000.csv").exists()
        assert (out / "snapshot_0002.csv").exists()

    def test_reference_subcommand(self, tmp_path):
        cfg = write_cfg(tmp_path, TINY)
        out = tmp_path / "ref"
        assert cli.main(["reference", "--config", cfg, "--out", str(out)]) == 0
        rows = np.loadtxt(out / "reference.csv", delimiter=",", skiprows=1)
        assert rows.shape == (16 * 16, 3)

    def test_compare_pass_and_fail_exit_codes(self, tmp_path, capsys):
        loose = write_cfg(tmp_path, TINY + "tol_linf = 10\ntol_l1 = 10\n", "loose.cfg")
        assert cli.main(["compare", "--config", loose,
                         "--out", str(tmp_path / "c1")]) == 0
        assert "PASS" in capsys.readouterr().out
        strict = write_cfg(tmp_path, TINY + "tol_linf = 1e-9\ntol_l1 = 1e-9\n", "strict.cfg")
        assert cli.main(["compare", "--config", strict,
                         "--out", str(tmp_path / "c2")]) == 4
        assert "FAIL" in capsys.readouterr().out

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, 'beta1 = "sqrt(x-0.5)"\nbeta2 = "1"\nsteps = 1\n')
        code = cli.main(["solve", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_trace_debug_writes_families(self, tmp_path):
        cfg = write_cfg(tmp_path, TINY)
        out = tmp_path / "dbg"
        assert cli.main(["trace-debug", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "beta_curves.csv").exists()
        assert (out / "gamma_curves.csv").exists()
