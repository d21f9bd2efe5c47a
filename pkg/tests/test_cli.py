import json
import subprocess
import sys

import pytest

from wkcech.cli import RunConfig, cache_key, main


@pytest.fixture
def specs(tmp_path):
    files = {
        "w1": "k1 = 1\nk2 = 1\n",
        "w2": "k1 = 2\nk2 = 0\n",
        "w3": "k1 = 3\nk2 = -1\n",
        "w2y": "k1 = 2\nk2 = 0\nperturb.v1 = z u2^4\n",
        "w2tau": "k1 = 2\nk2 = 0\nperturb.v1 = z u2\n",
    }
    out = {}
    for name, text in files.items():
        p = tmp_path / f"{name}.spec"
        p.write_text(text)
        out[name] = str(p)
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out.out)


def test_h1_dimension(capsys, specs):
    code, rep = run_json(capsys, "h1", "--spec", specs["w2y"], "--bundle", "tangent")
    assert code == 0 and rep["dimension"] == 3
    code, rep = run_json(capsys, "h1", "--spec", specs["w1"])
    assert code == 0 and rep["dimension"] == 0


def test_h1_end_tangent_pattern(capsys, specs):
    code, rep = run_json(capsys, "h1", "--spec", specs["w2"], "--bundle", "end-tangent", "--u-deg", "3")
    assert code == 0
    assert "e4: z^-1 u2^s" in rep["family_pattern"]
    assert "e7: z^-1 u2^s" in rep["family_pattern"]


def test_moduli(capsys, specs):
    _, rep = run_json(capsys, "moduli", "--spec", specs["w3"], "--j", 2)
    assert rep["projective_dimension"] == 3
    _, rep = run_json(capsys, "moduli", "--spec", specs["w1"], "--j", 1)
    assert rep["count"] == 0 and rep["generators"] == []


def test_other_commands(capsys, specs, tmp_path):
    _, rep = run_json(capsys, "split-type", "--spec", specs["w2"], "--bundle", "ext(2, z^-1)")
    assert rep["transition_exponents"] == [1, -1]
    _, rep = run_json(capsys, "affine-iso", "--j1", 1, "--j2", 3)
    assert rep["verdict"] == "NotIsomorphic" and rep["forced_A"] == "u2^2"
    _, rep = run_json(capsys, "ext", "--spec", specs["w1"], "--j1", -1, "--j2", 1, "--u-deg", 1)
    assert rep["dimension"] == 1
    _, rep = run_json(capsys, "sections", "--spec", specs["w2tau"], "--bundle", "ext(2, z u1)", "--neighborhood", 1)
    assert rep["dimension"] == 11
    _, rep = run_json(capsys, "iso", "--spec", specs["w2"], "--bundle", "ext(2, z^-1)", "--other", "ext(2, z^3)")
    assert rep["verdict"] == "NotIsomorphic"
    coc = tmp_path / "c.kv"
    coc.write_text("cocycle.2 = z^-1 u2\n")
    _, rep = run_json(capsys, "integrate", "--spec", specs["w2"], "--cocycle", coc)
    assert rep["integrable"] and "perturb.v1 = z u2" in rep["spec"]
    mp = tmp_path / "phi.kv"
    mp.write_text("map.u.1 = z\nmap.u.2 = z u1^2\nmap.u.3 = u2\nmap.v.1 = xi\nmap.v.2 = v1^2\nmap.v.3 = xi v2\n")
    _, rep = run_json(capsys, "verify-map", "--map", mp, "--source", specs["w2"], "--target", specs["w3"])
    assert rep["holomorphic"] is True


def test_parse_errors_exit_1(capsys, specs, tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("k1 = x\n")
    assert run(capsys, "h1", "--spec", bad)[0] == 1
    assert run(capsys, "h1", "--spec", tmp_path / "missing.spec")[0] == 1
    assert run(capsys, "h1", "--spec", specs["w2"], "--bundle", "cotangent")[0] == 1
    assert run(capsys, "h1", "--spec", specs["w2"], "--growth-cap", 0)[0] == 1
    assert run(capsys, "moduli", "--spec", specs["w2"])[0] == 1
    assert run(capsys, "no-such-command")[0] == 1


def test_window_exit_2(capsys, specs):
    code, rep = run_json(capsys, "h1", "--spec", specs["w2y"], "--u-deg", 2)
    assert code == 2 and rep["error"] == "WindowTooSmall"
    code, _ = run(capsys, "paper-suite", "--u-deg", 1, "--only", "2")
    assert code == 2


def test_suite_subset_and_failures(capsys):
    code, rep = run_json(capsys, "paper-suite", "--only", "1,7")
    assert code == 0 and rep["failed"] == 0
    code, rep = run_json(capsys, "paper-suite", "--only", "12")
    assert code == 3 and rep["failed"] == 1


def test_config_file_and_flag_precedence(capsys, specs, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("u_deg = 2\nformat = json\n")
    code, out = run(capsys, "h1", "--spec", specs["w2y"], "--config", cfg)
    assert code == 2 and json.loads(out.out)["error"] == "WindowTooSmall"
    code, out = run(capsys, "h1", "--spec", specs["w2y"], "--config", cfg, "--u-deg", 4)
    assert code == 0 and json.loads(out.out)["dimension"] == 3


def test_deterministic_and_cached(capsys, specs, tmp_path):
    args = ["h1", "--spec", specs["w2y"], "--format", "json"]
    _, first = run(capsys, *args)
    _, second = run(capsys, *args)
    assert first.out == second.out
    cache = tmp_path / "cache"
    _, fresh = run(capsys, *args, "--cache-dir", cache)
    files = list(cache.glob("*.json"))
    assert len(files) == 1 and not list(cache.glob("*.tmp"))
    _, cached = run(capsys, *args, "--cache-dir", cache)
    assert fresh.out == cached.out == first.out


def test_cache_key_depends_on_inputs():
    cfg = RunConfig()
    a = cache_key("h1", [b"k1 = 2\nk2 = 0\n"], {"bundle": "tangent"}, cfg)
    assert a == cache_key("h1", [b"k1 = 2\nk2 = 0\n"], {"bundle": "tangent"}, cfg)
    assert a != cache_key("h1", [b"k1 = 3\nk2 = -1\n"], {"bundle": "tangent"}, cfg)
    assert a != cache_key("h1", [b"k1 = 2\nk2 = 0\n"], {"bundle": "line(2)"}, cfg)
    assert a != cache_key("h1", [b"k1 = 2\nk2 = 0\n"], {"bundle": "tangent"}, RunConfig(growth_cap=2))


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(growth_cap=0)
    with pytest.raises(ValueError):
        RunConfig(output_format="xml")


def test_module_entry_point(specs):
    proc = subprocess.run(
        [sys.executable, "-m", "wkcech", "h1", "--spec", specs["w1"], "--format", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["dimension"] == 0
