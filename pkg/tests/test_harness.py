import json
import subprocess
import sys

import pytest

from fpplab import cli
from fpplab.errors import ValidationError
from fpplab.harness import (
    COLUMNS,
    ExperimentSpec,
    experiment_id,
    normalize,
    run,
    validate,
)


def _spec(tmp_path, **kw):
    data = {
        "kind": "mu",
        "law": [0, 1, 0.25],
        "direction": [1, 0],
        "n": 24,
        "R": 8,
        "seed": 77,
        "out": str(tmp_path),
    }
    data.update(kw)
    return ExperimentSpec.from_dict(data)


def test_validate_accepts_good_spec(tmp_path):
    assert validate(_spec(tmp_path)) == []


def test_validate_kappa_message(tmp_path):
    spec = _spec(tmp_path, kind="union-size", n=None, n_list=[16, 32], kappa=0.7)
    issues = validate(spec)
    assert ("kappa", "kappa must be in (0, 1/2)") in issues


def test_validate_requires_master_seed(tmp_path):
    spec = _spec(tmp_path, seed=None)
    assert any(f == "seed" for f, _ in validate(spec))


def test_validate_odd_chord_needs_auto_fix(tmp_path):
    spec = _spec(tmp_path, kind="defect", direction=None,
                 chord=[[1, 0], [0, 1]], n=9)
    assert any(f == "chord" for f, _ in validate(spec))
    fixed = normalize(_spec(tmp_path, kind="defect", direction=None,
                            chord=[[1, 0], [0, 1]], n=9, auto_fix_chords=True))
    assert fixed.chord == ((2, 0), (0, 2))
    assert validate(fixed) == []


def test_validate_unknown_kind():
    spec = ExperimentSpec(kind="frobnicate", seed=1)
    assert any(f == "kind" for f, _ in validate(spec))


def test_unknown_field_rejected():
    with pytest.raises(ValidationError):
        ExperimentSpec.from_dict({"kind": "mu", "seed": 1, "bogus": 3})


def test_run_degenerate_mu_row(tmp_path):
    res = run(_spec(tmp_path, law=[1, 1, 0.5], n=16, R=4))
    row = res.rows[0]
    assert row.label == "mu"
    assert row.mean == 1.0
    assert row.se == 0.0
    assert row.count == 4
    assert res.csv_path.exists()
    header = res.csv_path.read_text().splitlines()[0]
    assert header == ",".join(COLUMNS)


def test_thread_budget_does_not_change_bytes(tmp_path):
    outs = {}
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        res = run(_spec(out, threads=threads, R=12))
        outs[threads] = res.csv_path.read_bytes()
    assert outs[1] == outs[8]


def test_experiment_id_ignores_scheduling_fields(tmp_path):
    a = experiment_id(_spec(tmp_path, threads=1))
    b = experiment_id(_spec(tmp_path / "elsewhere", threads=8, block_size=7))
    assert a == b
    c = experiment_id(_spec(tmp_path, seed=78))
    assert a != c


def test_append_only_rows(tmp_path):
    spec = _spec(tmp_path, R=4, law=[1, 1, 0.5], n=8)
    r1 = run(spec)
    first = r1.csv_path.read_text().splitlines()
    r2 = run(spec)
    both = r2.csv_path.read_text().splitlines()
    assert both[: len(first)] == first
    assert len(both) == 2 * len(first) - 1  # header written once


def test_resume_reuses_blocks_and_reproduces_rows(tmp_path):
    spec = _spec(tmp_path, R=10, block_size=4)
    r1 = run(spec)
    ck = r1.csv_path.parent / ".checkpoints" / experiment_id(spec)
    blocks = sorted(ck.glob("*.json"))
    assert len(blocks) == 3
    # fresh output file, resumed computation: identical row bytes
    out2 = tmp_path / "second.csv"
    spec2 = _spec(tmp_path, R=10, block_size=4, out=str(tmp_path / "second.csv"))
    # same identity -> same checkpoint dir
    assert experiment_id(spec2) == experiment_id(spec)
    (tmp_path / "second.csv").parent.mkdir(exist_ok=True)
    import shutil

    ck2 = out2.parent / ".checkpoints" / experiment_id(spec2)
    if ck2.resolve() != ck.resolve():
        shutil.copytree(ck, ck2, dirs_exist_ok=True)
    r2 = run(spec2, resume=True)
    assert [r.csv_values() for r in r2.rows] == [r.csv_values() for r in r1.rows]


def test_sidecar_provenance(tmp_path):
    res = run(_spec(tmp_path, R=4))
    side = json.loads(res.sidecar_path.read_text())
    assert side["experiment_id"] == experiment_id(res.spec)
    assert side["spec"]["kind"] == "mu"
    assert "elapsed_s" in side


def test_out_env_var_default(tmp_path, monkeypatch):
    monkeypatch.setenv("FPPLAB_OUT", str(tmp_path / "envout"))
    spec = _spec(tmp_path, out=None, R=4, law=[1, 1, 0.5], n=8)
    spec.out = None
    res = run(spec)
    assert str(res.csv_path).startswith(str(tmp_path / "envout"))


def test_cross_process_reproducibility(tmp_path):
    # identical (box, law, seed, replica) in a fresh interpreter
    code = (
        "from fpplab.lattice import BoxSpec, WeightLaw, sample_config\n"
        "import hashlib\n"
        "cfg = sample_config(BoxSpec(lo=(0,0), hi=(24,24)), WeightLaw(0,1,0.25), 987, 3)\n"
        "print(hashlib.sha256(cfg.packed.tobytes()).hexdigest())\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    import hashlib

    from fpplab.lattice import BoxSpec, WeightLaw, sample_config

    cfg = sample_config(BoxSpec(lo=(0, 0), hi=(24, 24)), WeightLaw(0, 1, 0.25), 987, 3)
    assert out.stdout.strip() == hashlib.sha256(cfg.packed.tobytes()).hexdigest()


def test_cli_round_trip(tmp_path):
    rc = cli.main([
        "mu", "--law", "1,1,0.5", "--direction", "1,0", "--n", "8",
        "--R", "4", "--seed", "3", "--out", str(tmp_path),
    ])
    assert rc == 0
    assert list(tmp_path.glob("mu-*.csv"))


def test_cli_validation_exit_code(tmp_path, capsys):
    rc = cli.main([
        "union-size", "--law", "0,1,0.25", "--n-list", "16,32",
        "--kappa", "0.7", "--seed", "1", "--R", "4", "--out", str(tmp_path),
    ])
    assert rc == cli.EXIT_VALIDATION
    assert "kappa must be in (0, 1/2)" in capsys.readouterr().err


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "law": [1, 1, 0.5], "direction": [1, 0], "n": 8, "R": 4,
        "seed": 5, "out": str(tmp_path),
    }))
    rc = cli.main(["mu", "--config", str(cfg)])
    assert rc == 0


def test_oracle_suite_small(tmp_path):
    spec = ExperimentSpec.from_dict({
        "kind": "oracle-suite", "seed": 9, "oracle_configs": 8,
        "union_configs": 6, "out": str(tmp_path),
    })
    res = run(spec)
    verdicts = {r.label: r.verdict for r in res.rows}
    assert verdicts == {"oracle_equiv": "exact", "superset_law": "exact"}
