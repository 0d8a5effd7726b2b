import json
import math
import subprocess
import sys

import pytest

from fairshare.cli import main

UPPER = {"agents": 3, "goods": 2, "valuations": [{"kind": "nonempty"}] * 3,
         "share": {"kind": "thinned_quantile", "c": 1.0, "q": 0.5}}
TWO_BLOCK = {"kind": "two_block", "red": [1, 2, 3], "blue": [4, 5, 6]}


def write(tmp_path, doc, name="inst.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def machine(out):
    return [line for line in out.splitlines() if line.count(",") >= 3]


def test_share_exact(tmp_path, capsys):
    code, out, _ = run(capsys, "share", write(tmp_path, UPPER), "--exact")
    assert code == 0
    assert machine(out) == [f"agent,{i},share,1" for i in (1, 2, 3)]


def test_share_mms_and_rmms(tmp_path, capsys):
    card = {"agents": 2, "goods": 5, "valuations": [{"kind": "additive", "weights": [1] * 5}] * 2, "share": {"kind": "mms"}}
    assert "agent,2,share,2" in run(capsys, "share", write(tmp_path, card))[1]
    comp = {"agents": 2, "goods": 6, "valuations": [TWO_BLOCK] * 2, "share": {"kind": "rmms"}}
    assert machine(run(capsys, "share", write(tmp_path, comp))[1]) == ["agent,1,share,0", "agent,2,share,0"]


def test_share_mc(tmp_path, capsys):
    code, out, _ = run(capsys, "share", write(tmp_path, UPPER), "--mc", "0.05", "0.01", "7")
    assert code == 0
    assert "agent,1,share_lo,1" in out and "mc,0,samples,1060" in out and "mc,0,seed,7" in out


def test_allocate_infeasible(tmp_path, capsys):
    code, out, _ = run(capsys, "allocate", write(tmp_path, UPPER))
    assert code == 1 and "INFEASIBLE" in out and "result,0,status,INFEASIBLE" in out


def test_allocate_feasible(tmp_path, capsys):
    doc = {"agents": 2, "goods": 4, "valuations": [{"kind": "additive", "weights": [1] * 4}] * 2,
           "share": {"kind": "thinned_quantile", "c": 1, "q": math.exp(-1)}}
    code, out, _ = run(capsys, "allocate", write(tmp_path, doc))
    assert code == 0 and "result,0,status,FEASIBLE" in out
    bundles = [line.split(",")[3].split() for line in out.splitlines() if ",bundle," in line]
    assert sorted(len(b) for b in bundles) == [2, 2]


def test_allocate_all_zero(tmp_path, capsys):
    zero = {"kind": "table", "values": {"": 0, "1": 0, "2": 0, "1,2": 0}}
    doc = {"agents": 2, "goods": 2, "valuations": [zero, zero], "share": {"kind": "proportional"}}
    code, out, _ = run(capsys, "allocate", write(tmp_path, doc))
    assert code == 0 and "agent,1,bundle,1 2" in out


def test_dist_csv(tmp_path, capsys):
    doc = {"agents": 2, "goods": 6, "valuations": [TWO_BLOCK] * 2, "share": {"kind": "rmms"}}
    code, out, _ = run(capsys, "dist", write(tmp_path, doc), "--agent", "2", "--p", "0.5")
    assert code == 0
    assert out.splitlines() == ["value,probability", "0,0.234375", "1,0.765625"]


def test_mms_rmms_commands(tmp_path, capsys):
    doc = {"agents": 2, "goods": 5, "valuations": [{"kind": "additive", "weights": [1] * 5}] * 2, "share": {"kind": "mms"}}
    path = write(tmp_path, doc)
    assert "agent,1,mms,2" in run(capsys, "mms", path)[1]
    assert "agent,1,rmms,2" in run(capsys, "rmms", path)[1]


def test_extremal_commands(capsys):
    code, out, _ = run(capsys, "extremal", "shadow", "M=4;k=2;F1=12,13", "1")
    assert code == 0 and out.splitlines()[0] == "1,2,3"
    assert run(capsys, "extremal", "bound", "n=2", "k=2", "M=5")[1].strip() == "4"
    assert run(capsys, "extremal", "bound", "2", "2", "5")[1].strip() == "4"
    assert run(capsys, "extremal", "cross", "M=5;k=2;F1=12,13,23;F2=12,13,23")[1].strip() == "CROSS-DEPENDENT"
    out = run(capsys, "extremal", "cross", "M=4;k=2;F1=12;F2=34")[1]
    assert "NOT CROSS-DEPENDENT" in out and "witness 12;34" in out
    assert run(capsys, "extremal", "maxmin", "2", "2", "5")[1].splitlines()[0] == "4"


def test_repro(capsys):
    for case in ("complementarity", "identical-goods", "threshold-window", "upper-bound"):
        code, out, _ = run(capsys, "repro", case)
        assert code == 0 and f"repro,{case},status,pass" in out
    assert run(capsys, "repro", "nope")[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "--seed", "42", "verify", "emc-tiny")
    assert code == 0 and "suite,emc-tiny,failures,0" in out and "suite,emc-tiny,seed,42" in out
    code, out, _ = run(capsys, "verify", "padding", "--seed", "3", "--cases", "20")
    assert code == 0 and "suite,padding,seed,3" in out and "suite,padding,cases,20" in out
    assert run(capsys, "verify", "nope")[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["share", "/no/such/file.json"],
        ["bogus"],
        [],
        ["extremal", "bound", "n=3", "k=2", "M=5"],
        ["extremal", "shadow", "M=4;k=2;F1=1x", "1"],
        ["extremal", "maxmin", "2", "2", "9"],
        ["--budget", "0", "verify", "kk"],
        ["share", "UPPER", "--mc", "0.9", "0.01"],
        ["dist", "UPPER", "--agent", "4"],
    ],
)
def test_error_exit_code(argv, capsys, tmp_path):
    argv = [write(tmp_path, UPPER) if a == "UPPER" else a for a in argv]
    assert run(capsys, *argv)[0] == 2


def test_bad_instance_exit_code(tmp_path, capsys):
    bad = dict(UPPER, agents=1, valuations=[{"kind": "nonempty"}])
    code, _, err = run(capsys, "share", write(tmp_path, bad))
    assert code == 2 and "error" in err


def test_thinning(capsys):
    code, out, _ = run(capsys, "thinning", "2", "--c", "0.03")
    assert code == 0 and "thinning,2,q_c,0.985" in out


def test_stdout_independent_of_threads(tmp_path):
    path = write(tmp_path, UPPER)
    outs = []
    for threads in ("1", "4"):
        proc = subprocess.run(
            [sys.executable, "-m", "fairshare", "--threads", threads, "--seed", "5", "mc", path,
             "--epsilon", "0.005", "--delta", "0.01"],
            capture_output=True, text=True, check=True,
        )
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
