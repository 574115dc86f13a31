#!/usr/bin/env python3
"""End-to-end checks for the mcoin command line tool.

Usage: test_cli.py /path/to/mcoin
"""
import json
import struct
import subprocess
import sys
import tempfile
from pathlib import Path

MCOIN = None
WORK = None
BLOCKS = []  # hex of every block mined on the primary chain, in order


def run(*args, stdin=None, expect=0):
    p = subprocess.run([MCOIN, *args], input=stdin, capture_output=True,
                       text=True, cwd=WORK)
    if expect is not None and p.returncode != expect:
        raise AssertionError(
            f"{' '.join(args)}: exit {p.returncode}, wanted {expect}\n"
            f"stdout: {p.stdout}\nstderr: {p.stderr}")
    return p


def run_json(*args, **kw):
    return json.loads(run(*args, **kw).stdout)


def error_code(*args, stdin=None):
    p = run(*args, stdin=stdin, expect=None)
    assert p.returncode != 0, f"{' '.join(args)}: unexpectedly succeeded"
    lines = p.stdout.strip().splitlines()
    assert lines, f"{' '.join(args)}: no stdout error code"
    return lines[-1]


def write(name, obj):
    (Path(WORK) / name).write_text(json.dumps(obj))
    return name


def mine(key, *tx_hexes):
    out = run_json("chain", "mine", "--chain-dir", "chain", "--key", key,
                   *tx_hexes)
    BLOCKS.append(out["block"])
    return out


def test_keygen():
    a = run_json("keygen", "--seed", "11", "--out", "a.json")
    b = run_json("keygen", "--seed", "11", "--out", "b.json")
    assert a["pub"] == b["pub"]
    assert (Path(WORK) / "a.json").read_text() == \
        (Path(WORK) / "b.json").read_text()
    # the private key never reaches stdout
    priv = json.loads((Path(WORK) / "a.json").read_text())["priv"]
    assert priv not in json.dumps(a)

    c = run_json("keygen", "--out", "c.json")
    d = run_json("keygen", "--out", "d.json")
    assert c["pub"] != d["pub"]


def setup_chain():
    root = run_json("keygen", "--seed", "1", "--out", "root.json")
    run_json("keygen", "--seed", "2", "--out", "miner.json")
    run_json("keygen", "--seed", "3", "--out", "alice.json")
    cfg = {
        "default_numeric_policies": {"12": 0},
        "initial_permanent_policies": [],
        "initial_reward": 50,
        "pow_target": "ff" * 32,
        "require_receiver_role_proof": False,
        "reward_epoch": 100,
        "root_pubkey": root["pub"],
        "scheme_id": "secp256k1",
    }
    out = run_json("chain", "init", write("genesis.json", cfg),
                   "--chain-dir", "chain")
    assert out["height"] == 0


def test_init_and_inspect():
    accounts = run_json("chain", "inspect", "accounts", "--chain-dir", "chain")
    assert len(accounts) == 1
    assert accounts[0]["roles"] == "MCLUA"
    assert accounts[0]["depth"] == 0
    assert accounts[0]["parent"] is None


def test_mine_empty():
    out = mine("root.json")
    assert out["height"] == 1
    assert out["txs"] == 1  # coinbase only


def test_tx_build_and_validate():
    spec = {
        "keys": {"root": "root.json", "miner": "miner.json",
                 "alice": "alice.json"},
        "role_changes": [
            {"coverer": "root", "target": "miner", "add": True, "roles": "U"},
            {"coverer": "root", "target": "alice", "add": True, "roles": "U"},
        ],
        "policy_changes": [
            {"issuer": "root", "type": 8, "param": 50, "permanent": True},
        ],
    }
    hexstr = run(
        "tx", "build", write("grant.json", spec), "--chain-dir", "chain"
    ).stdout.strip()
    # the permanent manual-reward record has a fixed 64-bit encoding
    assert struct.pack("<Q", 0xE000000800000032).hex() in hexstr

    verdict = run_json("validate", hexstr, "--chain-dir", "chain")
    assert verdict["ok"] and verdict["kind"] == "transaction"
    assert verdict["management"]

    out = mine("root.json", hexstr)
    assert out["height"] == 2 and out["txs"] == 2

    policy = run_json("chain", "inspect", "policy", "--chain-dir", "chain")
    assert policy["effective"][8] == 50
    assert [r for r in policy["records"] if r["type"] == 8 and r["permanent"]]

    # the fresh U grant lets the miner mine
    out = mine("miner.json")
    assert out["height"] == 3


def test_send_and_supply():
    spec = {
        "keys": {"root": "root.json", "alice": "alice.json"},
        "sends": [{"from": "root", "to": "alice", "amount": 30}],
    }
    hexstr = run(
        "tx", "build", write("send.json", spec), "--chain-dir", "chain"
    ).stdout.strip()
    mine("miner.json", hexstr)

    utxo = run_json("chain", "inspect", "utxo", "--chain-dir", "chain")
    alice = json.loads((Path(WORK) / "alice.json").read_text())["pub"]
    assert any(e["owner"] == alice and e["amount"] == 30
               for e in utxo["entries"])
    supply = run_json("chain", "inspect", "supply", "--chain-dir", "chain")
    assert supply["utxo_total"] == supply["total_coinbase"]
    assert supply["utxo_total"] == 4 * 50

    state = run_json("chain", "inspect", "--chain-dir", "chain")
    assert state["height"] == 4
    assert state["state"]["utxo_count"] == len(utxo["entries"])


def test_apply_to_second_chain():
    mine("miner.json")

    # an already-connected block still validates against its stored parent
    verdict = run_json("validate", BLOCKS[-1], "--chain-dir", "chain")
    assert verdict["ok"] and verdict["kind"] == "block"
    assert verdict["height"] == len(BLOCKS)

    # replaying every block into a fresh chain reproduces the same state
    run_json("chain", "init", "genesis.json", "--chain-dir", "chain2")
    for i, blk in enumerate(BLOCKS[:-1]):
        out = run_json("chain", "apply", blk, "--chain-dir", "chain2")
        assert out["height"] == i + 1

    # a block whose body was tampered with is rejected with a stable code
    blk = BLOCKS[-1]
    flip = "0" if blk[-1] != "0" else "1"
    assert error_code("chain", "apply", blk[:-1] + flip, "--chain-dir",
                      "chain2") in ("BadMerkleRoot", "SignatureInvalid")

    out = run_json("chain", "apply", blk, "--chain-dir", "chain2")
    assert out["height"] == len(BLOCKS)
    a = run_json("chain", "inspect", "--chain-dir", "chain")
    b = run_json("chain", "inspect", "--chain-dir", "chain2")
    assert a == b


def test_error_paths():
    # an account outside the tree cannot resolve a role proof
    run_json("keygen", "--seed", "9", "--out", "nobody.json")
    spec = {
        "keys": {"nobody": "nobody.json", "alice": "alice.json"},
        "sends": [{"from": "nobody", "to": "alice", "amount": 1}],
    }
    assert error_code("tx", "build", write("bad_send.json", spec),
                      "--chain-dir", "chain") == "UnresolvableInput"

    # a member with too little money cannot fund the send
    spec = {
        "keys": {"root": "root.json", "alice": "alice.json"},
        "sends": [{"from": "root", "to": "alice", "amount": 10 ** 9}],
    }
    assert error_code("tx", "build", write("poor.json", spec),
                      "--chain-dir", "chain") == "UnresolvableInput"

    # a sender whose key the spec never names cannot sign
    spec = {"keys": {}, "sends": [{"from": "ghost", "to": "ghost",
                                   "amount": 1}]}
    assert error_code("tx", "build", write("ghost.json", spec),
                      "--chain-dir", "chain") == "SigningKeyMissing"

    assert error_code("validate", "zz", "--chain-dir", "chain") == "BadHex"
    assert error_code("validate", "deadbeef",
                      "--chain-dir", "chain") == "Truncated"
    assert error_code("chain", "init", "genesis.json",
                      "--chain-dir", "chain") == "IOError"  # already exists

    p = run("chain", "bogus", expect=None)
    assert p.returncode != 0


def test_sim_run():
    hm = run_json("keygen", "--seed", "1", "--scheme", "hmac-mock",
                  "--out", "hm.json")
    scenario = {
        "seed": 5,
        "duration": 30000,
        "block_interval": 600,
        "settle_depth": 12,
        "genesis": {
            "default_numeric_policies": {},
            "initial_permanent_policies": [],
            "initial_reward": 50,
            "pow_target": "ff" * 32,
            "require_receiver_role_proof": False,
            "reward_epoch": 1000000,
            "root_pubkey": hm["pub"],
            "scheme_id": "hmac-mock",
        },
        "nodes": [
            {"id": "admin", "behavior": "administrator",
             "hashpower": [0, 1], "key_seed": 1},
            {"id": "m1", "behavior": "compliant_miner",
             "hashpower": [1, 2], "key_seed": 2},
            {"id": "m2", "behavior": "compliant_miner",
             "hashpower": [1, 2], "key_seed": 3},
        ],
        "actions": [],
    }
    write("scenario.json", scenario)
    a = run("sim", "run", "scenario.json").stdout
    b = run("sim", "run", "scenario.json").stdout
    assert a == b  # identical bytes for identical runs
    rep = json.loads(a)
    assert rep["canonical"]["height"] > 12
    assert rep["scenario"]["seed"] == 5

    run_json("sim", "run", "scenario.json", "--out", "report.json")
    assert json.loads((Path(WORK) / "report.json").read_text()) == rep

    bad = dict(scenario, nodes=scenario["nodes"][1:])  # no administrator
    write("bad_scenario.json", bad)
    assert error_code("sim", "run", "bad_scenario.json") == "BadScenario"


def main():
    global MCOIN, WORK
    if len(sys.argv) != 2:
        print("usage: test_cli.py /path/to/mcoin", file=sys.stderr)
        return 2
    MCOIN = str(Path(sys.argv[1]).resolve())
    with tempfile.TemporaryDirectory(prefix="mcoin_cli.") as work:
        WORK = work
        test_keygen()
        setup_chain()
        test_init_and_inspect()
        test_mine_empty()
        test_tx_build_and_validate()
        test_send_and_supply()
        test_apply_to_second_chain()
        test_error_paths()
        test_sim_run()
    print("test_cli: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
