// Copyright (c) 2026 The mcoin developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

// Command-line surface over the library: key generation, declarative
// transaction construction, validation, chain directories and scenario
// runs. All JSON output is canonical (sorted keys, lowercase hex) so runs
// can be diffed byte for byte. On failure the human-readable message goes
// to stderr and the stable error code is the last line on stdout, with a
// nonzero exit.

#include <mcoin/chain.hpp>
#include <mcoin/nvalue.hpp>
#include <mcoin/serialize.hpp>
#include <mcoin/simnet.hpp>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/rand.h>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mcoin;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw McoinError(Err::IOError, "cannot open " + path);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw McoinError(Err::IOError, "cannot write " + path);
    f << text;
    if (!f.good()) throw McoinError(Err::IOError, "short write to " + path);
}

std::string read_stdin() {
    std::ostringstream out;
    out << std::cin.rdbuf();
    return out.str();
}

std::string strip_ws(std::string s) {
    std::string out;
    for (char c : s)
        if (!isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

// Positional hex argument, falling back to stdin.
std::string hex_arg(const std::string& arg) {
    std::string h = arg.empty() ? read_stdin() : arg;
    h = strip_ws(h);
    if (h.empty()) throw McoinError(Err::BadHex, "no hex input given");
    return h;
}

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw McoinError(Err::BadConfig, "malformed JSON in " + what);
    return j;
}

struct KeyFile {
    std::string scheme_id;
    std::string label;
    KeyPair kp;
};

KeyFile load_key(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw McoinError(Err::SigningKeyMissing, "cannot open key file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    json j = parse_json(buf.str(), path);
    if (!j.is_object() || !j.contains("priv") || !j.contains("scheme"))
        throw McoinError(Err::SigningKeyMissing, "not a key file: " + path);
    KeyFile k;
    k.scheme_id = j["scheme"].get<std::string>();
    k.label = j.value("label", "");
    const SignatureScheme& scheme = SignatureScheme::get(k.scheme_id);
    k.kp = scheme.derive(from_hex(j["priv"].get<std::string>()));
    if (j.contains("pub") &&
        from_hex(j["pub"].get<std::string>()) != k.kp.pub)
        throw McoinError(Err::SigningKeyMissing,
                         "public key does not match private key in " + path);
    return k;
}

int cmd_keygen(std::optional<uint64_t> seed, const std::string& scheme_id,
               const std::string& label, const std::string& out_path) {
    const SignatureScheme& scheme = SignatureScheme::get(scheme_id);
    KeyPair kp;
    if (seed) {
        kp = keypair_from_seed(scheme, *seed);
    } else {
        Bytes priv(32);
        for (int attempt = 0;; ++attempt) {
            if (RAND_bytes(priv.data(), static_cast<int>(priv.size())) != 1)
                throw McoinError(Err::IOError, "system randomness unavailable");
            try {
                kp = scheme.derive(priv);
                break;
            } catch (const McoinError&) {
                if (attempt > 16) throw;
            }
        }
    }
    json key;
    key["label"] = label;
    key["priv"] = to_hex(kp.priv);
    key["pub"] = to_hex(kp.pub);
    key["scheme"] = scheme_id;
    write_file(out_path, key.dump() + "\n");

    json out; // the private key stays in the file
    out["out"] = out_path;
    out["pub"] = to_hex(kp.pub);
    out["scheme"] = scheme_id;
    std::cout << out.dump() << "\n";
    return 0;
}

// Declarative transaction builder. The spec document names signing keys by
// file path and refers to them by name everywhere else:
//   {
//     "keys": {"root": "root.json", "alice": "alice.json"},
//     "sends": [{"from": "root", "to": "alice", "amount": 10}],
//     "role_changes": [{"coverer": "root", "target": "alice",
//                       "add": true, "roles": "U"}],
//     "policy_changes": [{"issuer": "root", "type": 8, "param": 50,
//                         "permanent": true}],
//     "fee": 0, "lock_time": 7
//   }
// "to"/"target" also accept a raw 33-byte public key in hex.
class TxBuilder {
public:
    TxBuilder(const ChainState& st, const json& spec)
        : st_(st), ctx_(st.tip_context()),
          scheme_(SignatureScheme::get(ctx_.params.scheme_id)), spec_(spec) {
        if (!spec.is_object())
            throw McoinError(Err::BadConfig, "transaction spec must be an object");
        if (spec.contains("keys"))
            for (auto& [name, path] : spec["keys"].items())
                keys_.emplace(name, load_key(path.get<std::string>()));
    }

    Transaction build() {
        for (const json& s : spec_.value("sends", json::array())) add_send(s);
        for (const json& r : spec_.value("role_changes", json::array()))
            add_role_change(r);
        for (const json& p : spec_.value("policy_changes", json::array()))
            add_policy_change(p);
        if (tx_.vout.empty())
            throw McoinError(Err::BadConfig, "spec produces no outputs");

        finish_coin_selection();
        tx_.n_lock_time = spec_.value(
            "lock_time", static_cast<uint32_t>(st_.height() + 1));

        Hash32 digest = tx_digest(tx_);
        for (size_t i = 0; i < tx_.vin.size(); ++i) {
            const KeyPair* signer = signers_[i];
            if (!signer) continue;
            tx_.vin[i].script_sig =
                ScriptSig{scheme_.sign(signer->priv, digest), signer->pub};
        }

        // Pre-flight: judge the result exactly as a block builder would.
        ValidationContext next = ctx_;
        next.height += 1;
        TxVerdict v = validate_tx(tx_, next, 1);
        if (!v.ok)
            throw McoinError(v.err, "built transaction fails validation");
        return tx_;
    }

private:
    const KeyFile& key(const std::string& name) {
        auto it = keys_.find(name);
        if (it == keys_.end())
            throw McoinError(Err::SigningKeyMissing,
                             "spec names no key \"" + name + "\"");
        return it->second;
    }

    Bytes pub_of(const std::string& ref) {
        auto it = keys_.find(ref);
        if (it != keys_.end()) return it->second.kp.pub;
        Bytes b;
        if (try_from_hex(ref, b) && b.size() == 33) return b;
        throw McoinError(Err::BadConfig,
                         "\"" + ref + "\" is neither a key name nor a "
                         "33-byte public key");
    }

    const KeyFile* key_for_pub(const Bytes& pub) {
        for (auto& [name, k] : keys_)
            if (k.kp.pub == pub) return &k;
        return nullptr;
    }

    size_t add_vin(const OutPoint& o, const KeyPair* signer) {
        auto it = vin_of_.find(o);
        if (it != vin_of_.end()) return it->second;
        tx_.vin.push_back(TxIn{o, std::nullopt, 0xFFFFFFFFu});
        signers_.push_back(signer);
        size_t idx = tx_.vin.size() - 1;
        vin_of_[o] = idx;
        return idx;
    }

    // One vin spending the account's authoritative grant for the first
    // active role in `prefer`; identifies the account to the validator.
    void add_role_proof(const Bytes& account,
                        std::initializer_list<Role> prefer) {
        const KeyFile* k = key_for_pub(account);
        if (!k)
            throw McoinError(Err::SigningKeyMissing,
                             "no key provided for account " + to_hex(account));
        for (Role r : prefer) {
            auto g = ctx_.tree.grant_for(account, r);
            if (g && g->active) {
                add_vin(g->outpoint, &k->kp);
                return;
            }
        }
        throw McoinError(Err::UnresolvableInput,
                         "account " + to_hex(account) +
                             " holds no active grant usable here");
    }

    void add_send(const json& s) {
        const KeyFile& from = key(s.at("from").get<std::string>());
        Bytes to = pub_of(s.at("to").get<std::string>());
        uint64_t amount = s.at("amount").get<uint64_t>();
        tx_.vout.push_back(TxOut{encode_nvalue(CoinTransfer{amount}), to});
        auto& plan = spend_plans_[from.kp.pub];
        plan.key = &from;
        plan.out_total += amount;
        add_role_proof(from.kp.pub, {Role::U});
        if (ctx_.params.require_receiver_role_proof && to != from.kp.pub)
            add_role_proof(to, {Role::U});
    }

    void add_role_change(const json& r) {
        const KeyFile& coverer = key(r.at("coverer").get<std::string>());
        Bytes target = pub_of(r.at("target").get<std::string>());
        bool add = r.value("add", true);
        RoleSet roles = RoleSet::from_letters(r.at("roles").get<std::string>());
        tx_.vout.push_back(
            TxOut{encode_nvalue(RoleChange{add, roles}), target});
        add_role_proof(coverer.kp.pub, {Role::M, Role::A, Role::L});
    }

    void add_policy_change(const json& p) {
        const KeyFile& issuer = key(p.at("issuer").get<std::string>());
        bool permanent = p.value("permanent", false);
        uint32_t ptype = p.at("type").get<uint32_t>();
        uint32_t param = p.at("param").get<uint32_t>();
        tx_.vout.push_back(
            TxOut{encode_nvalue(PolicyChange{permanent, ptype, param}),
                  issuer.kp.pub});
        add_role_proof(issuer.kp.pub, {Role::M});
    }

    // Selects coins for every sender and pays change back; the fee rides on
    // the first sender. Runs after all sends so one sender's multiple sends
    // share inputs.
    void finish_coin_selection() {
        if (spend_plans_.empty()) return;
        uint64_t fee = spec_.value("fee", ctx_.policy.effective(12));
        bool fee_assigned = false;
        for (auto& [pub, plan] : spend_plans_) {
            uint64_t need = plan.out_total;
            if (!fee_assigned) {
                need += fee;
                fee_assigned = true;
            }
            uint64_t selected = 0;
            for (const auto& [op, entry] : ctx_.utxo) {
                if (selected >= need) break;
                if (entry.owner != pub) continue;
                if (vin_of_.count(op)) continue;
                add_vin(op, &plan.key->kp);
                selected += entry.amount;
            }
            if (selected < need)
                throw McoinError(Err::UnresolvableInput,
                                 "insufficient funds: account " + to_hex(pub) +
                                     " holds " + std::to_string(selected) +
                                     " of " + std::to_string(need));
            if (selected > need)
                tx_.vout.push_back(TxOut{
                    encode_nvalue(CoinTransfer{selected - need}), pub});
        }
    }

    struct SpendPlan {
        const KeyFile* key = nullptr;
        uint64_t out_total = 0;
    };

    const ChainState& st_;
    ValidationContext ctx_;
    const SignatureScheme& scheme_;
    json spec_;
    std::map<std::string, KeyFile> keys_;
    Transaction tx_;
    std::vector<const KeyPair*> signers_;
    std::map<OutPoint, size_t> vin_of_;
    std::map<Bytes, SpendPlan> spend_plans_;
};

int cmd_tx_build(const std::string& spec_path, const std::string& chain_dir) {
    std::string text = spec_path == "-" ? read_stdin() : read_file(spec_path);
    json spec = parse_json(text, "transaction spec");
    ChainState st = ChainState::open(chain_dir);
    Transaction t = TxBuilder(st, spec).build();
    std::cout << to_hex(serialize_tx(t)) << "\n";
    return 0;
}

int cmd_validate(const std::string& arg, const std::string& chain_dir) {
    Bytes raw = from_hex(hex_arg(arg));
    ChainState st = ChainState::open(chain_dir);

    Transaction t;
    bool is_tx = true;
    try {
        t = deserialize_tx(raw);
    } catch (const McoinError&) {
        is_tx = false;
    }
    if (is_tx) {
        ValidationContext ctx = st.tip_context();
        ctx.height += 1;
        TxVerdict v = validate_tx(t, ctx, 1);
        if (!v.ok) throw McoinError(v.err, "transaction rejected");
        json out;
        out["kind"] = "transaction";
        out["ok"] = true;
        out["id"] = to_hex(tx_id(t));
        out["management"] = v.cls.is_management;
        out["fee"] = v.fee;
        out["created"] = v.created;
        std::cout << out.dump() << "\n";
        return 0;
    }

    Block b = deserialize_block(raw);
    const StoredBlock* parent = st.find(b.header.prev_block_hash);
    if (!parent) throw McoinError(Err::UnknownParent, "parent block unknown");
    ValidationContext ctx = st.context_for(b.header.prev_block_hash);
    uint64_t reward = block_reward(ctx, parent->height + 1);
    BlockResult res = validate_block(b, ctx, reward);
    if (!res.ok()) throw McoinError(res.err, "block rejected");
    json out;
    out["kind"] = "block";
    out["ok"] = true;
    out["hash"] = to_hex(block_hash(b.header));
    out["height"] = parent->height + 1;
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_chain_init(const std::string& config_path, const std::string& dir) {
    GenesisConfig g = genesis_from_json(read_file(config_path));
    ChainState st = ChainState::init(dir, g);
    json out;
    out["chain_dir"] = dir;
    out["genesis_hash"] = to_hex(st.genesis_id());
    out["height"] = st.height();
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_chain_mine(const std::string& dir, const std::string& key_path,
                   std::optional<uint32_t> timestamp,
                   const std::vector<std::string>& tx_hexes, bool from_stdin) {
    ChainState st = ChainState::open(dir);
    KeyFile key = load_key(key_path);
    std::vector<Transaction> txs;
    std::vector<std::string> hexes = tx_hexes;
    if (from_stdin) {
        std::string line;
        while (std::getline(std::cin, line)) {
            line = strip_ws(line);
            if (!line.empty()) hexes.push_back(line);
        }
    }
    for (const std::string& h : hexes)
        txs.push_back(deserialize_tx(from_hex(h)));

    uint32_t ts = timestamp ? *timestamp
                            : static_cast<uint32_t>(st.height() + 1);
    Block b;
    Err e = st.mine_block(txs, key.kp, ts, b);
    if (e != Err::None) throw McoinError(e, "cannot assemble block");
    e = st.apply_block(b);
    if (e != Err::None) throw McoinError(e, "mined block failed to connect");
    json out;
    out["hash"] = to_hex(block_hash(b.header));
    out["height"] = st.height();
    out["txs"] = b.txs.size();
    out["block"] = to_hex(serialize_block(b));
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_chain_apply(const std::string& dir, const std::string& arg) {
    ChainState st = ChainState::open(dir);
    Block b = deserialize_block(from_hex(hex_arg(arg)));
    Err e = st.apply_block(b);
    if (e != Err::None) throw McoinError(e, "block rejected");
    json out;
    out["hash"] = to_hex(block_hash(b.header));
    out["tip"] = to_hex(st.tip());
    out["height"] = st.height();
    std::cout << out.dump() << "\n";
    return 0;
}

// The chain itself is the policy log; decode the records back out of the
// canonical blocks rather than carrying a second copy in state.
json policy_records(const ChainState& st) {
    json records = json::array();
    std::vector<Hash32> chain = st.canonical_chain();
    for (const Hash32& h : chain) {
        const StoredBlock* sb = st.find(h);
        for (size_t t = 0; t < sb->block.txs.size(); ++t) {
            const Transaction& tx = sb->block.txs[t];
            for (size_t o = 0; o < tx.vout.size(); ++o) {
                NValue nv;
                Err err = Err::None;
                if (!try_decode_nvalue(tx.vout[o].n_value, nv, err)) continue;
                const auto* p = std::get_if<PolicyChange>(&nv);
                if (!p) continue;
                json rec;
                rec["height"] = sb->height;
                rec["tx"] = to_hex(tx_id(tx));
                rec["vout"] = o;
                rec["issuer"] = to_hex(tx.vout[o].script_pubkey);
                rec["type"] = p->ptype;
                rec["param"] = p->param;
                rec["permanent"] = p->permanent;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

int cmd_chain_inspect(const std::string& dir, const std::string& section) {
    ChainState st = ChainState::open(dir);
    ValidationContext ctx = st.tip_context();
    json state = json::parse(context_summary(ctx));

    json out;
    if (section == "all") {
        out["genesis_hash"] = to_hex(st.genesis_id());
        out["tip"] = to_hex(st.tip());
        out["height"] = st.height();
        out["state"] = std::move(state);
    } else if (section == "accounts") {
        out = state["accounts"];
    } else if (section == "policy") {
        out["effective"] = state["policy"];
        out["records"] = policy_records(st);
    } else if (section == "utxo") {
        json entries = json::array();
        for (const auto& [op, entry] : ctx.utxo) {
            json e;
            e["tx"] = to_hex(op.tx_hash);
            e["vout"] = op.index;
            e["amount"] = entry.amount;
            e["owner"] = to_hex(entry.owner);
            entries.push_back(std::move(e));
        }
        out["entries"] = std::move(entries);
        out["digest"] = state["utxo_digest"];
        out["total"] = state["supply"]["utxo_total"];
    } else if (section == "supply") {
        out = state["supply"];
    } else {
        throw McoinError(Err::BadConfig, "unknown inspect section \"" +
                                             section + "\"");
    }
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_sim_run(const std::string& scenario_path, const std::string& out_path) {
    std::string text =
        scenario_path == "-" ? read_stdin() : read_file(scenario_path);
    SimScenario s = scenario_from_json(text);
    SimReport rep = run_scenario(s);
    if (out_path.empty()) {
        std::cout << rep.json << "\n";
    } else {
        write_file(out_path, rep.json + "\n");
        json out;
        out["out"] = out_path;
        out["bytes"] = rep.json.size() + 1;
        std::cout << out.dump() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"managed-currency chain tool"};
    app.require_subcommand(1);

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate a key file");
    std::optional<uint64_t> kg_seed;
    std::string kg_scheme = "secp256k1", kg_label, kg_out;
    keygen->add_option("--seed", kg_seed, "deterministic seed");
    keygen->add_option("--scheme", kg_scheme, "signature scheme id");
    keygen->add_option("--label", kg_label, "human label");
    keygen->add_option("--out", kg_out, "key file path")->required();

    // tx build
    auto* tx = app.add_subcommand("tx", "transaction commands");
    tx->require_subcommand(1);
    auto* tx_build = tx->add_subcommand("build", "compile a spec to tx hex");
    std::string tb_spec, tb_dir;
    tx_build->add_option("spec", tb_spec, "spec JSON path, - for stdin")
        ->required();
    tx_build->add_option("--chain-dir", tb_dir, "chain directory")->required();

    // validate
    auto* validate =
        app.add_subcommand("validate", "judge tx or block hex against the tip");
    std::string v_hex, v_dir;
    validate->add_option("hex", v_hex, "hex (stdin when omitted)");
    validate->add_option("--chain-dir", v_dir, "chain directory")->required();

    // chain
    auto* chain = app.add_subcommand("chain", "chain directory operations");
    chain->require_subcommand(1);
    auto* c_init = chain->add_subcommand("init", "create a chain directory");
    std::string ci_config, ci_dir;
    c_init->add_option("config", ci_config, "genesis config JSON")->required();
    c_init->add_option("--chain-dir", ci_dir, "directory to create")
        ->required();

    auto* c_mine = chain->add_subcommand("mine", "mine and append a block");
    std::string cm_dir, cm_key;
    std::optional<uint32_t> cm_ts;
    std::vector<std::string> cm_txs;
    bool cm_stdin = false;
    c_mine->add_option("--chain-dir", cm_dir, "chain directory")->required();
    c_mine->add_option("--key", cm_key, "miner key file")->required();
    c_mine->add_option("--timestamp", cm_ts, "block timestamp");
    c_mine->add_option("tx", cm_txs, "transaction hex");
    c_mine->add_flag("--stdin", cm_stdin, "read tx hex lines from stdin");

    auto* c_apply = chain->add_subcommand("apply", "connect a block");
    std::string ca_dir, ca_hex;
    c_apply->add_option("hex", ca_hex, "block hex (stdin when omitted)");
    c_apply->add_option("--chain-dir", ca_dir, "chain directory")->required();

    auto* c_inspect = chain->add_subcommand("inspect", "dump chain state");
    std::string cn_dir, cn_section = "all";
    c_inspect->add_option("section", cn_section,
                          "all | accounts | policy | utxo | supply");
    c_inspect->add_option("--chain-dir", cn_dir, "chain directory")
        ->required();

    // sim run
    auto* sim = app.add_subcommand("sim", "simulation commands");
    sim->require_subcommand(1);
    auto* sim_run = sim->add_subcommand("run", "run a scenario to its horizon");
    std::string sr_scenario, sr_out;
    sim_run->add_option("scenario", sr_scenario, "scenario JSON, - for stdin")
        ->required();
    sim_run->add_option("--out", sr_out, "write the report here instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        std::cout << "UsageError\n";
        return 2;
    }

    try {
        if (*keygen)
            return cmd_keygen(kg_seed, kg_scheme, kg_label, kg_out);
        if (*tx_build) return cmd_tx_build(tb_spec, tb_dir);
        if (*validate) return cmd_validate(v_hex, v_dir);
        if (*c_init) return cmd_chain_init(ci_config, ci_dir);
        if (*c_mine)
            return cmd_chain_mine(cm_dir, cm_key, cm_ts, cm_txs, cm_stdin);
        if (*c_apply) return cmd_chain_apply(ca_dir, ca_hex);
        if (*c_inspect) return cmd_chain_inspect(cn_dir, cn_section);
        if (*sim_run) return cmd_sim_run(sr_scenario, sr_out);
    } catch (const McoinError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << err_name(e.code()) << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << "BadConfig\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << "IOError\n";
        return 1;
    }
    return 0;
}
