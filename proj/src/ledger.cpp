/*
   Copyright 2026 The Cropcast Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "cropcast/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"

#include "cropcast/keccak.hpp"

namespace cropcast {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Fixed point

std::uint64_t to_fixed_point(double value)
{
    if (!std::isfinite(value)) {
        throw LedgerError(LedgerError::Code::Encode, "non-finite value cannot be recorded");
    }
    if (value < 0.0) {
        throw LedgerError(LedgerError::Code::Encode, "negative value cannot be recorded as unsigned fixed point");
    }
    double const scaled = std::floor(value * static_cast<double>(kFixedPointScale) + 0.5);
    if (scaled >= 18446744073709551616.0) {
        throw LedgerError(LedgerError::Code::Encode, "value exceeds the fixed-point range");
    }
    return static_cast<std::uint64_t>(scaled);
}

double from_fixed_point(std::uint64_t value) noexcept
{
    return static_cast<double>(value) / static_cast<double>(kFixedPointScale);
}

PredictionRecord make_record(std::string crop_name, SensorReading const& raw)
{
    PredictionRecord rec;
    rec.crop_name = std::move(crop_name);
    rec.n = to_fixed_point(raw.n);
    rec.p = to_fixed_point(raw.p);
    rec.k = to_fixed_point(raw.k);
    rec.ph = to_fixed_point(raw.ph);
    rec.rain = to_fixed_point(raw.rainfall);
    rec.temp = to_fixed_point(raw.temperature);
    rec.hum = to_fixed_point(raw.humidity);
    return rec;
}

SensorReading record_reading(PredictionRecord const& rec) noexcept
{
    SensorReading r;
    r.n = from_fixed_point(rec.n);
    r.p = from_fixed_point(rec.p);
    r.k = from_fixed_point(rec.k);
    r.ph = from_fixed_point(rec.ph);
    r.rainfall = from_fixed_point(rec.rain);
    r.temperature = from_fixed_point(rec.temp);
    r.humidity = from_fixed_point(rec.hum);
    return r;
}

// ---------------------------------------------------------------------------
// Call data

std::array<std::uint8_t, 4> const& add_prediction_selector()
{
    static auto const selector = [] {
        auto const h = keccak256(kAddPredictionSignature);
        return std::array<std::uint8_t, 4>{h[0], h[1], h[2], h[3]};
    }();
    return selector;
}

bool is_valid_utf8(std::string_view s) noexcept
{
    std::size_t i = 0;
    while (i < s.size()) {
        auto const c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t j = 1; j < len; ++j) {
            auto const cc = static_cast<unsigned char>(s[i + j]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates and values past U+10FFFF.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

namespace {

constexpr std::size_t kNameLenBytes = 2;
constexpr std::size_t kFieldBytes = 8;
constexpr std::size_t kFieldCount = 7;
constexpr std::size_t kCallOverhead = 4 + kNameLenBytes + kFieldBytes * kFieldCount;

} // namespace

Bytes encode_add_prediction(PredictionRecord const& rec)
{
    if (rec.crop_name.empty()) {
        throw LedgerError(LedgerError::Code::Encode, "crop name is empty");
    }
    if (rec.crop_name.size() > 0xFFFF) {
        throw LedgerError(LedgerError::Code::Encode,
                          "crop name is " + std::to_string(rec.crop_name.size()) + " bytes, limit 65535");
    }
    if (!is_valid_utf8(rec.crop_name)) {
        throw LedgerError(LedgerError::Code::Encode, "crop name is not valid UTF-8");
    }
    Bytes out;
    out.reserve(kCallOverhead + rec.crop_name.size());
    auto const& sel = add_prediction_selector();
    out.insert(out.end(), sel.begin(), sel.end());
    put_be(out, rec.crop_name.size(), kNameLenBytes);
    out.insert(out.end(), rec.crop_name.begin(), rec.crop_name.end());
    for (std::uint64_t v : {rec.n, rec.p, rec.k, rec.ph, rec.rain, rec.temp, rec.hum}) {
        put_be(out, v, kFieldBytes);
    }
    return out;
}

PredictionRecord decode_add_prediction(ByteView data)
{
    if (data.size() < 4) {
        throw LedgerError(LedgerError::Code::Malformed,
                          "call data is " + std::to_string(data.size()) + " bytes, shorter than a selector");
    }
    auto const& sel = add_prediction_selector();
    if (!std::equal(sel.begin(), sel.end(), data.begin())) {
        throw LedgerError(LedgerError::Code::UnknownFunction, "unknown function selector " + to_hex(data.first(4)));
    }
    if (data.size() < 4 + kNameLenBytes) {
        throw LedgerError(LedgerError::Code::Malformed, "call data truncated before the name length");
    }
    auto const name_len = get_be(data, 4, kNameLenBytes);
    if (data.size() != kCallOverhead + name_len) {
        throw LedgerError(LedgerError::Code::Malformed, "call data is " + std::to_string(data.size()) +
                                                            " bytes, expected " +
                                                            std::to_string(kCallOverhead + name_len));
    }
    if (name_len == 0) {
        throw LedgerError(LedgerError::Code::Malformed, "crop name is empty");
    }
    PredictionRecord rec;
    rec.crop_name.assign(reinterpret_cast<char const*>(data.data()) + 6, name_len);
    if (!is_valid_utf8(rec.crop_name)) {
        throw LedgerError(LedgerError::Code::Encoding, "crop name is not valid UTF-8");
    }
    std::size_t at = 6 + name_len;
    for (std::uint64_t* field : {&rec.n, &rec.p, &rec.k, &rec.ph, &rec.rain, &rec.temp, &rec.hum}) {
        *field = get_be(data, at, kFieldBytes);
        at += kFieldBytes;
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Canonical forms

Bytes Transaction::canonical_bytes() const
{
    Bytes out;
    out.reserve(8 * 4 + 20 * 2 + 4 + data.size());
    put_be(out, nonce, 8);
    put_be(out, gas_price, 8);
    put_be(out, gas_limit, 8);
    out.insert(out.end(), to.begin(), to.end());
    put_be(out, value, 8);
    put_be(out, data.size(), 4);
    out.insert(out.end(), data.begin(), data.end());
    out.insert(out.end(), sender.begin(), sender.end());
    return out;
}

Hash256 Transaction::compute_hash() const { return keccak256(ByteView(canonical_bytes())); }

Bytes Block::header_bytes() const
{
    Bytes out;
    out.reserve(8 * 4 + 32 * 2);
    put_be(out, number, 8);
    put_be(out, timestamp, 8);
    out.insert(out.end(), parent_hash.begin(), parent_hash.end());
    out.insert(out.end(), tx_root.begin(), tx_root.end());
    put_be(out, gas_used, 8);
    put_be(out, gas_limit, 8);
    return out;
}

Hash256 Block::compute_hash() const { return keccak256(ByteView(header_bytes())); }

Hash256 Block::compute_tx_root() const
{
    if (transactions.empty()) return Hash256{};
    Keccak256 h;
    for (auto const& tx : transactions) h.update(ByteView(tx.hash));
    return h.final();
}

std::uint64_t call_gas(std::size_t data_len) noexcept
{
    return kTxBaseGas + kTxDataByteGas * static_cast<std::uint64_t>(data_len) + kStorageGas;
}

namespace {

Address tail_address(std::string_view seed)
{
    auto const h = keccak256(seed);
    Address a{};
    std::copy(h.end() - 20, h.end(), a.begin());
    return a;
}

} // namespace

Address const& contract_address()
{
    static Address const a = tail_address("CropPrediction");
    return a;
}

Address const& default_sender()
{
    static Address const a = tail_address("cropcast-gateway");
    return a;
}

// ---------------------------------------------------------------------------
// Contract execution

Chain genesis(ChainConfig const& config)
{
    Chain chain;
    chain.config = config;
    Block b;
    b.number = 0;
    b.timestamp = config.genesis_timestamp;
    b.gas_used = 0;
    b.gas_limit = config.block_gas_limit;
    b.tx_root = b.compute_tx_root();
    b.hash = b.compute_hash();
    chain.blocks.push_back(std::move(b));
    return chain;
}

TxReceipt submit_prediction(Chain& chain, Address const& sender, PredictionRecord const& rec, std::uint64_t timestamp)
{
    if (chain.blocks.empty()) {
        throw LedgerError(LedgerError::Code::OutOfBounds, "chain has no genesis block");
    }
    auto const& tip = chain.tip();
    if (timestamp < tip.timestamp) {
        throw LedgerError(LedgerError::Code::Timestamp, "timestamp " + std::to_string(timestamp) +
                                                             " precedes chain tip at " +
                                                             std::to_string(tip.timestamp));
    }

    Transaction tx;
    auto const nonce_it = chain.accounts.find(sender);
    tx.nonce = nonce_it == chain.accounts.end() ? 0 : nonce_it->second;
    tx.gas_price = chain.config.gas_price;
    tx.gas_limit = chain.config.block_gas_limit;
    tx.to = contract_address();
    tx.value = 0;
    tx.data = encode_add_prediction(rec);
    tx.sender = sender;
    tx.hash = tx.compute_hash();

    auto const gas = call_gas(tx.data.size());
    if (gas > tx.gas_limit) {
        throw LedgerError(LedgerError::Code::OutOfGas,
                          "call needs " + std::to_string(gas) + " gas, limit " + std::to_string(tx.gas_limit));
    }

    Block b;
    b.number = tip.number + 1;
    b.timestamp = timestamp;
    b.parent_hash = tip.hash;
    b.gas_used = gas;
    b.gas_limit = chain.config.block_gas_limit;
    b.transactions.push_back(tx);
    b.tx_root = b.compute_tx_root();
    b.hash = b.compute_hash();

    TxReceipt receipt{tx.hash, b.number, gas, chain.contract_state.size()};
    chain.blocks.push_back(std::move(b));
    chain.contract_state.push_back(rec);
    chain.accounts[sender] = tx.nonce + 1;
    return receipt;
}

PredictionRecord const& get_prediction(Chain const& chain, std::uint64_t index)
{
    if (index >= chain.contract_state.size()) {
        throw LedgerError(LedgerError::Code::OutOfBounds, "prediction index " + std::to_string(index) +
                                                               " out of range, count " +
                                                               std::to_string(chain.contract_state.size()));
    }
    return chain.contract_state[index];
}

std::uint64_t prediction_count(Chain const& chain) noexcept { return chain.contract_state.size(); }

std::vector<PredictionRecord> replay(std::vector<Block> const& blocks)
{
    std::vector<PredictionRecord> out;
    for (auto const& b : blocks) {
        for (auto const& tx : b.transactions) out.push_back(decode_add_prediction(tx.data));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification

std::string_view violation_name(ViolationKind kind) noexcept
{
    switch (kind) {
    case ViolationKind::GenesisInvalid: return "genesis_invalid";
    case ViolationKind::NumberGap: return "number_gap";
    case ViolationKind::ParentMismatch: return "parent_mismatch";
    case ViolationKind::TimestampRegression: return "timestamp_regression";
    case ViolationKind::TxCount: return "tx_count";
    case ViolationKind::TxHashMismatch: return "tx_hash_mismatch";
    case ViolationKind::BadRecipient: return "bad_recipient";
    case ViolationKind::NonZeroValue: return "nonzero_value";
    case ViolationKind::NonceGap: return "nonce_gap";
    case ViolationKind::UndecodableCall: return "undecodable_call";
    case ViolationKind::GasMismatch: return "gas_mismatch";
    case ViolationKind::GasLimitExceeded: return "gas_limit_exceeded";
    case ViolationKind::TxRootMismatch: return "tx_root_mismatch";
    case ViolationKind::BlockHashMismatch: return "block_hash_mismatch";
    case ViolationKind::ReplayMismatch: return "replay_mismatch";
    }
    return "unknown";
}

VerifyResult verify_chain(Chain const& chain)
{
    VerifyResult result;
    auto fail = [&](std::uint64_t number, ViolationKind kind, std::string detail) {
        result.violation = Violation{number, kind, std::move(detail)};
        return result;
    };

    if (chain.blocks.empty()) return fail(0, ViolationKind::GenesisInvalid, "chain has no blocks");
    auto const& g = chain.blocks.front();
    if (g.number != 0 || !g.transactions.empty() || g.gas_used != 0 || g.parent_hash != Hash256{}) {
        return fail(g.number, ViolationKind::GenesisInvalid, "genesis must be block 0 with no transactions");
    }

    std::map<Address, std::uint64_t> nonces;
    std::vector<PredictionRecord> replayed;
    std::vector<std::uint64_t> recorded_in; // block number per replayed prediction
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        auto const& b = chain.blocks[i];
        if (b.number != i) {
            return fail(b.number, ViolationKind::NumberGap, "expected block number " + std::to_string(i));
        }
        if (i > 0) {
            auto const& prev = chain.blocks[i - 1];
            if (b.parent_hash != prev.hash) return fail(b.number, ViolationKind::ParentMismatch, "parent hash mismatch");
            if (b.timestamp < prev.timestamp) {
                return fail(b.number, ViolationKind::TimestampRegression, "timestamp earlier than parent");
            }
            if (b.transactions.size() != 1) {
                return fail(b.number, ViolationKind::TxCount,
                            std::to_string(b.transactions.size()) + " transactions, expected 1");
            }
        }

        std::uint64_t gas = 0;
        for (auto const& tx : b.transactions) {
            if (tx.compute_hash() != tx.hash) return fail(b.number, ViolationKind::TxHashMismatch, "tx hash mismatch");
            if (tx.to != contract_address()) {
                return fail(b.number, ViolationKind::BadRecipient, "recipient is not the contract");
            }
            if (tx.value != 0) return fail(b.number, ViolationKind::NonZeroValue, "contract call carries value");
            auto& expected = nonces[tx.sender];
            if (tx.nonce != expected) {
                return fail(b.number, ViolationKind::NonceGap,
                            "nonce " + std::to_string(tx.nonce) + ", expected " + std::to_string(expected));
            }
            ++expected;
            try {
                replayed.push_back(decode_add_prediction(tx.data));
                recorded_in.push_back(b.number);
            } catch (LedgerError const& e) {
                return fail(b.number, ViolationKind::UndecodableCall, e.what());
            }
            auto const cost = call_gas(tx.data.size());
            if (cost > tx.gas_limit) return fail(b.number, ViolationKind::GasLimitExceeded, "call exceeds tx gas limit");
            gas += cost;
        }
        if (b.gas_used != gas) {
            return fail(b.number, ViolationKind::GasMismatch,
                        "gas_used " + std::to_string(b.gas_used) + ", recomputed " + std::to_string(gas));
        }
        if (b.gas_used > b.gas_limit) {
            return fail(b.number, ViolationKind::GasLimitExceeded, "gas_used exceeds block gas limit");
        }
        if (b.compute_tx_root() != b.tx_root) return fail(b.number, ViolationKind::TxRootMismatch, "tx root mismatch");
        if (b.compute_hash() != b.hash) return fail(b.number, ViolationKind::BlockHashMismatch, "block hash mismatch");
        ++result.blocks_checked;
    }

    std::size_t const common = std::min(replayed.size(), chain.contract_state.size());
    for (std::size_t i = 0; i < common; ++i) {
        if (!(replayed[i] == chain.contract_state[i])) {
            return fail(recorded_in[i], ViolationKind::ReplayMismatch,
                        "contract_state[" + std::to_string(i) + "] differs from replay");
        }
    }
    if (replayed.size() != chain.contract_state.size()) {
        return fail(chain.height(), ViolationKind::ReplayMismatch,
                    "contract_state holds " + std::to_string(chain.contract_state.size()) + " records, replay gives " +
                        std::to_string(replayed.size()));
    }
    // The account table must agree with the nonces seen in the chain.
    if (nonces.size() != chain.accounts.size() || !std::equal(nonces.begin(), nonces.end(), chain.accounts.begin())) {
        return fail(chain.height(), ViolationKind::NonceGap, "account nonces differ from replay");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json tx_to_json(Transaction const& tx)
{
    return json{{"nonce", tx.nonce},      {"gas_price", tx.gas_price}, {"gas_limit", tx.gas_limit},
                {"to", to_hex(tx.to)},    {"value", tx.value},         {"data", to_hex(tx.data)},
                {"sender", to_hex(tx.sender)}, {"hash", to_hex(tx.hash)}};
}

json block_to_json(Block const& b)
{
    json txs = json::array();
    for (auto const& tx : b.transactions) txs.push_back(tx_to_json(tx));
    return json{{"number", b.number},
                {"timestamp", b.timestamp},
                {"parent_hash", to_hex(b.parent_hash)},
                {"tx_root", to_hex(b.tx_root)},
                {"gas_used", b.gas_used},
                {"gas_limit", b.gas_limit},
                {"transactions", std::move(txs)},
                {"hash", to_hex(b.hash)}};
}

std::string meta_line()
{
    return json{{"format", "cropcast-chain"}, {"version", kChainFormatVersion}}.dump();
}

// Strict field readers: the text form must be the exact image of the binary
// form, so uppercase hex, extra keys or non-integer numbers are load errors.
struct Reader {
    std::uint64_t offset;

    [[noreturn]] void fail(std::string const& what) const
    {
        throw LedgerError(LedgerError::Code::Load,
                          "corrupted chain record at byte " + std::to_string(offset) + ": " + what, offset);
    }

    void expect_keys(json const& obj, std::initializer_list<char const*> keys) const
    {
        if (!obj.is_object()) fail("expected an object");
        if (obj.size() != keys.size()) fail("unexpected field count");
        for (auto const* k : keys) {
            if (!obj.contains(k)) fail(std::string("missing field ") + k);
        }
    }

    std::uint64_t uint(json const& obj, char const* key) const
    {
        auto const& v = obj.at(key);
        if (!v.is_number_unsigned()) fail(std::string("field ") + key + " is not an unsigned integer");
        return v.get<std::uint64_t>();
    }

    Bytes hex(json const& obj, char const* key) const
    {
        auto const& v = obj.at(key);
        if (!v.is_string()) fail(std::string("field ") + key + " is not a string");
        auto const& s = v.get_ref<std::string const&>();
        if (s.size() < 2 || s[0] != '0' || s[1] != 'x') fail(std::string("field ") + key + " lacks 0x prefix");
        for (std::size_t i = 2; i < s.size(); ++i) {
            char const c = s[i];
            if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
                fail(std::string("field ") + key + " is not lowercase hex");
            }
        }
        auto bytes = from_hex(s);
        if (!bytes) fail(std::string("field ") + key + " has odd length");
        return *bytes;
    }

    template <std::size_t N>
    std::array<std::uint8_t, N> fixed(json const& obj, char const* key) const
    {
        auto const bytes = hex(obj, key);
        if (bytes.size() != N) fail(std::string("field ") + key + " has wrong length");
        std::array<std::uint8_t, N> out{};
        std::copy(bytes.begin(), bytes.end(), out.begin());
        return out;
    }
};

Block block_from_json(json const& j, Reader const& r)
{
    r.expect_keys(j, {"number", "timestamp", "parent_hash", "tx_root", "gas_used", "gas_limit", "transactions", "hash"});
    Block b;
    b.number = r.uint(j, "number");
    b.timestamp = r.uint(j, "timestamp");
    b.parent_hash = r.fixed<32>(j, "parent_hash");
    b.tx_root = r.fixed<32>(j, "tx_root");
    b.gas_used = r.uint(j, "gas_used");
    b.gas_limit = r.uint(j, "gas_limit");
    b.hash = r.fixed<32>(j, "hash");
    auto const& txs = j.at("transactions");
    if (!txs.is_array()) r.fail("transactions is not an array");
    for (auto const& t : txs) {
        r.expect_keys(t, {"nonce", "gas_price", "gas_limit", "to", "value", "data", "sender", "hash"});
        Transaction tx;
        tx.nonce = r.uint(t, "nonce");
        tx.gas_price = r.uint(t, "gas_price");
        tx.gas_limit = r.uint(t, "gas_limit");
        tx.to = r.fixed<20>(t, "to");
        tx.value = r.uint(t, "value");
        tx.data = r.hex(t, "data");
        tx.sender = r.fixed<20>(t, "sender");
        tx.hash = r.fixed<32>(t, "hash");
        b.transactions.push_back(std::move(tx));
    }
    return b;
}

void write_text(std::filesystem::path const& path, std::string const& text, std::ios::openmode mode)
{
    std::ofstream out(path, mode | std::ios::binary);
    if (!out) throw LedgerError(LedgerError::Code::Io, "cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw LedgerError(LedgerError::Code::Io, "write to " + path.string() + " failed");
}

} // namespace

std::string block_to_line(Block const& block) { return block_to_json(block).dump(); }

void persist_chain(Chain const& chain, std::filesystem::path const& path)
{
    auto const check = verify_chain(chain);
    if (!check.ok()) {
        throw LedgerError(LedgerError::Code::Tamper, "refusing to persist a chain that fails verification: " +
                                                          check.violation->detail);
    }
    std::string text = meta_line() + '\n';
    for (auto const& b : chain.blocks) text += block_to_line(b) + '\n';
    write_text(path, text, std::ios::out | std::ios::trunc);
}

void append_block(std::filesystem::path const& path, Block const& block)
{
    if (!std::filesystem::exists(path)) {
        throw LedgerError(LedgerError::Code::Io, "chain file " + path.string() + " does not exist");
    }
    write_text(path, block_to_line(block) + '\n', std::ios::out | std::ios::app);
}

Chain parse_chain(std::string_view text, ChainConfig const& config)
{
    Chain chain;
    chain.config = config;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto const nl = text.find('\n', pos);
        Reader const r{pos};
        if (nl == std::string_view::npos) r.fail("record is not terminated by a newline");
        auto const line = text.substr(pos, nl - pos);
        json j = json::parse(line.begin(), line.end(), nullptr, false);
        if (j.is_discarded()) r.fail("malformed JSON");
        if (first) {
            if (!j.is_object() || j.size() != 2 || j.value("format", "") != "cropcast-chain" ||
                !j.contains("version") || !j["version"].is_number_unsigned()) {
                r.fail("missing cropcast-chain header");
            }
            if (j["version"].get<std::uint64_t>() != kChainFormatVersion) {
                r.fail("unsupported chain format version " + j["version"].dump());
            }
            first = false;
        } else {
            chain.blocks.push_back(block_from_json(j, r));
        }
        pos = nl + 1;
    }
    if (first) Reader{0}.fail("empty chain file");
    if (chain.blocks.empty()) Reader{text.size()}.fail("no genesis block");

    auto const& g = chain.blocks.front();
    chain.config.genesis_timestamp = g.timestamp;
    chain.config.block_gas_limit = g.gas_limit;

    try {
        chain.contract_state = replay(chain.blocks);
    } catch (LedgerError const&) {
        // Left for verify_chain to report with a block number.
    }
    for (auto const& b : chain.blocks) {
        for (auto const& tx : b.transactions) chain.accounts[tx.sender] = tx.nonce + 1;
    }

    auto const check = verify_chain(chain);
    if (!check.ok()) {
        auto const& v = *check.violation;
        throw LedgerError(LedgerError::Code::Tamper, "tamper alert at block " + std::to_string(v.block_number) + " (" +
                                                          std::string(violation_name(v.kind)) + "): " + v.detail);
    }
    return chain;
}

Chain open_chain(std::filesystem::path const& path, ChainConfig const& config)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LedgerError(LedgerError::Code::Io, "cannot open chain file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_chain(buf.str(), config);
}

// ---------------------------------------------------------------------------
// SharedLedger

SharedLedger::SharedLedger(Chain chain, std::optional<std::filesystem::path> file)
    : chain_(std::move(chain)), file_(std::move(file))
{
}

TxReceipt SharedLedger::submit(Address const& sender, PredictionRecord const& rec, std::uint64_t timestamp)
{
    std::unique_lock lock(mutex_);
    // Mine on a scratch copy of the tail state so a failed append leaves
    // memory and file in agreement.
    Chain next;
    next.config = chain_.config;
    next.blocks.push_back(chain_.tip());
    next.accounts = chain_.accounts;
    auto receipt = submit_prediction(next, sender, rec, std::max(timestamp, chain_.tip().timestamp));
    if (file_) append_block(*file_, next.blocks.back());
    receipt.prediction_index = chain_.contract_state.size();
    chain_.blocks.push_back(std::move(next.blocks.back()));
    chain_.contract_state.push_back(rec);
    chain_.accounts = std::move(next.accounts);
    return receipt;
}

std::optional<PredictionRecord> SharedLedger::prediction(std::uint64_t index) const
{
    std::shared_lock lock(mutex_);
    if (index >= chain_.contract_state.size()) return std::nullopt;
    return chain_.contract_state[index];
}

std::uint64_t SharedLedger::prediction_count() const
{
    std::shared_lock lock(mutex_);
    return chain_.contract_state.size();
}

std::vector<Block> SharedLedger::blocks_newest_first(std::uint64_t from, std::size_t limit) const
{
    std::shared_lock lock(mutex_);
    std::vector<Block> out;
    if (chain_.blocks.empty() || from > chain_.height()) return out;
    for (std::uint64_t n = from + 1; n-- > 0 && out.size() < limit;) out.push_back(chain_.blocks[n]);
    return out;
}

std::uint64_t SharedLedger::tip_timestamp() const
{
    std::shared_lock lock(mutex_);
    return chain_.tip().timestamp;
}

std::uint64_t SharedLedger::height() const
{
    std::shared_lock lock(mutex_);
    return chain_.height();
}

Chain SharedLedger::snapshot() const
{
    std::shared_lock lock(mutex_);
    return chain_;
}

} // namespace cropcast
