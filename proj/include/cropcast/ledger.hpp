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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cropcast/bytes.hpp"
#include "cropcast/dataset.hpp"

namespace cropcast {

class LedgerError : public std::runtime_error {
public:
    enum class Code {
        Encode,          // record cannot be encoded
        UnknownFunction, // call data selector is not addPrediction
        Malformed,       // call data length or layout is wrong
        Encoding,        // crop name is not valid UTF-8
        OutOfGas,
        Timestamp,
        OutOfBounds,
        Load,            // chain file cannot be parsed
        Tamper,          // chain file parsed but failed verification
        Io,
    };

    LedgerError(Code code, std::string const& what, std::optional<std::uint64_t> offset = std::nullopt)
        : std::runtime_error(what), code_(code), offset_(offset)
    {
    }

    Code code() const noexcept { return code_; }
    // Byte offset into the chain file for Load errors.
    std::optional<std::uint64_t> offset() const noexcept { return offset_; }

private:
    Code code_;
    std::optional<std::uint64_t> offset_;
};

// ---------------------------------------------------------------------------
// Contract storage record and its call-data codec

inline constexpr std::uint64_t kFixedPointScale = 100;

// Attribute order follows the contract's addPrediction parameters.
struct PredictionRecord {
    std::string crop_name;
    std::uint64_t n{0};
    std::uint64_t p{0};
    std::uint64_t k{0};
    std::uint64_t ph{0};
    std::uint64_t rain{0};
    std::uint64_t temp{0};
    std::uint64_t hum{0};

    friend bool operator==(PredictionRecord const&, PredictionRecord const&) = default;
};

// Round half-up to two decimals, as value * 100. Throws LedgerError{Encode}
// for negative, non-finite or unrepresentable values.
std::uint64_t to_fixed_point(double value);
double from_fixed_point(std::uint64_t value) noexcept;

PredictionRecord make_record(std::string crop_name, SensorReading const& raw);
SensorReading record_reading(PredictionRecord const& rec) noexcept;

inline constexpr std::string_view kAddPredictionSignature =
    "addPrediction(string,uint256,uint256,uint256,uint256,uint256,uint256,uint256)";

// First four bytes of keccak256(kAddPredictionSignature).
std::array<std::uint8_t, 4> const& add_prediction_selector();

// selector(4) || name_len(2, BE) || name || n, p, k, ph, rain, temp, hum (8 bytes BE each)
Bytes encode_add_prediction(PredictionRecord const& rec);
PredictionRecord decode_add_prediction(ByteView data);

bool is_valid_utf8(std::string_view s) noexcept;

// ---------------------------------------------------------------------------
// Transactions and blocks

struct Transaction {
    std::uint64_t nonce{0};
    std::uint64_t gas_price{0};
    std::uint64_t gas_limit{0};
    Address to{};
    std::uint64_t value{0};
    Bytes data;
    Address sender{};
    Hash256 hash{};

    // nonce(8) || gas_price(8) || gas_limit(8) || to(20) || value(8) ||
    // data_len(4) || data || sender(20); integers big-endian.
    Bytes canonical_bytes() const;
    Hash256 compute_hash() const;

    friend bool operator==(Transaction const&, Transaction const&) = default;
};

struct Block {
    std::uint64_t number{0};
    std::uint64_t timestamp{0};
    Hash256 parent_hash{};
    Hash256 tx_root{};
    std::uint64_t gas_used{0};
    std::uint64_t gas_limit{0};
    std::vector<Transaction> transactions;
    Hash256 hash{};

    // number(8) || timestamp(8) || parent_hash(32) || tx_root(32) ||
    // gas_used(8) || gas_limit(8)
    Bytes header_bytes() const;
    Hash256 compute_hash() const;
    // keccak256 of the concatenated transaction hashes; zero when empty.
    Hash256 compute_tx_root() const;

    friend bool operator==(Block const&, Block const&) = default;
};

inline constexpr std::uint64_t kDefaultBlockGasLimit = 6'721'975;
inline constexpr std::uint64_t kDefaultGasPrice = 20'000'000'000;
inline constexpr std::uint64_t kTxBaseGas = 21'000;
inline constexpr std::uint64_t kTxDataByteGas = 16;
inline constexpr std::uint64_t kStorageGas = 20'000;
// 2024-03-20 21:28:32 UTC.
inline constexpr std::uint64_t kDefaultGenesisTimestamp = 1'710'970'112;

std::uint64_t call_gas(std::size_t data_len) noexcept;

// Last 20 bytes of keccak256("CropPrediction").
Address const& contract_address();

// Sender identity used when the service does not supply one: last 20 bytes
// of keccak256("cropcast-gateway").
Address const& default_sender();

struct ChainConfig {
    std::uint64_t genesis_timestamp{kDefaultGenesisTimestamp};
    std::uint64_t block_gas_limit{kDefaultBlockGasLimit};
    std::uint64_t gas_price{kDefaultGasPrice};
};

struct Chain {
    ChainConfig config;
    std::vector<Block> blocks;
    std::vector<PredictionRecord> contract_state;
    std::map<Address, std::uint64_t> accounts; // sender -> next nonce

    Block const& tip() const { return blocks.back(); }
    std::uint64_t height() const { return blocks.empty() ? 0 : blocks.back().number; }
};

struct TxReceipt {
    Hash256 tx_hash{};
    std::uint64_t block_number{0};
    std::uint64_t gas_used{0};
    std::uint64_t prediction_index{0};
};

Chain genesis(ChainConfig const& config = {});

// Builds the call, executes it, and mines one block holding just that
// transaction. On error the chain is left untouched.
TxReceipt submit_prediction(Chain& chain, Address const& sender, PredictionRecord const& rec, std::uint64_t timestamp);

PredictionRecord const& get_prediction(Chain const& chain, std::uint64_t index);
std::uint64_t prediction_count(Chain const& chain) noexcept;

// Recomputes the contract state from the transaction list alone. Throws
// LedgerError on undecodable call data.
std::vector<PredictionRecord> replay(std::vector<Block> const& blocks);

enum class ViolationKind {
    GenesisInvalid,
    NumberGap,
    ParentMismatch,
    TimestampRegression,
    TxCount,
    TxHashMismatch,
    BadRecipient,
    NonZeroValue,
    NonceGap,
    UndecodableCall,
    GasMismatch,
    GasLimitExceeded,
    TxRootMismatch,
    BlockHashMismatch,
    ReplayMismatch,
};

std::string_view violation_name(ViolationKind kind) noexcept;

struct Violation {
    std::uint64_t block_number{0};
    ViolationKind kind{};
    std::string detail;
};

struct VerifyResult {
    std::optional<Violation> violation;
    std::uint64_t blocks_checked{0};

    bool ok() const noexcept { return !violation.has_value(); }
};

VerifyResult verify_chain(Chain const& chain);

// ---------------------------------------------------------------------------
// Persistence: JSON lines. Line 1 is {"format":"cropcast-chain","version":1};
// every further line is one block with hex-encoded byte fields.

inline constexpr int kChainFormatVersion = 1;

std::string block_to_line(Block const& block);

// Writes a fresh file holding the whole chain. Refuses chains that fail
// verification.
void persist_chain(Chain const& chain, std::filesystem::path const& path);

// Appends one already-mined block to an existing chain file.
void append_block(std::filesystem::path const& path, Block const& block);

// Parses, replays and verifies. LedgerError{Load} carries the byte offset
// of the offending record; LedgerError{Tamper} reports the first violation.
Chain open_chain(std::filesystem::path const& path, ChainConfig const& config = {});
Chain parse_chain(std::string_view text, ChainConfig const& config = {});

// Single-writer wrapper used by the service: submissions serialize on an
// exclusive lock and are appended to the chain file before they become
// visible; readers share the lock.
class SharedLedger {
public:
    explicit SharedLedger(Chain chain, std::optional<std::filesystem::path> file = std::nullopt);

    TxReceipt submit(Address const& sender, PredictionRecord const& rec, std::uint64_t timestamp);

    std::optional<PredictionRecord> prediction(std::uint64_t index) const;
    std::uint64_t prediction_count() const;
    std::vector<Block> blocks_newest_first(std::uint64_t from, std::size_t limit) const;
    std::uint64_t tip_timestamp() const;
    std::uint64_t height() const;
    Chain snapshot() const;

private:
    mutable std::shared_mutex mutex_;
    Chain chain_;
    std::optional<std::filesystem::path> file_;
};

} // namespace cropcast
