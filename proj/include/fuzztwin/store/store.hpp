#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/twin/message.hpp"

namespace fuzztwin::store {

struct StateRow {
    StateId state_id;
    std::uint8_t channel = 0;
    std::uint8_t first_bytes[3] = {0, 0, 0};
    std::string description;

    bool operator==(const StateRow&) const = default;
};

struct ActionRow {
    std::uint64_t action_id = 0;
    StateId state_id;
    std::vector<std::uint8_t> raw_bytes;
    std::uint8_t channel = 0;
    twin::PhysicalChannel physical_channel = twin::PhysicalChannel::PUSCH;
    std::int64_t message_time_ns = 0;
    std::uint64_t trace_id = 0;

    bool operator==(const ActionRow&) const = default;
};

struct ProbabilityRow {
    StateId from;
    StateId to;
    double probability = 0;
    std::optional<double> completion_rate;

    bool operator==(const ProbabilityRow&) const = default;
};

struct StoredTrace {
    std::uint64_t trace_id = 0;
    ConnectionTrace trace;

    bool operator==(const StoredTrace&) const = default;
};

struct FrequencyTable {
    std::map<StateId, std::size_t> states;  // occurrences
    std::map<std::pair<StateId, StateId>, std::size_t> transactions;
    std::size_t traces = 0;

    bool operator==(const FrequencyTable&) const = default;
};

enum class ExportFormat : std::uint8_t { Csv, Json, Dot };
std::optional<ExportFormat> export_format_from_string(std::string_view s) noexcept;

inline constexpr char kLogMagic[8] = {'F', 'Z', 'T', 'W', 'L', 'O', 'G', '\0'};
inline constexpr std::uint32_t kLogVersion = 1;

struct OpenOptions {
    bool read_only = false;
    bool create = true;
    bool sync = false;  // fsync after every commit
};

/// Append-only log with in-memory tables. Each committed trace (with its
/// new state rows and action rows) is one checksummed record written by a
/// single write call, so a crash can only lose an uncommitted tail.
class CampaignStore {
public:
    /// Store with no backing file.
    CampaignStore();
    ~CampaignStore();
    CampaignStore(const CampaignStore&) = delete;
    CampaignStore& operator=(const CampaignStore&) = delete;
    CampaignStore(CampaignStore&&) noexcept;
    CampaignStore& operator=(CampaignStore&&) noexcept;

    /// Loads the log, truncating an incomplete final record. Throws
    /// Error(CorruptRecord) for a complete record that fails its CRC and
    /// Error(Io) when the file cannot be opened or locked.
    static CampaignStore open(const std::filesystem::path& path, OpenOptions options = {});

    /// Idempotent: identical content returns the existing id.
    /// Throws Error(InvalidArgument) when the trace invariants fail and
    /// Error(StorageFull) when the device is full.
    std::uint64_t record_trace(const ConnectionTrace& trace);

    void set_probability(const ProbabilityRow& row);

    const std::map<StateId, StateRow>& states() const noexcept { return states_; }
    const std::vector<ActionRow>& actions() const noexcept { return actions_; }
    const std::vector<StoredTrace>& traces() const noexcept { return traces_; }
    const std::map<std::pair<StateId, StateId>, ProbabilityRow>& probabilities() const noexcept {
        return probabilities_;
    }
    const StoredTrace* find(std::uint64_t trace_id) const;
    bool empty() const noexcept { return traces_.empty(); }

    std::vector<const StoredTrace*> query(std::optional<Outcome> outcome) const;

    /// Throws Error(EmptyStore) when nothing is stored.
    FrequencyTable query_frequencies(std::optional<Outcome> outcome) const;

    std::string export_as(ExportFormat format) const;
    std::string export_csv() const;
    std::string export_json() const;
    std::string export_dot() const;

    /// Rebuilds a store from export_json output; optionally backed by `path`.
    static CampaignStore import_json(std::string_view json,
                                     const std::optional<std::filesystem::path>& path = std::nullopt);

    /// Rewrites the log as a snapshot (one record per trace, latest
    /// probability per pair) through a temporary file and rename.
    void compact();

    /// Every foreign key resolves and per-trace action times are nondecreasing.
    bool check_integrity(std::string* why = nullptr) const;

    std::size_t truncated_bytes() const noexcept { return truncated_bytes_; }
    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

    bool operator==(const CampaignStore& other) const;

private:
    // One trace with the state and action rows it introduces.
    struct Commit {
        std::vector<StateRow> states;
        std::vector<ActionRow> actions;
        StoredTrace trace;
    };

    void apply(const Commit& c);
    void commit(const Commit& c);
    std::vector<std::uint8_t> encode_commit(const Commit& c) const;
    void append(std::uint8_t kind, const std::vector<std::uint8_t>& payload);
    void load(const std::vector<std::uint8_t>& data);

    std::optional<std::filesystem::path> path_;
    int fd_ = -1;
    OpenOptions options_;
    std::size_t truncated_bytes_ = 0;
    mutable std::mutex mu_;

    std::map<StateId, StateRow> states_;
    std::vector<ActionRow> actions_;
    std::vector<StoredTrace> traces_;
    std::map<std::uint64_t, std::size_t> trace_index_;
    std::map<std::pair<StateId, StateId>, ProbabilityRow> probabilities_;
};

}  // namespace fuzztwin::store
