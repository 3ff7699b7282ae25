#include "fuzztwin/store/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <set>

#include "fuzztwin/common/bytes.hpp"
#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/trace_codec.hpp"

namespace fuzztwin::store {

namespace {

constexpr std::uint8_t kTraceCommit = 1;
constexpr std::uint8_t kProbability = 2;
constexpr std::size_t kHeaderSize = sizeof(kLogMagic) + 4;

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

std::vector<std::uint8_t> header_bytes() {
    ByteWriter w;
    w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kLogMagic), sizeof(kLogMagic)));
    w.u32(kLogVersion);
    return w.take();
}

void write_all(int fd, const std::vector<std::uint8_t>& buf) {
    std::size_t done = 0;
    while (done < buf.size()) {
        const auto n = ::write(fd, buf.data() + done, buf.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == ENOSPC || errno == EDQUOT) throw Error(ErrorKind::StorageFull, "no space left for store");
            throw Error(ErrorKind::Io, std::string("store write failed: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

twin::PhysicalChannel physical_of(StateId id) {
    const auto ch = twin::channel_from_code(id.channel_code());
    if (!ch) throw Error(ErrorKind::InvalidArgument, "state " + to_string(id) + " has an unknown channel");
    return twin::physical_channel_of(*ch);
}

void write_state(ByteWriter& w, const StateRow& s) {
    w.u32(s.state_id.value);
    w.u8(s.channel);
    for (auto b : s.first_bytes) w.u8(b);
    w.str(s.description);
}

StateRow read_state(ByteReader& r) {
    StateRow s;
    s.state_id.value = r.u32();
    s.channel = r.u8();
    for (auto& b : s.first_bytes) b = r.u8();
    s.description = r.str();
    return s;
}

void write_action_row(ByteWriter& w, const ActionRow& a) {
    w.u64(a.action_id);
    w.u32(a.state_id.value);
    w.bytes(a.raw_bytes);
    w.u8(a.channel);
    w.u8(static_cast<std::uint8_t>(a.physical_channel));
    w.i64(a.message_time_ns);
    w.u64(a.trace_id);
}

ActionRow read_action_row(ByteReader& r) {
    ActionRow a;
    a.action_id = r.u64();
    a.state_id.value = r.u32();
    a.raw_bytes = r.bytes();
    a.channel = r.u8();
    const auto phy = r.u8();
    if (phy > 2) throw Error(ErrorKind::CorruptRecord, "bad physical channel code");
    a.physical_channel = static_cast<twin::PhysicalChannel>(phy);
    a.message_time_ns = r.i64();
    a.trace_id = r.u64();
    return a;
}

void write_probability(ByteWriter& w, const ProbabilityRow& p) {
    w.u32(p.from.value);
    w.u32(p.to.value);
    w.f64(p.probability);
    w.u8(p.completion_rate.has_value());
    w.f64(p.completion_rate.value_or(0.0));
}

ProbabilityRow read_probability(ByteReader& r) {
    ProbabilityRow p;
    p.from.value = r.u32();
    p.to.value = r.u32();
    p.probability = r.f64();
    const bool has = r.u8() != 0;
    const double c = r.f64();
    if (has) p.completion_rate = c;
    return p;
}

}  // namespace

std::optional<ExportFormat> export_format_from_string(std::string_view s) noexcept {
    if (s == "csv") return ExportFormat::Csv;
    if (s == "json") return ExportFormat::Json;
    if (s == "dot") return ExportFormat::Dot;
    return std::nullopt;
}

CampaignStore::CampaignStore() = default;

CampaignStore::~CampaignStore() {
    if (fd_ >= 0) ::close(fd_);
}

CampaignStore::CampaignStore(CampaignStore&& o) noexcept
    : path_(std::move(o.path_)),
      fd_(std::exchange(o.fd_, -1)),
      options_(o.options_),
      truncated_bytes_(o.truncated_bytes_),
      states_(std::move(o.states_)),
      actions_(std::move(o.actions_)),
      traces_(std::move(o.traces_)),
      trace_index_(std::move(o.trace_index_)),
      probabilities_(std::move(o.probabilities_)) {}

CampaignStore& CampaignStore::operator=(CampaignStore&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0) ::close(fd_);
        path_ = std::move(o.path_);
        fd_ = std::exchange(o.fd_, -1);
        options_ = o.options_;
        truncated_bytes_ = o.truncated_bytes_;
        states_ = std::move(o.states_);
        actions_ = std::move(o.actions_);
        traces_ = std::move(o.traces_);
        trace_index_ = std::move(o.trace_index_);
        probabilities_ = std::move(o.probabilities_);
    }
    return *this;
}

CampaignStore CampaignStore::open(const std::filesystem::path& path, OpenOptions options) {
    CampaignStore s;
    s.path_ = path;
    s.options_ = options;
    int flags = options.read_only ? O_RDONLY : O_RDWR;
    if (!options.read_only && options.create) flags |= O_CREAT;
    s.fd_ = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
    if (s.fd_ < 0) {
        throw Error(ErrorKind::Io, "cannot open store " + path.string() + ": " + std::strerror(errno));
    }
    if (!options.read_only && ::flock(s.fd_, LOCK_EX | LOCK_NB) != 0) {
        throw Error(ErrorKind::Io, "store " + path.string() + " is locked by another writer");
    }

    struct stat st{};
    ::fstat(s.fd_, &st);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(st.st_size));
    std::size_t got = 0;
    while (got < data.size()) {
        const auto n = ::pread(s.fd_, data.data() + got, data.size() - got, static_cast<off_t>(got));
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            throw Error(ErrorKind::Io, "cannot read store " + path.string());
        }
        got += static_cast<std::size_t>(n);
    }
    s.load(data);
    if (!options.read_only) ::lseek(s.fd_, 0, SEEK_END);
    return s;
}

void CampaignStore::load(const std::vector<std::uint8_t>& data) {
    const auto header = header_bytes();
    std::size_t good = 0;
    if (data.size() < kHeaderSize) {
        // Fresh file, or a crash while writing the header.
        if (!std::equal(data.begin(), data.end(), header.begin())) {
            throw Error(ErrorKind::CorruptRecord, "not a campaign store (bad magic)");
        }
        if (!options_.read_only) {
            if (::ftruncate(fd_, 0) != 0) throw Error(ErrorKind::Io, "cannot reset store");
            ::lseek(fd_, 0, SEEK_SET);
            write_all(fd_, header);
        }
        truncated_bytes_ = data.size();
        return;
    }
    const std::span<const std::uint8_t> all(data);
    if (!std::equal(header.begin(), header.begin() + sizeof(kLogMagic), data.begin())) {
        throw Error(ErrorKind::CorruptRecord, "not a campaign store (bad magic)");
    }
    {
        ByteReader r(all.subspan(sizeof(kLogMagic), 4));
        if (r.u32() != kLogVersion) throw Error(ErrorKind::UnsupportedFormat, "unsupported store version");
    }
    std::size_t pos = kHeaderSize;
    good = pos;
    while (pos < data.size()) {
        if (data.size() - pos < 4) break;
        ByteReader lr(all.subspan(pos, 4));
        const std::size_t len = lr.u32();
        if (len == 0) {
            throw Error(ErrorKind::CorruptRecord, "zero-length record at offset " + std::to_string(pos));
        }
        if (data.size() - pos - 4 < len + 4) break;  // incomplete tail
        const std::uint8_t* body = data.data() + pos + 4;
        ByteReader cr(all.subspan(pos + 4 + len, 4));
        if (cr.u32() != crc_of(body, len)) {
            throw Error(ErrorKind::CorruptRecord, "checksum mismatch at offset " + std::to_string(pos));
        }
        ByteReader r(std::span(body + 1, len - 1));
        if (body[0] == kTraceCommit) {
            Commit c;
            const auto ns = r.u32();
            for (std::uint32_t i = 0; i < ns; ++i) c.states.push_back(read_state(r));
            const auto na = r.u32();
            for (std::uint32_t i = 0; i < na; ++i) c.actions.push_back(read_action_row(r));
            c.trace.trace_id = r.u64();
            c.trace.trace = deserialize_trace(r.bytes());
            apply(c);
        } else if (body[0] == kProbability) {
            auto p = read_probability(r);
            probabilities_[{p.from, p.to}] = p;
        } else {
            throw Error(ErrorKind::CorruptRecord, "unknown record kind at offset " + std::to_string(pos));
        }
        if (!r.done()) throw Error(ErrorKind::CorruptRecord, "record has trailing bytes");
        pos += 4 + len + 4;
        good = pos;
    }
    truncated_bytes_ = data.size() - good;
    if (truncated_bytes_ && !options_.read_only) {
        if (::ftruncate(fd_, static_cast<off_t>(good)) != 0) {
            throw Error(ErrorKind::Io, "cannot truncate torn store tail");
        }
    }
}

void CampaignStore::apply(const Commit& c) {
    for (const auto& s : c.states) states_.emplace(s.state_id, s);
    actions_.insert(actions_.end(), c.actions.begin(), c.actions.end());
    trace_index_.emplace(c.trace.trace_id, traces_.size());
    traces_.push_back(c.trace);
}

std::vector<std::uint8_t> CampaignStore::encode_commit(const Commit& c) const {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(c.states.size()));
    for (const auto& s : c.states) write_state(w, s);
    w.u32(static_cast<std::uint32_t>(c.actions.size()));
    for (const auto& a : c.actions) write_action_row(w, a);
    w.u64(c.trace.trace_id);
    w.bytes(serialize_trace(c.trace.trace));
    return w.take();
}

void CampaignStore::append(std::uint8_t kind, const std::vector<std::uint8_t>& payload) {
    if (fd_ < 0) return;
    if (options_.read_only) throw Error(ErrorKind::InvalidArgument, "store opened read-only");
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(payload.size() + 1));
    std::vector<std::uint8_t> body;
    body.reserve(payload.size() + 1);
    body.push_back(kind);
    body.insert(body.end(), payload.begin(), payload.end());
    w.raw(body);
    w.u32(crc_of(body.data(), body.size()));
    const off_t before = ::lseek(fd_, 0, SEEK_END);
    try {
        write_all(fd_, w.data());
    } catch (...) {
        if (::ftruncate(fd_, before) != 0) {
            // The torn record will be dropped on the next open.
        }
        throw;
    }
    if (options_.sync) ::fdatasync(fd_);
}

std::uint64_t CampaignStore::record_trace(const ConnectionTrace& trace) {
    std::string why;
    if (!trace_is_valid(trace, &why)) throw Error(ErrorKind::InvalidArgument, "invalid trace: " + why);
    const auto id = trace_id(trace);
    std::lock_guard lock(mu_);
    if (trace_index_.count(id)) return id;

    Commit c;
    std::set<StateId> fresh;
    for (const auto& step : trace.steps) {
        const auto phy = physical_of(step.state);
        if (!states_.count(step.state) && fresh.insert(step.state).second) {
            StateRow s;
            s.state_id = step.state;
            s.channel = step.state.channel_code();
            for (int i = 0; i < 3; ++i) s.first_bytes[i] = step.state.prefix_byte(i);
            s.description = describe_state(step.state);
            c.states.push_back(std::move(s));
        }
        ActionRow a;
        a.action_id = actions_.size() + c.actions.size() + 1;
        a.state_id = step.state;
        a.raw_bytes = step.raw;
        a.channel = step.state.channel_code();
        a.physical_channel = phy;
        a.message_time_ns = step.time_ns;
        a.trace_id = id;
        c.actions.push_back(std::move(a));
    }
    c.trace = StoredTrace{id, trace};
    append(kTraceCommit, encode_commit(c));
    apply(c);
    return id;
}

void CampaignStore::commit(const Commit& c) {
    std::lock_guard lock(mu_);
    if (trace_index_.count(c.trace.trace_id)) return;
    append(kTraceCommit, encode_commit(c));
    apply(c);
}

void CampaignStore::set_probability(const ProbabilityRow& row) {
    if (!(row.probability > 0.0 && row.probability <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "probability outside (0, 1]");
    }
    if (row.completion_rate && !(*row.completion_rate >= 0.0 && *row.completion_rate <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "completion rate outside [0, 1]");
    }
    std::lock_guard lock(mu_);
    ByteWriter w;
    write_probability(w, row);
    append(kProbability, w.data());
    probabilities_[{row.from, row.to}] = row;
}

const StoredTrace* CampaignStore::find(std::uint64_t id) const {
    const auto it = trace_index_.find(id);
    return it == trace_index_.end() ? nullptr : &traces_[it->second];
}

std::vector<const StoredTrace*> CampaignStore::query(std::optional<Outcome> outcome) const {
    std::vector<const StoredTrace*> out;
    for (const auto& t : traces_)
        if (!outcome || t.trace.outcome == *outcome) out.push_back(&t);
    return out;
}

FrequencyTable CampaignStore::query_frequencies(std::optional<Outcome> outcome) const {
    if (traces_.empty()) throw Error(ErrorKind::EmptyStore, "store holds no traces");
    FrequencyTable f;
    for (const auto* t : query(outcome)) {
        ++f.traces;
        const auto& steps = t->trace.steps;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            ++f.states[steps[i].state];
            if (i + 1 < steps.size()) ++f.transactions[{steps[i].state, steps[i + 1].state}];
        }
    }
    return f;
}

void CampaignStore::compact() {
    if (!path_) return;
    std::lock_guard lock(mu_);
    const auto tmp = std::filesystem::path(path_->string() + ".tmp");
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorKind::Io, "cannot create " + tmp.string());
    const int keep = fd_;
    fd_ = fd;
    try {
        write_all(fd_, header_bytes());
        // Replay in order so state and action rows land with their first trace.
        std::size_t next_action = 0;
        std::set<StateId> written;
        for (const auto& t : traces_) {
            Commit c;
            c.trace = t;
            while (next_action < actions_.size() && actions_[next_action].trace_id == t.trace_id) {
                const auto& a = actions_[next_action++];
                if (written.insert(a.state_id).second) c.states.push_back(states_.at(a.state_id));
                c.actions.push_back(a);
            }
            append(kTraceCommit, encode_commit(c));
        }
        for (const auto& [key, p] : probabilities_) {
            ByteWriter w;
            write_probability(w, p);
            append(kProbability, w.data());
        }
        ::fsync(fd_);
    } catch (...) {
        ::close(fd_);
        fd_ = keep;
        std::filesystem::remove(tmp);
        throw;
    }
    std::filesystem::rename(tmp, *path_);
    ::close(keep);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        throw Error(ErrorKind::Io, "cannot relock compacted store");
    }
    ::close(fd_);
    fd_ = ::open(path_->c_str(), O_RDWR | O_CLOEXEC);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        throw Error(ErrorKind::Io, "cannot reopen compacted store");
    }
    ::lseek(fd_, 0, SEEK_END);
}

bool CampaignStore::check_integrity(std::string* why) const {
    auto fail = [why](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    std::map<std::uint64_t, std::int64_t> last_time;
    for (const auto& a : actions_) {
        if (!states_.count(a.state_id)) return fail("action " + std::to_string(a.action_id) + " has no state row");
        if (!trace_index_.count(a.trace_id)) return fail("action " + std::to_string(a.action_id) + " has no trace");
        auto [it, fresh] = last_time.emplace(a.trace_id, a.message_time_ns);
        if (!fresh) {
            if (a.message_time_ns < it->second) return fail("action times decrease within a trace");
            it->second = a.message_time_ns;
        }
    }
    std::size_t expected_actions = 0;
    for (const auto& t : traces_) {
        for (const auto& s : t.trace.steps)
            if (!states_.count(s.state)) return fail("trace step has no state row");
        expected_actions += t.trace.steps.size();
    }
    if (expected_actions != actions_.size()) return fail("action count does not match trace steps");
    for (const auto& [key, p] : probabilities_) {
        if (!(p.probability > 0.0 && p.probability <= 1.0)) return fail("probability out of range");
    }
    return true;
}

bool CampaignStore::operator==(const CampaignStore& other) const {
    return states_ == other.states_ && actions_ == other.actions_ && traces_ == other.traces_ &&
           probabilities_ == other.probabilities_;
}

}  // namespace fuzztwin::store
