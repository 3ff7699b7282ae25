#include "fuzztwin/twin/profile.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <vector>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::twin {

std::string_view to_string(Clustering c) noexcept {
    switch (c) {
        case Clustering::RowClustered: return "row_clustered";
        case Clustering::ColumnClustered: return "column_clustered";
        case Clustering::Uniform: return "uniform";
    }
    return "uniform";
}

std::optional<Clustering> clustering_from_string(std::string_view s) noexcept {
    if (s == "row_clustered") return Clustering::RowClustered;
    if (s == "column_clustered") return Clustering::ColumnClustered;
    if (s == "uniform") return Clustering::Uniform;
    return std::nullopt;
}

VulnerabilityProfile generate_profile(std::span<const StateId> states, std::size_t count,
                                      Clustering clustering, std::uint64_t seed) {
    const std::size_t n = states.size();
    if (n < 2 || count > n * (n - 1)) {
        throw Error(ErrorKind::InvalidArgument, "cannot place " + std::to_string(count) +
                                                    " pairs over " + std::to_string(n) + " states");
    }
    Rng rng(seed);
    VulnerabilityProfile profile;
    profile.clustering = clustering;

    if (clustering == Clustering::Uniform) {
        std::vector<std::pair<std::size_t, std::size_t>> all;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b) all.emplace_back(a, b);
        rng.shuffle(std::span(all));
        for (std::size_t i = 0; i < count; ++i)
            profile.vulnerable_pairs.emplace(states[all[i].first], states[all[i].second]);
        return profile;
    }

    // Clustered: choose the fewest lines that can hold `count` pairs, then
    // spread the pairs evenly over them.
    const std::size_t lines = (count + (n - 2)) / (n - 1);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(std::span(order));
    std::size_t remaining = count;
    for (std::size_t l = 0; l < lines; ++l) {
        const std::size_t line = order[l];
        const std::size_t take = remaining / (lines - l);
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < n; ++i)
            if (i != line) others.push_back(i);
        rng.shuffle(std::span(others));
        for (std::size_t k = 0; k < take; ++k) {
            if (clustering == Clustering::RowClustered) {
                profile.vulnerable_pairs.emplace(states[line], states[others[k]]);
            } else {
                profile.vulnerable_pairs.emplace(states[others[k]], states[line]);
            }
        }
        remaining -= take;
    }
    return profile;
}

VulnerabilityProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open profile " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, "profile " + path.string() + ": " + e.what());
    }
    VulnerabilityProfile profile;
    const std::string name = doc.value("clustering", "uniform");
    const auto clustering = clustering_from_string(name);
    if (!clustering) throw Error(ErrorKind::InvalidArgument, "unknown clustering '" + name + "'");
    profile.clustering = *clustering;
    for (const auto& pair : doc.at("pairs")) {
        auto a = parse_state_id(pair.at(0).get<std::string>());
        auto b = parse_state_id(pair.at(1).get<std::string>());
        if (!a || !b) throw Error(ErrorKind::InvalidArgument, "bad state id in " + path.string());
        profile.vulnerable_pairs.emplace(*a, *b);
    }
    if (doc.contains("count") && doc["count"].get<std::size_t>() != profile.count()) {
        throw Error(ErrorKind::InvalidArgument, "profile count does not match its pairs");
    }
    return profile;
}

void save_profile(const VulnerabilityProfile& profile, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["clustering"] = to_string(profile.clustering);
    doc["count"] = profile.count();
    doc["pairs"] = nlohmann::json::array();
    for (const auto& [a, b] : profile.vulnerable_pairs) {
        doc["pairs"].push_back({to_string(a), to_string(b)});
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write profile " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace fuzztwin::twin
