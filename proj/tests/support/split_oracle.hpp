#pragma once

// Exact-integer reference for split sizes and a checker for the split
// properties, shared by the unit and acceptance suites.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "fieldlens/dataset.hpp"

namespace fieldlens::testkit {

/// Largest remainder over integer weights: exact arithmetic, remainder ties
/// to the earlier subset.
inline std::array<std::size_t, 3> oracle_apportion(std::size_t n, const std::array<unsigned, 3>& w) {
    const std::size_t total = w[0] + w[1] + w[2];
    std::array<std::size_t, 3> counts{};
    std::array<std::size_t, 3> rem{};
    std::size_t left = n;
    for (int i = 0; i < 3; ++i) {
        counts[i] = n * w[i] / total;
        rem[i] = n * w[i] % total;
        left -= counts[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; left > 0; ++k, --left) ++counts[order[k]];
    return counts;
}

inline std::optional<domain::ClassId> oracle_stratum(const domain::AnnotationSet& set, const std::string& id) {
    if (set.task == domain::Task::classification) {
        auto it = set.class_of.find(id);
        return it == set.class_of.end() ? std::nullopt : std::optional(it->second);
    }
    std::map<domain::ClassId, int> freq;
    for (const auto& b : set.boxes_of(id)) ++freq[b.class_id];
    std::optional<domain::ClassId> best;
    int best_n = 0;
    for (auto [c, n] : freq)
        if (n > best_n) best = c, best_n = n;
    return best;
}

/// Partition exactness, sizes equal to the exact apportionment, and each
/// stratum's share of each subset within one image of its exact quota.
inline bool split_properties_hold(const domain::AnnotationSet& set, const std::array<unsigned, 3>& w,
                                  const dataset::SplitResult& split, std::string* why) {
    auto fail = [&](std::string reason) {
        if (why) *why = std::move(reason);
        return false;
    };
    const std::vector<std::string>* lists[] = {&split.train, &split.test, &split.eval};
    std::set<std::string> seen;
    std::size_t listed = 0;
    for (auto* l : lists)
        for (const auto& id : *l) {
            ++listed;
            if (!seen.insert(id).second) return fail("duplicate assignment of " + id);
        }
    std::set<std::string> input;
    for (const auto& img : set.images) input.insert(img.media_id);
    if (seen != input || listed != input.size()) return fail("union differs from the input");

    auto expect = oracle_apportion(set.images.size(), w);
    for (int s = 0; s < 3; ++s)
        if (lists[s]->size() != expect[s])
            return fail("subset " + std::to_string(s) + " has " + std::to_string(lists[s]->size()) + ", expected " +
                        std::to_string(expect[s]));

    const std::size_t total = w[0] + w[1] + w[2];
    std::map<std::optional<domain::ClassId>, std::array<std::size_t, 3>> got;
    std::map<std::optional<domain::ClassId>, std::size_t> size;
    for (int s = 0; s < 3; ++s)
        for (const auto& id : *lists[s]) ++got[oracle_stratum(set, id)][s];
    for (const auto& img : set.images) ++size[oracle_stratum(set, img.media_id)];
    for (const auto& [key, n] : size)
        for (int s = 0; s < 3; ++s) {
            // |count * total - n * w| < total  <=>  within one image of the quota
            long long lhs = static_cast<long long>(got[key][s] * total) - static_cast<long long>(n * w[s]);
            if (lhs >= static_cast<long long>(total) || -lhs >= static_cast<long long>(total))
                return fail("stratum off quota in subset " + std::to_string(s));
        }
    return true;
}

}  // namespace fieldlens::testkit
