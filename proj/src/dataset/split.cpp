#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fieldlens/dataset.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::dataset {

namespace {

constexpr double kEps = 1e-9;

std::size_t floor_count(double quota) { return static_cast<std::size_t>(std::floor(quota + kEps)); }

// Uniform integer in [0, n) by rejection; independent of the standard
// library's distribution implementation so splits agree across toolchains.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

void shuffle(std::vector<MediaId>& ids, std::mt19937_64& rng) {
    for (std::size_t i = ids.size(); i > 1; --i) {
        std::size_t j = bounded(rng, i);
        std::swap(ids[i - 1], ids[j]);
    }
}

// Dominant class of a detection image: most boxes, lowest id on ties.
std::optional<ClassId> primary_class(const AnnotationSet& set, const MediaId& id) {
    if (set.task == domain::Task::classification) {
        auto it = set.class_of.find(id);
        if (it == set.class_of.end()) return std::nullopt;
        return it->second;
    }
    auto boxes = set.boxes_of(id);
    if (boxes.empty()) return std::nullopt;
    std::map<ClassId, std::size_t> counts;
    for (const auto& b : boxes) ++counts[b.class_id];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

// Adds one unit to cells of `counts` so that every row reaches its stratum
// size and every column reaches `targets`, touching only cells whose quota
// has a fractional part. A bipartite max-flow; rows x 3 is tiny.
class Rounder {
public:
    Rounder(std::vector<std::array<double, 3>> fracs, std::vector<std::size_t> row_need,
            std::array<std::size_t, 3> col_need)
        : fracs_(std::move(fracs)), row_need_(std::move(row_need)), col_need_(col_need),
          added_(fracs_.size(), std::array<bool, 3>{}) {}

    bool run() {
        for (std::size_t r = 0; r < fracs_.size(); ++r) {
            while (row_need_[r] > 0) {
                std::vector<bool> seen_rows(fracs_.size(), false);
                if (!augment(r, seen_rows)) return false;
                --row_need_[r];
            }
        }
        return true;
    }

    const std::vector<std::array<bool, 3>>& added() const { return added_; }

private:
    // Columns of row r ordered by descending fractional part.
    std::array<std::size_t, 3> order(std::size_t r) const {
        std::array<std::size_t, 3> cols{0, 1, 2};
        std::stable_sort(cols.begin(), cols.end(),
                         [&](std::size_t a, std::size_t b) { return fracs_[r][a] > fracs_[r][b] + kEps; });
        return cols;
    }

    bool augment(std::size_t r, std::vector<bool>& seen_rows) {
        seen_rows[r] = true;
        for (std::size_t c : order(r)) {
            if (added_[r][c] || fracs_[r][c] <= kEps) continue;
            if (col_need_[c] > 0) {
                --col_need_[c];
                added_[r][c] = true;
                return true;
            }
        }
        // No free column: steal one from another row that can move elsewhere.
        for (std::size_t c : order(r)) {
            if (added_[r][c] || fracs_[r][c] <= kEps) continue;
            for (std::size_t o = 0; o < fracs_.size(); ++o) {
                if (seen_rows[o] || !added_[o][c]) continue;
                added_[o][c] = false;
                if (augment(o, seen_rows)) {
                    added_[r][c] = true;
                    return true;
                }
                added_[o][c] = true;
            }
        }
        return false;
    }

    std::vector<std::array<double, 3>> fracs_;
    std::vector<std::size_t> row_need_;
    std::array<std::size_t, 3> col_need_;
    std::vector<std::array<bool, 3>> added_;
};

}  // namespace

Result<SplitRatio> SplitRatio::parse(std::string_view text) {
    auto parts = split(text, ':');
    if (parts.size() != 3) return make_error(ErrorCode::InvalidRatio, "expected train:test:eval, got '" + std::string(text) + "'");
    SplitRatio ratio;
    double* fields[] = {&ratio.train, &ratio.test, &ratio.eval};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!parse_real(trim(parts[i]), *fields[i]))
            return make_error(ErrorCode::InvalidRatio, "not a number: '" + parts[i] + "'");
    }
    if (auto ok = ratio.validate(); !ok) return ok.error();
    return ratio;
}

Result<void> SplitRatio::validate() const {
    for (double v : {train, test, eval})
        if (!std::isfinite(v) || v <= 0) return make_error(ErrorCode::InvalidRatio, "ratio parts must be positive");
    return {};
}

std::array<double, 3> SplitRatio::proportions() const {
    double total = train + test + eval;
    return {train / total, test / total, eval / total};
}

std::string SplitRatio::to_string() const {
    return format_real(train) + ":" + format_real(test) + ":" + format_real(eval);
}

const std::vector<MediaId>& SplitResult::subset(Subset s) const {
    switch (s) {
        case Subset::train: return train;
        case Subset::test: return test;
        case Subset::eval: break;
    }
    return eval;
}

std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& proportions) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> rema{};
    std::size_t used = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        double quota = static_cast<double>(n) * proportions[i];
        counts[i] = std::min(floor_count(quota), n);
        rema[i] = quota - static_cast<double>(counts[i]);
        used += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rema[a] > rema[b] + kEps; });
    for (std::size_t k = 0; used < n; k = (k + 1) % 3, ++used) ++counts[order[k]];
    while (used > n) {
        // Only reachable through rounding slop; take back from the smallest remainder.
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if (counts[*it] > 0) {
                --counts[*it];
                break;
            }
        --used;
    }
    return counts;
}

Result<SplitResult> split_dataset(const AnnotationSet& set, const SplitRatio& ratio, std::uint64_t seed) {
    if (set.images.empty()) return make_error(ErrorCode::EmptyDataset, "cannot split an empty dataset");
    if (auto ok = ratio.validate(); !ok) return ok.error();
    const auto p = ratio.proportions();

    // strata keyed by class id; the unlabeled stratum sorts last
    std::map<std::optional<ClassId>, std::vector<MediaId>, bool (*)(const std::optional<ClassId>&, const std::optional<ClassId>&)>
        strata([](const std::optional<ClassId>& a, const std::optional<ClassId>& b) {
            if (a && b) return *a < *b;
            return a.has_value() && !b.has_value();
        });
    for (const auto& img : set.images) strata[primary_class(set, img.media_id)].push_back(img.media_id);

    const auto targets = apportion(set.images.size(), p);

    std::vector<std::array<std::size_t, 3>> counts;
    std::vector<std::array<double, 3>> fracs;
    std::vector<std::size_t> row_need;
    std::array<std::size_t, 3> col_need = targets;
    for (const auto& [key, ids] : strata) {
        std::array<std::size_t, 3> c{};
        std::array<double, 3> f{};
        std::size_t sum = 0;
        for (std::size_t j = 0; j < 3; ++j) {
            double quota = static_cast<double>(ids.size()) * p[j];
            c[j] = floor_count(quota);
            f[j] = std::max(0.0, quota - static_cast<double>(c[j]));
            sum += c[j];
            col_need[j] -= std::min(col_need[j], c[j]);
        }
        counts.push_back(c);
        fracs.push_back(f);
        row_need.push_back(ids.size() - std::min(ids.size(), sum));
    }

    Rounder rounder(fracs, row_need, col_need);
    if (!rounder.run()) {
        // Not reachable for consistent inputs; fall back to per-stratum apportionment.
        std::size_t r = 0;
        for (const auto& [key, ids] : strata) counts[r++] = apportion(ids.size(), p);
    } else {
        for (std::size_t r = 0; r < counts.size(); ++r)
            for (std::size_t j = 0; j < 3; ++j)
                if (rounder.added()[r][j]) ++counts[r][j];
    }

    SplitResult result;
    result.seed = seed;
    result.ratio = ratio;
    std::mt19937_64 rng(seed);
    std::size_t r = 0;
    for (auto& [key, ids] : strata) {
        std::sort(ids.begin(), ids.end());
        shuffle(ids, rng);
        const auto& c = counts[r++];
        auto it = ids.begin();
        result.train.insert(result.train.end(), it, it + c[0]);
        it += c[0];
        result.test.insert(result.test.end(), it, it + c[1]);
        it += c[1];
        result.eval.insert(result.eval.end(), it, ids.end());

        Stratum s;
        s.class_id = key;
        if (key)
            s.name = *key < set.label_map.size() ? set.label_map.classes[*key] : std::to_string(*key);
        else
            s.name = "(unlabeled)";
        s.counts = {c[0], c[1], ids.size() - c[0] - c[1]};
        result.strata.push_back(std::move(s));
    }
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.test.begin(), result.test.end());
    std::sort(result.eval.begin(), result.eval.end());
    return result;
}

}  // namespace fieldlens::dataset
