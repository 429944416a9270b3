#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldlens/domain.hpp"
#include "fieldlens/result.hpp"

namespace fieldlens::dataset {

using domain::AnnotationSet;
using domain::ClassId;
using domain::MediaId;

// ---------------------------------------------------------------------------
// Frame extraction

struct FramePlan {
    MediaId source_video;
    std::vector<double> timestamps_s;
    double effective_rate_fps = 0;
    std::vector<domain::Issue> warnings;
};

/// Timestamps k / rate for k = 0, 1, ... strictly below `duration_s`, with the
/// rate clamped to the video's own frame rate.
Result<FramePlan> plan_frame_extraction(double duration_s, double video_fps, double requested_rate_fps,
                                        MediaId source_video = {});

// ---------------------------------------------------------------------------
// Splitting

enum class Subset { train = 0, test = 1, eval = 2 };

struct SplitRatio {
    double train = 6;
    double test = 2;
    double eval = 2;

    /// Parses `train:test:eval`, e.g. "6:2:2" or "0.7:0.15:0.15".
    static Result<SplitRatio> parse(std::string_view text);
    Result<void> validate() const;
    std::array<double, 3> proportions() const;
    std::string to_string() const;
};

struct Stratum {
    std::string name;
    std::optional<ClassId> class_id;  // absent for the unlabeled stratum
    std::array<std::size_t, 3> counts{};
};

struct SplitResult {
    std::vector<MediaId> train;
    std::vector<MediaId> test;
    std::vector<MediaId> eval;
    std::uint64_t seed = 0;
    SplitRatio ratio;
    std::vector<Stratum> strata;

    std::size_t size() const { return train.size() + test.size() + eval.size(); }
    const std::vector<MediaId>& subset(Subset s) const;
};

/// Largest-remainder apportionment of `n` units over `proportions`; remainder
/// ties resolve toward train, then test.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& proportions);

/// Seeded, stratified split. Images are stratified by class (for detection,
/// the most frequent class in the image, lowest id on ties); unlabeled images
/// form their own stratum. Subset sizes equal `apportion(N, ratio)` and each
/// stratum's share of every subset is the floor or ceiling of its quota.
Result<SplitResult> split_dataset(const AnnotationSet& set, const SplitRatio& ratio, std::uint64_t seed);

/// Writes train.txt, test.txt, eval.txt (one media id per line) and split.json.
Result<void> write_split_manifests(const SplitResult& split, const std::filesystem::path& dir);
Result<SplitResult> read_split_manifests(const std::filesystem::path& dir);
std::string split_sidecar_json(const SplitResult& split);

// ---------------------------------------------------------------------------
// Statistics and sufficiency advice

struct DatasetStats {
    std::map<ClassId, std::size_t> per_class_image_count;
    std::map<ClassId, std::size_t> per_class_box_count;
    std::size_t total_images = 0;
    std::size_t unlabeled_images = 0;
};

DatasetStats dataset_stats(const AnnotationSet& set);

enum class Tier { insufficient, marginal, good, optimal };

std::string_view to_string(Tier tier);

struct TierThresholds {
    std::size_t marginal = 150;
    std::size_t good = 500;
    std::size_t optimal = 2000;
};

/// Lower bounds are inclusive: 150 is marginal, 500 good, 2000 optimal.
Tier tier_for(std::size_t images_per_class, const TierThresholds& thresholds = {});

struct AdvisoryReport {
    std::map<ClassId, Tier> per_class_tier;
    std::vector<std::string> notes;
};

AdvisoryReport advise_sufficiency(const DatasetStats& stats, const domain::LabelMap* names = nullptr,
                                  const TierThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// JSON views shared by the command line and the service

std::string stats_json(const DatasetStats& stats, const domain::LabelMap* names = nullptr);
std::string advisory_json(const AdvisoryReport& report, const domain::LabelMap* names = nullptr);
std::string frame_plan_json(const FramePlan& plan);

}  // namespace fieldlens::dataset
