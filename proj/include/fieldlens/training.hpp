#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fieldlens/dataset.hpp"
#include "fieldlens/domain.hpp"
#include "fieldlens/models.hpp"
#include "fieldlens/result.hpp"

namespace fieldlens::training {

using domain::LabelMap;

struct ConvergencePolicy {
    double loss_threshold = 0.1;
    std::size_t window = 100;
    std::size_t patience = 3;

    Result<void> validate() const;
    bool operator==(const ConvergencePolicy&) const = default;
};

struct TrainingConfig {
    models::ModelRegistryEntry model;
    std::string base_weights;
    dataset::SplitResult split;
    LabelMap label_map;
    domain::Task task = domain::Task::detection;
    std::uint64_t max_steps = 40000;
    ConvergencePolicy convergence;
};

struct TrainingOverrides {
    std::optional<std::string> base_weights{};
    std::optional<std::uint64_t> max_steps{};
    std::optional<double> loss_threshold{};
    std::optional<std::size_t> window{};
    std::optional<std::size_t> patience{};
};

/// Reference to the COCO-pretrained checkpoint of a registry model.
std::string default_base_weights(const models::ModelRegistryEntry& model);

/// Config for fine-tuning `model` on `dataset` using `split`, which must
/// cover only images of the dataset.
Result<TrainingConfig> build_training_config(const domain::AnnotationSet& dataset, const models::ModelRegistryEntry& model,
                                             const std::optional<dataset::SplitResult>& split,
                                             const TrainingOverrides& overrides = {});

std::string config_json(const TrainingConfig& config);
Result<TrainingConfig> parse_config(std::string_view json_text);

// ---------------------------------------------------------------------------
// Loss monitoring

struct LossPoint {
    std::uint64_t step = 0;
    double loss = 0;

    bool operator==(const LossPoint&) const = default;
};

enum class Convergence { converged, not_converged };

/// Converged when each of the last `patience` non-overlapping windows of
/// `window` points, counted back from the newest point, has mean below the
/// threshold.
Convergence check_convergence(std::span<const LossPoint> history, const ConvergencePolicy& policy);

enum class RunStatus { pending, running, converged, max_steps_reached, failed };

std::string_view to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);
bool is_terminal(RunStatus status);
bool is_finished(RunStatus status);  // converged or max_steps_reached

struct TrainingRun {
    std::string run_id;
    TrainingConfig config;
    std::vector<LossPoint> loss_history;
    RunStatus status = RunStatus::pending;
    std::optional<std::string> failure{};
    std::optional<std::uint64_t> finished_at_step{};
};

/// Appends one loss report and re-evaluates the status. Convergence is
/// checked before the step budget.
Result<TrainingRun> record_loss(TrainingRun run, std::uint64_t step, double loss);

struct Replay {
    RunStatus status = RunStatus::running;
    std::optional<std::uint64_t> flip_step{};
    std::size_t points_consumed = 0;
};

/// Feeds `history` through record_loss on a fresh running run and reports
/// where, if anywhere, the status flipped.
Result<Replay> replay(const TrainingConfig& config, std::span<const LossPoint> history);

std::string run_json(const TrainingRun& run);
Result<TrainingRun> parse_run(std::string_view json_text);

// ---------------------------------------------------------------------------
// Trainer adapters

struct TrainerArtifacts {
    std::filesystem::path weights;
    std::string runtime_format_tag;
    std::pair<int, int> input_size{0, 0};
};

/// Boundary to the external trainer. Pull-based: the orchestrator launches a
/// run and then polls for losses and completion.
class TrainerAdapter {
public:
    virtual ~TrainerAdapter() = default;

    virtual Result<void> launch(const TrainingRun& run, const domain::AnnotationSet& dataset) = 0;
    /// Every loss reported so far, in step order.
    virtual Result<std::vector<LossPoint>> poll(const std::string& run_id) = 0;
    /// Failure reason when the trainer gave up.
    virtual std::optional<std::string> failure(const std::string& run_id) = 0;
    virtual Result<TrainerArtifacts> artifacts(const std::string& run_id) = 0;
    /// Asks the trainer to stop; the run has converged or hit its budget.
    virtual void stop(const std::string& run_id) = 0;
};

/// Directory handoff. Per run, `<root>/<run_id>/` receives config.json,
/// train.txt, test.txt, eval.txt, split.json and dataset.json (COCO). The
/// trainer appends `step<TAB>loss` lines to loss.log, writes model.bin and
/// meta.json when done, or a `failed` file holding the reason. A `stop` file
/// asks it to finish early.
class DirectoryTrainer : public TrainerAdapter {
public:
    explicit DirectoryTrainer(std::filesystem::path root);

    Result<void> launch(const TrainingRun& run, const domain::AnnotationSet& dataset) override;
    Result<std::vector<LossPoint>> poll(const std::string& run_id) override;
    std::optional<std::string> failure(const std::string& run_id) override;
    Result<TrainerArtifacts> artifacts(const std::string& run_id) override;
    void stop(const std::string& run_id) override;

    std::filesystem::path run_dir(const std::string& run_id) const { return root_ / run_id; }

private:
    std::filesystem::path root_;
};

struct MockScript {
    std::vector<double> losses;
    std::uint64_t step_stride = 1;
    bool unavailable = false;
    bool fail = false;
    std::string runtime_format_tag = "tflite";
    std::pair<int, int> input_size{320, 320};
};

/// Stands in for a real trainer: on launch it writes the scripted loss curve
/// and a dummy model derived only from the config, so identical configs give
/// identical artifacts.
class MockTrainer : public DirectoryTrainer {
public:
    MockTrainer(std::filesystem::path root, MockScript script);

    Result<void> launch(const TrainingRun& run, const domain::AnnotationSet& dataset) override;

private:
    MockScript script_;
};

/// Deterministic stand-in weights for a config.
std::string mock_weights(const TrainingConfig& config);

// ---------------------------------------------------------------------------
// Orchestration

/// Tracks runs, applies trainer reports and persists each run to
/// `<runs_root>/<run_id>/run.json`.
class Orchestrator {
public:
    Orchestrator(std::filesystem::path runs_root, TrainerAdapter& trainer);

    Result<TrainingRun> start(const TrainingConfig& config, const domain::AnnotationSet& dataset);
    /// Pulls new reports from the trainer; returns the updated snapshot.
    Result<TrainingRun> refresh(const std::string& run_id);
    Result<TrainingRun> snapshot(const std::string& run_id) const;
    std::vector<std::string> run_ids() const;
    /// Loads persisted runs, e.g. after a restart.
    Result<std::size_t> resume();

private:
    Result<void> persist(const TrainingRun& run) const;
    std::string next_run_id();

    std::filesystem::path root_;
    TrainerAdapter& trainer_;
    mutable std::mutex mu_;
    std::map<std::string, TrainingRun> runs_;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Packaging

struct ModelPackage {
    std::string weights_ref;
    std::string runtime_format_tag;
    LabelMap label_map;
    std::pair<int, int> input_size{0, 0};
    std::string checksum;
    std::string source_run;
    domain::Task task = domain::Task::detection;
    std::string model_name;

    bool operator==(const ModelPackage&) const = default;
};

Result<ModelPackage> package_model(const TrainingRun& run, const TrainerArtifacts& artifacts);

std::string package_json(const ModelPackage& package);
Result<ModelPackage> parse_package(std::string_view json_text);

}  // namespace fieldlens::training
