#include <cstdio>

#include "fieldlens/digest.hpp"
#include "fieldlens/training.hpp"
#include "json_io.hpp"

namespace fieldlens::training {

namespace fs = std::filesystem;

Orchestrator::Orchestrator(fs::path runs_root, TrainerAdapter& trainer) : root_(std::move(runs_root)), trainer_(trainer) {}

std::string Orchestrator::next_run_id() {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04llu", static_cast<unsigned long long>(++counter_));
    return std::string("run-") + buf + "-" + random_hex(4);
}

Result<void> Orchestrator::persist(const TrainingRun& run) const {
    std::error_code ec;
    fs::create_directories(root_ / run.run_id, ec);
    if (ec) return make_error(ErrorCode::IoError, "cannot create " + (root_ / run.run_id).string());
    // write-then-rename so a crash never leaves a torn run.json
    const auto tmp = root_ / run.run_id / "run.json.tmp";
    if (auto ok = detail::write_file(tmp, run_json(run)); !ok) return ok;
    fs::rename(tmp, root_ / run.run_id / "run.json", ec);
    if (ec) return make_error(ErrorCode::IoError, "cannot replace run.json: " + ec.message());
    return {};
}

Result<TrainingRun> Orchestrator::start(const TrainingConfig& config, const domain::AnnotationSet& set) {
    if (auto ok = config.convergence.validate(); !ok) return ok.error();
    if (auto ok = models::check_class_capacity(config.model, config.label_map.size()); !ok) return ok.error();
    if (config.split.size() == 0) return make_error(ErrorCode::MissingSplit, "config has an empty split");

    std::lock_guard lock(mu_);
    TrainingRun run;
    do run.run_id = next_run_id();
    while (runs_.count(run.run_id));
    run.config = config;
    run.status = RunStatus::pending;

    if (auto ok = trainer_.launch(run, set); !ok) return ok.error();
    run.status = RunStatus::running;
    if (auto ok = persist(run); !ok) return ok.error();
    runs_[run.run_id] = run;
    return run;
}

Result<TrainingRun> Orchestrator::refresh(const std::string& run_id) {
    std::lock_guard lock(mu_);
    auto it = runs_.find(run_id);
    if (it == runs_.end()) return make_error(ErrorCode::UnknownRun, "no run " + run_id);
    TrainingRun run = it->second;
    if (is_terminal(run.status)) return run;

    auto points = trainer_.poll(run_id);
    if (!points) {
        run.status = RunStatus::failed;
        run.failure = points.error().describe();
    } else {
        const std::uint64_t last = run.loss_history.empty() ? 0 : run.loss_history.back().step;
        const bool have_any = !run.loss_history.empty();
        for (const auto& p : *points) {
            if (have_any && p.step <= last) continue;
            auto next = record_loss(run, p.step, p.loss);
            if (!next) {
                run.status = RunStatus::failed;
                run.failure = next.error().describe();
                break;
            }
            run = std::move(*next);
            if (is_terminal(run.status)) break;
        }
    }
    if (!is_terminal(run.status)) {
        if (auto why = trainer_.failure(run_id)) {
            run.status = RunStatus::failed;
            run.failure = *why;
        }
    }
    if (is_terminal(run.status)) trainer_.stop(run_id);
    if (auto ok = persist(run); !ok) return ok.error();
    it->second = run;
    return run;
}

Result<TrainingRun> Orchestrator::snapshot(const std::string& run_id) const {
    std::lock_guard lock(mu_);
    auto it = runs_.find(run_id);
    if (it == runs_.end()) return make_error(ErrorCode::UnknownRun, "no run " + run_id);
    return it->second;
}

std::vector<std::string> Orchestrator::run_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, run] : runs_) ids.push_back(id);
    return ids;
}

Result<std::size_t> Orchestrator::resume() {
    std::lock_guard lock(mu_);
    std::error_code ec;
    if (!fs::exists(root_, ec)) return std::size_t{0};
    std::size_t loaded = 0;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        const auto file = entry.path() / "run.json";
        if (!fs::exists(file)) continue;
        auto text = detail::read_file(file);
        if (!text) return text.error();
        auto run = parse_run(*text);
        if (!run) return make_error(run.error().code, file.string() + ": " + run.error().message);
        runs_[run->run_id] = std::move(*run);
        ++loaded;
    }
    if (ec) return make_error(ErrorCode::IoError, "cannot list " + root_.string());
    counter_ = std::max<std::uint64_t>(counter_, runs_.size());
    return loaded;
}

}  // namespace fieldlens::training
