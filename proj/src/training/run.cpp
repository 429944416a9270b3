#include <cmath>
#include <fstream>
#include <sstream>

#include "fieldlens/text.hpp"
#include "fieldlens/training.hpp"
#include "json_io.hpp"

namespace fieldlens::training {

using nlohmann::ordered_json;

Convergence check_convergence(std::span<const LossPoint> history, const ConvergencePolicy& policy) {
    if (policy.window == 0 || policy.patience == 0) return Convergence::not_converged;
    const std::size_t n = history.size();
    if (n / policy.window < policy.patience) return Convergence::not_converged;
    for (std::size_t k = 0; k < policy.patience; ++k) {
        const std::size_t end = n - k * policy.window;
        double sum = 0;
        for (std::size_t i = end - policy.window; i < end; ++i) sum += history[i].loss;
        if (!(sum / static_cast<double>(policy.window) < policy.loss_threshold)) return Convergence::not_converged;
    }
    return Convergence::converged;
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::pending: return "pending";
        case RunStatus::running: return "running";
        case RunStatus::converged: return "converged";
        case RunStatus::max_steps_reached: return "max_steps_reached";
        case RunStatus::failed: return "failed";
    }
    return "failed";
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
    for (auto s : {RunStatus::pending, RunStatus::running, RunStatus::converged, RunStatus::max_steps_reached,
                   RunStatus::failed})
        if (to_string(s) == text) return s;
    return std::nullopt;
}

bool is_terminal(RunStatus s) {
    return s == RunStatus::converged || s == RunStatus::max_steps_reached || s == RunStatus::failed;
}

bool is_finished(RunStatus s) { return s == RunStatus::converged || s == RunStatus::max_steps_reached; }

Result<TrainingRun> record_loss(TrainingRun run, std::uint64_t step, double loss) {
    if (run.status != RunStatus::running)
        return make_error(ErrorCode::RunNotActive, "run " + run.run_id + " is " + std::string(to_string(run.status)));
    if (!run.loss_history.empty() && step <= run.loss_history.back().step)
        return make_error(ErrorCode::OutOfOrderStep, "step " + std::to_string(step) + " after step " +
                                                         std::to_string(run.loss_history.back().step));
    if (!std::isfinite(loss) || loss < 0) return make_error(ErrorCode::InvalidLoss, "loss must be a nonnegative number");
    run.loss_history.push_back({step, loss});
    if (check_convergence(run.loss_history, run.config.convergence) == Convergence::converged) {
        run.status = RunStatus::converged;
        run.finished_at_step = step;
    } else if (step >= run.config.max_steps) {
        run.status = RunStatus::max_steps_reached;
        run.finished_at_step = step;
    }
    return run;
}

Result<Replay> replay(const TrainingConfig& config, std::span<const LossPoint> history) {
    TrainingRun run;
    run.config = config;
    run.status = RunStatus::running;
    Replay out;
    for (const auto& p : history) {
        auto next = record_loss(std::move(run), p.step, p.loss);
        if (!next) return next.error();
        run = std::move(*next);
        ++out.points_consumed;
        if (is_terminal(run.status)) {
            out.flip_step = p.step;
            break;
        }
    }
    out.status = run.status;
    return out;
}

std::string run_json(const TrainingRun& run) {
    ordered_json j;
    j["run_id"] = run.run_id;
    j["status"] = to_string(run.status);
    j["failure"] = run.failure ? ordered_json(*run.failure) : ordered_json(nullptr);
    j["finished_at_step"] = run.finished_at_step ? ordered_json(*run.finished_at_step) : ordered_json(nullptr);
    auto hist = ordered_json::array();
    for (const auto& p : run.loss_history) hist.push_back({p.step, p.loss});
    j["loss_history"] = std::move(hist);
    j["config"] = detail::config_to_json(run.config);
    return j.dump(2) + "\n";
}

Result<TrainingRun> parse_run(std::string_view text) {
    try {
        auto j = ordered_json::parse(text);
        TrainingRun run;
        run.run_id = j.at("run_id").get<std::string>();
        auto status = parse_run_status(j.at("status").get<std::string>());
        if (!status) return make_error(ErrorCode::InvalidConfig, "unknown run status");
        run.status = *status;
        if (!j.at("failure").is_null()) run.failure = j.at("failure").get<std::string>();
        if (!j.at("finished_at_step").is_null()) run.finished_at_step = j.at("finished_at_step").get<std::uint64_t>();
        for (const auto& p : j.at("loss_history")) run.loss_history.push_back({p.at(0).get<std::uint64_t>(), p.at(1).get<double>()});
        auto config = detail::config_from_json(j.at("config"));
        if (!config) return config.error();
        run.config = std::move(*config);
        return run;
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::InvalidConfig, std::string("run state: ") + e.what());
    }
}

namespace detail {

Result<void> write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return make_error(ErrorCode::IoError, "cannot write " + path.string());
    out << bytes;
    out.close();
    if (!out) return make_error(ErrorCode::IoError, "write failed: " + path.string());
    return {};
}

Result<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

}  // namespace fieldlens::training
