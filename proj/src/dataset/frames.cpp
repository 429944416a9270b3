#include <cmath>

#include "fieldlens/dataset.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::dataset {

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0; }

}  // namespace

Result<FramePlan> plan_frame_extraction(double duration_s, double video_fps, double requested_rate_fps,
                                        MediaId source_video) {
    if (!positive(duration_s)) return make_error(ErrorCode::InvalidRate, "duration must be positive");
    if (!positive(video_fps)) return make_error(ErrorCode::InvalidRate, "video frame rate must be positive");
    if (!positive(requested_rate_fps)) return make_error(ErrorCode::InvalidRate, "extraction rate must be positive");

    FramePlan plan;
    plan.source_video = std::move(source_video);
    plan.effective_rate_fps = std::min(requested_rate_fps, video_fps);
    if (requested_rate_fps > video_fps) {
        plan.warnings.push_back({ErrorCode::RateClamped,
                                 plan.source_video.empty() ? std::nullopt : std::optional(plan.source_video),
                                 "requested " + format_real(requested_rate_fps) + " fps clamped to video rate " +
                                     format_real(video_fps) + " fps"});
    }
    for (std::size_t k = 0;; ++k) {
        double t = static_cast<double>(k) / plan.effective_rate_fps;
        if (!(t < duration_s)) break;
        plan.timestamps_s.push_back(t);
    }
    return plan;
}

}  // namespace fieldlens::dataset
