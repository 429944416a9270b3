// Acceptance suite: one PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "curves.hpp"
#include "fieldlens/annotations.hpp"
#include "fieldlens/appforge.hpp"
#include "fieldlens/dataset.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/models.hpp"
#include "fieldlens/service_http.hpp"
#include "fieldlens/training.hpp"
#include "random_sets.hpp"
#include "split_oracle.hpp"

using namespace fieldlens;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Failure{why};
}

template <typename T>
const T& value(const Result<T>& r, const std::string& what) {
    if (!r) throw Failure{what + ": " + r.error().describe()};
    return *r;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("fl_accept_" + random_hex(6));
    ~TempDir() { fs::remove_all(path); }
};

// ---------------------------------------------------------------------------

std::string model_selection() {
    const auto t0 = Clock::now();
    const auto& reg = models::default_registry();
    auto pick = [&](auto&& tweak) {
        models::SelectionConstraints c;
        c.num_classes = 2;
        tweak(c);
        return models::select_model(reg, c);
    };
    auto by_size = pick([](auto& c) { c.max_size_mb = 10; });
    require(value(by_size, "max_size 10").entry.name == "EfficientDet D1", "max_size 10 MB gave " + by_size->entry.name);
    auto by_latency = pick([](auto& c) { c.max_inference_ms = 35; });
    require(value(by_latency, "max_inference 35").entry.name == "YOLOv8m", "35 ms gave " + by_latency->entry.name);
    auto by_map = pick([](auto& c) { c.min_map = 60; });
    require(!by_map && by_map.error().code == ErrorCode::NoFeasibleModel, "min_map 60 was not infeasible");
    const double s = seconds_since(t0);
    require(s < 1.0, "took " + std::to_string(s) + " s");
    return "D1 / YOLOv8m / NO_FEASIBLE_MODEL in " + std::to_string(s) + " s";
}

std::string registry_fidelity() {
    struct Row {
        const char* name;
        double ms, map, mb;
        std::optional<std::size_t> capacity;
        std::optional<bool> stable;
    };
    const Row table[] = {
        {"SSD MobileNet v1", 48, 29.1, 5, std::nullopt, std::nullopt},
        {"SSD MobileNet v2", 39, 28.2, 5, std::nullopt, std::nullopt},
        {"EfficientDet D0", 39, 33.6, 6, 999, std::nullopt},
        {"EfficientDet D1", 54, 38.4, 8, 999, std::nullopt},
        {"EfficientDet D2", 67, 41.8, 11, 999, true},
        {"YOLOv8m", 32, 50.2, 49, std::nullopt, false},
    };
    const auto& reg = models::default_registry();
    require(reg.size() == 6, "registry has " + std::to_string(reg.size()) + " rows");
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& e = reg[i];
        const auto& r = table[i];
        require(e.name == r.name && e.inference_ms == r.ms && e.map_coco == r.map && e.size_mb == r.mb &&
                    e.task == models::ModelTask::detection && e.class_capacity == r.capacity && e.stable_on_device == r.stable,
                "row " + std::to_string(i) + " (" + e.name + ") differs");
    }
    for (const auto& e : reg) {
        if (e.name.rfind("EfficientDet", 0) != 0) continue;
        require(models::check_class_capacity(e, 999).ok(), e.name + " rejects 999 classes");
        auto over = models::check_class_capacity(e, 1000);
        require(!over && over.error().code == ErrorCode::ClassCapacityExceeded, e.name + " accepts 1000 classes");
    }
    return "6 rows field-for-field; EfficientDet capacity 999 ok, 1000 rejected";
}

std::string split_properties() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(5150);
    const std::array<unsigned, 3> w{6, 2, 2};
    std::size_t splits = 0;
    for (std::size_t n = 1; n <= 500; ++n) {
        testkit::SetShape shape;
        shape.min_images = shape.max_images = n;
        auto set = testkit::random_detection_set(rng, shape);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto s = dataset::split_dataset(set, {}, seed * 7919 + n);
            std::string why;
            require(testkit::split_properties_hold(set, w, value(s, "split"), &why),
                    "N=" + std::to_string(n) + " seed " + std::to_string(seed) + ": " + why);
            if (seed % 10 == 0) {
                auto again = dataset::split_dataset(set, {}, seed * 7919 + n);
                require(again->train == s->train && again->test == s->test && again->eval == s->eval,
                        "N=" + std::to_string(n) + " not deterministic");
            }
            ++splits;
        }
    }
    for (auto [n, expect] : {std::pair<std::size_t, std::array<std::size_t, 3>>{10, {6, 2, 2}}, {11, {7, 2, 2}}}) {
        testkit::SetShape shape;
        shape.min_images = shape.max_images = n;
        auto s = value(dataset::split_dataset(testkit::random_detection_set(rng, shape), {}, 1), "split");
        require(s.train.size() == expect[0] && s.test.size() == expect[1] && s.eval.size() == expect[2],
                std::to_string(n) + " images split " + std::to_string(s.train.size()) + "/" + std::to_string(s.test.size()) +
                    "/" + std::to_string(s.eval.size()));
    }
    const double secs = seconds_since(t0);
    require(secs < 60.0, "took " + std::to_string(secs) + " s");
    return std::to_string(splits) + " splits in " + std::to_string(secs) + " s; 10 -> 6/2/2, 11 -> 7/2/2";
}

std::string annotation_round_trips() {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        auto set = testkit::random_detection_set(rng);
        const auto tag = "set " + std::to_string(trial);
        std::string why;

        auto coco = value(annotations::export_set(set, annotations::FormatTag::coco_json), tag + " coco export");
        auto from_coco = value(annotations::parse_coco(coco.front().text), tag + " coco parse");
        require(domain::equivalent(set, from_coco, 1e-6, &why), tag + " coco: " + why);

        auto voc = value(annotations::export_set(set, annotations::FormatTag::voc_xml), tag + " voc export");
        auto from_voc = value(annotations::parse_voc(voc, &set.label_map), tag + " voc parse");
        require(domain::equivalent(set, from_voc, 1e-6, &why), tag + " voc: " + why);

        auto yolo = value(annotations::export_set(set, annotations::FormatTag::yolo_txt), tag + " yolo export");
        auto from_yolo = value(annotations::parse_yolo_documents(yolo, set.images), tag + " yolo parse");
        require(domain::equivalent(set, from_yolo, 1e-6, &why), tag + " yolo: " + why);

        auto via_coco = value(annotations::export_set(from_coco, annotations::FormatTag::yolo_txt), tag + " coco->yolo");
        require(testkit::yolo_exports_match(yolo, via_coco, 1e-6, &why), tag + " coco->yolo commutation: " + why);
        auto via_voc = value(annotations::export_set(from_voc, annotations::FormatTag::coco_json), tag + " voc->coco");
        auto coco_again = value(annotations::parse_coco(via_voc.front().text), tag + " voc->coco parse");
        require(domain::equivalent(from_coco, coco_again, 1e-6, &why), tag + " voc->coco commutation: " + why);
    }
    return "1000 sets through COCO, VOC and YOLO; commutation holds";
}

std::string advisor_boundaries() {
    using dataset::Tier;
    const std::pair<std::size_t, Tier> cases[] = {{149, Tier::insufficient}, {150, Tier::marginal}, {499, Tier::marginal},
                                                  {500, Tier::good},         {1999, Tier::good},    {2000, Tier::optimal},
                                                  {2500, Tier::optimal}};
    dataset::DatasetStats stats;
    for (std::size_t i = 0; i < std::size(cases); ++i) {
        auto [n, tier] = cases[i];
        require(dataset::tier_for(n) == tier, std::to_string(n) + " -> " + std::string(dataset::to_string(dataset::tier_for(n))));
        stats.per_class_image_count[static_cast<domain::ClassId>(i)] = n;
    }
    auto report = dataset::advise_sufficiency(stats);
    for (std::size_t i = 0; i < std::size(cases); ++i)
        require(report.per_class_tier.at(static_cast<domain::ClassId>(i)) == cases[i].second,
                "report tier for " + std::to_string(cases[i].first));
    return "149..2500 map to the expected tiers";
}

std::string convergence_replay() {
    auto curves = testkit::synthetic_curves();
    require(curves.size() == 20, "expected 20 curves");
    std::size_t converged = 0;
    for (const auto& c : curves) {
        training::TrainingConfig cfg;
        cfg.convergence = c.policy;
        cfg.max_steps = c.max_steps;
        auto r = value(training::replay(cfg, c.points), c.name);
        auto want = testkit::oracle_replay(c);
        require(r.status == want.status && r.flip_step == want.flip, c.name + " disagrees with the reference");
        if (c.expected_status)
            require(r.status == *c.expected_status && r.flip_step == c.expected_flip, c.name + " misses the hand value");
        auto again = value(training::replay(cfg, c.points), c.name);
        require(again.status == r.status && again.flip_step == r.flip_step && again.points_consumed == r.points_consumed,
                c.name + " replay is not pure");
        converged += r.status == training::RunStatus::converged;
    }
    return "20 curves match status and flip step (" + std::to_string(converged) + " converge)";
}

struct PipelineOutput {
    std::string ios, android;
};

PipelineOutput run_pipeline(const fs::path& root) {
    auto set = value(annotations::parse_coco(slurp(fs::path(FIELDLENS_FIXTURES) / "rip/annotations.json")), "fixture");
    const domain::LabelMap labels = set.label_map;
    require(set.images.size() == 20 && labels.size() == 2, "fixture is not 20 images / 2 classes");

    auto split = value(dataset::split_dataset(set, {}, 42), "split");
    require(dataset::write_split_manifests(split, root / "splits").ok(), "split manifests");
    auto split_back = value(dataset::read_split_manifests(root / "splits"), "split read-back");

    const auto* model = models::find_model(models::default_registry(), "EfficientDet D1");
    auto config = value(training::build_training_config(set, *model, split_back), "config");
    require(config.label_map == labels, "config label map differs");
    require(value(training::parse_config(training::config_json(config)), "config reparse").label_map == labels,
            "config json label map differs");

    std::vector<double> curve;
    for (int k = 0; k < 400; ++k) curve.push_back(0.05 + 0.95 * std::exp(-k / 15.0));
    training::MockTrainer trainer(root / "handoff", {.losses = curve, .step_stride = 10});
    training::Orchestrator orch(root / "runs", trainer);
    auto run = value(orch.start(config, set), "start");
    run = value(orch.refresh(run.run_id), "refresh");
    require(run.status == training::RunStatus::converged, "mock run ended " + std::string(training::to_string(run.status)));
    require(run.config.label_map == labels, "run label map differs");
    auto handoff = value(annotations::parse_coco(slurp(trainer.run_dir(run.run_id) / "dataset.json")), "handoff dataset");
    require(handoff.label_map == labels, "handoff label map differs");

    auto pkg = value(training::package_model(run, value(trainer.artifacts(run.run_id), "artifacts")), "package");
    require(pkg.label_map == labels, "package label map differs");

    appforge::Customization c;
    c.app_name = "Rip Watch";
    c.gui_color = "#FF0000";
    c.info_panel_text = "Point the camera at the surf zone.";
    auto tpl = value(appforge::find_template("detection-camera"), "template");
    auto d = value(appforge::instantiate_template(tpl, c, pkg, {appforge::Platform::ios, appforge::Platform::android},
                                                  "https://field.example.org/projects/rip/observations"),
                   "descriptor");
    require(d.model && d.model->label_map == labels, "descriptor label map differs");
    d = value(appforge::parse_descriptor(appforge::descriptor_json(d)), "descriptor reparse");

    PipelineOutput out{value(appforge::emit_build_manifest(d, appforge::Platform::ios), "ios manifest"),
                       value(appforge::emit_build_manifest(d, appforge::Platform::android), "android manifest")};
    for (const auto* m : {&out.ios, &out.android}) {
        auto j = nlohmann::json::parse(*m);
        require(j["labels"]["classes"] == nlohmann::json(labels.classes), "manifest label map differs");
        require(j["model"]["checksum"] == pkg.checksum, "manifest model checksum differs");
    }
    return out;
}

std::string end_to_end_pipeline() {
    const auto t0 = Clock::now();
    TempDir a, b;
    auto first = run_pipeline(a.path);
    auto second = run_pipeline(b.path);
    require(first.ios == second.ios, "iOS manifest bytes differ between runs");
    require(first.android == second.android, "Android manifest bytes differ between runs");
    const double s = seconds_since(t0);
    require(s < 60.0, "took " + std::to_string(s) + " s");
    return "label map preserved at every stage; manifests byte-identical across runs; " + std::to_string(s) + " s";
}

std::string service_loop() {
    TempDir tmp;
    service::ServiceConfig cfg;
    cfg.pbkdf2_iterations = 1000;
    cfg.storage_root = tmp.path;
    service::Service svc(std::make_shared<service::FileStore>(tmp.path), cfg);
    service::HttpServer server(svc);
    const int port = server.bind("127.0.0.1", 0);
    require(port > 0, "bind failed");
    std::thread serving([&] { server.listen(); });
    struct Stop {
        service::HttpServer& s;
        std::thread& t;
        ~Stop() {
            s.stop();
            t.join();
        }
    } stop{server, serving};

    httplib::Client http("127.0.0.1", port);
    using nlohmann::json;
    auto post = [&](const std::string& path, const std::string& token, const json& body) {
        httplib::Headers h;
        if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
        auto r = http.Post(path, h, body.dump(), "application/json");
        require(static_cast<bool>(r), "POST " + path + " got no response");
        return std::make_pair(r->status, r->body);
    };
    auto account = [&](const char* email, const char* role) {
        auto [status, body] = post("/accounts", "", {{"method", "email_password"}, {"email", email}, {"credential", "correct-horse"}, {"role", role}});
        require(status == 201, std::string("register ") + email + ": " + body);
        auto [ts, tb] = post("/tokens", "", {{"email", email}, {"credential", "correct-horse"}});
        require(ts == 201, std::string("token ") + email + ": " + tb);
        return json::parse(tb)["token"].get<std::string>();
    };
    const auto researcher = account("lead@lab.example.org", "researcher");
    const auto curator = account("qc@lab.example.org", "curator");
    auto [as, ab] = post("/accounts", "", {{"method", "anonymous"}});
    require(as == 201, "anonymous sign-in: " + ab);
    const auto participant = json::parse(ab)["token"].get<std::string>();

    auto [ps, pb] = post("/projects", researcher, {{"name", "Rip currents"}, {"task", "detection"}, {"label_map", {"rip", "sandbar"}}});
    require(ps == 201, "create project: " + pb);
    const auto project = json::parse(pb)["project_id"].get<std::string>();
    const auto upload_path = "/projects/" + project + "/observations";

    auto upload = [&](const std::string& token, int i, const std::string& key) {
        json meta{{"captured_at", "2023-07-01T10:0" + std::to_string(i) + ":00Z"},
                  {"mode", "ml_assisted"},
                  {"width", 1280},
                  {"height", 720},
                  {"detections", {{{"x_min", 100 + i}, {"y_min", 200}, {"x_max", 400 + i}, {"y_max", 400}, {"class_id", 0}, {"confidence", 0.87}}}}};
        httplib::MultipartFormDataItems items{{"metadata", meta.dump(), "", "application/json"},
                                              {"media", "\xFF\xD8\xFF photo " + std::to_string(i), "p.jpg", "image/jpeg"}};
        httplib::Headers h{{"Idempotency-Key", key}};
        if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
        auto r = http.Post(upload_path, h, items);
        require(static_cast<bool>(r), "upload got no response");
        return std::make_pair(r->status, r->body);
    };

    std::vector<std::string> ids;
    for (int i = 0; i < 5; ++i) {
        auto [s, body] = upload(participant, i, "obs-" + std::to_string(i));
        require(s == 201, "upload " + std::to_string(i) + ": " + body);
        ids.push_back(json::parse(body)["observation_id"].get<std::string>());
    }
    auto [rs, rb] = upload(participant, 2, "obs-2");
    require(rs == 200 && json::parse(rb)["observation_id"] == ids[2] && json::parse(rb)["replayed"] == true,
            "idempotent retry: " + std::to_string(rs) + " " + rb);
    require(svc.observation_count() == 5, "retry created a duplicate");

    require(upload("", 9, "anon").first == 401, "unauthenticated upload not 401");
    require(post("/projects", "", {{"name", "x"}}).first == 401, "unauthenticated project creation not 401");
    require(post("/projects", participant, {{"name", "x"}, {"label_map", {"a"}}}).first == 403,
            "participant project creation not 403");
    require(post("/observations/" + ids[0] + "/curation", participant, {{"verdict", "accepted"}}).first == 403,
            "participant curation not 403");
    require(post("/observations/" + ids[0] + "/curation", "", {{"verdict", "accepted"}}).first == 401,
            "unauthenticated curation not 401");

    for (int i : {0, 1, 2})
        require(post("/observations/" + ids[i] + "/curation", curator, {{"verdict", "accepted"}}).first == 201, "accept");
    require(post("/observations/" + ids[3] + "/curation", curator, {{"verdict", "rejected"}, {"feedback", "not a rip"}}).first == 201,
            "reject");
    const json corrected{{{"x_min", 500}, {"y_min", 250}, {"x_max", 700}, {"y_max", 450}, {"class_id", 1}}};
    require(post("/observations/" + ids[4] + "/curation", curator, {{"verdict", "corrected"}, {"corrected_boxes", corrected}}).first == 201,
            "correct");

    auto export_get = [&](const std::string& token) {
        httplib::Headers h;
        if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
        auto r = http.Get("/projects/" + project + "/retraining-export", h);
        require(static_cast<bool>(r), "export got no response");
        return std::make_pair(r->status, r->body);
    };
    require(export_get("").first == 401, "unauthenticated export not 401");
    require(export_get(participant).first == 403, "participant export not 403");
    auto [es, eb] = export_get(researcher);
    require(es == 200, "export: " + eb);
    auto ex = json::parse(eb);
    require(ex["image_count"] == 4, "export has " + ex["image_count"].dump() + " images");
    auto set = value(annotations::parse_coco(ex["coco"].dump()), "export coco");
    require(set.find_image(ids[3]) == nullptr, "rejected observation exported");
    auto boxes = set.boxes_of(ids[4]);
    require(boxes.size() == 1 && boxes[0] == domain::BoundingBox{500, 250, 700, 450, 1, std::nullopt},
            "corrected observation does not carry the corrected boxes");
    for (int i : {0, 1, 2}) {
        auto b = set.boxes_of(ids[i]);
        require(b.size() == 1 && b[0].x_min == 100 + i && b[0].class_id == 0 && !b[0].confidence,
                "accepted observation " + std::to_string(i) + " boxes changed");
    }
    return "5 uploads + idempotent retry; accept 3 / reject 1 / correct 1; export holds 4 images; 401/403 enforced";
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<std::string()>> criteria[] = {
        {"model-selection", model_selection},
        {"registry-fidelity", registry_fidelity},
        {"split-properties", split_properties},
        {"annotation-round-trips", annotation_round_trips},
        {"advisor-boundaries", advisor_boundaries},
        {"convergence-replay", convergence_replay},
        {"end-to-end-pipeline", end_to_end_pipeline},
        {"service-loop", service_loop},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        try {
            std::cout << "PASS " << name << ": " << check() << std::endl;
        } catch (const Failure& f) {
            ++failures;
            std::cout << "FAIL " << name << ": " << f.why << std::endl;
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL " << name << ": exception: " << e.what() << std::endl;
        }
    }
    return failures;
}
