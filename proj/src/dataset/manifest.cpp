#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldlens/dataset.hpp"

namespace fieldlens::dataset {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kSubsetFiles[] = {"train.txt", "test.txt", "eval.txt"};

Result<void> write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return make_error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) return make_error(ErrorCode::IoError, "write failed: " + path.string());
    return {};
}

Result<std::string> read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<MediaId> read_lines(const std::string& text) {
    std::vector<MediaId> ids;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

}  // namespace

std::string split_sidecar_json(const SplitResult& split) {
    ordered_json j;
    j["ratio"] = {{"train", split.ratio.train}, {"test", split.ratio.test}, {"eval", split.ratio.eval}};
    j["seed"] = split.seed;
    j["counts"] = {{"train", split.train.size()}, {"test", split.test.size()}, {"eval", split.eval.size()}};
    auto strata = ordered_json::array();
    for (const auto& s : split.strata) {
        ordered_json e;
        e["name"] = s.name;
        e["class_id"] = s.class_id ? ordered_json(*s.class_id) : ordered_json(nullptr);
        e["train"] = s.counts[0];
        e["test"] = s.counts[1];
        e["eval"] = s.counts[2];
        strata.push_back(std::move(e));
    }
    j["strata"] = std::move(strata);
    return j.dump(2) + "\n";
}

Result<void> write_split_manifests(const SplitResult& split, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return make_error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    for (int s = 0; s < 3; ++s) {
        std::string text;
        for (const auto& id : split.subset(static_cast<Subset>(s))) text += id + "\n";
        if (auto ok = write_text(dir / kSubsetFiles[s], text); !ok) return ok;
    }
    return write_text(dir / "split.json", split_sidecar_json(split));
}

Result<SplitResult> read_split_manifests(const fs::path& dir) {
    auto sidecar = read_text(dir / "split.json");
    if (!sidecar) return make_error(ErrorCode::MissingSplit, "no split.json in " + dir.string());
    SplitResult split;
    try {
        auto j = ordered_json::parse(*sidecar);
        split.ratio.train = j.at("ratio").at("train").get<double>();
        split.ratio.test = j.at("ratio").at("test").get<double>();
        split.ratio.eval = j.at("ratio").at("eval").get<double>();
        split.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& e : j.at("strata")) {
            Stratum s;
            s.name = e.at("name").get<std::string>();
            if (!e.at("class_id").is_null()) s.class_id = e.at("class_id").get<ClassId>();
            s.counts = {e.at("train").get<std::size_t>(), e.at("test").get<std::size_t>(), e.at("eval").get<std::size_t>()};
            split.strata.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::ParseError, "split.json: " + std::string(e.what()));
    }
    std::vector<MediaId>* lists[] = {&split.train, &split.test, &split.eval};
    for (int s = 0; s < 3; ++s) {
        auto text = read_text(dir / kSubsetFiles[s]);
        if (!text) return make_error(ErrorCode::MissingSplit, std::string("missing ") + kSubsetFiles[s]);
        *lists[s] = read_lines(*text);
    }
    return split;
}

}  // namespace fieldlens::dataset
