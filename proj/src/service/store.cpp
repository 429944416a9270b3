#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fieldlens/digest.hpp"
#include "fieldlens/service.hpp"

namespace fieldlens::service {

namespace fs = std::filesystem;

Result<void> MemoryStore::put(std::string_view collection, std::string_view id, std::string_view document) {
    std::lock_guard lock(mu_);
    auto it = docs_.find(collection);
    if (it == docs_.end()) it = docs_.emplace(std::string(collection), std::map<std::string, std::string>{}).first;
    it->second[std::string(id)] = std::string(document);
    return {};
}

Result<std::vector<std::pair<std::string, std::string>>> MemoryStore::list(std::string_view collection) const {
    std::lock_guard lock(mu_);
    std::vector<std::pair<std::string, std::string>> out;
    if (auto it = docs_.find(collection); it != docs_.end()) out.assign(it->second.begin(), it->second.end());
    return out;
}

Result<void> MemoryStore::put_blob(std::string_view key, std::string_view bytes) {
    std::lock_guard lock(mu_);
    blobs_[std::string(key)] = std::string(bytes);
    return {};
}

Result<std::string> MemoryStore::get_blob(std::string_view key) const {
    std::lock_guard lock(mu_);
    auto it = blobs_.find(key);
    if (it == blobs_.end()) return make_error(ErrorCode::IoError, "no blob " + std::string(key));
    return it->second;
}

namespace {

bool safe_name(std::string_view s) {
    if (s.empty() || s == "." || s == "..") return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
    return true;
}

Result<void> write_atomically(const fs::path& target, std::string_view bytes) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) return make_error(ErrorCode::IoError, "cannot create " + target.parent_path().string() + ": " + ec.message());
    auto tmp = target;
    tmp += ".tmp-" + random_hex(4);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush()) return make_error(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) return make_error(ErrorCode::IoError, "cannot rename onto " + target.string() + ": " + ec.message());
    return {};
}

Result<std::string> read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return make_error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

FileStore::FileStore(fs::path root) : root_(std::move(root)) {}

Result<void> FileStore::put(std::string_view collection, std::string_view id, std::string_view document) {
    if (!safe_name(collection) || !safe_name(id))
        return make_error(ErrorCode::IoError, "unsafe document name " + std::string(collection) + "/" + std::string(id));
    return write_atomically(root_ / collection / (std::string(id) + ".json"), document);
}

Result<std::vector<std::pair<std::string, std::string>>> FileStore::list(std::string_view collection) const {
    std::vector<std::pair<std::string, std::string>> out;
    const auto dir = root_ / collection;
    std::error_code ec;
    if (!fs::exists(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        auto text = read_all(entry.path());
        if (!text) return text.error();
        out.emplace_back(entry.path().stem().string(), std::move(*text));
    }
    if (ec) return make_error(ErrorCode::IoError, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

Result<void> FileStore::put_blob(std::string_view key, std::string_view bytes) {
    if (!safe_name(key)) return make_error(ErrorCode::IoError, "unsafe blob key " + std::string(key));
    return write_atomically(root_ / "blobs" / key, bytes);
}

Result<std::string> FileStore::get_blob(std::string_view key) const {
    if (!safe_name(key)) return make_error(ErrorCode::IoError, "unsafe blob key " + std::string(key));
    return read_all(root_ / "blobs" / key);
}

}  // namespace fieldlens::service
