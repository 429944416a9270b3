#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include "codec.hpp"
#include "fieldlens/digest.hpp"
#include "fieldlens/text.hpp"
#include "fieldlens/timeutil.hpp"

namespace fieldlens::service {

using detail::ordered_json;

std::string_view to_string(SignInMethod m) {
    switch (m) {
        case SignInMethod::email_password: return "email_password";
        case SignInMethod::anonymous: return "anonymous";
        case SignInMethod::federated: return "federated";
    }
    return "?";
}

std::string_view to_string(Role r) {
    switch (r) {
        case Role::researcher: return "researcher";
        case Role::participant: return "participant";
        case Role::curator: return "curator";
    }
    return "?";
}

std::string_view to_string(ObservationMode m) { return m == ObservationMode::ml_assisted ? "ml_assisted" : "expert"; }

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::accepted: return "accepted";
        case Verdict::rejected: return "rejected";
        case Verdict::corrected: return "corrected";
    }
    return "?";
}

std::optional<SignInMethod> parse_sign_in_method(std::string_view text) {
    auto k = fold_key(text);
    if (k == "email_password") return SignInMethod::email_password;
    if (k == "anonymous") return SignInMethod::anonymous;
    if (k == "federated") return SignInMethod::federated;
    return std::nullopt;
}

std::optional<Role> parse_role(std::string_view text) {
    auto k = fold_key(text);
    if (k == "researcher") return Role::researcher;
    if (k == "participant") return Role::participant;
    if (k == "curator") return Role::curator;
    return std::nullopt;
}

std::optional<ObservationMode> parse_mode(std::string_view text) {
    auto k = fold_key(text);
    if (k == "ml_assisted") return ObservationMode::ml_assisted;
    if (k == "expert") return ObservationMode::expert;
    return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view text) {
    auto k = fold_key(text);
    if (k == "accepted") return Verdict::accepted;
    if (k == "rejected") return Verdict::rejected;
    if (k == "corrected") return Verdict::corrected;
    return std::nullopt;
}

std::int64_t ServiceConfig::now() const {
    if (clock) return clock();
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

Result<ServiceConfig> config_from_environment() {
    ServiceConfig c;
    auto env = [](std::string_view name) -> std::optional<std::string> {
        const char* v = std::getenv(std::string(name).c_str());
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    auto bad = [](std::string_view name, const std::string& v) {
        return make_error(ErrorCode::InvalidConfig, std::string(name) + "='" + v + "' is not valid");
    };
    if (auto v = env(kPortEnv)) {
        double port = 0;
        if (!parse_real(*v, port) || port < 0 || port > 65535 || port != static_cast<int>(port)) return bad(kPortEnv, *v);
        c.port = static_cast<std::uint16_t>(port);
    }
    if (auto v = env(kStorageRootEnv)) c.storage_root = *v;
    if (auto v = env(kMediaCapEnv)) {
        double mb = 0;
        if (!parse_real(*v, mb) || !(mb > 0) || mb > 1024 * 1024) return bad(kMediaCapEnv, *v);
        c.media_cap_bytes = static_cast<std::size_t>(mb * 1024 * 1024);
    }
    return c;
}

namespace {

std::string to_hex(const unsigned char* p, std::size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[p[i] >> 4]);
        out.push_back(digits[p[i] & 15]);
    }
    return out;
}

std::optional<std::vector<unsigned char>> from_hex(std::string_view s) {
    if (s.size() % 2) return std::nullopt;
    std::vector<unsigned char> out;
    for (std::size_t i = 0; i < s.size(); i += 2) {
        unsigned v = 0;
        if (std::sscanf(std::string(s.substr(i, 2)).c_str(), "%2x", &v) != 1) return std::nullopt;
        out.push_back(static_cast<unsigned char>(v));
    }
    return out;
}

std::string pbkdf2(std::string_view credential, const std::vector<unsigned char>& salt, int iterations) {
    unsigned char out[32];
    PKCS5_PBKDF2_HMAC(credential.data(), static_cast<int>(credential.size()), salt.data(), static_cast<int>(salt.size()),
                      iterations, EVP_sha256(), sizeof(out), out);
    return to_hex(out, sizeof(out));
}

bool valid_email(std::string_view e) {
    auto at = e.find('@');
    if (at == std::string_view::npos || at == 0 || e.find('@', at + 1) != std::string_view::npos) return false;
    auto domain = e.substr(at + 1);
    if (domain.empty() || domain.find('.') == std::string_view::npos) return false;
    if (domain.front() == '.' || domain.back() == '.' || domain.find("..") != std::string_view::npos) return false;
    return std::none_of(e.begin(), e.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c < 0x20; });
}

std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

Error validation(std::string message) { return make_error(ErrorCode::ValidationFailed, std::move(message)); }

Result<void> persist(Store& store, std::string_view collection, std::string_view id, const ordered_json& doc) {
    return store.put(collection, id, doc.dump(2) + "\n");
}

}  // namespace

std::string hash_credential(std::string_view credential, int iterations) {
    auto salt = *from_hex(random_hex(16));
    return "pbkdf2_sha256$" + std::to_string(iterations) + "$" + to_hex(salt.data(), salt.size()) + "$" +
           pbkdf2(credential, salt, iterations);
}

bool verify_credential(std::string_view credential, std::string_view stored) {
    auto parts = split(stored, '$');
    if (parts.size() != 4 || parts[0] != "pbkdf2_sha256") return false;
    double iterations = 0;
    if (!parse_real(parts[1], iterations) || iterations < 1 || iterations > 1e8) return false;
    auto salt = from_hex(parts[2]);
    if (!salt) return false;
    auto got = pbkdf2(credential, *salt, static_cast<int>(iterations));
    return got.size() == parts[3].size() && CRYPTO_memcmp(got.data(), parts[3].data(), got.size()) == 0;
}

Service::Service(std::shared_ptr<Store> store, ServiceConfig config)
    : store_(std::move(store)), config_(std::move(config)) {}

Result<void> Service::load() {
    try {
        auto accounts = store_->list("accounts");
        if (!accounts) return accounts.error();
        auto tokens = store_->list("tokens");
        if (!tokens) return tokens.error();
        auto projects = store_->list("projects");
        if (!projects) return projects.error();
        auto observations = store_->list("observations");
        if (!observations) return observations.error();
        auto records = store_->list("curation");
        if (!records) return records.error();

        std::unique_lock lock(state_mu_);
        for (const auto& [id, text] : *accounts) {
            auto a = detail::account_from_document(ordered_json::parse(text));
            if (a.email) account_by_email_[*a.email] = a.account_id;
            accounts_[a.account_id] = std::move(a);
        }
        for (const auto& [id, text] : *tokens) {
            auto j = ordered_json::parse(text);
            tokens_[id] = {j.at("account_id").get<std::string>(), j.at("expires_at").get<std::int64_t>()};
        }
        for (const auto& [id, text] : *projects) {
            auto p = detail::project_from_json(ordered_json::parse(text));
            projects_[p.project_id] = std::move(p);
        }
        for (const auto& [id, text] : *observations) {
            auto o = detail::observation_from_json(ordered_json::parse(text));
            observations_by_project_[o.project_id].push_back(o.observation_id);
            if (o.idempotency_key) idempotency_[{o.submitter, *o.idempotency_key}] = o.observation_id;
            observations_[o.observation_id] = std::move(o);
        }
        for (const auto& [id, text] : *records) {
            auto r = detail::record_from_json(ordered_json::parse(text));
            next_sequence_ = std::max(next_sequence_, r.sequence + 1);
            curation_[r.observation_id].push_back(std::move(r));
        }
        for (auto& [id, list] : curation_)
            std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.sequence < b.sequence; });
        for (auto& [id, list] : observations_by_project_) std::sort(list.begin(), list.end());
        return {};
    } catch (const std::exception& e) {
        return make_error(ErrorCode::IoError, std::string("corrupt store: ") + e.what());
    }
}

std::mutex& Service::project_lock(const std::string& project_id) {
    std::lock_guard lock(project_locks_mu_);
    auto& slot = project_locks_[project_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

Result<std::string> Service::store_token(const Account& account, std::int64_t& expires_at) {
    auto token = random_hex(32);
    auto key = sha256_hex(token);
    expires_at = config_.now() + config_.token_ttl_s;
    if (auto ok = persist(*store_, "tokens", key, {{"account_id", account.account_id}, {"expires_at", expires_at}}); !ok)
        return ok.error();
    std::unique_lock lock(state_mu_);
    tokens_[key] = {account.account_id, expires_at};
    return token;
}

Result<Registration> Service::register_account(SignInMethod method, std::optional<std::string> email,
                                               std::optional<std::string> credential, Role role) {
    Account a;
    a.method = method;
    a.role = role;
    if (method == SignInMethod::federated)
        return make_error(ErrorCode::UnsupportedSignIn, "federated identity providers are not available");
    if (method == SignInMethod::anonymous) {
        if (email || credential) return validation("anonymous accounts carry no email or credential");
        if (role != Role::participant) return validation("anonymous accounts are participants");
    } else {
        if (!email || !valid_email(trim(*email)))
            return make_error(ErrorCode::InvalidEmail, "'" + email.value_or("") + "' is not an email address");
        if (!credential || code_points(*credential) < 8)
            return make_error(ErrorCode::WeakCredential, "credential must be at least 8 characters");
        a.email = fold_key(*email);
        {
            std::shared_lock lock(state_mu_);
            if (account_by_email_.count(*a.email)) return make_error(ErrorCode::EmailTaken, *a.email + " is registered");
        }
        a.credential_hash = hash_credential(*credential, config_.pbkdf2_iterations);
    }
    a.account_id = "acct-" + random_hex(8);
    a.created_at = format_iso8601(config_.now());

    {
        std::lock_guard write(accounts_write_mu_);
        if (a.email) {
            std::shared_lock lock(state_mu_);
            if (account_by_email_.count(*a.email)) return make_error(ErrorCode::EmailTaken, *a.email + " is registered");
        }
        if (auto ok = persist(*store_, "accounts", a.account_id, detail::account_to_document(a)); !ok) return ok.error();
        std::unique_lock lock(state_mu_);
        if (a.email) account_by_email_[*a.email] = a.account_id;
        accounts_[a.account_id] = a;
    }
    Registration reg{a, std::nullopt};
    if (method == SignInMethod::anonymous) {
        std::int64_t expires = 0;
        auto token = store_token(a, expires);
        if (!token) return token.error();
        reg.token = *token;
    }
    return reg;
}

Result<SessionToken> Service::issue_token(std::string_view email, std::string_view credential) {
    std::optional<Account> account;
    {
        std::shared_lock lock(state_mu_);
        if (auto it = account_by_email_.find(fold_key(email)); it != account_by_email_.end())
            account = accounts_.at(it->second);
    }
    if (!account || !account->credential_hash || !verify_credential(credential, *account->credential_hash))
        return make_error(ErrorCode::InvalidCredentials, "email or credential is wrong");
    std::int64_t expires = 0;
    auto token = store_token(*account, expires);
    if (!token) return token.error();
    return SessionToken{*token, account->account_id, account->role, format_iso8601(expires)};
}

Result<Account> Service::authenticate(std::string_view token) const {
    if (token.empty()) return make_error(ErrorCode::Unauthenticated, "missing token");
    auto key = sha256_hex(token);
    std::shared_lock lock(state_mu_);
    auto it = tokens_.find(key);
    if (it == tokens_.end()) return make_error(ErrorCode::Unauthenticated, "unknown token");
    if (it->second.expires_at <= config_.now()) return make_error(ErrorCode::Unauthenticated, "token expired");
    auto acct = accounts_.find(it->second.account_id);
    if (acct == accounts_.end()) return make_error(ErrorCode::Unauthenticated, "token owner no longer exists");
    return acct->second;
}

Result<Account> Service::require_role(std::string_view token, std::initializer_list<Role> roles) const {
    auto who = authenticate(token);
    if (!who) return who;
    if (std::find(roles.begin(), roles.end(), who->role) == roles.end())
        return make_error(ErrorCode::Forbidden, std::string(to_string(who->role)) + " may not do this");
    return who;
}

Result<Project> Service::create_project(std::string_view token, std::string name, domain::Task task,
                                        domain::LabelMap label_map) {
    auto who = require_role(token, {Role::researcher});
    if (!who) return who.error();
    if (trim(name).empty()) return validation("project name must not be empty");
    if (auto report = domain::validate_label_map(label_map); !report.ok())
        return validation("label map: " + report.first_error().describe());

    Project p;
    p.project_id = "prj-" + random_hex(6);
    p.owner = who->account_id;
    p.name = trim(name);
    p.task = task;
    p.label_map = std::move(label_map);
    p.created_at = format_iso8601(config_.now());

    std::lock_guard write(projects_write_mu_);
    if (auto ok = persist(*store_, "projects", p.project_id, detail::project_to_json(p)); !ok) return ok.error();
    std::unique_lock lock(state_mu_);
    projects_[p.project_id] = p;
    return p;
}

Result<Project> Service::get_project(std::string_view project_id) const {
    std::shared_lock lock(state_mu_);
    auto it = projects_.find(project_id);
    if (it == projects_.end()) return make_error(ErrorCode::UnknownProject, "no project " + std::string(project_id));
    return it->second;
}

Result<Project> Service::add_project_ref(std::string_view token, std::string_view project_id, RefKind kind,
                                         std::string ref) {
    auto who = authenticate(token);
    if (!who) return who.error();
    auto project = get_project(project_id);
    if (!project) return project;
    if (project->owner != who->account_id) return make_error(ErrorCode::Forbidden, "only the owner edits a project");
    if (trim(ref).empty()) return validation("reference must not be empty");

    std::lock_guard guard(project_lock(project->project_id));
    project = get_project(project_id);
    auto& list = kind == RefKind::dataset         ? project->dataset_refs
                 : kind == RefKind::model_package ? project->model_package_refs
                                                  : project->bundle_refs;
    if (std::find(list.begin(), list.end(), ref) == list.end()) list.push_back(std::move(ref));
    if (auto ok = persist(*store_, "projects", project->project_id, detail::project_to_json(*project)); !ok)
        return ok.error();
    std::unique_lock lock(state_mu_);
    projects_[project->project_id] = *project;
    return project;
}

Result<void> Service::check_boxes(const Project& project, int width, int height,
                                  const std::vector<domain::BoundingBox>& boxes, bool need_confidence) const {
    domain::AnnotationSet probe;
    probe.task = domain::Task::detection;
    probe.label_map = project.label_map;
    probe.images.push_back({"probe", width, height});
    probe.boxes["probe"] = boxes;
    auto report = domain::validate_annotation_set(probe);
    if (!report.ok()) return validation(report.first_error().describe());
    if (need_confidence)
        for (const auto& b : boxes)
            if (!b.confidence) return validation("ml_assisted detections need a confidence");
    return {};
}

Result<void> Service::check_payload(const Project& project, const ObservationPayload& p) const {
    if (!parse_iso8601(p.captured_at)) return validation("captured_at '" + p.captured_at + "' is not an ISO-8601 time");
    if (p.geo) {
        if (!std::isfinite(p.geo->lat) || p.geo->lat < -90 || p.geo->lat > 90)
            return validation("latitude " + format_real(p.geo->lat) + " outside [-90, 90]");
        if (!std::isfinite(p.geo->lon) || p.geo->lon < -180 || p.geo->lon > 180)
            return validation("longitude " + format_real(p.geo->lon) + " outside [-180, 180]");
    }
    if (p.width <= 0 || p.height <= 0) return validation("media dimensions must be positive");
    if (p.mode == ObservationMode::ml_assisted && p.detections.empty())
        return validation("ml_assisted observations carry at least one detection");
    return check_boxes(project, p.width, p.height, p.detections, p.mode == ObservationMode::ml_assisted);
}

Result<Receipt> Service::upload_observation(std::string_view token, std::string_view project_id,
                                            const ObservationPayload& payload, std::string_view media,
                                            std::optional<std::string> idempotency_key) {
    auto who = authenticate(token);
    if (!who) return who.error();
    auto project = get_project(project_id);
    if (!project) return project.error();
    if (media.size() > config_.media_cap_bytes)
        return make_error(ErrorCode::PayloadTooLarge,
                          std::to_string(media.size()) + " bytes exceeds the cap of " + std::to_string(config_.media_cap_bytes));
    if (media.empty()) return validation("media is empty");
    if (idempotency_key && trim(*idempotency_key).empty()) idempotency_key.reset();
    if (auto ok = check_payload(*project, payload); !ok) return ok.error();

    const auto checksum = sha256_hex(media);
    std::lock_guard guard(project_lock(project->project_id));

    if (idempotency_key) {
        std::shared_lock lock(state_mu_);
        if (auto it = idempotency_.find({who->account_id, *idempotency_key}); it != idempotency_.end()) {
            const auto& prior = observations_.at(it->second);
            if (prior.checksum != checksum || prior.project_id != project->project_id ||
                detail::payload_to_json(prior.payload) != detail::payload_to_json(payload))
                return validation("idempotency key '" + *idempotency_key + "' was used for a different upload");
            return Receipt{prior.observation_id, prior.checksum, true};
        }
    }

    Observation o;
    o.observation_id = "obs-" + random_hex(8);
    o.project_id = project->project_id;
    o.submitter = who->account_id;
    o.media_ref = o.observation_id;
    o.media_size = media.size();
    o.payload = payload;
    o.idempotency_key = idempotency_key;
    o.received_at = format_iso8601(config_.now());

    if (auto ok = store_->put_blob(o.media_ref, media); !ok) return ok.error();
    auto stored = store_->get_blob(o.media_ref);
    if (!stored) return stored.error();
    o.checksum = sha256_hex(*stored);
    if (o.checksum != checksum) return make_error(ErrorCode::IoError, "stored media does not match the received bytes");
    if (auto ok = persist(*store_, "observations", o.observation_id, detail::observation_to_json(o)); !ok)
        return ok.error();

    std::unique_lock lock(state_mu_);
    auto& list = observations_by_project_[o.project_id];
    list.insert(std::upper_bound(list.begin(), list.end(), o.observation_id), o.observation_id);
    if (o.idempotency_key) idempotency_[{o.submitter, *o.idempotency_key}] = o.observation_id;
    observations_[o.observation_id] = o;
    return Receipt{o.observation_id, o.checksum, false};
}

Result<Observation> Service::get_observation(std::string_view observation_id) const {
    std::shared_lock lock(state_mu_);
    auto it = observations_.find(observation_id);
    if (it == observations_.end())
        return make_error(ErrorCode::UnknownObservation, "no observation " + std::string(observation_id));
    return it->second;
}

Result<std::string> Service::observation_media(std::string_view observation_id) const {
    auto o = get_observation(observation_id);
    if (!o) return o.error();
    return store_->get_blob(o->media_ref);
}

Result<CurationRecord> Service::curate_observation(std::string_view token, std::string_view observation_id,
                                                   Verdict verdict,
                                                   std::optional<std::vector<domain::BoundingBox>> corrected_boxes,
                                                   std::optional<std::string> feedback_text) {
    auto who = require_role(token, {Role::curator});
    if (!who) return who.error();
    auto obs = get_observation(observation_id);
    if (!obs) return obs.error();
    if (verdict == Verdict::corrected) {
        if (!corrected_boxes || corrected_boxes->empty()) return validation("a corrected verdict needs corrected boxes");
        auto project = get_project(obs->project_id);
        if (!project) return project.error();
        if (auto ok = check_boxes(*project, obs->payload.width, obs->payload.height, *corrected_boxes, false); !ok)
            return ok.error();
    } else if (corrected_boxes) {
        return validation("corrected boxes only accompany a corrected verdict");
    }

    CurationRecord r;
    r.observation_id = obs->observation_id;
    r.curator = who->account_id;
    r.verdict = verdict;
    r.corrected_boxes = std::move(corrected_boxes);
    r.feedback_text = std::move(feedback_text);
    r.decided_at = format_iso8601(config_.now());

    std::lock_guard guard(project_lock(obs->project_id));
    {
        std::unique_lock lock(state_mu_);
        r.sequence = next_sequence_++;
    }
    char id[32];
    std::snprintf(id, sizeof(id), "-%012llu", static_cast<unsigned long long>(r.sequence));
    if (auto ok = persist(*store_, "curation", r.observation_id + id, detail::record_to_json(r)); !ok) return ok.error();
    std::unique_lock lock(state_mu_);
    curation_[r.observation_id].push_back(r);
    return r;
}

Result<Feedback> Service::feedback(std::string_view token, std::string_view observation_id) const {
    auto who = authenticate(token);
    if (!who) return who.error();
    auto obs = get_observation(observation_id);
    if (!obs) return obs.error();
    if (who->account_id != obs->submitter && who->role != Role::curator)
        return make_error(ErrorCode::Forbidden, "feedback is visible to the submitter and curators only");
    Feedback f;
    f.observation_id = obs->observation_id;
    std::shared_lock lock(state_mu_);
    if (auto it = curation_.find(observation_id); it != curation_.end()) f.history = it->second;
    if (!f.history.empty()) f.active = f.history.back();
    return f;
}

Result<RetrainingExport> Service::export_retraining_set(std::string_view token, std::string_view project_id,
                                                        const ExportFilter& filter) const {
    auto who = authenticate(token);
    if (!who) return who.error();
    auto project = get_project(project_id);
    if (!project) return project.error();
    if (who->account_id != project->owner && who->role != Role::curator)
        return make_error(ErrorCode::Forbidden, "exports are open to the project owner and curators");

    RetrainingExport out;
    out.set.task = project->task;
    out.set.label_map = project->label_map;

    std::shared_lock lock(state_mu_);
    auto ids = observations_by_project_.find(project_id);
    if (ids == observations_by_project_.end()) return out;
    for (const auto& id : ids->second) {
        const auto& o = observations_.at(id);
        auto rec = curation_.find(id);
        if (rec == curation_.end() || rec->second.empty()) continue;
        const auto& active = rec->second.back();
        if (active.verdict == Verdict::rejected) continue;
        if (filter.modes && !filter.modes->count(o.payload.mode)) continue;
        if (filter.since && parse_iso8601(active.decided_at).value_or(0) < *filter.since) continue;

        auto boxes = active.verdict == Verdict::corrected ? *active.corrected_boxes : o.payload.detections;
        for (auto& b : boxes) b.confidence.reset();
        out.set.images.push_back({o.observation_id, o.payload.width, o.payload.height});
        if (project->task == domain::Task::detection) {
            if (!boxes.empty()) out.set.boxes[o.observation_id] = std::move(boxes);
        } else if (!boxes.empty()) {
            const auto& src = active.verdict == Verdict::corrected ? *active.corrected_boxes : o.payload.detections;
            auto best = std::max_element(src.begin(), src.end(), [](const auto& a, const auto& b) {
                return a.confidence.value_or(1.0) < b.confidence.value_or(1.0);
            });
            out.set.class_of[o.observation_id] = best->class_id;
        }
        out.media.push_back({o.observation_id, o.media_ref, o.checksum, o.payload.media_type});
    }
    lock.unlock();
    if (auto report = domain::validate_annotation_set(out.set); !report.ok())
        return validation("export failed validation: " + report.first_error().describe());
    return out;
}

std::size_t Service::observation_count() const {
    std::shared_lock lock(state_mu_);
    return observations_.size();
}

}  // namespace fieldlens::service
