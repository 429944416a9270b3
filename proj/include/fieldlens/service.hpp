#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldlens/domain.hpp"
#include "fieldlens/result.hpp"

namespace fieldlens::service {

enum class SignInMethod { email_password, anonymous, federated };
enum class Role { researcher, participant, curator };
enum class ObservationMode { ml_assisted, expert };
enum class Verdict { accepted, rejected, corrected };

std::string_view to_string(SignInMethod m);
std::string_view to_string(Role r);
std::string_view to_string(ObservationMode m);
std::string_view to_string(Verdict v);
std::optional<SignInMethod> parse_sign_in_method(std::string_view text);
std::optional<Role> parse_role(std::string_view text);
std::optional<ObservationMode> parse_mode(std::string_view text);
std::optional<Verdict> parse_verdict(std::string_view text);

struct Account {
    std::string account_id;
    SignInMethod method = SignInMethod::anonymous;
    std::optional<std::string> email{};
    std::optional<std::string> credential_hash{};
    Role role = Role::participant;
    std::string created_at;
};

struct Project {
    std::string project_id;
    std::string owner;
    std::string name;
    domain::Task task = domain::Task::detection;
    domain::LabelMap label_map;
    std::vector<std::string> dataset_refs;
    std::vector<std::string> model_package_refs;
    std::vector<std::string> bundle_refs;
    std::string created_at;
};

struct GeoPoint {
    double lat = 0;
    double lon = 0;

    bool operator==(const GeoPoint&) const = default;
};

/// Client-side metadata sent next to the media bytes.
struct ObservationPayload {
    std::string captured_at;
    std::optional<GeoPoint> geo{};
    int width = 0;
    int height = 0;
    std::vector<domain::BoundingBox> detections;
    ObservationMode mode = ObservationMode::ml_assisted;
    std::string media_type = "application/octet-stream";
};

struct Observation {
    std::string observation_id;
    std::string project_id;
    std::string submitter;
    std::string media_ref;
    std::string checksum;
    std::size_t media_size = 0;
    ObservationPayload payload;
    std::optional<std::string> idempotency_key{};
    std::string received_at;
};

struct Receipt {
    std::string observation_id;
    std::string stored_checksum;
    bool replayed = false;
};

struct CurationRecord {
    std::string observation_id;
    std::string curator;
    Verdict verdict = Verdict::accepted;
    std::optional<std::vector<domain::BoundingBox>> corrected_boxes{};
    std::optional<std::string> feedback_text{};
    std::string decided_at;
    std::uint64_t sequence = 0;
};

struct Feedback {
    std::string observation_id;
    /// The active record; absent while the observation awaits curation.
    std::optional<CurationRecord> active{};
    std::vector<CurationRecord> history;
};

struct ExportFilter {
    std::optional<std::int64_t> since{};
    std::optional<std::set<ObservationMode>> modes{};
};

struct MediaRef {
    domain::MediaId media_id;
    std::string media_ref;
    std::string checksum;
    std::string media_type;
};

struct RetrainingExport {
    domain::AnnotationSet set;
    std::vector<MediaRef> media;
};

/// Document and blob persistence. Implementations must be safe to call from
/// several threads.
class Store {
public:
    virtual ~Store() = default;
    virtual Result<void> put(std::string_view collection, std::string_view id, std::string_view document) = 0;
    virtual Result<std::vector<std::pair<std::string, std::string>>> list(std::string_view collection) const = 0;
    virtual Result<void> put_blob(std::string_view key, std::string_view bytes) = 0;
    virtual Result<std::string> get_blob(std::string_view key) const = 0;
};

class MemoryStore final : public Store {
public:
    Result<void> put(std::string_view collection, std::string_view id, std::string_view document) override;
    Result<std::vector<std::pair<std::string, std::string>>> list(std::string_view collection) const override;
    Result<void> put_blob(std::string_view key, std::string_view bytes) override;
    Result<std::string> get_blob(std::string_view key) const override;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::map<std::string, std::string>, std::less<>> docs_;
    std::map<std::string, std::string, std::less<>> blobs_;
};

/// One JSON file per document under `root/<collection>/`, blobs under
/// `root/blobs/`. Writes go through a temporary file and a rename.
class FileStore final : public Store {
public:
    explicit FileStore(std::filesystem::path root);

    Result<void> put(std::string_view collection, std::string_view id, std::string_view document) override;
    Result<std::vector<std::pair<std::string, std::string>>> list(std::string_view collection) const override;
    Result<void> put_blob(std::string_view key, std::string_view bytes) override;
    Result<std::string> get_blob(std::string_view key) const override;

private:
    std::filesystem::path root_;
};

struct ServiceConfig {
    std::uint16_t port = 8080;
    std::filesystem::path storage_root = "fieldlens-data";
    std::size_t media_cap_bytes = 100u * 1024 * 1024;
    int pbkdf2_iterations = 100000;
    std::int64_t token_ttl_s = 30 * 24 * 3600;
    /// Seconds since the epoch; tests substitute a fake.
    std::function<std::int64_t()> clock{};

    std::int64_t now() const;
};

inline constexpr std::string_view kPortEnv = "FIELDLENS_PORT";
inline constexpr std::string_view kStorageRootEnv = "FIELDLENS_STORAGE_ROOT";
inline constexpr std::string_view kMediaCapEnv = "FIELDLENS_MEDIA_CAP_MB";

/// Defaults overridden by the environment variables above.
Result<ServiceConfig> config_from_environment();

/// `pbkdf2_sha256$<iterations>$<salt hex>$<hash hex>`
std::string hash_credential(std::string_view credential, int iterations);
bool verify_credential(std::string_view credential, std::string_view stored);

struct Registration {
    Account account;
    /// Issued immediately for anonymous accounts, which have nothing to sign in with.
    std::optional<std::string> token{};
};

struct SessionToken {
    std::string token;
    std::string account_id;
    Role role = Role::participant;
    std::string expires_at;
};

class Service {
public:
    Service(std::shared_ptr<Store> store, ServiceConfig config);

    /// Rebuilds the in-memory indexes from the store.
    Result<void> load();

    const ServiceConfig& config() const { return config_; }

    /// Anonymous accounts are always participants.
    Result<Registration> register_account(SignInMethod method, std::optional<std::string> email,
                                          std::optional<std::string> credential, Role role = Role::participant);
    Result<SessionToken> issue_token(std::string_view email, std::string_view credential);
    Result<Account> authenticate(std::string_view token) const;

    Result<Project> create_project(std::string_view token, std::string name, domain::Task task,
                                   domain::LabelMap label_map);
    Result<Project> get_project(std::string_view project_id) const;
    enum class RefKind { dataset, model_package, bundle };
    Result<Project> add_project_ref(std::string_view token, std::string_view project_id, RefKind kind, std::string ref);

    /// A retry carrying an idempotency key already seen from the same
    /// submitter returns the original receipt without storing anything.
    Result<Receipt> upload_observation(std::string_view token, std::string_view project_id,
                                       const ObservationPayload& payload, std::string_view media,
                                       std::optional<std::string> idempotency_key = std::nullopt);
    Result<Observation> get_observation(std::string_view observation_id) const;
    Result<std::string> observation_media(std::string_view observation_id) const;

    Result<CurationRecord> curate_observation(std::string_view token, std::string_view observation_id, Verdict verdict,
                                              std::optional<std::vector<domain::BoundingBox>> corrected_boxes,
                                              std::optional<std::string> feedback_text);
    /// Visible to the submitter and to curators.
    Result<Feedback> feedback(std::string_view token, std::string_view observation_id) const;

    /// Open to the project owner and to curators.
    Result<RetrainingExport> export_retraining_set(std::string_view token, std::string_view project_id,
                                                   const ExportFilter& filter) const;

    std::size_t observation_count() const;

private:
    struct TokenEntry {
        std::string account_id;
        std::int64_t expires_at = 0;
    };

    std::mutex& project_lock(const std::string& project_id);
    Result<Account> require_role(std::string_view token, std::initializer_list<Role> roles) const;
    Result<void> check_payload(const Project& project, const ObservationPayload& payload) const;
    Result<void> check_boxes(const Project& project, int width, int height,
                             const std::vector<domain::BoundingBox>& boxes, bool need_confidence) const;
    Result<std::string> store_token(const Account& account, std::int64_t& expires_at);

    std::shared_ptr<Store> store_;
    ServiceConfig config_;

    mutable std::shared_mutex state_mu_;
    std::map<std::string, Account, std::less<>> accounts_;
    std::map<std::string, std::string, std::less<>> account_by_email_;
    std::map<std::string, TokenEntry, std::less<>> tokens_;
    std::map<std::string, Project, std::less<>> projects_;
    std::map<std::string, Observation, std::less<>> observations_;
    std::map<std::string, std::vector<std::string>, std::less<>> observations_by_project_;
    std::map<std::string, std::vector<CurationRecord>, std::less<>> curation_;
    std::map<std::pair<std::string, std::string>, std::string> idempotency_;
    std::uint64_t next_sequence_ = 1;

    std::mutex accounts_write_mu_;
    std::mutex projects_write_mu_;
    std::mutex project_locks_mu_;
    std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> project_locks_;
};

}  // namespace fieldlens::service
