#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "fieldlens/service.hpp"

namespace fieldlens::testkit {

/// A service over an in-memory store with a hand-driven clock and three
/// signed-in accounts plus one detection project (rip, sandbar).
struct ServiceHarness {
    std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(1'700'000'000);
    std::shared_ptr<service::Store> store;
    std::unique_ptr<service::Service> svc;
    std::string researcher, curator, participant, other_participant;
    std::string project_id;

    static service::ServiceConfig config(std::shared_ptr<std::atomic<std::int64_t>> clock) {
        service::ServiceConfig c;
        c.pbkdf2_iterations = 1000;
        c.clock = [clock] { return clock->load(); };
        return c;
    }

    explicit ServiceHarness(std::shared_ptr<service::Store> s = std::make_shared<service::MemoryStore>())
        : store(std::move(s)) {
        svc = std::make_unique<service::Service>(store, config(now));
        researcher = sign_up("lead@lab.example.org", service::Role::researcher);
        curator = sign_up("qc@lab.example.org", service::Role::curator);
        participant = *svc->register_account(service::SignInMethod::anonymous, {}, {})->token;
        other_participant = *svc->register_account(service::SignInMethod::anonymous, {}, {})->token;
        project_id = svc->create_project(researcher, "Rip currents", domain::Task::detection, {{"rip", "sandbar"}})
                         ->project_id;
    }

    std::string sign_up(const std::string& email, service::Role role) {
        (void)svc->register_account(service::SignInMethod::email_password, email, "correct-horse", role);
        return svc->issue_token(email, "correct-horse")->token;
    }

    static service::ObservationPayload payload(double x = 100, service::ObservationMode mode = service::ObservationMode::ml_assisted) {
        service::ObservationPayload p;
        p.captured_at = "2023-07-01T10:00:00Z";
        p.geo = service::GeoPoint{36.96, -122.02};
        p.width = 1280;
        p.height = 720;
        p.mode = mode;
        if (mode == service::ObservationMode::ml_assisted) p.detections.push_back({x, 200, x + 300, 400, 0, 0.87});
        p.media_type = "image/jpeg";
        return p;
    }
};

}  // namespace fieldlens::testkit
