#pragma once

#include <nlohmann/json.hpp>

#include "fieldlens/service.hpp"

namespace fieldlens::service::detail {

using nlohmann::ordered_json;

ordered_json box_to_json(const domain::BoundingBox& b);
domain::BoundingBox box_from_json(const ordered_json& j);
ordered_json boxes_to_json(const std::vector<domain::BoundingBox>& boxes);
std::vector<domain::BoundingBox> boxes_from_json(const ordered_json& j);

/// Public view; never carries the credential hash.
ordered_json account_to_json(const Account& a);
ordered_json account_to_document(const Account& a);
Account account_from_document(const ordered_json& j);

ordered_json project_to_json(const Project& p);
Project project_from_json(const ordered_json& j);

ordered_json payload_to_json(const ObservationPayload& p);
/// Throws nlohmann exceptions on missing or mistyped fields and
/// std::invalid_argument on unknown enum values.
ObservationPayload payload_from_json(const ordered_json& j);

ordered_json observation_to_json(const Observation& o);
Observation observation_from_json(const ordered_json& j);

ordered_json record_to_json(const CurationRecord& r);
CurationRecord record_from_json(const ordered_json& j);

ordered_json feedback_to_json(const Feedback& f);
ordered_json receipt_to_json(const Receipt& r);

}  // namespace fieldlens::service::detail
