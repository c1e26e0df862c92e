#pragma once

// JSON forms of curves, patches and verification reports.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bicons/diffgeo.hpp"
#include "bicons/profile.hpp"
#include "bicons/surface.hpp"

namespace bicons {

using Json = nlohmann::ordered_json;

Json to_json(const Tolerances& tol);
Json to_json(const ProfileCurve& curve);
Json to_json(const SurfacePatch& patch);
Json to_json(const VerificationReport& report);

Tolerances tolerances_from_json(const Json& j);
ProfileCurve curve_from_json(const Json& j);
/// Rebuilds the per-node profile from the embedded curve when one is present.
SurfacePatch patch_from_json(const Json& j);
VerificationReport report_from_json(const Json& j);

/// Throws std::runtime_error carrying the system error text on failure.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace bicons
