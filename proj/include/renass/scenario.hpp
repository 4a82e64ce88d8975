#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "renass/model.hpp"

namespace renass {

inline constexpr int kModelFormatVersion = 1;

/// Knobs for random topology generation. Defaults give the 306-component,
/// 459-connector case-study scale with single-agent service supports and
/// three hot-standby substitutes per critical agent.
struct GenParams {
  std::uint32_t components = 306;
  std::uint32_t connectors = 459;
  std::uint32_t services = 40;
  std::uint32_t businesses = 10;
  double critical_fraction = 0.5;  // floor(fraction * businesses) are critical
  std::uint32_t substitutes_per_critical_agent = 3;
  std::pair<std::uint32_t, std::uint32_t> support_size_range{1, 1};
  std::pair<std::uint32_t, std::uint32_t> services_per_business_range{2, 4};
  double reliability = 0.9999;
  std::uint64_t seed = 1;
};

/// Deterministic for a given seed. Throws GenerationError for infeasible
/// parameters, including critical agents that cannot get enough dedicated
/// substitutes.
SystemModel generate(const GenParams& params);

std::string to_json(const SystemModel& model);

/// Parses and validates. Throws ParseError (with line/column or element
/// path) or ValidationError.
SystemModel from_json(const std::string& text);

void save(const SystemModel& model, const std::filesystem::path& path);
SystemModel load(const std::filesystem::path& path);

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace renass
