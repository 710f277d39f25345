#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qkd::cli {

struct FixtureOutcome {
  bool pass = false;
  /// Computed values as `name=value` lines.
  std::vector<std::string> lines;
};

/// Known fixture names: fig6a, fig6b, vernam. Returns nullopt for anything
/// else.
std::optional<FixtureOutcome> run_fixture(std::string_view name);

const std::vector<std::string>& fixture_names();

}  // namespace qkd::cli
