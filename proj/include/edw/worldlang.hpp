#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edw/world.hpp"

namespace edw {

struct ParseResult {
  std::optional<WorldDescription> world;  // present iff no errors
  std::vector<Diagnostic> diagnostics;
};

ParseResult parse_world(std::string_view text);
std::string serialize_world(const WorldDescription& wd);
// Reference errors plus warnings: unreachable states, single-state models,
// trace-free patterns, algorithms without exits.
std::vector<Diagnostic> validate(const WorldDescription& wd);

// Reads and parses a file; throws DescriptionError listing the diagnostics.
WorldDescription load_world(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace edw
