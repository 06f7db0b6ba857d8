#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gridzones/grid.hpp"

namespace gridzones {

/// Parses either a MATPOWER case (mpc.bus / mpc.gen / mpc.branch / mpc.gencost
/// tables) or the native JSON schema; a leading '{' selects JSON.
///
/// Bus numbers are remapped to contiguous 0-based indices, the original number
/// kept as the bus label. Branches with status 0 are dropped. Nonlinear cost
/// rows are reduced to their marginal cost at p_max with a warning. Wind units
/// are marked through an optional `mpc.genfuel` cell array ('wind').
///
/// Throws ParseError (with line number) on malformed text and ValidationError
/// when the resulting network breaks an invariant.
Network parse_case_file(std::string_view text);

Network parse_matpower(std::string_view text);
Network parse_network_json(std::string_view text);

Network load_case_file(const std::filesystem::path& path);

/// Native JSON serialisation; parse_network_json(network_to_json(n)) == n.
std::string network_to_json(const Network& network);

}  // namespace gridzones
