#pragma once

#include <string>

#include "mfglq/config.hpp"

namespace mfglq {

// Exit codes: 0 success, 2 config error, 3 solver not converged,
// 4 simulation divergence, 5 reduction check failed.
int run_cli(int argc, const char* const* argv);

int cmd_solve(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_poa(const RunConfig& cfg);
int cmd_reduce_check(const RunConfig& cfg);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partial file. Creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

// 17 significant digits: round-trip exact for 64-bit doubles.
std::string format_double(double v);

}  // namespace mfglq
