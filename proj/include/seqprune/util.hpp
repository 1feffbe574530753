#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seqprune {

/// FNV-1a over a byte string, used for content hashes in manifests and sidecars.
std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 finalizer; the basis of the counter-based random metric.
std::uint64_t splitmix64(std::uint64_t x);

/// Map 64 hash bits to a double in [0, 1).
double unit_double(std::uint64_t bits);

std::string to_hex(std::uint64_t value);

/// Nearest-rank percentile over an ascending-sorted array: the value at
/// 1-based rank ceil(p/100 * n). p <= 0 yields the minimum, p >= 100 the
/// maximum. Products that are integral in exact arithmetic are snapped
/// before the ceil so float noise cannot shift the rank.
double nearest_rank_value(const std::vector<double>& sorted_scores, double percentile);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Strict double parse of an entire token (no trailing junk, no infinities).
bool parse_double(std::string_view text, double& out);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// ISO-8601 UTC timestamp. Honors SOURCE_DATE_EPOCH for reproducible output.
std::string current_timestamp();

/// Worker count for parallel scoring: SEQPRUNE_THREADS if set, else hardware.
unsigned worker_thread_count();

inline constexpr const char* kToolVersion = "seqprune 0.1.0";

}  // namespace seqprune
