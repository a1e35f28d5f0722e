#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netrel/forest.hpp"
#include "netrel/learner.hpp"
#include "netrel/lifetimes.hpp"
#include "netrel/network.hpp"
#include "netrel/signature.hpp"

namespace netrel {

inline constexpr std::string_view kVersion = "0.1.0";

// A network plus one lifetime law per class (dense class order).
struct NetworkFile {
  Network network;
  std::vector<LifetimeDistribution> distributions;
};

NetworkFile parse_network(std::string_view json_text);
NetworkFile load_network(const std::filesystem::path& path);
std::string dump_network(const NetworkFile& file);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Shortest round-trip decimal. force_point appends ".0" to integral values.
std::string format_number(double x, bool force_point = true);

// Provenance lines written as '#' comments at the top of every CSV.
struct RunInfo {
  std::string command;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

std::string hex64(std::uint64_t x);
std::uint64_t parse_hex64(std::string_view s);

std::string reliability_csv(const ReliabilityCurve& curve, const RunInfo& info,
                            const std::vector<double>* re = nullptr);
std::string signature_csv(const SignatureTable& table, const RunInfo& info);

std::string reliability_json(const ReliabilityCurve& curve, const RunInfo& info,
                             const std::vector<double>* re = nullptr);
std::string signature_json(const SignatureTable& table, const RunInfo& info);
SignatureTable parse_signature_json(std::string_view json_text);
ReliabilityCurve parse_reliability_json(std::string_view json_text);

// Model file. `net` supplies the fingerprint stored with the forest.
std::string forest_json(const Forest& forest, const Network& net);
// Throws ModelMismatch when the stored dimension or fingerprint disagrees
// with `net`.
Forest parse_forest_json(std::string_view json_text, const Network& net);

std::string audit_json(const AuditLog& audit);

}  // namespace netrel
