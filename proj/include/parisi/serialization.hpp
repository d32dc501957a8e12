#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "parisi/chaos.hpp"
#include "parisi/montecarlo.hpp"
#include "parisi/parisi_solver.hpp"

namespace parisi {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// {"coeffs": {"p": gamma_p, ...}}
Json to_json(const MixtureSpec& spec);
MixtureSpec mixture_from_json(const Json& j);

/// {"type": "atomic", "jumps": [[q, m], ...]} or
/// {"type": "frsb", "q": q, "beta": beta, "mixture": {...}}.
Json to_json(const ParisiMeasure& measure);
/// Throws ParseError on malformed input, DomainError on invalid measures.
ParisiMeasure measure_from_json(const Json& j);

Json to_json(const Certificate& cert);
Json to_json(const ParisiSolution& sol);
Json to_json(const ChaosReport& report);
Json to_json(const CovarianceReport& report);
Json to_json(const OverlapStats& stats);

/// bin_left,bin_right,count rows preceded by a "# manifest <hash>" line.
std::string histogram_csv(const Histogram& h, const std::string& manifest_hash);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::string version = kVersion;
  std::uint64_t master_seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  /// Hash over everything except the timestamps.
  std::string hash() const;
  Json to_json() const;
};

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace parisi
