#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccl/seqkit.hpp"

namespace ccl::cli {

enum ExitCode : int {
  kOk = 0,
  kCertificateFailure = 1,
  kConfigError = 2,
  kUnsupportedFamily = 3,
  kSamplingUnavailable = 4,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFamily : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string preset = "custom";
  double r = 2.0;
  double p = 1.0;
  double delta = 1.0;
  int m_max = 9;

  std::string dist = "rademacher";
  std::string tau = "power(0)";
  std::string a = "power(1)";
  std::vector<double> eps = {1.0};
  double theta = 1.0;
  long horizon = 1000;
  long replicates = 10000;
  std::uint64_t seed = 1;
  int workers = 0;
  int grid_lo = 1;
  int grid_hi = 10;
  bool maximal = false;
  std::string out;

  // estimate
  std::optional<long> n;
  std::optional<double> threshold;
  // counterexample
  std::string replay;
};

/// Reads an INI file; unknown sections or keys raise ConfigError.
void apply_ini(ScenarioConfig& cfg, const std::string& path);
/// "baum_katz(2,1)", "spataru", "spataru_weak(1)", "ms_counterexample(9)", "custom".
void apply_preset(ScenarioConfig& cfg, const std::string& spec);
/// Range checks; raises ConfigError.
void validate(const ScenarioConfig& cfg);

/// "power(beta[,log[,loglog]])", "harmonic" (tau_n = 1/n).
WeightSeq parse_weights(const std::string& spec);
/// "power(alpha[,log[,loglog]])", "spataru" ((n ln n)^(1/2)).
NormSeq parse_norm(const std::string& spec);

/// Effective configuration without run-local fields (workers, out).
nlohmann::json config_json(const ScenarioConfig& cfg);
/// FNV-1a 64 of the canonical config dump.
std::string config_hash(const ScenarioConfig& cfg);
nlohmann::json provenance(const ScenarioConfig& cfg);

nlohmann::json to_json(const RegularityReport& r);

/// Entry point shared by the binary and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccl::cli
