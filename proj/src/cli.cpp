#include "ccl/cli.hpp"

#include <CLI11.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "ccl/convergence.hpp"
#include "ccl/counterexample.hpp"
#include "ccl/dist.hpp"
#include "ccl/mcengine.hpp"

namespace ccl::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + tok + "'");
    }
  }
  return out;
}

struct Call {
  std::string name;
  std::vector<double> args;
};

Call parse_call(const std::string& spec) {
  static const std::regex re(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*)");
  std::smatch m;
  if (!std::regex_match(spec, m, re)) throw ConfigError("malformed spec: '" + spec + "'");
  return {m[1].str(), m[2].matched ? parse_list(m[2].str()) : std::vector<double>{}};
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    T out;
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(v, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (v.find('-') != std::string::npos) throw std::invalid_argument(v);
      out = std::stoull(v, &used);
    } else {
      out = static_cast<T>(std::stoll(v, &used));
    }
    if (v.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

Dist make_dist(const ScenarioConfig& cfg) {
  try {
    return parse_dist(cfg.dist);
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("unknown distribution kind", 0) == 0) throw UnsupportedFamily(e.what());
    throw ConfigError(e.what());
  }
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf"); }

}  // namespace

// Config

void apply_preset(ScenarioConfig& cfg, const std::string& spec) {
  const Call c = parse_call(spec);
  auto want = [&](std::size_t k) {
    if (c.args.size() != k)
      throw ConfigError("preset " + c.name + " takes " + std::to_string(k) + " argument(s)");
  };
  if (c.name == "baum_katz") {
    want(2);
    cfg.r = c.args[0];
    cfg.p = c.args[1];
    std::ostringstream tau, a;
    tau.precision(17);
    a.precision(17);
    tau << "power(" << cfg.r - 2.0 << ")";
    a << "power(" << 1.0 / cfg.p << ")";
    cfg.tau = tau.str();
    cfg.a = a.str();
  } else if (c.name == "spataru" || c.name == "spataru_weak") {
    want(c.name == "spataru" ? 0 : 1);
    if (c.name == "spataru_weak") cfg.delta = c.args[0];
    cfg.tau = "harmonic";
    cfg.a = "spataru";
  } else if (c.name == "ms_counterexample") {
    want(1);
    cfg.m_max = static_cast<int>(c.args[0]);
    if (static_cast<double>(cfg.m_max) != c.args[0]) throw ConfigError("m_max must be an integer");
    cfg.dist = "ms_counterexample";
    cfg.tau = "harmonic";
    cfg.a = "spataru";
  } else if (c.name != "custom") {
    throw ConfigError("unknown preset: " + c.name);
  }
  cfg.preset = c.name;
}

void apply_ini(ScenarioConfig& cfg, const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"scenario", {"preset", "dist", "tau", "a"}},
      {"run", {"eps", "theta", "horizon", "replicates", "seed", "workers", "grid_lo", "grid_hi", "maximal", "out"}},
      {"estimate", {"n", "threshold"}},
      {"counterexample", {"m_max", "replay"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = allowed.find(section);
    if (it == allowed.end()) throw ConfigError("unknown config section: [" + section + "]");
    if (!body.data().empty()) throw ConfigError("key outside a section: " + section);
    for (const auto& [key, node] : body) {
      if (!it->second.contains(key)) throw ConfigError("unknown config key: " + section + "." + key);
      (void)node;
    }
  }
  auto get = [&](const std::string& k) { return tree.get_optional<std::string>(pt::ptree::path_type(k, '/')); };
  if (auto v = get("scenario/preset")) apply_preset(cfg, *v);
  if (auto v = get("scenario/dist")) cfg.dist = *v;
  if (auto v = get("scenario/tau")) cfg.tau = *v;
  if (auto v = get("scenario/a")) cfg.a = *v;
  if (auto v = get("run/eps")) cfg.eps = parse_list(*v);
  if (auto v = get("run/theta")) cfg.theta = parse_number<double>("theta", *v);
  if (auto v = get("run/horizon")) cfg.horizon = parse_number<long>("horizon", *v);
  if (auto v = get("run/replicates")) cfg.replicates = parse_number<long>("replicates", *v);
  if (auto v = get("run/seed")) cfg.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("run/workers")) cfg.workers = parse_number<int>("workers", *v);
  if (auto v = get("run/grid_lo")) cfg.grid_lo = parse_number<int>("grid_lo", *v);
  if (auto v = get("run/grid_hi")) cfg.grid_hi = parse_number<int>("grid_hi", *v);
  if (auto v = get("run/maximal")) cfg.maximal = parse_bool("maximal", *v);
  if (auto v = get("run/out")) cfg.out = *v;
  if (auto v = get("estimate/n")) cfg.n = parse_number<long>("n", *v);
  if (auto v = get("estimate/threshold")) cfg.threshold = parse_number<double>("threshold", *v);
  if (auto v = get("counterexample/m_max")) cfg.m_max = parse_number<int>("m_max", *v);
  if (auto v = get("counterexample/replay")) cfg.replay = *v;
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.eps.empty()) throw ConfigError("eps list is empty");
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw ConfigError("eps must be > 0");
  if (cfg.preset == "baum_katz") {
    if (!(cfg.r >= 1.0)) throw ConfigError("baum_katz: r must be >= 1");
    if (!(cfg.p > 0.0 && cfg.p < 2.0)) throw ConfigError("baum_katz: p must lie in (0, 2)");
  }
  if (cfg.preset == "spataru_weak" && !(cfg.delta > 0.0)) throw ConfigError("spataru_weak: delta must be > 0");
  if (cfg.m_max < 1 || cfg.m_max > 16) throw ConfigError("m_max must lie in [1, 16]");
  if (!(cfg.theta >= 1.0)) throw ConfigError("theta must be >= 1");
  if (cfg.horizon < 4) throw ConfigError("horizon must be >= 4");
  if (cfg.replicates < kMinReplicates) throw ConfigError("replicates must be >= 1000");
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
  if (cfg.grid_lo < 0 || cfg.grid_hi < cfg.grid_lo || cfg.grid_hi > 40) throw ConfigError("bad grid exponents");
  if (cfg.n && *cfg.n < 1) throw ConfigError("n must be >= 1");
}

namespace {
void check_power_args(const Call& c) {
  if (c.args.empty() || c.args.size() > 3) throw ConfigError("power(...) takes 1 to 3 arguments");
}
double arg_or(const Call& c, std::size_t i) { return c.args.size() > i ? c.args[i] : 0.0; }
}  // namespace

WeightSeq parse_weights(const std::string& spec) {
  const Call c = parse_call(spec);
  if (c.name == "harmonic") return spataru_weights();
  if (c.name == "power") {
    check_power_args(c);
    return power_weights(c.args[0], arg_or(c, 1), arg_or(c, 2));
  }
  throw UnsupportedFamily("unsupported weight family: " + c.name);
}

NormSeq parse_norm(const std::string& spec) {
  const Call c = parse_call(spec);
  if (c.name == "spataru") return spataru_norm();
  if (c.name == "power") {
    check_power_args(c);
    if (!(c.args[0] > 0.0)) throw ConfigError("normalizer exponent must be > 0");
    return power_norm(c.args[0], arg_or(c, 1), arg_or(c, 2));
  }
  throw UnsupportedFamily("unsupported normalizer family: " + c.name);
}

nlohmann::json config_json(const ScenarioConfig& cfg) {
  nlohmann::json j = {{"preset", cfg.preset}, {"dist", cfg.dist},         {"tau", cfg.tau},
                      {"a", cfg.a},           {"eps", cfg.eps},           {"theta", cfg.theta},
                      {"horizon", cfg.horizon}, {"replicates", cfg.replicates}, {"seed", cfg.seed},
                      {"grid_lo", cfg.grid_lo}, {"grid_hi", cfg.grid_hi},   {"maximal", cfg.maximal},
                      {"m_max", cfg.m_max}};
  if (cfg.preset == "baum_katz") j["r"] = cfg.r, j["p"] = cfg.p;
  if (cfg.preset == "spataru_weak") j["delta"] = cfg.delta;
  if (cfg.n) j["n"] = *cfg.n;
  if (cfg.threshold) j["threshold"] = *cfg.threshold;
  return j;
}

std::string config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_json(cfg).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json provenance(const ScenarioConfig& cfg) {
  return {{"config_hash", config_hash(cfg)},
          {"seed", cfg.seed},
          {"config", config_json(cfg)},
          {"versions", {{"ccl", kVersion}, {"json", "nlohmann " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR)}}}};
}

nlohmann::json to_json(const RegularityReport& r) {
  nlohmann::json j = {{"condition", r.condition}, {"verdict", to_string(r.verdict)}, {"horizon", r.horizon}};
  j["C"] = r.C ? num(*r.C) : nlohmann::json(nullptr);
  j["theta"] = r.theta ? num(*r.theta) : nlohmann::json(nullptr);
  j["N"] = r.N ? nlohmann::json(*r.N) : nlohmann::json(nullptr);
  j["limit"] = r.limit ? num(*r.limit) : nlohmann::json(nullptr);
  j["notes"] = r.notes;
  return j;
}

// Subcommands

namespace {

void emit(const nlohmann::json& j, const ScenarioConfig& cfg, const std::string& file, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    std::ofstream(std::filesystem::path(cfg.out) / file) << text;
  }
}

void write_file(const ScenarioConfig& cfg, const std::string& file, const std::string& text) {
  if (cfg.out.empty()) return;
  std::filesystem::create_directories(cfg.out);
  std::ofstream(std::filesystem::path(cfg.out) / file) << text;
}

std::string eps_tag(double e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

// (c)-series of the counterexample: T_{1,n} = 0 while ln n <= lambda_1.
SeriesReport ms_spataru_c(const KSchedule& s, long horizon) {
  auto term = [&](long n) {
    const double ln_n = std::log(static_cast<double>(n));
    if (!(std::log(ln_n) > s.ln_lambda(1))) return 0.0;
    const T1n t = T1n_log(s, LogReal::from_value(ln_n));
    return std::exp(-(1.0 + std::exp(-t.log_T)) * ln_n);
  };
  auto r = series_verdict("spataru_c", term, horizon, std::nullopt, 2);
  int blocks = 0;
  for (int m = 1; m < s.m_max; ++m) blocks += certify_block_divergence(s, m).passed ? 1 : 0;
  if (blocks == s.m_max - 1 && blocks > 0) {
    attach_certificate(r, BlockLowerBound{1.0, blocks, "certify_block_divergence, explicit integral constant 1"});
  } else {
    r.evidence.push_back("block certificates incomplete: " + std::to_string(blocks) + " of " +
                         std::to_string(s.m_max - 1));
  }
  r.params["eps"] = 1.0;
  return r;
}

nlohmann::json moment_b_json(const MomentBReport& b) {
  return {{"phi_moment", b.phi.value},       {"phi_deficit", b.phi.deficit},
          {"phi_numeric_check", b.phi.numeric_check}, {"weighted_second_moment_inv_logplus", b.weighted_moment},
          {"blocks_certified", b.blocks_certified}, {"blocks_expected", b.blocks_expected},
          {"a_holds", b.a_holds},            {"b_holds", b.b_holds},
          {"c_fails", b.c_fails},            {"notes", b.notes}};
}

int cmd_check_conditions(const ScenarioConfig& cfg, std::ostream& out) {
  const WeightSeq w = parse_weights(cfg.tau);
  const NormSeq a = parse_norm(cfg.a);
  const long H = cfg.horizon;
  nlohmann::json j = {{"command", "check-conditions"}, {"provenance", provenance(cfg)}};
  nlohmann::json reg = nlohmann::json::array();
  reg.push_back(to_json(check_condition_a_criteria(w, H)));
  reg.push_back(to_json(check_aux_cond(w, a, cfg.theta, AuxForm::Cubic, H)));
  reg.push_back(to_json(check_aux_aux_cond(w, a, AuxForm::Cubic, H)));
  reg.push_back(to_json(check_aux_cond(w, a, cfg.theta, AuxForm::Quadratic, H)));
  reg.push_back(to_json(check_aux_aux_cond(w, a, AuxForm::Quadratic, H)));
  j["regularity"] = reg;
  nlohmann::json series = nlohmann::json::array();

  if (cfg.dist == "ms_counterexample") {
    const KSchedule s = build_schedule(cfg.m_max);
    j["moment_b"] = moment_b_json(check_moment_b(s));
    if (cfg.m_max <= 9) {
      const Dist d = ms_distribution(s).as_dist();
      for (double e : cfg.eps) {
        series.push_back(to_json(series_ii(d, w, a, e, H)));
        series.push_back(to_json(series_iii(d, w, a, e, H)));
      }
    }
    series.push_back(to_json(ms_spataru_c(s, H)));
  } else {
    const Dist d = make_dist(cfg);
    for (double e : cfg.eps) {
      series.push_back(to_json(series_ii(d, w, a, e, H)));
      series.push_back(to_json(series_iii(d, w, a, e, H)));
      if (cfg.preset == "spataru" || cfg.preset == "spataru_weak") series.push_back(to_json(series_spataru_c(d, e, H)));
    }
    if (cfg.preset == "spataru" || cfg.preset == "spataru_weak") {
      const ExtReal b = weighted_second_moment(d, InvLogPlus{});
      j["weighted_second_moment_inv_logplus"] = b.is_finite() ? num(b.value) : nlohmann::json(b.reason);
    }
    if (cfg.preset == "spataru_weak") {
      const ExtReal b = weighted_second_moment(d, LogLogDelta{cfg.delta});
      j["weighted_second_moment_loglog"] = b.is_finite() ? num(b.value) : nlohmann::json(b.reason);
    }
  }
  j["series"] = series;
  emit(j, cfg, "check_conditions.json", out);
  return kOk;
}

int cmd_counterexample(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  KSchedule s;
  if (!cfg.replay.empty()) {
    std::ifstream in(cfg.replay);
    if (!in) throw ConfigError("cannot open replay file: " + cfg.replay);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("replay file is not JSON: ") + e.what());
    }
    try {
      s = schedule_from_json(doc.is_object() ? doc.at("schedule") : doc);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad schedule: ") + e.what());
    }
  } else {
    s = build_schedule(cfg.m_max);
  }
  nlohmann::json j = {{"command", "counterexample"}, {"provenance", provenance(cfg)}, {"m_max", s.m_max}};
  j["schedule"] = to_json(s);
  nlohmann::json certs = nlohmann::json::array();
  bool ok = schedule_certified(s);
  std::string first_failure;
  if (!ok) first_failure = "schedule replay: condition (A) or (B) margin negative";
  for (int m = 1; m < s.m_max; ++m) {
    const BlockCertificate c = certify_block_divergence(s, m);
    certs.push_back(to_json(c));
    if (!c.passed && ok) {
      ok = false;
      first_failure = "block m=" + std::to_string(m) + ": " + c.failed_at;
    }
  }
  j["certificates"] = certs;
  j["moment_b"] = moment_b_json(check_moment_b(s));
  j["all_certified"] = ok;
  if (!ok) j["first_failure"] = first_failure;
  emit(j, cfg, "counterexample.json", out);
  if (!ok) {
    err << "certificate failure: " << first_failure << "\n";
    return kCertificateFailure;
  }
  return kOk;
}

int cmd_simulate(const ScenarioConfig& cfg, std::ostream& out) {
  if (cfg.dist == "ms_counterexample")
    throw SamplingUnavailable("distribution 'ms_counterexample' cannot be sampled: atom probabilities underflow");
  const Dist d = make_dist(cfg);
  if (!d.samplable()) throw SamplingUnavailable("distribution '" + d.doc() + "' cannot be sampled");
  const WeightSeq w = parse_weights(cfg.tau);
  const NormSeq a = parse_norm(cfg.a);
  const auto grid = dyadic_grid(cfg.grid_lo, cfg.grid_hi);
  nlohmann::json j = {{"command", "simulate"}, {"provenance", provenance(cfg)}};
  nlohmann::json series = nlohmann::json::array();
  std::uint64_t scenario = 0;
  for (double e : cfg.eps) {
    const SeedStream stream{cfg.seed, scenario++, 0, 0};
    SeriesReport r = empirical_series(d, w, a, e, grid, cfg.replicates, stream, cfg.workers);
    write_file(cfg, "simulate_eps" + eps_tag(e) + ".csv", to_csv(r));
    series.push_back(to_json(r));
    if (cfg.maximal) {
      std::vector<long> small;
      for (long n : grid)
        if (n <= 64) small.push_back(n);
      if (!small.empty() && lattice_atoms(d)) {
        SeriesReport mx = exact_max_series(d, w, a, e, small);
        write_file(cfg, "simulate_max_eps" + eps_tag(e) + ".csv", to_csv(mx));
        series.push_back(to_json(mx));
      }
    }
  }
  j["series"] = series;
  emit(j, cfg, "simulate.json", out);
  return kOk;
}

int cmd_estimate(const ScenarioConfig& cfg, std::ostream& out) {
  if (cfg.dist == "ms_counterexample")
    throw SamplingUnavailable("distribution 'ms_counterexample' cannot be sampled: atom probabilities underflow");
  if (!cfg.n) throw ConfigError("estimate needs --n");
  const Dist d = make_dist(cfg);
  const long n = *cfg.n;
  double thr = 0.0;
  if (cfg.threshold) {
    thr = *cfg.threshold;
  } else {
    thr = cfg.eps.front() * parse_norm(cfg.a)(n);
  }
  const SeedStream stream{cfg.seed, 0, static_cast<std::uint64_t>(n), 0};
  const Estimate e = estimate_tail(d, n, thr, cfg.replicates, stream, cfg.workers);
  nlohmann::json j = {{"command", "estimate"},    {"provenance", provenance(cfg)}, {"n", n},
                      {"threshold", thr},         {"p_hat", e.p_hat},             {"hits", e.hits},
                      {"replicates", e.replicates}, {"ci_lo", e.lo},              {"ci_hi", e.hi},
                      {"stream", {{"seed", stream.seed}, {"scenario", stream.scenario}, {"n", stream.n}}}};
  if (lattice_atoms(d) && n <= WalkOracle::kMaxSteps) {
    try {
      j["exact"] = exact_tail(WalkOracle(d, n, true, cfg.workers), thr);
    } catch (const std::invalid_argument&) {
    }
  }
  out << j.dump() << "\n";
  write_file(cfg, "estimate.json", j.dump() + "\n");
  return kOk;
}

int cmd_report_merge(const ScenarioConfig& cfg, const std::vector<std::string>& files, std::ostream& out) {
  if (files.empty()) throw ConfigError("report-merge needs at least one report file");
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("cannot open report: " + f);
    try {
      reports.push_back({{"source", std::filesystem::path(f).filename().string()}, {"report", nlohmann::json::parse(in)}});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("report " + f + " is not JSON: " + e.what());
    }
  }
  nlohmann::json j = {{"command", "report-merge"}, {"provenance", provenance(cfg)}, {"reports", reports}};
  emit(j, cfg, "merged.json", out);
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complete-convergence laboratory"};
  app.require_subcommand(1);
  struct Flags {
    std::string config, preset, eps, out, dist, replay, tau, a;
    std::optional<long> horizon, replicates, n, m_max;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> threshold;
    bool maximal = false;
    std::vector<std::string> files;
  } f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI scenario file");
    sub->add_option("--preset", f.preset, "baum_katz(r,p) | spataru | spataru_weak(delta) | ms_counterexample(m) | custom");
    sub->add_option("--eps", f.eps, "comma-separated eps list");
    sub->add_option("--horizon", f.horizon, "series horizon");
    sub->add_option("--replicates", f.replicates, "Monte Carlo replicates");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--workers", f.workers, "OpenMP threads");
    sub->add_flag("--maximal", f.maximal, "add the exact sup_k |S_k| series (n <= 64)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--dist", f.dist, "distribution spec");
    sub->add_option("--tau", f.tau, "weight family: power(beta[,log[,loglog]]) | harmonic");
    sub->add_option("--a", f.a, "normalizer family: power(alpha[,log[,loglog]]) | spataru");
  };
  auto* check = app.add_subcommand("check-conditions", "regularity and series certificates");
  auto* cex = app.add_subcommand("counterexample", "build and certify the counterexample schedule");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo series over a dyadic grid");
  auto* est = app.add_subcommand("estimate", "single tail estimate as JSON");
  auto* merge = app.add_subcommand("report-merge", "merge JSON reports");
  for (auto* s : {check, cex, sim, est, merge}) common(s);
  cex->add_option("--m-max", f.m_max, "schedule length");
  cex->add_option("--replay", f.replay, "re-certify a schedule JSON");
  est->add_option("--n", f.n, "number of summands");
  est->add_option("--threshold", f.threshold, "threshold (default eps * a_n)");
  merge->add_option("files", f.files, "report files");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    ScenarioConfig cfg;
    if (!f.config.empty()) apply_ini(cfg, f.config);
    if (!f.preset.empty()) apply_preset(cfg, f.preset);
    if (!f.dist.empty()) cfg.dist = f.dist;
    if (!f.tau.empty()) cfg.tau = f.tau;
    if (!f.a.empty()) cfg.a = f.a;
    if (!f.eps.empty()) cfg.eps = parse_list(f.eps);
    if (f.horizon) cfg.horizon = *f.horizon;
    if (f.replicates) cfg.replicates = *f.replicates;
    if (f.seed) cfg.seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    if (f.maximal) cfg.maximal = true;
    if (!f.out.empty()) cfg.out = f.out;
    if (f.n) cfg.n = *f.n;
    if (f.threshold) cfg.threshold = *f.threshold;
    if (f.m_max) cfg.m_max = static_cast<int>(*f.m_max);
    if (!f.replay.empty()) cfg.replay = f.replay;
    validate(cfg);

    if (*check) return cmd_check_conditions(cfg, out);
    if (*cex) return cmd_counterexample(cfg, out, err);
    if (*sim) return cmd_simulate(cfg, out);
    if (*est) return cmd_estimate(cfg, out);
    return cmd_report_merge(cfg, f.files, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnsupportedFamily& e) {
    err << "unsupported family: " << e.what() << "\n";
    return kUnsupportedFamily;
  } catch (const SamplingUnavailable& e) {
    err << "sampling unavailable: " << e.what() << "\n";
    return kSamplingUnavailable;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace ccl::cli
