#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ccl/numeric.hpp"
#include "ccl/rng.hpp"

namespace ccl {

class NormSeq;

struct Rademacher {};
struct UniformSym {
  double half_width = 1.0;
};
struct NormalStd {};
/// P(|X| >= x) = min(1, (scale/x)^alpha), random sign.
struct ParetoSym {
  double alpha = 1.0;
  double scale = 1.0;
};
/// P(|X| = value) = weight, split evenly between +value and -value; the
/// remaining mass sits at 0.
struct Atom {
  double value = 0.0;
  double weight = 0.0;
};
struct AtomicSym {
  std::vector<Atom> atoms;
};
/// Atoms given by ln(value), ln(weight); used for astronomically spread
/// supports. Not samplable.
struct LogAtom {
  double log_value = 0.0;
  double log_weight = 0.0;
};
struct LogAtomicSym {
  std::vector<LogAtom> atoms;
};
/// General (possibly asymmetric) finite distribution: P(X = value) = weight,
/// remaining mass at 0.
struct AtomicGeneral {
  std::vector<Atom> atoms;
};

struct SamplingUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Immutable random-variable model.
class Dist {
 public:
  using Kind = std::variant<Rademacher, UniformSym, NormalStd, ParetoSym, AtomicSym, LogAtomicSym,
                            AtomicGeneral>;

  /// Validates parameters and total mass; throws std::invalid_argument.
  Dist(Kind kind, std::string doc = {});

  static Dist rademacher() { return Dist(Rademacher{}, "rademacher"); }
  static Dist uniform(double h) { return Dist(UniformSym{h}, "uniform(" + std::to_string(h) + ")"); }
  static Dist normal() { return Dist(NormalStd{}, "normal"); }
  static Dist pareto(double alpha, double scale = 1.0) {
    return Dist(ParetoSym{alpha, scale},
                "pareto(" + std::to_string(alpha) + "," + std::to_string(scale) + ")");
  }
  static Dist atomic(std::vector<Atom> atoms) { return Dist(AtomicSym{std::move(atoms)}, "atomic"); }

  const Kind& kind() const { return kind_; }
  const std::string& doc() const { return doc_; }
  bool symmetric() const { return !std::holds_alternative<AtomicGeneral>(kind_); }
  bool samplable() const { return !std::holds_alternative<LogAtomicSym>(kind_); }
  /// Mass at exactly 0.
  double zero_mass() const;
  /// sup |X| when finite.
  std::optional<double> support_max() const;

 private:
  Kind kind_;
  std::string doc_;
};

struct TruncatedMoment {
  double nu = 0.0;
  double cutoff = 0.0;
  double value = 0.0;
};

/// P(|X| >= lambda).
double tail(const Dist& d, double lambda);
/// P(|X| > lambda).
double strict_tail(const Dist& d, double lambda);
/// P(X <= x).
double cdf(const Dist& d, double x);

/// E[|X|^nu 1{|X| < b}]; 0^0 is taken as 1.
TruncatedMoment truncated_moment(const Dist& d, double nu, double b);
/// E[|X|^nu 1{|X| >= b}].
ExtReal upper_moment(const Dist& d, double nu, double b);
/// E[|X|^nu].
ExtReal full_moment(const Dist& d, double nu);

/// T_{eps,n} = E[X^2 1{|X| < eps a_n}].
double truncated_second_moment(const Dist& d, double eps, const NormSeq& a, long n);

/// log+ x = ln(2 + x).
inline double log_plus(double x) { return std::log(2.0 + x); }

/// Weight functions for second moments of Spataru-type conditions.
struct InvLogPlus {};
struct LogLogDelta {
  double delta = 1.0;
};
using MomentWeight = std::variant<InvLogPlus, LogLogDelta>;

/// E[X^2 w(|X|)] with w = 1/log+ or (log+ log+)^(1+delta)/log+.
ExtReal weighted_second_moment(const Dist& d, const MomentWeight& w);

/// One draw.
double draw(const Dist& d, Engine& eng);
/// Sum of n i.i.d. draws.
double draw_sum(const Dist& d, long n, Engine& eng);
/// count i.i.d. draws from the stream.
std::vector<double> sample(const Dist& d, const SeedStream& stream, std::size_t count);

/// Atoms of |X| on an integer lattice: values k * step with k > 0 (k = 0 for
/// the zero atom). Empty for continuous kinds or non-lattice supports.
struct LatticeAtoms {
  double step = 1.0;
  std::vector<std::pair<long, double>> atoms;  // signed lattice index, probability
};
std::optional<LatticeAtoms> lattice_atoms(const Dist& d);

/// Parses "rademacher", "uniform(h)", "normal", "pareto(alpha[,scale])",
/// "atomic(v:w,v:w,...)", "atomic_general(v:w,...)".
Dist parse_dist(const std::string& spec);

}  // namespace ccl
