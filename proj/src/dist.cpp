#include "ccl/dist.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ccl/seqkit.hpp"

namespace ccl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kMassTol = 1e-12;
constexpr double kNormalCut = 60.0;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// E|Z|^nu; even integer orders exactly as (nu - 1)!!
double normal_abs_moment(double nu) {
  if (nu == std::floor(nu) && static_cast<long>(nu) % 2 == 0 && nu <= 40) {
    double v = 1.0;
    for (long k = static_cast<long>(nu) - 1; k > 1; k -= 2) v *= static_cast<double>(k);
    return v;
  }
  return std::pow(2.0, nu / 2.0) * std::tgamma((nu + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

template <class F>
double integrate(F f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 20, 1e-14, &err);
}

double pow_abs(double v, double nu) { return nu == 0.0 ? 1.0 : std::pow(std::fabs(v), nu); }

// ln(2 + v) given ln v.
double log_plus_from_log(double lv) {
  if (lv > 0.0) return lv + std::log1p(2.0 * std::exp(-lv));
  return std::log(2.0 + std::exp(lv));
}

double weight_fn(const MomentWeight& w, double x) {
  const double lp = log_plus(x);
  return std::visit(overloaded{[&](InvLogPlus) { return 1.0 / lp; },
                               [&](LogLogDelta d) { return std::pow(log_plus(lp), 1.0 + d.delta) / lp; }},
                    w);
}

double log_weight_fn_from_log(const MomentWeight& w, double lv) {
  const double lp = log_plus_from_log(lv);
  return std::visit(overloaded{[&](InvLogPlus) { return -std::log(lp); },
                               [&](LogLogDelta d) {
                                 return (1.0 + d.delta) * std::log(log_plus(lp)) - std::log(lp);
                               }},
                    w);
}

double approx_gcd(double a, double b, double tol) {
  if (a < b) std::swap(a, b);
  while (b > tol) {
    double r = std::fmod(a, b);
    if (b - r <= tol) r = 0.0;
    a = b;
    b = r;
  }
  return a;
}

template <class AtomRange>
double atom_mass(const AtomRange& atoms) {
  CompensatedSum s;
  for (const auto& a : atoms) s.add(a.weight);
  return s.value();
}

}  // namespace

Dist::Dist(Kind kind, std::string doc) : kind_(std::move(kind)), doc_(std::move(doc)) {
  auto bad = [](const char* msg) { throw std::invalid_argument(msg); };
  std::visit(overloaded{
                 [](Rademacher) {},
                 [](NormalStd) {},
                 [&](const UniformSym& u) {
                   if (!(u.half_width > 0.0)) bad("uniform: half-width must be > 0");
                 },
                 [&](const ParetoSym& p) {
                   if (!(p.alpha > 0.0) || !(p.scale > 0.0)) bad("pareto: alpha and scale must be > 0");
                 },
                 [&](const AtomicSym& a) {
                   for (const auto& at : a.atoms)
                     if (!(at.value > 0.0) || !(at.weight > 0.0))
                       bad("atomic: values and weights must be > 0");
                   if (atom_mass(a.atoms) > 1.0 + kMassTol) bad("atomic: total mass exceeds 1");
                 },
                 [&](const AtomicGeneral& a) {
                   for (const auto& at : a.atoms)
                     if (at.value == 0.0 || !(at.weight > 0.0))
                       bad("atomic_general: values must be nonzero and weights > 0");
                   if (atom_mass(a.atoms) > 1.0 + kMassTol) bad("atomic_general: total mass exceeds 1");
                 },
                 [&](const LogAtomicSym& a) {
                   std::vector<double> lw;
                   for (const auto& at : a.atoms) lw.push_back(at.log_weight);
                   if (!a.atoms.empty() && log_sum_exp(lw) > kMassTol)
                     bad("log_atomic: total mass exceeds 1");
                 },
             },
             kind_);
}

double Dist::zero_mass() const {
  return std::visit(overloaded{
                        [](Rademacher) { return 0.0; },
                        [](NormalStd) { return 0.0; },
                        [](const UniformSym&) { return 0.0; },
                        [](const ParetoSym&) { return 0.0; },
                        [](const AtomicSym& a) { return std::max(0.0, 1.0 - atom_mass(a.atoms)); },
                        [](const AtomicGeneral& a) { return std::max(0.0, 1.0 - atom_mass(a.atoms)); },
                        [](const LogAtomicSym& a) {
                          if (a.atoms.empty()) return 1.0;
                          std::vector<double> lw;
                          for (const auto& at : a.atoms) lw.push_back(at.log_weight);
                          return std::max(0.0, -std::expm1(log_sum_exp(lw)));
                        },
                    },
                    kind_);
}

std::optional<double> Dist::support_max() const {
  return std::visit(overloaded{
                        [](Rademacher) -> std::optional<double> { return 1.0; },
                        [](NormalStd) -> std::optional<double> { return std::nullopt; },
                        [](const UniformSym& u) -> std::optional<double> { return u.half_width; },
                        [](const ParetoSym&) -> std::optional<double> { return std::nullopt; },
                        [](const AtomicSym& a) -> std::optional<double> {
                          double m = 0.0;
                          for (const auto& at : a.atoms) m = std::max(m, at.value);
                          return m;
                        },
                        [](const AtomicGeneral& a) -> std::optional<double> {
                          double m = 0.0;
                          for (const auto& at : a.atoms) m = std::max(m, std::fabs(at.value));
                          return m;
                        },
                        [](const LogAtomicSym& a) -> std::optional<double> {
                          double m = -kInf;
                          for (const auto& at : a.atoms) m = std::max(m, at.log_value);
                          return std::exp(m);
                        },
                    },
                    kind_);
}

double tail(const Dist& d, double lambda) {
  if (lambda <= 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](Rademacher) { return lambda <= 1.0 ? 1.0 : 0.0; },
          [&](NormalStd) { return std::erfc(lambda / std::numbers::sqrt2); },
          [&](const UniformSym& u) { return lambda >= u.half_width ? 0.0 : 1.0 - lambda / u.half_width; },
          [&](const ParetoSym& p) { return lambda <= p.scale ? 1.0 : std::pow(p.scale / lambda, p.alpha); },
          [&](const AtomicSym& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (at.value >= lambda) s.add(at.weight);
            return s.value();
          },
          [&](const AtomicGeneral& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (std::fabs(at.value) >= lambda) s.add(at.weight);
            return s.value();
          },
          [&](const LogAtomicSym& a) {
            const double ll = std::log(lambda);
            std::vector<double> lw;
            for (const auto& at : a.atoms)
              if (at.log_value >= ll) lw.push_back(at.log_weight);
            return lw.empty() ? 0.0 : std::exp(log_sum_exp(lw));
          },
      },
      d.kind());
}

double strict_tail(const Dist& d, double lambda) {
  if (lambda < 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](Rademacher) { return lambda < 1.0 ? 1.0 : 0.0; },
          [&](const ParetoSym& p) { return lambda < p.scale ? 1.0 : std::pow(p.scale / lambda, p.alpha); },
          [&](const AtomicSym& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (at.value > lambda) s.add(at.weight);
            return s.value();
          },
          [&](const AtomicGeneral& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (std::fabs(at.value) > lambda) s.add(at.weight);
            return s.value();
          },
          [&](const LogAtomicSym& a) {
            const double ll = lambda > 0.0 ? std::log(lambda) : -kInf;
            std::vector<double> lw;
            for (const auto& at : a.atoms)
              if (at.log_value > ll) lw.push_back(at.log_weight);
            return lw.empty() ? 0.0 : std::exp(log_sum_exp(lw));
          },
          [&](const auto&) { return tail(d, lambda); },
      },
      d.kind());
}

double cdf(const Dist& d, double x) {
  if (const auto* g = std::get_if<AtomicGeneral>(&d.kind())) {
    CompensatedSum s;
    for (const auto& at : g->atoms)
      if (at.value <= x) s.add(at.weight);
    if (x >= 0.0) s.add(d.zero_mass());
    return s.value();
  }
  if (x >= 0.0) return 1.0 - 0.5 * strict_tail(d, x);
  return 0.5 * tail(d, -x);
}

TruncatedMoment truncated_moment(const Dist& d, double nu, double b) {
  if (nu < 0.0) throw std::invalid_argument("truncated_moment: nu must be >= 0");
  if (!(b > 0.0)) throw std::invalid_argument("truncated_moment: cutoff must be > 0");
  const double zero_part = nu == 0.0 ? d.zero_mass() : 0.0;
  const double v = std::visit(
      overloaded{
          [&](Rademacher) { return b > 1.0 ? 1.0 : 0.0; },
          [&](NormalStd) {
            const double hi = std::min(b, kNormalCut);
            const double full = normal_abs_moment(nu);
            // quadrature can overshoot the full moment by an ulp near the cut
            return std::min(full, integrate([nu](double x) { return 2.0 * pow_abs(x, nu) * normal_pdf(x); }, 0.0, hi));
          },
          [&](const UniformSym& u) {
            const double c = std::min(b, u.half_width);
            return std::pow(c, nu + 1.0) / ((nu + 1.0) * u.half_width);
          },
          [&](const ParetoSym& p) {
            if (b <= p.scale) return 0.0;
            const double coef = p.alpha * std::pow(p.scale, p.alpha);
            if (std::fabs(nu - p.alpha) < 1e-14) return coef * std::log(b / p.scale);
            return coef * (std::pow(b, nu - p.alpha) - std::pow(p.scale, nu - p.alpha)) / (nu - p.alpha);
          },
          [&](const AtomicSym& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (at.value < b) s.add(at.weight * pow_abs(at.value, nu));
            return s.value() + zero_part;
          },
          [&](const AtomicGeneral& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (std::fabs(at.value) < b) s.add(at.weight * pow_abs(at.value, nu));
            return s.value() + zero_part;
          },
          [&](const LogAtomicSym& a) {
            const double lb = std::log(b);
            std::vector<double> terms;
            for (const auto& at : a.atoms)
              if (at.log_value < lb) terms.push_back(at.log_weight + nu * at.log_value);
            return (terms.empty() ? 0.0 : std::exp(log_sum_exp(terms))) + zero_part;
          },
      },
      d.kind());
  return {nu, b, v};
}

ExtReal upper_moment(const Dist& d, double nu, double b) {
  if (nu < 0.0) throw std::invalid_argument("upper_moment: nu must be >= 0");
  return std::visit(
      overloaded{
          [&](Rademacher) { return ExtReal::finite(b <= 1.0 ? 1.0 : 0.0); },
          [&](NormalStd) {
            const double lo = std::clamp(b, 0.0, kNormalCut);
            return ExtReal::finite(
                integrate([nu](double x) { return 2.0 * pow_abs(x, nu) * normal_pdf(x); }, lo, kNormalCut));
          },
          [&](const UniformSym& u) {
            const double c = std::clamp(b, 0.0, u.half_width);
            return ExtReal::finite((std::pow(u.half_width, nu + 1.0) - std::pow(c, nu + 1.0)) /
                                   ((nu + 1.0) * u.half_width));
          },
          [&](const ParetoSym& p) {
            if (nu >= p.alpha) return ExtReal::infinity("pareto: moment order >= tail index");
            const double m = std::max(b, p.scale);
            return ExtReal::finite(p.alpha * std::pow(p.scale, p.alpha) * std::pow(m, nu - p.alpha) /
                                   (p.alpha - nu));
          },
          [&](const AtomicSym& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (at.value >= b) s.add(at.weight * pow_abs(at.value, nu));
            if (nu == 0.0 && b <= 0.0) s.add(d.zero_mass());
            return ExtReal::finite(s.value());
          },
          [&](const AtomicGeneral& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms)
              if (std::fabs(at.value) >= b) s.add(at.weight * pow_abs(at.value, nu));
            if (nu == 0.0 && b <= 0.0) s.add(d.zero_mass());
            return ExtReal::finite(s.value());
          },
          [&](const LogAtomicSym& a) {
            const double lb = b > 0.0 ? std::log(b) : -kInf;
            std::vector<double> terms;
            for (const auto& at : a.atoms)
              if (at.log_value >= lb) terms.push_back(at.log_weight + nu * at.log_value);
            double v = terms.empty() ? 0.0 : std::exp(log_sum_exp(terms));
            if (nu == 0.0 && b <= 0.0) v += d.zero_mass();
            return ExtReal::finite(v);
          },
      },
      d.kind());
}

ExtReal full_moment(const Dist& d, double nu) {
  return std::visit(
      overloaded{
          [&](Rademacher) { return ExtReal::finite(1.0); },
          [&](NormalStd) {
            return ExtReal::finite(normal_abs_moment(nu));
          },
          [&](const UniformSym& u) { return ExtReal::finite(std::pow(u.half_width, nu) / (nu + 1.0)); },
          [&](const ParetoSym& p) {
            if (nu >= p.alpha) return ExtReal::infinity("pareto: moment order >= tail index");
            return ExtReal::finite(p.alpha * std::pow(p.scale, nu) / (p.alpha - nu));
          },
          [&](const auto&) { return upper_moment(d, nu, 0.0); },
      },
      d.kind());
}

double truncated_second_moment(const Dist& d, double eps, const NormSeq& a, long n) {
  return truncated_moment(d, 2.0, eps * a(n)).value;
}

ExtReal weighted_second_moment(const Dist& d, const MomentWeight& w) {
  if (const auto* ld = std::get_if<LogLogDelta>(&w); ld && !(ld->delta > 0.0))
    throw std::invalid_argument("weighted_second_moment: delta must be > 0");
  auto integrand = [&w](double x) { return x * x * weight_fn(w, x); };
  return std::visit(
      overloaded{
          [&](Rademacher) { return ExtReal::finite(integrand(1.0)); },
          [&](NormalStd) {
            return ExtReal::finite(
                integrate([&](double x) { return 2.0 * integrand(x) * normal_pdf(x); }, 0.0, kNormalCut));
          },
          [&](const UniformSym& u) {
            return ExtReal::finite(integrate(integrand, 0.0, u.half_width) / u.half_width);
          },
          [&](const ParetoSym& p) {
            if (p.alpha <= 2.0)
              return ExtReal::infinity("pareto tail index <= 2: x^(1-alpha) w(x) is not integrable at infinity");
            // x = s e^u: alpha s^2 int_0^inf e^{(2-alpha)u} w(s e^u) du
            const double hi = 80.0 / (p.alpha - 2.0);
            const double s = p.scale;
            const double v = integrate(
                [&](double u) { return std::exp((2.0 - p.alpha) * u) * weight_fn(w, s * std::exp(u)); }, 0.0, hi);
            return ExtReal::finite(p.alpha * s * s * v);
          },
          [&](const AtomicSym& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms) s.add(at.weight * integrand(at.value));
            return ExtReal::finite(s.value());
          },
          [&](const AtomicGeneral& a) {
            CompensatedSum s;
            for (const auto& at : a.atoms) s.add(at.weight * integrand(std::fabs(at.value)));
            return ExtReal::finite(s.value());
          },
          [&](const LogAtomicSym& a) {
            std::vector<double> terms;
            for (const auto& at : a.atoms)
              terms.push_back(at.log_weight + 2.0 * at.log_value + log_weight_fn_from_log(w, at.log_value));
            return ExtReal::finite(terms.empty() ? 0.0 : std::exp(log_sum_exp(terms)));
          },
      },
      d.kind());
}

namespace {

template <class AtomRange>
double pick_atom(const AtomRange& atoms, double u, Engine& eng, bool random_sign) {
  double cum = 0.0;
  for (const auto& at : atoms) {
    cum += at.weight;
    if (u < cum) {
      if (!random_sign) return at.value;
      return (eng() >> 63) ? at.value : -at.value;
    }
  }
  return 0.0;
}

}  // namespace

double draw(const Dist& d, Engine& eng) {
  return std::visit(
      overloaded{
          [&](Rademacher) { return (eng() >> 63) ? 1.0 : -1.0; },
          [&](NormalStd) { return std::normal_distribution<double>{}(eng); },
          [&](const UniformSym& u) { return (2.0 * uniform01(eng) - 1.0) * u.half_width; },
          [&](const ParetoSym& p) {
            const double mag = p.scale * std::pow(1.0 - uniform01(eng), -1.0 / p.alpha);
            return (eng() >> 63) ? mag : -mag;
          },
          [&](const AtomicSym& a) { return pick_atom(a.atoms, uniform01(eng), eng, true); },
          [&](const AtomicGeneral& a) { return pick_atom(a.atoms, uniform01(eng), eng, false); },
          [&](const LogAtomicSym&) -> double {
            throw SamplingUnavailable("log-atomic distribution: atom probabilities are below floating range");
          },
      },
      d.kind());
}

double draw_sum(const Dist& d, long n, Engine& eng) {
  if (std::holds_alternative<Rademacher>(d.kind())) {
    long s = 0;
    long left = n;
    while (left > 0) {
      const int take = static_cast<int>(std::min(left, 64L));
      std::uint64_t bits = eng();
      if (take < 64) bits &= (std::uint64_t{1} << take) - 1;
      s += 2L * std::popcount(bits) - take;
      left -= take;
    }
    return static_cast<double>(s);
  }
  if (std::holds_alternative<NormalStd>(d.kind())) {
    std::normal_distribution<double> nd;
    double s = 0.0;
    for (long i = 0; i < n; ++i) s += nd(eng);
    return s;
  }
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += draw(d, eng);
  return s;
}

std::vector<double> sample(const Dist& d, const SeedStream& stream, std::size_t count) {
  if (!d.samplable()) throw SamplingUnavailable("distribution '" + d.doc() + "' cannot be sampled");
  std::vector<double> out;
  out.reserve(count);
  Engine eng = stream.engine();
  if (std::holds_alternative<NormalStd>(d.kind())) {
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < count; ++i) out.push_back(nd(eng));
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(d, eng));
  return out;
}

std::optional<LatticeAtoms> lattice_atoms(const Dist& d) {
  constexpr long kMaxIndex = 1'000'000;
  auto build = [](const std::vector<Atom>& atoms, double zero, bool sym) -> std::optional<LatticeAtoms> {
    LatticeAtoms out;
    if (atoms.empty()) {
      out.atoms.push_back({0, 1.0});
      return out;
    }
    double vmax = 0.0;
    for (const auto& a : atoms) vmax = std::max(vmax, std::fabs(a.value));
    const double tol = 1e-9 * vmax;
    double g = std::fabs(atoms.front().value);
    for (const auto& a : atoms) g = approx_gcd(g, std::fabs(a.value), tol);
    if (!(g > tol)) return std::nullopt;
    out.step = g;
    for (const auto& a : atoms) {
      const double q = a.value / g;
      const long k = std::lround(q);
      if (std::fabs(q - static_cast<double>(k)) > 1e-9 * std::fabs(q) || std::labs(k) > kMaxIndex)
        return std::nullopt;
      if (sym) {
        out.atoms.push_back({k, 0.5 * a.weight});
        out.atoms.push_back({-k, 0.5 * a.weight});
      } else {
        out.atoms.push_back({k, a.weight});
      }
    }
    if (zero > 0.0) out.atoms.push_back({0, zero});
    return out;
  };
  return std::visit(overloaded{
                        [&](Rademacher) -> std::optional<LatticeAtoms> {
                          return LatticeAtoms{1.0, {{-1, 0.5}, {1, 0.5}}};
                        },
                        [&](const AtomicSym& a) { return build(a.atoms, d.zero_mass(), true); },
                        [&](const AtomicGeneral& a) { return build(a.atoms, d.zero_mass(), false); },
                        [&](const auto&) -> std::optional<LatticeAtoms> { return std::nullopt; },
                    },
                    d.kind());
}

namespace {

std::vector<double> parse_args(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    size_t used = 0;
    out.push_back(std::stod(tok, &used));
  }
  return out;
}

std::vector<Atom> parse_atoms(const std::string& s) {
  std::vector<Atom> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("atom must be value:weight, got '" + tok + "'");
    out.push_back({std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
  }
  return out;
}

}  // namespace

Dist parse_dist(const std::string& spec) {
  const auto open = spec.find('(');
  const std::string name = spec.substr(0, open);
  std::string inner;
  if (open != std::string::npos) {
    const auto close = spec.rfind(')');
    if (close == std::string::npos || close < open) throw std::invalid_argument("bad distribution spec: " + spec);
    inner = spec.substr(open + 1, close - open - 1);
  }
  if (name == "rademacher") return Dist::rademacher();
  if (name == "normal") return Dist::normal();
  if (name == "uniform") {
    const auto a = parse_args(inner);
    return Dist::uniform(a.empty() ? 1.0 : a.at(0));
  }
  if (name == "pareto") {
    const auto a = parse_args(inner);
    if (a.empty()) throw std::invalid_argument("pareto needs a tail index");
    return Dist::pareto(a[0], a.size() > 1 ? a[1] : 1.0);
  }
  if (name == "atomic") return Dist(AtomicSym{parse_atoms(inner)}, spec);
  if (name == "atomic_general") return Dist(AtomicGeneral{parse_atoms(inner)}, spec);
  throw std::invalid_argument("unknown distribution kind: " + name);
}

}  // namespace ccl
