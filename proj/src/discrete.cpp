#include "polybranch/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/poisson.hpp>

namespace polybranch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rate_power(double x, double th) {
  if (th == 0.0) return 1.0;
  if (th == 1.0) return x;
  if (th == 2.0) return x * x;
  if (th == 1.5) return x * std::sqrt(x);
  if (th == 0.5) return std::sqrt(x);
  return std::pow(x, th);
}

// Offspring sampling by inversion over the nonzero entries.
class OffspringSampler {
 public:
  explicit OffspringSampler(const OffspringLaw& law) {
    double acc = 0.0;
    for (std::size_t k = 0; k < law.p.size(); ++k) {
      if (law.p[k] <= 0.0) continue;
      acc += law.p[k];
      k_.push_back(static_cast<std::uint64_t>(k));
      cum_.push_back(acc);
      coarse_ = coarse_ && law.p[k] >= 1e-6;
    }
    finite_ = acc;
    double def = 1.0 - acc;
    coarse_ = coarse_ && (def <= 1e-15 || def >= 1e-6);
  }

  // true when 32-bit uniforms resolve every mass to better than 1e-3 relative
  bool coarse() const { return coarse_; }

  // number of children, or nullopt for a jump to infinity
  std::optional<std::uint64_t> draw(double u) const {
    if (u >= finite_) return std::nullopt;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) --it;
    return k_[static_cast<std::size_t>(it - cum_.begin())];
  }

 private:
  std::vector<std::uint64_t> k_;
  std::vector<double> cum_;
  double finite_ = 0.0;
  bool coarse_ = true;
};

struct ChainEnd {
  double state = 0.0;
  bool exploded = false;
  bool censored = false;
  bool truncated = false;
  double time = 0.0;
};

template <class Rec>
ChainEnd run_chain(const ChainSpec& spec, const OffspringSampler& smp, std::uint64_t i0, double horizon,
                   Philox& rng, const ChainOptions& opts, Rec&& rec) {
  ChainEnd e;
  std::uint64_t i = i0;
  double t = 0.0;
  std::uint64_t events = 0;
  while (true) {
    if (i == 0) {
      e.state = 0.0;
      e.time = t;
      return e;
    }
    double rate = spec.alpha_rate * rate_power(static_cast<double>(i), spec.theta);
    // one 64-bit draw per event when the law allows it: high half for the holding time,
    // low half for the offspring number
    double e_hold, u_child;
    if (smp.coarse()) {
      std::uint64_t v = rng();
      e_hold = -std::log((static_cast<double>(v >> 32) + 0.5) * 0x1.0p-32);
      u_child = (static_cast<double>(v & 0xffffffffULL) + 0.5) * 0x1.0p-32;
    } else {
      e_hold = rng.exponential();
      u_child = -1.0;
    }
    double tn = t + e_hold / rate;
    if (tn > horizon) {
      e.state = static_cast<double>(i);
      e.time = horizon;
      return e;
    }
    if (++events > opts.max_events) {
      e.state = static_cast<double>(i);
      e.censored = true;
      e.time = t;
      return e;
    }
    t = tn;
    auto k = smp.draw(u_child >= 0.0 ? u_child : rng.uniform());
    if (!k) {
      rec(t, static_cast<double>(i), kInf);
      e.state = kInf;
      e.exploded = true;
      e.time = t;
      return e;
    }
    double next = static_cast<double>(i) + static_cast<double>(*k) - 1.0;
    if (next >= opts.max_state) {
      rec(t, static_cast<double>(i), next);
      e.state = next;
      e.censored = true;
      e.truncated = true;
      e.time = t;
      return e;
    }
    rec(t, static_cast<double>(i), next);
    i = i + *k - 1;
  }
}

double block_value(const GfBlock& b, double s, double u) {
  switch (b.kind) {
    case GfBlock::Kind::Killing: return -b.gamma * b.param * s;
    case GfBlock::Kind::Death: return b.gamma * u;
    case GfBlock::Kind::Birth: return -b.gamma * s * u;
    case GfBlock::Kind::Diffusion: return 0.5 * b.gamma * u * u;
    case GfBlock::Kind::Poisson: {
      double m = b.param;
      return b.gamma / m * (std::expm1(-m * u) + m * u);
    }
  }
  return 0.0;
}

// gamma [g(s) - s] with u = 1 - s and log s supplied separately for accuracy
double direct_value(const OffspringLaw& law, double gamma, double u, double log_s) {
  long double acc = 0.0L;
  for (std::size_t k = 2; k < law.p.size(); ++k) {
    if (law.p[k] == 0.0) continue;
    acc += static_cast<long double>(law.p[k]) * std::expm1(static_cast<double>(k) * log_s);
  }
  acc += static_cast<long double>(u) - law.to_infinity();
  return gamma * static_cast<double>(acc);
}

void add_poisson(std::vector<double>& w, double& w_inf, double weight, double m, std::uint64_t cap) {
  double sd = std::sqrt(m);
  double lo = std::max(0.0, std::floor(m - 40.0 * sd - 40.0));
  double hi = std::ceil(m + 40.0 * sd + 40.0);
  std::uint64_t k_lo = static_cast<std::uint64_t>(lo);
  std::uint64_t k_hi = std::min<std::uint64_t>(static_cast<std::uint64_t>(hi), cap);
  if (w.size() <= k_hi) w.resize(k_hi + 1, 0.0);
  double lm = std::log(m);
  for (std::uint64_t k = k_lo; k <= k_hi; ++k) {
    double kd = static_cast<double>(k);
    w[k] += weight * std::exp(kd * lm - m - std::lgamma(kd + 1.0));
  }
  if (static_cast<double>(cap) < hi) {
    boost::math::poisson_distribution<double> pd(m);
    w_inf += weight * boost::math::cdf(boost::math::complement(pd, static_cast<double>(cap)));
  }
}

}  // namespace

double OffspringLaw::total() const {
  long double acc = 0.0L;
  for (double v : p) acc += v;
  return static_cast<double>(acc);
}

double OffspringLaw::to_infinity() const { return std::max(0.0, 1.0 - total()); }

double OffspringLaw::pgf(double s) const {
  double acc = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * s + p[k];
  return acc;
}

void OffspringLaw::validate() const {
  if (p.size() > 1 && p[1] != 0.0) throw ValidationError("offspring law: b_1 must be 0");
  for (double v : p)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("offspring law: masses must be finite and >= 0");
  if (total() > 1.0 + 1e-12) throw ValidationError("offspring law: total mass exceeds 1");
}

void ChainSpec::validate() const {
  offspring.validate();
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ValidationError("chain: theta must be finite and >= 0");
  if (!(alpha_rate > 0.0) || !std::isfinite(alpha_rate)) throw ValidationError("chain: rate must be > 0");
  if (!(n >= 1.0)) throw ValidationError("chain: n must be >= 1");
  if (!(gamma_n > 0.0) || !std::isfinite(gamma_n)) throw ValidationError("chain: gamma_n must be > 0");
}

QRow q_matrix_row(const ChainSpec& spec, std::uint64_t i) {
  QRow row;
  if (i == 0) return row;
  double r = spec.alpha_rate * rate_power(static_cast<double>(i), spec.theta);
  const auto& p = spec.offspring.p;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k == 1 || p[k] == 0.0) continue;
    row.rates[i + k - 1] = r * p[k];
  }
  row.to_infinity = r * spec.offspring.to_infinity();
  row.diagonal = -r;
  return row;
}

PathSample gillespie(const ChainSpec& spec, std::uint64_t i0, double horizon, Philox& rng, const ChainOptions& opts) {
  spec.validate();
  if (!(horizon >= 0.0)) throw DomainError("gillespie: horizon must be >= 0");
  OffspringSampler smp(spec.offspring);
  PathSample s;
  s.scheme = Scheme::Chain;
  s.theta = 0.0;
  s.trunc_upper = opts.max_state;
  double x0 = static_cast<double>(i0);
  s.grid.push_back(0.0);
  s.left.push_back(x0);
  s.states.push_back(x0);
  auto rec = [&](double t, double l, double v) {
    if (!opts.record) return;
    s.grid.push_back(t);
    s.left.push_back(l);
    s.states.push_back(v);
  };
  ChainEnd e = run_chain(spec, smp, i0, horizon, rng, opts, rec);
  if (e.state == 0.0) {
    s.tau0 = e.time;
    s.tau = e.time;
    s.horizon = kInf;
  } else if (e.exploded) {
    s.tau_inf = e.time;
    s.tau = e.time;
    s.horizon = kInf;
  } else {
    s.censored = e.censored;
    s.truncated = e.truncated;
    s.horizon = e.time;
    if (!e.censored && s.grid.back() < horizon) {
      s.grid.push_back(horizon);
      s.left.push_back(e.state);
      s.states.push_back(e.state);
    }
  }
  return s;
}

PathSample gillespie(const ChainSpec& spec, std::uint64_t i0, double horizon, std::uint64_t seed,
                     const ChainOptions& opts) {
  Philox rng(seed, 0);
  auto s = gillespie(spec, i0, horizon, rng, opts);
  s.seed = seed;
  return s;
}

double phi_n(const OffspringLaw& law, double gamma_n, double n, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("phi_n: lambda must be >= 0");
  double log_s = -lambda / n;
  return direct_value(law, gamma_n, -std::expm1(log_s), log_s);
}

double psi_n(const OffspringLaw& law, double gamma_n, double n, double lambda) {
  if (!(lambda >= 0.0 && lambda <= n)) throw DomainError("psi_n: lambda must lie in [0, n]");
  double u = lambda / n;
  return direct_value(law, gamma_n, u, std::log1p(-u));
}

double phi_n_blocks(const ChainSpec& spec, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("phi_n: lambda must be >= 0");
  double s = std::exp(-lambda / spec.n), u = -std::expm1(-lambda / spec.n);
  double acc = 0.0;
  for (const auto& b : spec.blocks) acc += block_value(b, s, u);
  return acc;
}

double psi_n_blocks(const ChainSpec& spec, double lambda) {
  if (!(lambda >= 0.0 && lambda <= spec.n)) throw DomainError("psi_n: lambda must lie in [0, n]");
  double u = lambda / spec.n, s = 1.0 - u;
  double acc = 0.0;
  for (const auto& b : spec.blocks) acc += block_value(b, s, u);
  return acc;
}

ChainSpec build_approx_sequence(const MechanismSpec& ms, double n, const ApproxOptions& opts) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("construction: n must be finite and >= 1");
  if (!(ms.a >= 0.0) || !(ms.c >= 0.0) || !std::isfinite(ms.b))
    throw ValidationError("construction: need a >= 0, c >= 0, finite b");
  if (!(ms.theta >= 0.0)) throw ValidationError("construction: theta must be >= 0");
  if (ms.a > n * n) throw ValidationError("construction: killing a exceeds n^2, killing block is not a generating function");

  const double rn = std::sqrt(n);
  const std::uint64_t cap = opts.max_children;
  std::vector<GfBlock> blocks;
  double c_eff = ms.c;
  double b_n = ms.b;

  if (ms.a > 0.0) blocks.push_back({GfBlock::Kind::Killing, n * n, ms.a / (n * n)});

  std::vector<std::pair<double, double>> poisson;  // (rate weight w, jump size z) with n z >= 1
  for (const auto& at : ms.measure.atoms) {
    if (!(at.z > 0.0) || !(at.w >= 0.0)) throw ValidationError("construction: atoms need z > 0, w >= 0");
    if (at.w == 0.0) continue;
    if (at.z > 1.0 && at.z <= rn) b_n -= at.w * at.z;
    if (at.z > rn) continue;
    if (n * at.z < 1.0)
      c_eff += 0.5 * at.w * at.z * at.z;
    else
      poisson.emplace_back(at.w, at.z);
  }
  if (ms.measure.stable) {
    const double al = ms.measure.stable->alpha, C = ms.measure.stable->scale;
    if (!(al > 0.0 && al < 2.0) || !(C > 0.0)) throw ValidationError("construction: stable part needs alpha in (0,2), C > 0");
    // compensator of the jumps in (1, sqrt n]
    b_n -= C * (al == 1.0 ? std::log(rn) : (std::pow(rn, 1.0 - al) - 1.0) / (1.0 - al));
    // jumps below 1/n act as extra diffusion
    c_eff += 0.5 * C * std::pow(n, al - 2.0) / (2.0 - al);
    double r = opts.cell_ratio;
    if (!(r > 1.0)) throw ValidationError("construction: cell ratio must be > 1");
    double lo = 1.0 / n;
    while (lo < rn) {
      double hi = std::min(lo * r, rn);
      double mass = C * (std::pow(lo, -al) - std::pow(hi, -al)) / al;
      double first = al == 1.0 ? C * std::log(hi / lo) : C * (std::pow(hi, 1.0 - al) - std::pow(lo, 1.0 - al)) / (1.0 - al);
      double zc = std::clamp(first / mass, lo, hi);
      poisson.emplace_back(mass, zc);
      lo = hi;
    }
  }

  if (b_n > 0.0) blocks.push_back({GfBlock::Kind::Death, b_n * n, 0.0});
  if (b_n < 0.0) blocks.push_back({GfBlock::Kind::Birth, -b_n * n, 0.0});
  if (c_eff > 0.0) blocks.push_back({GfBlock::Kind::Diffusion, 2.0 * c_eff * n * n, 0.0});
  for (const auto& [w, z] : poisson) blocks.push_back({GfBlock::Kind::Poisson, w * n * z, n * z});

  // unnormalised mixture gamma_i * g_i, dropping the b_1 coefficient
  std::vector<double> wt(3, 0.0);
  double w_inf = 0.0;
  for (const auto& b : blocks) {
    switch (b.kind) {
      case GfBlock::Kind::Killing: w_inf += b.gamma * b.param; break;
      case GfBlock::Kind::Death: wt[0] += b.gamma; break;
      case GfBlock::Kind::Birth: wt[2] += b.gamma; break;
      case GfBlock::Kind::Diffusion:
        wt[0] += 0.5 * b.gamma;
        wt[2] += 0.5 * b.gamma;
        break;
      case GfBlock::Kind::Poisson:
        wt[0] += b.gamma * (b.param - 1.0) / b.param;
        add_poisson(wt, w_inf, b.gamma / b.param, b.param, cap);
        break;
    }
  }
  wt[1] = 0.0;
  long double g = w_inf;
  for (double v : wt) g += v;
  if (!(g > 0.0L)) throw ValidationError("construction: mechanism yields an empty chain (psi identically 0)");

  ChainSpec spec;
  spec.gamma_n = static_cast<double>(g);
  spec.offspring.p.resize(wt.size());
  for (std::size_t k = 0; k < wt.size(); ++k) spec.offspring.p[k] = wt[k] / spec.gamma_n;
  while (spec.offspring.p.size() > 3 && spec.offspring.p.back() == 0.0) spec.offspring.p.pop_back();
  spec.theta = ms.theta;
  spec.n = n;
  spec.alpha_rate = std::pow(n, -ms.theta);
  spec.blocks = std::move(blocks);
  return spec;
}

ChainSpec build_approx_sequence(const Mechanism& mech, double n, const ApproxOptions& opts) {
  MechanismSpec ms;
  ms.a = mech.a();
  ms.b = mech.b();
  ms.c = mech.c();
  ms.theta = mech.theta();
  ms.measure = mech.measure();
  return build_approx_sequence(ms, n, opts);
}

namespace {

double marginal_one(const ChainSpec& spec, const OffspringSampler& smp, std::uint64_t i0, double t, std::uint64_t seed,
                    std::size_t path, const ChainOptions& opts, bool& censored) {
  Philox rng(seed, stream_id(path));
  ChainOptions o = opts;
  o.record = false;
  ChainEnd e = run_chain(spec, smp, i0, spec.gamma_n * t, rng, o, [](double, double, double) {});
  censored = e.censored;
  return e.state / spec.n;
}

Marginal finish_marginal(std::vector<double>&& v, const std::vector<char>& cens) {
  Marginal m;
  m.values = std::move(v);
  std::sort(m.values.begin(), m.values.end());
  m.censored = static_cast<std::size_t>(std::count(cens.begin(), cens.end(), 1));
  return m;
}

std::uint64_t start_state(const ChainSpec& spec, double x0) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw DomainError("rescaled_marginal: x0 must be finite and >= 0");
  return static_cast<std::uint64_t>(std::llround(spec.n * x0));
}

}  // namespace

Marginal rescaled_marginal(const ChainSpec& spec, double x0, double t, std::size_t n_paths, std::uint64_t seed,
                           const ChainOptions& opts) {
  spec.validate();
  if (!(t >= 0.0)) throw DomainError("rescaled_marginal: t must be >= 0");
  const std::uint64_t i0 = start_state(spec, x0);
  OffspringSampler smp(spec.offspring);
  std::vector<double> v(n_paths);
  std::vector<char> cens(n_paths, 0);
  const long long np = static_cast<long long>(n_paths);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long k = 0; k < np; ++k) {
    bool c = false;
    auto idx = static_cast<std::size_t>(k);
    v[idx] = marginal_one(spec, smp, i0, t, seed, idx, opts, c);
    cens[idx] = c ? 1 : 0;
  }
  return finish_marginal(std::move(v), cens);
}

Marginal rescaled_marginal_serial(const ChainSpec& spec, double x0, double t, std::size_t n_paths,
                                  std::uint64_t seed, const ChainOptions& opts) {
  spec.validate();
  if (!(t >= 0.0)) throw DomainError("rescaled_marginal: t must be >= 0");
  const std::uint64_t i0 = start_state(spec, x0);
  OffspringSampler smp(spec.offspring);
  std::vector<double> v(n_paths);
  std::vector<char> cens(n_paths, 0);
  for (std::size_t k = 0; k < n_paths; ++k) {
    bool c = false;
    v[k] = marginal_one(spec, smp, i0, t, seed, k, opts, c);
    cens[k] = c ? 1 : 0;
  }
  return finish_marginal(std::move(v), cens);
}

std::vector<std::pair<double, double>> empirical_cdf(const std::vector<double>& sorted_values) {
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted_values.size());
  for (std::size_t k = 0; k < sorted_values.size(); ++k) {
    if (k + 1 < sorted_values.size() && sorted_values[k + 1] == sorted_values[k]) continue;
    out.emplace_back(sorted_values[k], static_cast<double>(k + 1) / n);
  }
  return out;
}

}  // namespace polybranch
