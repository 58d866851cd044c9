#include "gnncert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gnncert/series.hpp"
#include "gnncert/train.hpp"

namespace gnncert {

namespace {

constexpr double kE = std::numbers::e;
// Relative slack when checking perturbation hypotheses against spectral norms
// that were themselves computed by power iteration.
constexpr double kHypothesisSlack = 1e-12;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("bound inputs: ") + name + " must be positive and finite");
}

}  // namespace

void BoundInputs::validate() const {
  require_positive(B, "B");
  require_positive(d, "d");
  require_positive(h, "h");
  require_positive(gamma, "gamma");
  require_positive(C_phi, "C_phi");
  require_positive(C_rho, "C_rho");
  require_positive(C_g, "C_g");
  if (!(m >= 1.0)) throw ConfigError("bound inputs: m must be >= 1");
  if (l < 2) throw ConfigError("bound inputs: l must be > 1");
}

double xi(double tau, std::size_t l, double C_phi) {
  if (!(tau >= 0.0)) throw ConfigError("xi: tau must be >= 0");
  if (l < 2) throw ConfigError("xi: l must be > 1");
  return C_phi * geometric_partial_sum(tau, l - 1);
}

WeightStats weight_stats(const ModelWeights& w, const BoundInputs& in) {
  WeightStats ws;
  for (const Matrix* p : parameters(w)) {
    ws.spectral.push_back(spectral_norm(*p));
    ws.frobenius.push_back(frobenius_norm(*p));
    ws.w_sq += ws.frobenius.back() * ws.frobenius.back();
  }
  if (kind_of(w) == ModelKind::Mpgnn) {
    const double s1 = ws.spectral[0], s2 = ws.spectral[1], sl = ws.spectral[2];
    ws.zeta = std::min({s1, s2, sl});
    ws.lambda = s1 * sl;
    ws.percolation = in.C_phi * in.C_rho * in.C_g * s2;
    ws.tau = in.d * ws.percolation;
    ws.xi = xi(ws.tau, in.l, in.C_phi);
    ws.kappa = in.C_phi * in.B * s1;
    ws.beta = std::max(1.0 / ws.zeta, std::pow(ws.lambda * ws.xi, 1.0 / static_cast<double>(in.l)));
  }
  return ws;
}

BoundInputs bound_inputs(const DatasetStats& s, const ModelWeights& w, double gamma) {
  BoundInputs in;
  in.B = s.B;
  in.d = s.d;
  in.l = depth_of(w);
  in.m = static_cast<double>(s.m);
  in.gamma = gamma;
  if (const auto* mp = std::get_if<MpgnnWeights>(&w)) {
    in.h = static_cast<double>(mp->max_dim());
    in.C_phi = mp->phi.lipschitz();
    in.C_rho = mp->rho.lipschitz();
    in.C_g = mp->g.lipschitz();
  } else {
    in.h = static_cast<double>(std::get<GcnWeights>(w).max_dim());
  }
  return in;
}

double gcn_perturbation_rhs(const WeightStats& ws, const BoundInputs& in,
                            std::span<const double> pert_norms) {
  in.validate();
  if (pert_norms.size() != ws.spectral.size() || ws.spectral.size() != in.l)
    throw DimensionError("gcn_perturbation_rhs: need one perturbation norm per layer");
  const double l = static_cast<double>(in.l);
  double prod = 1.0, ratio_sum = 0.0;
  for (std::size_t k = 0; k < in.l; ++k) {
    const double wk = ws.spectral[k], uk = pert_norms[k];
    if (!(uk >= 0.0)) throw ConfigError("gcn_perturbation_rhs: negative perturbation norm");
    if (uk > wk / l * (1.0 + kHypothesisSlack)) {
      std::ostringstream os;
      os << "gcn perturbation hypothesis violated at layer " << k + 1 << ": ||U||_2 = " << uk
         << " > ||W||_2 / l = " << wk / l;
      throw HypothesisViolation(os.str());
    }
    prod *= wk;
    ratio_sum += uk / wk;
  }
  return kE * in.B * std::pow(in.d, (l - 1.0) / 2.0) * prod * ratio_sum;
}

double mpgnn_perturbation_rhs(const WeightStats& ws, const BoundInputs& in, double eta) {
  in.validate();
  const double l = static_cast<double>(in.l);
  if (!(eta >= 0.0)) throw ConfigError("mpgnn_perturbation_rhs: eta must be >= 0");
  if (eta > (1.0 / l) * (1.0 + kHypothesisSlack)) {
    std::ostringstream os;
    os << "mpgnn perturbation hypothesis violated: eta = " << eta << " > 1/l = " << 1.0 / l;
    throw HypothesisViolation(os.str());
  }
  if (near_unit_ratio(ws.tau)) return kE * in.B * (l + 1.0) * (l + 1.0) * eta * ws.lambda * in.C_phi;
  return kE * in.B * l * eta * ws.lambda * ws.xi;
}

BoundValue pacbayes_value_mpgnn(const WeightStats& ws, const BoundInputs& in) {
  in.validate();
  const double l = static_cast<double>(in.l);
  // log of max(·)² l² (general) or max(ζ^{-6}, λ³C_φ³)(l+1)⁴ (τ = 1 window).
  double log_capacity;
  if (near_unit_ratio(ws.tau)) {
    log_capacity = std::max(-6.0 * std::log(ws.zeta), 3.0 * std::log(ws.lambda * in.C_phi)) +
                   4.0 * std::log(l + 1.0);
  } else {
    log_capacity = 2.0 * std::max(-(l + 1.0) * std::log(ws.zeta),
                                  (l + 1.0) / l * std::log(ws.lambda * ws.xi)) +
                   2.0 * std::log(l);
  }
  const double log_sq = 2.0 * std::log(42.0) + 2.0 * std::log(in.B) + log_capacity +
                        std::log(in.h) + std::log(std::log(4.0 * l * in.h)) + std::log(ws.w_sq) -
                        2.0 * std::log(in.gamma) - std::log(in.m);
  BoundValue v;
  v.log_value = 0.5 * log_sq;
  v.value = std::exp(v.log_value);
  return v;
}

BoundValue pacbayes_value_gcn(const WeightStats& ws, const BoundInputs& in) {
  in.validate();
  if (ws.spectral.size() != in.l) throw DimensionError("pacbayes_value_gcn: layer count mismatch");
  const double l = static_cast<double>(in.l);
  double log_prod_sq = 0.0, ratio_sum = 0.0;
  for (std::size_t i = 0; i < in.l; ++i) {
    log_prod_sq += 2.0 * std::log(ws.spectral[i]);
    ratio_sum += (ws.frobenius[i] * ws.frobenius[i]) / (ws.spectral[i] * ws.spectral[i]);
  }
  const double log_sq = 2.0 * std::log(42.0) + 2.0 * std::log(in.B) + (l - 1.0) * std::log(in.d) +
                        2.0 * std::log(l) + std::log(in.h) + std::log(std::log(4.0 * l * in.h)) +
                        log_prod_sq + std::log(ratio_sum) - 2.0 * std::log(in.gamma) -
                        std::log(in.m);
  BoundValue v;
  v.log_value = 0.5 * log_sq;
  v.value = std::exp(v.log_value);
  return v;
}

std::string to_string(RademacherCase c) {
  switch (c) {
    case RademacherCase::A:
      return "A";
    case RademacherCase::B:
      return "B";
    case RademacherCase::C:
      return "C";
  }
  return "?";
}

RademacherTerms rademacher_terms(const WeightStats& ws, const BoundInputs& in) {
  in.validate();
  if (ws.spectral.size() != 3) throw DimensionError("rademacher: expects the MPGNN weight triple");
  const double b1 = ws.spectral[0], b2 = ws.spectral[1], bl = ws.spectral[2];
  RademacherTerms t;
  t.M = ws.xi;
  t.R_bar = in.C_rho * in.C_g * in.d * in.B * b1 * ws.xi;
  t.Z = in.C_phi * (in.B * b1 + t.R_bar * b2);
  const double feat = in.B * b1;
  const double msg = t.R_bar * b2;
  const double alt = t.M * std::sqrt(in.h) * std::max(feat, msg);
  if (t.Z >= alt) {
    t.inner = t.Z;
    t.which = RademacherCase::A;
  } else {
    t.inner = alt;
    t.which = feat >= msg ? RademacherCase::B : RademacherCase::C;
  }
  t.log_arg = 24.0 * bl * std::sqrt(in.m) * t.inner;
  return t;
}

RademacherValue rademacher_value(const WeightStats& ws, const BoundInputs& in) {
  RademacherValue r;
  r.terms = rademacher_terms(ws, in);
  r.which = r.terms.which;
  if (!(r.terms.log_arg > 1.0)) {
    std::ostringstream os;
    os << "rademacher bound undefined: log argument " << r.terms.log_arg << " <= 1";
    throw ConfigError(os.str());
  }
  const double bl = ws.spectral[2];
  const double log_val = std::log(2.0 * 24.0) + std::log(in.h) + std::log(bl) +
                         std::log(r.terms.Z) +
                         0.5 * (std::log(3.0 * std::log(r.terms.log_arg)) -
                                2.0 * std::log(in.gamma) - std::log(in.m));
  r.log_value = log_val;
  r.value = std::exp(log_val);
  return r;
}

// ---- report ----

std::string BoundReport::csv_header() {
  return "dataset,model,l,h,seed,gamma,B,d,m,margin_loss,zeta,lambda,xi,dC,pacbayes_log,"
         "rademacher_log,rademacher_case";
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string BoundReport::csv_row() const {
  std::ostringstream os;
  os << dataset << ',' << to_string(model) << ',' << l << ',' << h << ',' << seed << ','
     << num(gamma) << ',' << num(data.B) << ',' << num(data.d) << ',' << data.m << ','
     << num(margin_loss) << ',' << num(weights.zeta) << ',' << num(weights.lambda) << ','
     << num(weights.xi) << ',' << num(weights.tau) << ',' << num(pacbayes.log_value) << ','
     << (has_rademacher ? num(rademacher.log_value) : "") << ','
     << (has_rademacher ? to_string(rademacher.which) : "-");
  return os.str();
}

nlohmann::json BoundReport::to_json() const {
  const auto opt = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json j = {
      {"dataset", dataset},
      {"model", to_string(model)},
      {"l", l},
      {"h", h},
      {"seed", seed},
      {"gamma", gamma},
      {"delta", delta},
      {"B", data.B},
      {"d", data.d},
      {"m", data.m},
      {"margin_loss", margin_loss},
      {"spectral_norms", weights.spectral},
      {"frobenius_norms", weights.frobenius},
      {"w_sq", weights.w_sq},
      {"zeta", opt(weights.zeta)},
      {"lambda", opt(weights.lambda)},
      {"percolation", opt(weights.percolation)},
      {"dC", opt(weights.tau)},
      {"xi", opt(weights.xi)},
      {"kappa", opt(weights.kappa)},
      {"beta", opt(weights.beta)},
      {"pacbayes_value", pacbayes.value},
      {"pacbayes_log", pacbayes.log_value},
  };
  if (has_rademacher) {
    j["rademacher_value"] = rademacher.value;
    j["rademacher_log"] = rademacher.log_value;
    j["rademacher_case"] = to_string(rademacher.which);
    j["rademacher_terms"] = {{"M", rademacher.terms.M},
                             {"R_bar", rademacher.terms.R_bar},
                             {"Z", rademacher.terms.Z},
                             {"inner_max", rademacher.terms.inner}};
  }
  return j;
}

BoundReport bound_report(const Dataset& train_set, const ModelWeights& w, double gamma,
                         std::uint64_t seed, double delta) {
  train_set.validate();
  if (input_dim_of(w) != train_set.feature_dim)
    throw DimensionError("bound_report: checkpoint input width does not match the dataset");
  if (num_classes_of(w) < static_cast<std::size_t>(train_set.num_classes))
    throw DimensionError("bound_report: checkpoint has fewer classes than the dataset");

  BoundReport r;
  r.dataset = train_set.name;
  r.model = kind_of(w);
  r.l = depth_of(w);
  r.seed = seed;
  r.gamma = gamma;
  r.delta = delta;
  r.data = dataset_stats(train_set);
  BoundInputs in = bound_inputs(r.data, w, gamma);
  in.delta = delta;
  r.h = static_cast<std::size_t>(in.h);
  r.weights = weight_stats(w, in);
  r.margin_loss = margin_loss(w, train_set, gamma);
  if (r.model == ModelKind::Mpgnn) {
    r.pacbayes = pacbayes_value_mpgnn(r.weights, in);
    r.rademacher = rademacher_value(r.weights, in);
    r.has_rademacher = true;
  } else {
    r.pacbayes = pacbayes_value_gcn(r.weights, in);
  }
  return r;
}

}  // namespace gnncert
