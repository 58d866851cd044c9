#include "gnncert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnncert/bounds.hpp"
#include "gnncert/graph.hpp"
#include "gnncert/series.hpp"
#include "gnncert/train.hpp"

namespace gnncert {

using nlohmann::json;

void CheckReport::assert_le(double observed, double bound, const std::string& what, double slack) {
  const double s = bound - observed;
  worst_slack = std::min(worst_slack, s);
  if (!(s >= -slack)) {
    ++violations;
    if (notes.size() < 8) {
      std::ostringstream os;
      os.precision(12);
      os << what << ": observed " << observed << " > bound " << bound;
      notes.push_back(os.str());
    }
  }
}

json CheckReport::to_json() const {
  json j = {{"check", check},
            {"trials", trials},
            {"violations", violations},
            {"worst_slack", std::isfinite(worst_slack) ? json(worst_slack) : json(nullptr)},
            {"seed", seed},
            {"parameters", parameters}};
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

namespace {

Matrix gaussian(std::size_t r, std::size_t c, CounterRng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.data()) x = scale * rng.normal();
  return m;
}

std::size_t uniform_int(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

/// Random simple graph on n nodes with edge probability p and every degree
/// capped at max_degree.
Graph random_graph(std::size_t n, double p, std::size_t max_degree, CounterRng& rng) {
  Graph g;
  g.n = n;
  std::vector<Edge> pairs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.below(i)]);
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : pairs) {
    if (deg[u] < max_degree && deg[v] < max_degree && rng.bernoulli(p)) {
      g.edges.emplace_back(u, v);
      ++deg[u];
      ++deg[v];
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

/// Rows Gaussian, each rescaled to a random norm in (0, radius].
Matrix random_features(std::size_t n, std::size_t dim, double radius, CounterRng& rng) {
  Matrix x = gaussian(n, dim, rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = row_norm(x, i);
    const double target = radius * rng.uniform(0.05, 1.0);
    for (double& v : x.row(i)) v *= norm > 0.0 ? target / norm : 0.0;
  }
  return x;
}

/// Random perturbation with spectral norm exactly `target` (0 allowed).
Matrix scaled_perturbation(std::size_t r, std::size_t c, double target, CounterRng& rng) {
  Matrix u = gaussian(r, c, rng);
  const double s = spectral_norm(u);
  if (s == 0.0 || target == 0.0) return Matrix(r, c);
  u *= target / s;
  return u;
}

Activation random_activation(CounterRng& rng) {
  static constexpr Activation kChoices[] = {kReLU, kTanh, kIdentity};
  return kChoices[rng.below(3)];
}

void check_phi_bounds(CheckReport& rep, const ModelWeights& w, const DatasetStats& st,
                      const ForwardTrace& tr, const std::string& tag) {
  for (std::size_t j = 0; j < tr.hidden.size(); ++j) {
    rep.assert_le(max_row_norm(tr.hidden[j]), phi_upper_bound(w, st, j),
                  tag + " Phi_" + std::to_string(j));
  }
}

double logit_distance(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += (a(0, j) - b(0, j)) * (a(0, j) - b(0, j));
  return std::sqrt(s);
}

void gcn_perturbation_trial(CheckReport& rep, CounterRng& rng, std::size_t trial) {
  const std::size_t n = uniform_int(rng, 1, 12);
  const std::size_t max_deg = uniform_int(rng, 0, 4);  // d ≤ 5
  Graph g = random_graph(n, rng.uniform(0.1, 1.0), max_deg, rng);
  const std::size_t l = uniform_int(rng, 2, 4);
  const std::size_t h0 = uniform_int(rng, 1, 5);
  g.features = random_features(n, h0, rng.uniform(0.5, 2.0), rng);
  const DatasetStats st = graph_stats(g);

  GcnWeights w;
  std::size_t prev = h0;
  for (std::size_t k = 0; k < l; ++k) {
    const std::size_t next = k + 1 == l ? uniform_int(rng, 2, 4) : uniform_int(rng, 1, 6);
    w.W.push_back(gaussian(prev, next, rng, rng.uniform(0.2, 1.5)));
    prev = next;
  }

  BoundInputs in = bound_inputs(st, w, 1.0);
  if (!(in.B > 0.0)) return;
  const WeightStats ws = weight_stats(w, in);

  GcnWeights perturbed = w;
  std::vector<double> pert(l);
  const bool zero = trial % 50 == 0;
  for (std::size_t k = 0; k < l; ++k) {
    const double c = zero ? 0.0 : rng.uniform(1e-3, 1.0) * (1.0 - 1e-9);
    const Matrix u = scaled_perturbation(w.W[k].rows(), w.W[k].cols(),
                                         c * ws.spectral[k] / static_cast<double>(l), rng);
    pert[k] = zero ? 0.0 : spectral_norm(u);
    perturbed.W[k] += u;
  }

  const GraphContext ctx(g);
  const ForwardTrace base = gcn_forward(w, ctx);
  const ForwardTrace moved = gcn_forward(perturbed, ctx);
  const double rhs = gcn_perturbation_rhs(ws, in, pert);
  rep.assert_le(logit_distance(base.logits, moved.logits), rhs,
                "gcn trial " + std::to_string(trial) + " output change");
  check_phi_bounds(rep, w, st, base, "gcn trial " + std::to_string(trial));
  check_phi_bounds(rep, perturbed, st, moved, "gcn trial " + std::to_string(trial) + " perturbed");
}

void mpgnn_perturbation_trial(CheckReport& rep, CounterRng& rng, std::size_t trial,
                              std::size_t regime_counts[3]) {
  const std::size_t n = uniform_int(rng, 1, 12);
  Graph g = random_graph(n, rng.uniform(0.1, 1.0), n, rng);
  const std::size_t l = uniform_int(rng, 2, 5);
  const std::size_t h0 = uniform_int(rng, 1, 5);
  const std::size_t h = uniform_int(rng, 1, 6);
  const std::size_t k = uniform_int(rng, 2, 3);
  g.features = random_features(n, h0, rng.uniform(0.5, 2.0), rng);
  const DatasetStats st = graph_stats(g);

  MpgnnWeights w;
  w.l = l;
  w.W1 = gaussian(h0, h, rng, rng.uniform(0.2, 1.5));
  w.W2 = gaussian(h, h, rng);
  w.Wl = gaussian(h, k, rng, rng.uniform(0.2, 1.5));
  w.phi = random_activation(rng);
  w.rho = random_activation(rng);
  w.g = random_activation(rng);

  // Rescale W2 so τ = d‖W2‖₂ lands in the regime for this trial.
  const std::size_t regime = trial % 3;
  double target_tau = 1.0;
  if (regime == 0) target_tau = rng.uniform(0.2, 0.95);
  if (regime == 1) target_tau = rng.uniform(1.05, 3.0);
  w.W2 *= target_tau / (st.d * spectral_norm(w.W2));

  BoundInputs in = bound_inputs(st, w, 1.0);
  if (!(in.B > 0.0)) return;
  const WeightStats ws = weight_stats(w, in);
  if (ws.tau < 1.0 && !near_unit_ratio(ws.tau)) ++regime_counts[0];
  else if (ws.tau > 1.0 && !near_unit_ratio(ws.tau)) ++regime_counts[1];
  else ++regime_counts[2];

  const double eta = trial % 50 == 1 ? 0.0 : rng.uniform(1e-3, 1.0) / static_cast<double>(l) * (1.0 - 1e-9);
  // One matrix carries ratio exactly η, the others at most η.
  const std::size_t pinned = rng.below(3);
  MpgnnWeights perturbed = w;
  Matrix* targets[3] = {&perturbed.W1, &perturbed.W2, &perturbed.Wl};
  double realized = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double ratio = i == pinned ? eta : eta * rng.uniform(0.0, 1.0);
    const Matrix u =
        scaled_perturbation(targets[i]->rows(), targets[i]->cols(), ratio * ws.spectral[i], rng);
    if (ratio > 0.0) realized = std::max(realized, spectral_norm(u) / ws.spectral[i]);
    *targets[i] += u;
  }

  const GraphContext ctx(g);
  const ForwardTrace base = mpgnn_forward(w, ctx);
  const ForwardTrace moved = mpgnn_forward(perturbed, ctx);
  const double rhs = mpgnn_perturbation_rhs(ws, in, realized);
  rep.assert_le(logit_distance(base.logits, moved.logits), rhs,
                "mpgnn trial " + std::to_string(trial) + " output change");
  check_phi_bounds(rep, w, st, base, "mpgnn trial " + std::to_string(trial));
  check_phi_bounds(rep, perturbed, st, moved, "mpgnn trial " + std::to_string(trial) + " perturbed");
}

}  // namespace

CheckReport check_perturbation_bounds(ModelKind kind, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("check_perturbation_bounds: trials must be >= 1");
  CheckReport rep;
  rep.check = "perturbation_" + to_string(kind);
  rep.trials = trials;
  rep.seed = seed;
  std::size_t regimes[3] = {0, 0, 0};
  const CounterRng root(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = root.split(t);
    if (kind == ModelKind::Gcn)
      gcn_perturbation_trial(rep, rng, t);
    else
      mpgnn_perturbation_trial(rep, rng, t, regimes);
  }
  rep.parameters = {{"model", to_string(kind)}, {"max_nodes", 12}};
  if (kind == ModelKind::Gcn) {
    rep.parameters["depths"] = {2, 3, 4};
    rep.parameters["max_d"] = 5;
  } else {
    rep.parameters["depths"] = {2, 3, 4, 5};
    rep.parameters["trials_tau_below_1"] = regimes[0];
    rep.parameters["trials_tau_above_1"] = regimes[1];
    rep.parameters["trials_tau_equal_1"] = regimes[2];
  }
  return rep;
}

CheckReport check_structural_lemmas(std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("check_structural_lemmas: trials must be >= 1");
  CheckReport rep;
  rep.check = "structural";
  rep.trials = trials;
  rep.seed = seed;
  const CounterRng root(seed);

  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = root.split(2 * t);
    const std::size_t n = uniform_int(rng, 1, 50);
    const bool complete = t % 10 == 0;
    Graph g = random_graph(n, complete ? 1.0 : rng.uniform(0.0, 1.0), n, rng);
    g.features = Matrix(n, 1, 1.0);
    const std::string tag = "graph " + std::to_string(t);
    const double d = graph_stats(g).d;
    const double rn = static_cast<double>(n);

    const Matrix L = normalized_laplacian(g);
    const double l2 = spectral_norm(L);
    rep.assert_le(l2, 1.0 + 1e-8, tag + " ||L||_2 <= 1", 0.0);
    if (complete) rep.assert_le(std::abs(l2 - 1.0), 1e-8, tag + " K_n ||L||_2 = 1", 0.0);
    const double linf = inf_norm(L);
    rep.assert_le(linf, std::sqrt(d), tag + " ||L||_inf <= sqrt(d)");
    rep.assert_le(std::abs(one_norm(L) - linf), 1e-12, tag + " ||L||_1 = ||L||_inf", 0.0);
    rep.assert_le(frobenius_norm(L), std::sqrt(rn), tag + " ||L||_F <= sqrt(n)");
    const auto deg = g.degrees();
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (double x : L.row(i)) row += x;
      rep.assert_le(row, std::sqrt(static_cast<double>(deg[i] + 1)), tag + " row sum <= sqrt(D_i)");
    }

    if (!g.edges.empty()) {
      const Incidence inc = incidence_matrices(g);
      rep.assert_le(inf_norm(inc.in), d, tag + " ||C_in||_inf <= d");
      rep.assert_le(std::abs(one_norm(inc.out) - 1.0), 0.0, tag + " ||C_out||_1 = 1", 0.0);
      for (std::size_t c = 0; c < inc.in.cols(); ++c) {
        double sin = 0.0, sout = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
          sin += inc.in(v, c);
          sout += inc.out(v, c);
        }
        rep.assert_le(std::abs(sin - 1.0) + std::abs(sout - 1.0), 0.0,
                      tag + " one head and one tail per column", 0.0);
      }
    }

    // Activation ∞-norm inequalities on a random matrix pair.
    CounterRng mrng = root.split(2 * t + 1);
    const std::size_t r = uniform_int(mrng, 1, 8), c = uniform_int(mrng, 1, 8);
    const double scale = std::exp(mrng.uniform(-3.0, 3.0));
    const Matrix X = gaussian(r, c, mrng, scale);
    const Matrix Y = gaussian(r, c, mrng, std::exp(mrng.uniform(-3.0, 3.0)));
    const double xinf = inf_norm(X), cols = static_cast<double>(c);
    const std::string mtag = "matrix " + std::to_string(t);
    rep.assert_le(inf_norm(kTanh.apply(X)), std::min(cols, xinf), mtag + " tanh");
    rep.assert_le(inf_norm(kReLU.apply(X)), xinf, mtag + " relu");
    rep.assert_le(inf_norm(kSigmoid.apply(X)), std::min(cols, cols / 2.0 + xinf), mtag + " sigmoid");
    rep.assert_le(inf_norm(X + Y), xinf + inf_norm(Y), mtag + " triangle");
    rep.assert_le(inf_norm(hadamard(X, Y)), xinf * inf_norm(Y), mtag + " hadamard");
  }
  rep.parameters = {{"max_nodes", 50}, {"graphs", trials}, {"matrices", trials}};
  return rep;
}

CheckReport check_concentration(std::size_t h, double sigma, std::size_t l, std::size_t samples,
                                std::uint64_t seed) {
  if (h == 0 || samples == 0 || l < 1 || !(sigma > 0.0))
    throw ConfigError("check_concentration: need h, samples, l >= 1 and sigma > 0");
  CheckReport rep;
  rep.check = "concentration";
  rep.trials = samples;
  rep.seed = seed;

  const double hd = static_cast<double>(h);
  const double t_star = sigma * std::sqrt(2.0 * hd * std::log(4.0 * static_cast<double>(l) * hd));
  std::vector<double> norms(samples);
  const CounterRng root(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng = root.split(s);
    norms[s] = spectral_norm(gaussian(h, h, rng, sigma));
  }
  const auto tail = [&](double t) {
    const auto count = std::count_if(norms.begin(), norms.end(), [t](double x) { return x >= t; });
    return static_cast<double>(count) / static_cast<double>(samples);
  };
  const auto bound = [&](double t) { return 2.0 * hd * std::exp(-t * t / (2.0 * hd * sigma * sigma)); };
  const auto check_tail = [&](double t, const std::string& tag) {
    const double p = tail(t);
    const double noise = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    rep.assert_le(p, bound(t) + noise, tag);
    return p;
  };

  const double p_star = check_tail(t_star, "tail at t*");
  rep.assert_le(0.5, 1.0 - p_star, "P(||U|| < t*) >= 1/2", 0.0);

  // Grid of thresholds from 0 to 3 t*: tail bound at each, nonincreasing tail.
  double prev = 1.0;
  for (int i = 0; i <= 60; ++i) {
    const double t = t_star * 3.0 * i / 60.0;
    const double p = check_tail(t, "tail at grid t=" + std::to_string(t));
    rep.assert_le(p, prev, "tail monotone at t=" + std::to_string(t), 0.0);
    prev = p;
  }
  rep.parameters = {{"h", h},
                    {"sigma", sigma},
                    {"l", l},
                    {"t", t_star},
                    {"empirical_tail", p_star},
                    {"tail_bound", bound(t_star)}};
  return rep;
}

Matrix mpgnn_logits_incidence_form(const MpgnnWeights& w, const Graph& g) {
  w.validate();
  const Incidence inc = incidence_matrices(g);
  Matrix h(g.n, w.hidden());
  const Matrix xw = matmul(g.features, w.W1);
  for (std::size_t k = 1; k < w.l; ++k) {
    const Matrix msg = aggregate_incidence(inc, h, w.g);
    h = w.phi.apply(xw + matmul(w.rho.apply(msg), w.W2));
  }
  return matmul(row_mean(h), w.Wl);
}

double gradient_check(const ModelWeights& w, const Graph& g, double step) {
  const GraphContext ctx(g);
  const BackpropResult analytic = backprop(w, ctx, g.label);
  const auto grads = parameters(analytic.grads);
  ModelWeights probe = w;
  const auto params = parameters(probe);
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix fd(params[p]->rows(), params[p]->cols());
    auto data = params[p]->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + step;
      const double up = cross_entropy(forward(probe, ctx).logits, g.label);
      data[i] = orig - step;
      const double down = cross_entropy(forward(probe, ctx).logits, g.label);
      data[i] = orig;
      fd.data()[i] = (up - down) / (2.0 * step);
    }
    double diff = 0.0, na = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double a = grads[p]->data()[i], f = fd.data()[i];
      diff += (a - f) * (a - f);
      na += a * a;
      nf += f * f;
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nf));
    worst = std::max(worst, scale < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / scale);
  }
  return worst;
}

namespace {

/// Smallest |pre-activation| over every ReLU in the trace.
double min_relu_margin(const ModelWeights& w, const Graph& g) {
  const ForwardTrace tr = forward(w, g);
  const auto* mp = std::get_if<MpgnnWeights>(&w);
  if (mp && mp->phi.kind != ActivationKind::ReLU) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const Matrix& p : tr.pre)
    for (double x : p.data()) best = std::min(best, std::abs(x));
  return best;
}

}  // namespace

CheckReport check_equivalences(std::uint64_t seed) {
  CheckReport rep;
  rep.check = "equivalences";
  rep.seed = seed;
  const CounterRng root(seed);
  std::size_t trials = 0;

  // (a) single-node GCN vs plain ReLU network.
  for (std::size_t t = 0; t < 50; ++t, ++trials) {
    CounterRng rng = root.split(100 + t);
    const std::size_t l = uniform_int(rng, 2, 5);
    Graph g;
    g.n = 1;
    const std::size_t h0 = uniform_int(rng, 1, 6);
    g.features = gaussian(1, h0, rng);
    GcnWeights w;
    std::size_t prev = h0;
    for (std::size_t k = 0; k < l; ++k) {
      const std::size_t next = uniform_int(rng, 1, 6);
      w.W.push_back(gaussian(prev, next, rng));
      prev = next;
    }
    Matrix h = g.features;
    for (std::size_t k = 0; k + 1 < l; ++k) h = kReLU.apply(matmul(h, w.W[k]));
    const Matrix mlp = matmul(h, w.W.back());
    rep.assert_le(max_abs_diff(gcn_forward(w, g).logits, mlp), 1e-12, "single-node gcn vs mlp", 0.0);
  }

  // (b) incidence vs adjacency aggregation, and full forward in both forms.
  for (std::size_t t = 0; t < 50; ++t, ++trials) {
    CounterRng rng = root.split(200 + t);
    const std::size_t n = uniform_int(rng, 1, 10);
    Graph g = random_graph(n, rng.uniform(0.0, 1.0), n, rng);
    const std::size_t h = uniform_int(rng, 1, 6);
    g.features = gaussian(n, uniform_int(rng, 1, 4), rng);
    const Matrix H = gaussian(n, h, rng);
    const Activation act = random_activation(rng);
    const GraphContext ctx(g);
    rep.assert_le(max_abs_diff(aggregate_adjacency(ctx, H, act),
                               aggregate_incidence(incidence_matrices(g), H, act)),
                  1e-12, "aggregation forms", 0.0);

    MpgnnWeights w = init_mpgnn(g.features.cols(), h, 2, uniform_int(rng, 2, 4), rng);
    rep.assert_le(max_abs_diff(mpgnn_forward(w, ctx).logits, mpgnn_logits_incidence_form(w, g)),
                  1e-12, "mpgnn forward forms", 0.0);
  }

  // (c) finite-difference gradient checks, both models.
  for (std::size_t t = 0; t < 20; ++t, ++trials) {
    CounterRng rng = root.split(300 + t);
    const ModelKind kind = t % 2 == 0 ? ModelKind::Gcn : ModelKind::Mpgnn;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const std::size_t n = uniform_int(rng, 2, 5);
      Graph g = random_graph(n, 0.6, n, rng);
      g.features = gaussian(n, 3, rng);
      g.label = static_cast<int>(rng.below(2));
      const ModelWeights w = init_model(kind, 3, 2 + t % 3, 2, 2 + t % 3, rng);
      if (min_relu_margin(w, g) < 1e-7) continue;
      rep.assert_le(gradient_check(w, g), 1e-5, to_string(kind) + " gradient check", 0.0);
      break;
    }
  }

  // (d) GCN positive homogeneity in each layer.
  for (std::size_t t = 0; t < 30; ++t, ++trials) {
    CounterRng rng = root.split(400 + t);
    const std::size_t n = uniform_int(rng, 1, 8);
    Graph g = random_graph(n, 0.5, n, rng);
    g.features = gaussian(n, 3, rng);
    GcnWeights w = init_gcn(3, {4, 3}, 2, rng);
    const double a = t == 0 ? 2.0 : rng.uniform(0.1, 5.0);
    const std::size_t layer = rng.below(w.layers());
    GcnWeights scaled = w;
    scaled.W[layer] *= a;
    const Matrix base = gcn_forward(w, g).logits;
    const Matrix expect = base * a;
    const Matrix got = gcn_forward(scaled, g).logits;
    double scale = 0.0;
    for (double x : expect.data()) scale = std::max(scale, std::abs(x));
    const double err = max_abs_diff(got, expect) / std::max(scale, 1e-300);
    rep.assert_le(scale == 0.0 ? max_abs_diff(got, expect) : err, 1e-10, "gcn homogeneity", 0.0);
  }

  rep.trials = trials;
  rep.parameters = {{"single_node", 50}, {"aggregation", 50}, {"gradient", 20}, {"homogeneity", 30}};
  return rep;
}

}  // namespace gnncert
