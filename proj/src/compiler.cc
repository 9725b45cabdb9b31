// Copyright 2026 The hybridqs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hybridqs/compiler.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "hybridqs/device.h"

namespace hybridqs {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double wrap_pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

double wrap_positive(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

bool valid_axis(char a) { return a == 'x' || a == 'y' || a == 'z'; }

// Rotation taking s_z to s_axis by conjugation, and its inverse.
std::vector<GateOp> basis_change(int q, char axis, bool inverse) {
  switch (axis) {
    case 'x':
      return {GateOp::rot_y(q, inverse ? 1.5 * kPi : 0.5 * kPi)};
    case 'y':
      return {GateOp::rot_x(q, inverse ? 0.5 * kPi : 1.5 * kPi)};
    default:
      return {};
  }
}

void push_layer(std::vector<Layer>& layers, Layer layer) {
  if (!layer.empty()) layers.push_back(std::move(layer));
}

// Maps the sites of a circuit onto 0..k-1 and returns exp(i chi) with
// target = exp(i chi) * circuit.
double fit_global_phase(const LocalTerm& term, double tau, const std::vector<Layer>& layers) {
  std::map<int, int> remap;
  for (int s : term.sites) remap.emplace(s, static_cast<int>(remap.size()));
  for (const auto& l : layers) {
    for (const auto& g : l) {
      for (int q : g.support()) remap.emplace(q, static_cast<int>(remap.size()));
    }
  }
  const int k = static_cast<int>(remap.size());
  std::vector<GateOp> ops;
  for (const auto& l : layers) {
    for (GateOp g : l) {
      g.qubit = remap.at(g.qubit);
      if (g.two_qubit()) g.qubit_b = remap.at(g.qubit_b);
      ops.push_back(g);
    }
  }
  std::vector<int> local_sites;
  for (int s : term.sites) local_sites.push_back(remap.at(s));
  ExactModel m{embed_operator(k, local_sites, term.h), {}};
  Matrix target = m.propagator(tau);
  Matrix gates = ideal_circuit_unitary(k, ops);
  cplx ov = (gates.adjoint() * target).trace();
  double chi = std::arg(ov);
  if ((target - std::polar(1.0, chi) * gates).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::logic_error("decomposition does not reproduce the term exponential");
  }
  return chi;
}

void check_site(int n, int s, const char* what) {
  if (s < 0 || (n > 0 && s >= n)) throw std::invalid_argument(std::string(what) + ": site out of range");
}

void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": coefficient must be finite");
}

void validate_primitive(const Primitive& p, int n) {
  std::visit(Overloaded{
                 [&](const OneBody& t) {
                   check_site(n, t.site, "one-body term");
                   if (!valid_axis(t.axis)) throw std::invalid_argument("one-body term: bad axis");
                   check_finite(t.b, "one-body term");
                 },
                 [&](const TwoBody& t) {
                   check_site(n, t.site_a, "two-body term");
                   check_site(n, t.site_b, "two-body term");
                   if (t.site_a == t.site_b) throw std::invalid_argument("two-body term: identical sites");
                   if (!valid_axis(t.axis_a) || !valid_axis(t.axis_b)) throw std::invalid_argument("two-body term: bad axis");
                   check_finite(t.lambda, "two-body term");
                 },
                 [&](const ParityHop& t) {
                   check_site(n, t.mu, "hopping term");
                   check_site(n, t.nu, "hopping term");
                   if (t.mu == t.nu) throw std::invalid_argument("hopping term: identical sites");
                   std::set<int> seen{t.mu, t.nu};
                   for (int g : t.string) {
                     check_site(n, g, "hopping term");
                     if (!seen.insert(g).second) throw std::invalid_argument("hopping term: repeated string site");
                   }
                   check_finite(t.lambda, "hopping term");
                 },
             },
             p);
}

int row_major(int r, int c, int M) { return r * M + c; }

void check_lattice(int N, int M, const char* what) {
  if (N < 1 || M < 1 || N * M < 2) throw std::invalid_argument(std::string(what) + ": lattice needs at least 2 sites");
}

}  // namespace

TermCircuit decompose_two_body(const TwoBody& term, double tau) {
  validate_primitive(term, -1);
  TermCircuit c;
  const double phi = term.lambda * tau;
  if (phi == 0.0) return c;
  const int a = term.site_a, b = term.site_b;
  Layer pre, post;
  for (auto& g : basis_change(a, term.axis_a, true)) pre.push_back(g);
  for (auto& g : basis_change(b, term.axis_b, true)) pre.push_back(g);
  for (auto& g : basis_change(a, term.axis_a, false)) post.push_back(g);
  for (auto& g : basis_change(b, term.axis_b, false)) post.push_back(g);
  push_layer(c.layers, pre);
  double half = wrap_pi(-0.5 * phi);
  if (half != 0.0) push_layer(c.layers, {GateOp::phase(a, half), GateOp::phase(b, half)});
  double p = wrap_pi(phi);
  if (p != 0.0) push_layer(c.layers, {GateOp::cphase(a, b, p)});
  push_layer(c.layers, post);
  c.global_phase = fit_global_phase(local_term(term), tau, c.layers);
  return c;
}

TermCircuit decompose_one_body(const OneBody& term, double tau) {
  validate_primitive(term, -1);
  TermCircuit c;
  const double a = term.b * tau;
  if (a == 0.0) return c;
  switch (term.axis) {
    case 'x':
      if (wrap_positive(a) != 0.0) c.layers.push_back({GateOp::rot_x(term.site, wrap_positive(a))});
      break;
    case 'y':
      if (wrap_positive(a) != 0.0) c.layers.push_back({GateOp::rot_y(term.site, wrap_positive(a))});
      break;
    default:
      if (wrap_pi(a) != 0.0) c.layers.push_back({GateOp::phase(term.site, wrap_pi(a))});
      break;
  }
  c.global_phase = fit_global_phase(local_term(term), tau, c.layers);
  return c;
}

TermCircuit decompose_parity_hop(const ParityHop& term, double tau) {
  validate_primitive(term, -1);
  TermCircuit c;
  if (term.lambda * tau == 0.0) return c;
  for (int g : term.string) c.layers.push_back({GateOp::cz(term.mu, g)});
  // s+ s- + s- s+ = 2 (xx + yy), and xx commutes with yy.
  for (char ax : {'x', 'y'}) {
    TermCircuit b = decompose_two_body({term.mu, ax, term.nu, ax, -2.0 * term.lambda}, tau);
    for (auto& l : b.layers) c.layers.push_back(std::move(l));
  }
  for (auto it = term.string.rbegin(); it != term.string.rend(); ++it) c.layers.push_back({GateOp::cz(term.mu, *it)});
  c.global_phase = fit_global_phase(local_term(term), tau, c.layers);
  return c;
}

TermCircuit decompose(const Primitive& term, double tau) {
  return std::visit(Overloaded{
                        [&](const OneBody& t) { return decompose_one_body(t, tau); },
                        [&](const TwoBody& t) { return decompose_two_body(t, tau); },
                        [&](const ParityHop& t) { return decompose_parity_hop(t, tau); },
                    },
                    term);
}

LocalTerm local_term(const Primitive& term) {
  return std::visit(Overloaded{
                        [](const OneBody& t) { return one_body_term(t.site, t.axis, t.b); },
                        [](const TwoBody& t) { return two_body_term(t.site_a, t.axis_a, t.site_b, t.axis_b, t.lambda); },
                        [](const ParityHop& t) {
                          Matrix sp = Matrix::Zero(2, 2);
                          sp(1, 0) = 1.0;
                          Matrix sm = sp.transpose();
                          Matrix h = -t.lambda * (Matrix(Eigen::kroneckerProduct(sp, sm)) +
                                                  Matrix(Eigen::kroneckerProduct(sm, sp)));
                          Matrix z = Matrix::Identity(2, 2);
                          z(1, 1) = -1.0;
                          std::vector<int> sites{t.mu, t.nu};
                          for (int g : t.string) {
                            h = Matrix(Eigen::kroneckerProduct(h, z));
                            sites.push_back(g);
                          }
                          return LocalTerm{sites, h};
                        },
                    },
                    term);
}

std::vector<int> term_sites(const Primitive& term) {
  std::vector<int> s = local_term(term).sites;
  std::sort(s.begin(), s.end());
  return s;
}

void TargetHamiltonian::validate() const {
  if (n_qubits < 1) throw std::invalid_argument("target Hamiltonian: register must have at least one qubit");
  if (terms.empty()) throw std::invalid_argument("target Hamiltonian: no terms");
  check_finite(constant, "target Hamiltonian constant");
  expand_terms(*this);
}

std::vector<Primitive> expand_terms(const TargetHamiltonian& H, double* constant) {
  std::vector<Primitive> out;
  double c = H.constant;
  auto need = [&](int q, const char* what) {
    if (q > H.n_qubits) {
      throw std::invalid_argument(std::string(what) + " needs " + std::to_string(q) + " qubits, register has " +
                                  std::to_string(H.n_qubits));
    }
  };
  for (const auto& t : H.terms) {
    std::visit(Overloaded{
                   [&](const OneBody& x) { out.push_back(x); },
                   [&](const TwoBody& x) { out.push_back(x); },
                   [&](const ParityHop& x) { out.push_back(x); },
                   [&](const HubbardSpinless& x) {
                     check_finite(x.lambda, "spinless Hubbard");
                     need(x.N * x.M, "spinless Hubbard");
                     for (const auto& h : jw_spinless(x.N, x.M, x.lambda)) out.push_back(h);
                   },
                   [&](const HubbardSpinful& x) {
                     need(2 * x.N * x.M, "spinful Hubbard");
                     TargetHamiltonian s = jw_spinful(x.N, x.M, x.lambda, x.U);
                     double sc = 0.0;
                     for (const auto& p : expand_terms(s, &sc)) out.push_back(p);
                     c += sc;
                   },
                   [&](const Spin1Chain& x) {
                     need(2 * x.L, "spin-1 chain");
                     TargetHamiltonian s = map_spin1(x);
                     double sc = 0.0;
                     for (const auto& p : expand_terms(s, &sc)) out.push_back(p);
                     c += sc;
                   },
               },
               t);
  }
  for (const auto& p : out) validate_primitive(p, H.n_qubits);
  if (constant) *constant = c;
  return out;
}

std::vector<Layer> TrotterPlan::all_layers() const {
  std::vector<Layer> out;
  out.reserve(layers.size() * static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) out.insert(out.end(), layers.begin(), layers.end());
  return out;
}

std::vector<LocalTerm> TrotterPlan::local_terms() const {
  std::vector<LocalTerm> out;
  for (const auto& t : terms) out.push_back(local_term(t));
  return out;
}

TrotterPlan trotterize(const TargetHamiltonian& H, double t, int n, const TrotterOptions& options) {
  if (n < 1) throw std::invalid_argument("trotterize: n must be >= 1");
  if (!std::isfinite(t)) throw std::invalid_argument("trotterize: t must be finite");
  H.validate();
  double constant = 0.0;
  std::vector<Primitive> prims = expand_terms(H, &constant);

  auto is_one_body = [](const Primitive& p) { return std::holds_alternative<OneBody>(p); };
  std::vector<Primitive> multi, single;
  for (auto& p : prims) (is_one_body(p) ? single : multi).push_back(p);
  if (options.even_odd) {
    auto parity = [](const Primitive& p) { return term_sites(p).front() % 2; };
    std::stable_sort(multi.begin(), multi.end(),
                     [&](const Primitive& a, const Primitive& b) { return parity(a) < parity(b); });
  }
  TrotterPlan plan;
  plan.n_qubits = H.n_qubits;
  plan.n = n;
  plan.tau = t / n;
  plan.requires_triplet_init = H.requires_triplet_init;
  if (options.one_body_last) {
    plan.terms = multi;
    plan.terms.insert(plan.terms.end(), single.begin(), single.end());
  } else {
    plan.terms = single;
    plan.terms.insert(plan.terms.end(), multi.begin(), multi.end());
  }
  plan.provenance.resize(plan.terms.size());
  // The constant contributes exp(-i c tau) per step.
  plan.step_phase = -constant * plan.tau;

  auto footprint = [&](const Primitive& p) {
    std::vector<int> s = term_sites(p);
    if (options.interval_footprint) {
      std::vector<int> r;
      for (int q = s.front(); q <= s.back(); ++q) r.push_back(q);
      return r;
    }
    return s;
  };

  size_t k = 0;
  while (k < plan.terms.size()) {
    // Consecutive terms on disjoint footprints commute and run in parallel.
    std::set<int> used;
    std::vector<size_t> group;
    while (k < plan.terms.size()) {
      std::vector<int> f = footprint(plan.terms[k]);
      bool clash = std::any_of(f.begin(), f.end(), [&](int q) { return used.count(q) > 0; });
      if (clash) break;
      used.insert(f.begin(), f.end());
      group.push_back(k++);
    }
    std::vector<TermCircuit> circuits;
    size_t depth = 0;
    for (size_t idx : group) {
      circuits.push_back(decompose(plan.terms[idx], plan.tau));
      plan.step_phase += circuits.back().global_phase;
      depth = std::max(depth, circuits.back().layers.size());
    }
    for (size_t l = 0; l < depth; ++l) {
      Layer layer;
      for (size_t g = 0; g < group.size(); ++g) {
        if (l >= circuits[g].layers.size()) continue;
        const Layer& part = circuits[g].layers[l];
        layer.insert(layer.end(), part.begin(), part.end());
        plan.provenance[group[g]].push_back(plan.layers.size());
      }
      plan.layers.push_back(std::move(layer));
    }
  }
  return plan;
}

TargetHamiltonian map_spin1(const Spin1Chain& chain) {
  if (chain.L < 1) throw std::invalid_argument("spin-1 chain: L must be >= 1");
  check_finite(chain.lambda, "spin-1 chain");
  check_finite(chain.D, "spin-1 chain");
  check_finite(chain.E, "spin-1 chain");
  TargetHamiltonian h;
  h.n_qubits = 2 * chain.L;
  h.requires_triplet_init = true;
  for (int i = 0; i < chain.L; ++i) {
    const int A = 2 * i, B = 2 * i + 1;
    if (chain.D != 0.0) {
      h.terms.push_back(TwoBody{A, 'z', B, 'z', 2.0 * chain.D});
      h.constant += 0.5 * chain.D;
    }
    if (chain.E != 0.0) {
      h.terms.push_back(TwoBody{A, 'x', B, 'x', 2.0 * chain.E});
      h.terms.push_back(TwoBody{A, 'y', B, 'y', -2.0 * chain.E});
    }
  }
  if (chain.lambda != 0.0) {
    for (int i = 0; i + 1 < chain.L; ++i) {
      for (int a : {2 * i, 2 * i + 1}) {
        for (int b : {2 * i + 2, 2 * i + 3}) {
          for (char ax : {'x', 'y', 'z'}) h.terms.push_back(TwoBody{a, ax, b, ax, chain.lambda});
        }
      }
    }
  }
  return h;
}

std::vector<ParityHop> jw_spinless(int N, int M, double lambda) {
  check_lattice(N, M, "jw_spinless");
  std::vector<ParityHop> out;
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < M; ++c) {
      const int mu = row_major(r, c, M);
      if (c + 1 < M) out.push_back({mu, mu + 1, {}, lambda});
      if (r + 1 < N) {
        ParityHop h{mu, mu + M, {}, lambda};
        for (int g = mu + 1; g < mu + M; ++g) h.string.push_back(g);
        out.push_back(h);
      }
    }
  }
  return out;
}

TargetHamiltonian jw_spinful(int N, int M, double lambda, double U) {
  check_lattice(N, M, "jw_spinful");
  check_finite(lambda, "jw_spinful");
  check_finite(U, "jw_spinful");
  TargetHamiltonian h;
  h.n_qubits = 2 * N * M;
  for (int s = 0; s < 2; ++s) {
    for (const auto& hop : jw_spinless(N, M, lambda)) {
      // Strings run over the same species only.
      ParityHop q{2 * hop.mu + s, 2 * hop.nu + s, {}, lambda};
      for (int g : hop.string) q.string.push_back(2 * g + s);
      h.terms.push_back(q);
    }
  }
  if (U != 0.0) {
    for (int mu = 0; mu < N * M; ++mu) {
      h.terms.push_back(TwoBody{2 * mu, 'z', 2 * mu + 1, 'z', U});
      h.terms.push_back(OneBody{2 * mu, 'z', 0.5 * U});
      h.terms.push_back(OneBody{2 * mu + 1, 'z', 0.5 * U});
      h.constant += 0.25 * U;
    }
  }
  return h;
}

TargetHamiltonian tim_hamiltonian(int n_sites, double lambda, double b) {
  if (n_sites < 1) throw std::invalid_argument("tim_hamiltonian: need at least one site");
  TargetHamiltonian h;
  h.n_qubits = n_sites;
  for (int i = 0; i + 1 < n_sites; ++i) h.terms.push_back(TwoBody{i, 'z', i + 1, 'z', lambda});
  for (int i = 0; i < n_sites; ++i) h.terms.push_back(OneBody{i, 'x', b});
  return h;
}

TargetHamiltonian xy_hamiltonian(double lambda) {
  TargetHamiltonian h;
  h.n_qubits = 2;
  h.terms.push_back(TwoBody{0, 'x', 1, 'x', lambda});
  h.terms.push_back(TwoBody{0, 'y', 1, 'y', lambda});
  return h;
}

Matrix target_matrix(const TargetHamiltonian& H) {
  double c = 0.0;
  std::vector<Primitive> prims = expand_terms(H, &c);
  std::vector<LocalTerm> terms;
  for (const auto& p : prims) terms.push_back(local_term(p));
  const Eigen::Index d = Eigen::Index{1} << H.n_qubits;
  return sum_terms(H.n_qubits, terms) + c * Matrix::Identity(d, d);
}

namespace {

char axis_from_json(const nlohmann::json& v) {
  std::string s = v.get<std::string>();
  if (s.size() != 1 || !valid_axis(s[0])) throw std::invalid_argument("hamiltonian: bad axis '" + s + "'");
  return s[0];
}

int required_qubits(const Term& t) {
  return std::visit(Overloaded{
                        [](const OneBody& x) { return x.site + 1; },
                        [](const TwoBody& x) { return std::max(x.site_a, x.site_b) + 1; },
                        [](const ParityHop& x) {
                          int m = std::max(x.mu, x.nu);
                          for (int g : x.string) m = std::max(m, g);
                          return m + 1;
                        },
                        [](const HubbardSpinless& x) { return x.N * x.M; },
                        [](const HubbardSpinful& x) { return 2 * x.N * x.M; },
                        [](const Spin1Chain& x) { return 2 * x.L; },
                    },
                    t);
}

}  // namespace

nlohmann::json hamiltonian_to_json(const TargetHamiltonian& H) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : H.terms) {
    terms.push_back(std::visit(
        Overloaded{
            [](const OneBody& x) -> nlohmann::json {
              return {{"type", "one_body"}, {"site", x.site}, {"axis", std::string(1, x.axis)}, {"coeff", x.b}};
            },
            [](const TwoBody& x) -> nlohmann::json {
              return {{"type", "two_body"},
                      {"sites", {x.site_a, x.site_b}},
                      {"axes", std::string{x.axis_a, x.axis_b}},
                      {"coeff", x.lambda}};
            },
            [](const ParityHop& x) -> nlohmann::json {
              return {{"type", "parity_hop"}, {"mu", x.mu}, {"nu", x.nu}, {"string", x.string}, {"coeff", x.lambda}};
            },
            [](const HubbardSpinless& x) -> nlohmann::json {
              return {{"type", "hubbard_spinless"}, {"N", x.N}, {"M", x.M}, {"lambda", x.lambda}};
            },
            [](const HubbardSpinful& x) -> nlohmann::json {
              return {{"type", "hubbard_spinful"}, {"N", x.N}, {"M", x.M}, {"lambda", x.lambda}, {"U", x.U}};
            },
            [](const Spin1Chain& x) -> nlohmann::json {
              return {{"type", "spin1_chain"}, {"L", x.L}, {"lambda", x.lambda}, {"D", x.D}, {"E", x.E}};
            },
        },
        t));
  }
  return {{"n_qubits", H.n_qubits}, {"constant", H.constant}, {"terms", terms}};
}

TargetHamiltonian hamiltonian_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms")) throw std::invalid_argument("hamiltonian: expected an object with 'terms'");
  TargetHamiltonian H;
  H.constant = j.value("constant", 0.0);
  int need = 0;
  for (const auto& e : j.at("terms")) {
    std::string type = e.at("type").get<std::string>();
    Term t;
    if (type == "one_body") {
      t = OneBody{e.at("site").get<int>(), axis_from_json(e.at("axis")), e.at("coeff").get<double>()};
    } else if (type == "two_body") {
      auto sites = e.at("sites").get<std::vector<int>>();
      std::string axes = e.at("axes").get<std::string>();
      if (sites.size() != 2 || axes.size() != 2) throw std::invalid_argument("hamiltonian: two_body needs 2 sites and 2 axes");
      t = TwoBody{sites[0], axis_from_json(std::string(1, axes[0])), sites[1], axis_from_json(std::string(1, axes[1])),
                  e.at("coeff").get<double>()};
    } else if (type == "parity_hop") {
      t = ParityHop{e.at("mu").get<int>(), e.at("nu").get<int>(), e.value("string", std::vector<int>{}),
                    e.at("coeff").get<double>()};
    } else if (type == "hubbard_spinless") {
      t = HubbardSpinless{e.at("N").get<int>(), e.at("M").get<int>(), e.at("lambda").get<double>()};
    } else if (type == "hubbard_spinful") {
      t = HubbardSpinful{e.at("N").get<int>(), e.at("M").get<int>(), e.at("lambda").get<double>(),
                         e.value("U", 0.0)};
    } else if (type == "spin1_chain") {
      t = Spin1Chain{e.at("L").get<int>(), e.value("lambda", 0.0), e.value("D", 0.0), e.value("E", 0.0)};
      H.requires_triplet_init = true;
    } else {
      throw std::invalid_argument("hamiltonian: unknown term type '" + type + "'");
    }
    need = std::max(need, required_qubits(t));
    H.terms.push_back(t);
  }
  H.n_qubits = j.value("n_qubits", need);
  H.validate();
  return H;
}

nlohmann::json plan_to_json(const TrotterPlan& plan) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : plan.layers) layers.push_back(gates_to_json(l));
  return {{"n_qubits", plan.n_qubits},
          {"n", plan.n},
          {"tau", plan.tau},
          {"step_phase", plan.step_phase},
          {"requires_triplet_init", plan.requires_triplet_init},
          {"layers", layers}};
}

}  // namespace hybridqs
