// Copyright 2026 The qtomo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qtomo/measure.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qtomo/io.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

namespace {

constexpr double kKetNormTol = 1e-10;

// Off-diagonal (a, b) pairs of the Hermitian coordinate basis, a < b.
constexpr std::array<std::pair<int, int>, 6> kUpperPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

}  // namespace

ProjectorSet::ProjectorSet(std::vector<Projector> projectors) : projectors_(std::move(projectors)) {
  if (projectors_.empty()) throw ContractError("projector set is empty");
  for (const auto& p : projectors_) {
    if (!p.ket.allFinite() || std::abs(p.ket.norm() - 1.0) > kKetNormTol) {
      throw ContractError("projector '" + p.label + "' is not a unit vector");
    }
  }
  const RMatrix a = measurement_design(*this);
  Eigen::JacobiSVD<RMatrix> svd(a);
  const RVector s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > 1e-10 * s[0]) ++rank;
  }
  informationally_complete_ = rank == 16;
}

int ProjectorSet::find(const std::string& label) const {
  for (std::size_t i = 0; i < projectors_.size(); ++i) {
    if (projectors_[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

RMatrix measurement_design(const ProjectorSet& ps) {
  RMatrix a(ps.size(), 16);
  for (int nu = 0; nu < ps.size(); ++nu) {
    const Ket4& m = ps[nu].ket;
    for (int d = 0; d < 4; ++d) a(nu, d) = std::norm(m[d]);
    int col = 4;
    for (auto [i, j] : kUpperPairs) {
      const cd z = std::conj(m[i]) * m[j];
      a(nu, col++) = 2.0 * z.real();
      a(nu, col++) = -2.0 * z.imag();
    }
  }
  return a;
}

CMatrix hermitian_from_coordinates(const RVector& x) {
  if (x.size() != 16) throw ContractError("Hermitian coordinate vector must have 16 entries");
  CMatrix m = CMatrix::Zero(4, 4);
  for (int d = 0; d < 4; ++d) m(d, d) = x[d];
  int col = 4;
  for (auto [i, j] : kUpperPairs) {
    m(i, j) = cd(x[col], x[col + 1]);
    m(j, i) = std::conj(m(i, j));
    col += 2;
  }
  return m;
}

Eigen::Vector2cd polarization(char name) {
  const double s = std::numbers::sqrt2 / 2.0;
  switch (name) {
    case 'H': return {1.0, 0.0};
    case 'V': return {0.0, 1.0};
    case 'D': return {s, s};
    case 'A': return {s, -s};
    case 'L': return {cd(s, 0.0), cd(0.0, s)};
    case 'R': return {cd(s, 0.0), cd(0.0, -s)};
    default: throw ContractError(std::string("unknown polarization '") + name + "'");
  }
}

ProjectorSet default_projectors() {
  static const char* const kLabels[16] = {"HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
                                          "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"};
  std::vector<Projector> out;
  out.reserve(16);
  for (const char* label : kLabels) {
    const Eigen::Vector2cd a = polarization(label[0]);
    const Eigen::Vector2cd b = polarization(label[1]);
    Ket4 ket;
    ket << a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1];
    out.push_back({label, ket});
  }
  return ProjectorSet(std::move(out));
}

std::int64_t CountRecord::total() const {
  std::int64_t s = 0;
  for (auto n : counts) s += n;
  return s;
}

void validate(const CountRecord& rec, const ProjectorSet& ps) {
  if (static_cast<int>(rec.counts.size()) != ps.size()) {
    throw ContractError("count record length does not match projector set");
  }
  for (auto n : rec.counts) {
    if (n < 0) throw ContractError("negative count");
  }
  if (!(rec.t > 0.0) || !std::isfinite(rec.t)) throw ContractError("acquisition time must be positive");
}

RVector expected_counts(const DensityMatrix& rho, double C, double t, const ProjectorSet& ps) {
  if (rho.dim() != 4) throw ContractError("expected_counts requires a two-qubit state");
  if (!(C > 0.0) || !(t > 0.0)) throw ContractError("C and t must be positive");
  RVector m(ps.size());
  for (int nu = 0; nu < ps.size(); ++nu) {
    const Ket4& ket = ps[nu].ket;
    const double p = (ket.adjoint() * rho.matrix() * ket)(0, 0).real();
    if (p < -kPsdTol) throw InvalidStateError("negative projector expectation");
    m[nu] = C * t * std::max(p, 0.0);
  }
  return m;
}

CountRecord sample_counts(const DensityMatrix& rho, double C, double t, const ProjectorSet& ps,
                          std::uint64_t seed) {
  const RVector m = expected_counts(rho, C, t, ps);
  CountRecord rec;
  rec.t = t;
  rec.seed = seed;
  rec.counts.resize(static_cast<std::size_t>(ps.size()));
  for (int nu = 0; nu < ps.size(); ++nu) {
    CounterRng rng(seed, static_cast<std::uint64_t>(nu));
    rec.counts[static_cast<std::size_t>(nu)] = poisson(rng, m[nu]);
  }
  return rec;
}

PoissonLikelihood::PoissonLikelihood(const CountRecord& rec, const ProjectorSet& ps, int k)
    : k_(k), n_params_(param_count(k)), t_(rec.t) {
  validate(rec, ps);
  kets_.reserve(static_cast<std::size_t>(ps.size()));
  counts_.reserve(rec.counts.size());
  for (int nu = 0; nu < ps.size(); ++nu) {
    kets_.push_back(ps[nu].ket);
    const double n = static_cast<double>(rec.counts[static_cast<std::size_t>(nu)]);
    counts_.push_back(n);
    log_factorials_ += std::lgamma(n + 1.0);
  }
}

RVector PoissonLikelihood::rates(std::span<const double> theta) const {
  const Factor t = factor_from_theta(k_, theta);
  RVector m(static_cast<Eigen::Index>(kets_.size()));
  for (std::size_t nu = 0; nu < kets_.size(); ++nu) {
    m[static_cast<Eigen::Index>(nu)] = t_ * (t.adjoint() * kets_[nu]).squaredNorm();
  }
  return m;
}

double PoissonLikelihood::value(std::span<const double> theta) const {
  const Factor t = factor_from_theta(k_, theta);
  double ll = -log_factorials_;
  for (std::size_t nu = 0; nu < kets_.size(); ++nu) {
    const double mu = t_ * (t.adjoint() * kets_[nu]).squaredNorm();
    const double n = counts_[nu];
    ll -= mu;
    if (n > 0.0) ll += n * std::log(std::max(mu, kMuFloor));
  }
  return ll;
}

double PoissonLikelihood::value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
  const Factor t = factor_from_theta(k_, theta);
  std::fill(grad.begin(), grad.end(), 0.0);
  double ll = -log_factorials_;
  for (std::size_t nu = 0; nu < kets_.size(); ++nu) {
    const Ket4& m = kets_[nu];
    const Eigen::Matrix<cd, Eigen::Dynamic, 1, 0, 4, 1> w = t.adjoint() * m;
    const double mu = t_ * w.squaredNorm();
    const double n = counts_[nu];
    ll -= mu;
    double coeff = -1.0;
    if (n > 0.0) {
      if (mu > kMuFloor) {
        ll += n * std::log(mu);
        coeff += n / mu;
      } else {
        ll += n * std::log(kMuFloor);
      }
    }
    // dM/dtheta for entry (r, c): 2 t Re(u conj(m_r) w_c), u = 1 or i.
    const double s = 2.0 * t_ * coeff;
    for (int j = 0; j < k_; ++j) grad[static_cast<std::size_t>(j)] += s * (std::conj(m[j]) * w[j]).real();
    std::size_t idx = static_cast<std::size_t>(k_);
    for (int c = 0; c < k_; ++c) {
      for (int r = c + 1; r < 4; ++r) {
        const cd z = std::conj(m[r]) * w[c];
        grad[idx++] += s * z.real();
        grad[idx++] -= s * z.imag();
      }
    }
  }
  return ll;
}

double log_likelihood(const RankKParams& p, const CountRecord& rec, const ProjectorSet& ps) {
  const PoissonLikelihood lf(rec, ps, p.k());
  return lf.value({p.theta().data(), static_cast<std::size_t>(p.size())});
}

RVector grad_log_likelihood(const RankKParams& p, const CountRecord& rec, const ProjectorSet& ps) {
  const PoissonLikelihood lf(rec, ps, p.k());
  RVector g(p.size());
  lf.value_and_gradient({p.theta().data(), static_cast<std::size_t>(p.size())},
                        {g.data(), static_cast<std::size_t>(g.size())});
  return g;
}

RMatrix rate_jacobian(const RankKParams& p, const ProjectorSet& ps, double t) {
  const int n = p.size();
  RMatrix jac(ps.size(), n);
  for (int i = 0; i < n; ++i) {
    const CMatrix dg = d_gram_d_theta(p, i);
    for (int nu = 0; nu < ps.size(); ++nu) {
      const Ket4& m = ps[nu].ket;
      jac(nu, i) = t * (m.adjoint() * dg * m)(0, 0).real();
    }
  }
  return jac;
}

double poisson_relative_entropy(const RVector& M0, const RVector& M) {
  if (M0.size() != M.size()) throw ContractError("rate vectors differ in length");
  double d = 0.0;
  for (Eigen::Index nu = 0; nu < M0.size(); ++nu) {
    const double a = M0[nu];
    const double b = M[nu];
    if (a < 0.0 || b < 0.0) throw ContractError("Poisson means must be nonnegative");
    if (a == 0.0) {
      d += b;
      continue;
    }
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    d += a * std::log(a / b) - a + b;
  }
  return std::max(d, 0.0);
}

nlohmann::json to_json(const ProjectorSet& ps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : ps.projectors()) {
    std::vector<double> re(4), im(4);
    for (int d = 0; d < 4; ++d) {
      re[static_cast<std::size_t>(d)] = p.ket[d].real();
      im[static_cast<std::size_t>(d)] = p.ket[d].imag();
    }
    arr.push_back({{"label", p.label}, {"re", re}, {"im", im}});
  }
  return {{"projectors", arr}};
}

ProjectorSet projector_set_from_json(const nlohmann::json& j) {
  try {
    std::vector<Projector> out;
    for (const auto& e : j.at("projectors")) {
      const auto re = e.at("re").get<std::vector<double>>();
      const auto im = e.at("im").get<std::vector<double>>();
      if (re.size() != 4 || im.size() != 4) throw ContractError("projector kets must have 4 components");
      Ket4 ket;
      for (std::size_t d = 0; d < 4; ++d) ket[static_cast<Eigen::Index>(d)] = cd(re[d], im[d]);
      out.push_back({e.at("label").get<std::string>(), ket});
    }
    return ProjectorSet(std::move(out));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed projector JSON: ") + e.what());
  }
}

ProjectorSet load_projectors(const std::string& path) { return projector_set_from_json(read_json_file(path)); }

void save_projectors(const std::string& path, const ProjectorSet& ps) {
  write_text_file(path, to_json(ps).dump(2) + "\n");
}

std::string count_sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

void save_counts(const std::string& csv_path, const CountRecord& rec, const ProjectorSet& ps) {
  validate(rec, ps);
  std::ostringstream csv;
  csv << "label,count\n";
  for (int nu = 0; nu < ps.size(); ++nu) csv << ps[nu].label << ',' << rec.counts[static_cast<std::size_t>(nu)] << '\n';
  write_text_file(csv_path, csv.str());
  nlohmann::json meta = {{"t", rec.t}, {"seed", nullptr}};
  if (rec.seed) meta["seed"] = *rec.seed;
  write_text_file(count_sidecar_path(csv_path), meta.dump(2) + "\n");
}

CountRecord load_counts(const std::string& csv_path, const ProjectorSet& ps) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line) || line != "label,count") {
    throw ContractError("count file must start with header 'label,count'");
  }
  CountRecord rec;
  rec.counts.assign(static_cast<std::size_t>(ps.size()), -1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ContractError("malformed count row: " + line);
    const std::string label = line.substr(0, comma);
    const int nu = ps.find(label);
    if (nu < 0) throw ContractError("count label '" + label + "' not in projector set");
    std::int64_t n = 0;
    try {
      std::size_t used = 0;
      n = std::stoll(line.substr(comma + 1), &used);
      if (comma + 1 + used != line.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ContractError("malformed count value: " + line);
    }
    if (rec.counts[static_cast<std::size_t>(nu)] != -1) throw ContractError("duplicate label " + label);
    rec.counts[static_cast<std::size_t>(nu)] = n;
  }
  for (int nu = 0; nu < ps.size(); ++nu) {
    if (rec.counts[static_cast<std::size_t>(nu)] == -1) throw ContractError("missing count for " + ps[nu].label);
  }
  const nlohmann::json meta = read_json_file(count_sidecar_path(csv_path));
  try {
    rec.t = meta.at("t").get<double>();
    if (meta.contains("seed") && !meta.at("seed").is_null()) rec.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed count sidecar: ") + e.what());
  }
  validate(rec, ps);
  return rec;
}

}  // namespace qtomo
