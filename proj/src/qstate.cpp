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

#include "qtomo/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qtomo {

namespace {

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    for (Eigen::Index b = a; b < m.cols(); ++b) {
      if (std::abs(m(a, b) - std::conj(m(b, a))) > tol) return false;
    }
  }
  return true;
}

EigenSystem eig_sorted(const CMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw InvalidStateError("hermitian eigendecomposition failed");
  }
  // Eigen returns ascending order.
  const auto n = herm.rows();
  EigenSystem es{RVector(n), CMatrix(n, n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    es.values[a] = solver.eigenvalues()[n - 1 - a];
    es.vectors.col(a) = solver.eigenvectors().col(n - 1 - a);
  }
  return es;
}

CMatrix sqrt_from_eig(const EigenSystem& es) {
  RVector roots(es.values.size());
  for (Eigen::Index a = 0; a < roots.size(); ++a) {
    roots[a] = std::sqrt(std::max(es.values[a], 0.0));
  }
  return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

CMatrix sigma_yy() {
  // sigma_y (x) sigma_y in the |HH>, |HV>, |VH>, |VV> basis.
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 3) = -1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 0) = -1.0;
  return s;
}

}  // namespace

DensityMatrix::DensityMatrix(const CMatrix& entries) : m_(entries) {
  if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4)) {
    throw InvalidStateError("density matrix must be 2x2 or 4x4");
  }
  if (!m_.allFinite()) throw InvalidStateError("density matrix has non-finite entries");
  if (!is_hermitian(m_, kHermitianTol)) {
    throw InvalidStateError("density matrix is not Hermitian");
  }
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
  if (std::abs(m_.trace().real() - 1.0) > kTraceTol) {
    std::ostringstream msg;
    msg << "density matrix trace " << m_.trace().real() << " differs from 1";
    throw InvalidStateError(msg.str());
  }
  EigenSystem es = eig_sorted(m_);
  const double lowest = es.values[es.values.size() - 1];
  if (lowest < -kPsdTol) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << lowest;
    throw InvalidStateError(msg.str());
  }
  if (lowest < 0.0) {
    es.values = es.values.cwiseMax(0.0);
    es.values /= es.values.sum();
    m_ = es.vectors * es.values.cast<cd>().asDiagonal() * es.vectors.adjoint();
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }
}

DensityMatrix DensityMatrix::pure(const CVector& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw InvalidStateError("zero ket");
  const CVector k = ket / n;
  return DensityMatrix(k * k.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

EigenSystem hermitian_eig(const DensityMatrix& rho) { return eig_sorted(rho.matrix()); }

EigenSystem hermitian_eig(const CMatrix& hermitian) {
  if (!is_hermitian(hermitian, kHermitianTol * std::max(1.0, hermitian.cwiseAbs().maxCoeff()))) {
    throw InvalidStateError("matrix is not Hermitian");
  }
  return eig_sorted(0.5 * (hermitian + hermitian.adjoint()));
}

CMatrix matrix_sqrt_psd(const DensityMatrix& rho) { return sqrt_from_eig(hermitian_eig(rho)); }

CMatrix matrix_sqrt_psd(const CMatrix& psd) {
  const EigenSystem es = hermitian_eig(psd);
  if (es.values[es.values.size() - 1] < -kPsdTol) {
    throw InvalidStateError("matrix is not positive semidefinite");
  }
  return sqrt_from_eig(es);
}

double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho) {
  if (rho0.dim() != rho.dim()) throw ContractError("fidelity: dimension mismatch");
  const CMatrix prod = matrix_sqrt_psd(rho0) * matrix_sqrt_psd(rho);
  const double f = Eigen::JacobiSVD<CMatrix>(prod).singularValues().sum();
  return std::clamp(f, 0.0, 1.0);
}

double bures_distance(const DensityMatrix& rho0, const DensityMatrix& rho) {
  return 2.0 - 2.0 * fidelity(rho0, rho);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  const EigenSystem es = hermitian_eig(rho);
  double s = 0.0;
  for (Eigen::Index a = 0; a < es.values.size(); ++a) {
    const double l = es.values[a];
    if (l > 0.0) s -= l * std::log2(l);
  }
  return std::clamp(s, 0.0, std::log2(static_cast<double>(rho.dim())));
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw ContractError("concurrence requires a two-qubit state");
  const CMatrix yy = sigma_yy();
  const CMatrix flipped = yy * rho.matrix().conjugate() * yy;
  // sqrt(rho) flipped sqrt(rho) is Hermitian and isospectral with rho * flipped.
  const CMatrix root = matrix_sqrt_psd(rho);
  CMatrix r = root * flipped * root;
  r = (0.5 * (r + r.adjoint())).eval();
  const EigenSystem es = eig_sorted(r);
  RVector l(4);
  for (int a = 0; a < 4; ++a) l[a] = std::sqrt(std::max(es.values[a], 0.0));
  return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

double eof_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  if (c == 0.0) return 0.0;
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

double entanglement_of_formation(const DensityMatrix& rho) {
  return eof_from_concurrence(concurrence(rho));
}

StateCharacter characterize(const DensityMatrix& rho) {
  StateCharacter sc;
  sc.entropy_bits = von_neumann_entropy(rho);
  const EigenSystem es = hermitian_eig(rho);
  sc.rank = static_cast<int>((es.values.array() > kRankTol).count());
  if (rho.dim() == 4) {
    sc.concurrence = concurrence(rho);
    sc.eof_bits = eof_from_concurrence(sc.concurrence);
  }
  return sc;
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (int a = 0; a < rho.dim(); ++a) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ii = nlohmann::json::array();
    for (int b = 0; b < rho.dim(); ++b) {
      rr.push_back(rho(a, b).real());
      ii.push_back(rho(a, b).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"dim", rho.dim()}, {"re", re}, {"im", im}};
}

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    if (dim != 2 && dim != 4) throw InvalidStateError("state dim must be 2 or 4");
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != static_cast<std::size_t>(dim) || im.size() != static_cast<std::size_t>(dim)) {
      throw ContractError("state rows do not match dim");
    }
    CMatrix m(dim, dim);
    for (int a = 0; a < dim; ++a) {
      if (re[a].size() != static_cast<std::size_t>(dim) || im[a].size() != static_cast<std::size_t>(dim)) {
        throw ContractError("state columns do not match dim");
      }
      for (int b = 0; b < dim; ++b) m(a, b) = cd(re[a][b].get<double>(), im[a][b].get<double>());
    }
    return DensityMatrix(m);
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed state JSON: ") + e.what());
  }
}

}  // namespace qtomo
