// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Independent reference constructions used by the unit and acceptance
// tests. Nothing here calls into the solver code paths it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double real() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  cd complex() { return {real() * M_SQRT1_2, real() * M_SQRT1_2}; }

  Mat matrix(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex();
    return m;
  }
  Vec vector(Eigen::Index n) { return matrix(n, 1).col(0); }
  Vec unit(Eigen::Index n) {
    Vec v = vector(n);
    return v / v.norm();
  }

  // X X^H + shift I with X of `rank` columns.
  Mat psd(Eigen::Index n, Eigen::Index rank, double shift = 0.0) {
    const Mat x = matrix(n, rank);
    Mat m = x * x.adjoint();
    m.diagonal().array() += shift;
    return 0.5 * (m + m.adjoint());
  }

 private:
  std::mt19937_64 eng_;
};

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Explicit (KD x KD) quadratic-form matrices for
//   A_k = I_K (x) (s_k s_k^H + E_k + nr C0),  B_k = A_k - e_k e_k^T (x) s_k s_k^H.
struct Dense {
  std::vector<Mat> A;
  std::vector<Mat> B;
};

inline Dense dense_forms(const Mat& S, const std::vector<Mat>& E, const Mat& C0,
                         double nr) {
  const Eigen::Index K = S.cols();
  const Eigen::Index D = S.rows();
  Dense d;
  for (Eigen::Index k = 0; k < K; ++k) {
    Mat Nk = S.col(k) * S.col(k).adjoint();
    if (!E.empty()) Nk += E[static_cast<std::size_t>(k)];
    const Mat Ak = kron(Mat::Identity(K, K), Nk + nr * C0);
    Mat ek = Mat::Zero(K, K);
    ek(k, k) = 1.0;
    d.A.push_back(Ak);
    d.B.push_back(Ak - kron(ek, S.col(k) * S.col(k).adjoint()));
    (void)D;
  }
  return d;
}

inline double quad(const Mat& M, const Vec& w) { return (w.adjoint() * M * w)(0, 0).real(); }

// A_KKT and B_KKT with lambda_num = lambda_den = 1.
inline Mat a_kkt(const Dense& d, const Vec& w) {
  Mat out = Mat::Zero(d.A[0].rows(), d.A[0].cols());
  for (const Mat& a : d.A) out += a / quad(a, w);
  return out;
}
inline Mat b_kkt(const Dense& d, const Vec& w) {
  Mat out = Mat::Zero(d.B[0].rows(), d.B[0].cols());
  for (const Mat& b : d.B) out += b / quad(b, w);
  return out;
}
inline Vec kkt_apply(const Dense& d, const Vec& w) {
  return b_kkt(d, w).fullPivLu().solve(a_kkt(d, w) * w);
}
inline double sum_se(const Dense& d, const Vec& w) {
  double total = 0.0;
  for (std::size_t k = 0; k < d.A.size(); ++k)
    total += std::log2(quad(d.A[k], w) / quad(d.B[k], w));
  return total;
}

// Term-by-term SINR loop.
inline double sinr(const Mat& F, const Mat& H, Eigen::Index k, double P, double sigma2) {
  cd desired = 0.0;
  for (Eigen::Index n = 0; n < H.rows(); ++n) desired += std::conj(H(n, k)) * F(n, k);
  double interference = 0.0;
  for (Eigen::Index i = 0; i < F.cols(); ++i) {
    if (i == k) continue;
    cd g = 0.0;
    for (Eigen::Index n = 0; n < H.rows(); ++n) g += std::conj(H(n, k)) * F(n, i);
    interference += std::norm(g);
  }
  return std::norm(desired) / (interference + sigma2 / P);
}

inline double sum_se(const Mat& F, const Mat& H, double P, double sigma2) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < H.cols(); ++k) total += std::log2(1.0 + sinr(F, H, k, P, sigma2));
  return total;
}

inline double sum_se_lb(const Mat& F, const Mat& Hh, const std::vector<Mat>& Phi, double P,
                        double sigma2) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < Hh.cols(); ++k) {
    double desired = 0.0;
    double rest = sigma2 / P;
    for (Eigen::Index i = 0; i < F.cols(); ++i) {
      cd g = 0.0;
      for (Eigen::Index n = 0; n < Hh.rows(); ++n) g += std::conj(Hh(n, k)) * F(n, i);
      if (i == k) desired = std::norm(g);
      else rest += std::norm(g);
      rest += (F.col(i).adjoint() * Phi[static_cast<std::size_t>(k)] * F.col(i))(0, 0).real();
    }
    total += std::log2(1.0 + desired / rest);
  }
  return total;
}

inline double rel(const Vec& a, const Vec& b) { return (a - b).norm() / b.norm(); }
inline double rel(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace oracle
