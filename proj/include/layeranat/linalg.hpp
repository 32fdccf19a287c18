/* Copyright 2026 The layeranat Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "layeranat/error.hpp"
#include "layeranat/tensor.hpp"

namespace layeranat {

using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorXd = Eigen::VectorXd;

// Layer-index feature row [l, l^2, sin(l*pi/N), cos(l*pi/N), 1].
inline Eigen::RowVectorXd layer_features(double l, double total_layers) {
  Eigen::RowVectorXd x(5);
  const double a = l * std::numbers::pi / total_layers;
  x << l, l * l, std::sin(a), std::cos(a), 1.0;
  return x;
}

// Ridge solution B = (X^T X + lambda I')^-1 X^T Y, where I' leaves the last
// (intercept) column unpenalized.
inline MatrixXd ridge_fit(const MatrixXd& X, const MatrixXd& Y, double lambda) {
  if (X.rows() != Y.rows()) {
    throw ShapeError("ridge_fit: design has " + std::to_string(X.rows()) +
                     " rows, targets have " + std::to_string(Y.rows()));
  }
  MatrixXd A = X.transpose() * X;
  for (Eigen::Index i = 0; i + 1 < A.rows(); ++i) A(i, i) += lambda;
  return A.ldlt().solve(X.transpose() * Y);
}

// Row weights h with prediction(x_new) = h * Y for every output column.
// Equivalent to x_new * ridge_fit(X, Y, lambda) without forming B.
inline Eigen::RowVectorXd ridge_prediction_weights(const MatrixXd& X,
                                                   const Eigen::RowVectorXd& x_new,
                                                   double lambda) {
  MatrixXd A = X.transpose() * X;
  for (Eigen::Index i = 0; i + 1 < A.rows(); ++i) A(i, i) += lambda;
  const VectorXd z = A.ldlt().solve(x_new.transpose());
  return (X * z).transpose();
}

// 1 - SSE/SST with SST about the mean of `actual`; nullopt when SST == 0.
inline std::optional<double> r_squared(std::span<const double> predicted,
                                       std::span<const double> actual) {
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) return std::nullopt;
  return 1.0 - sse / sst;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

// Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

inline MatrixXd to_matrix(const Tensor<float>& t) {
  MatrixXd m(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
  for (std::size_t i = 0; i < t.numel(); ++i) m.data()[i] = t[i];
  return m;
}

inline Tensor<float> to_tensor(const MatrixXd& m) {
  Tensor<float> t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(m.data()[i]);
  return t;
}

// Directions from `neighbor`, magnitudes from `original`: U_n diag(S_o) V_n^T,
// both spectra in descending order. Shapes must match.
inline Tensor<float> lowrank_blend(const Tensor<float>& neighbor, const Tensor<float>& original) {
  if (neighbor.shape() != original.shape() || original.rank() != 2) {
    throw ShapeError("lowrank_blend: shapes " + shape_str(neighbor.shape()) + " vs " +
                     shape_str(original.shape()));
  }
  Eigen::BDCSVD<MatrixXd> sn(to_matrix(neighbor), Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::BDCSVD<MatrixXd> so(to_matrix(original), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const MatrixXd out =
      sn.matrixU() * so.singularValues().asDiagonal() * sn.matrixV().transpose();
  return to_tensor(out);
}

// Explained-variance ratios of the rows of `samples` (observations x
// features), centered by column means.
inline std::vector<double> explained_variance_ratios(const MatrixXd& samples) {
  const MatrixXd centered = samples.rowwise() - samples.colwise().mean();
  Eigen::BDCSVD<MatrixXd> svd(centered);
  const VectorXd s = svd.singularValues();
  const double total = s.squaredNorm();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out.push_back(total > 0.0 ? s(i) * s(i) / total : 0.0);
  }
  return out;
}

}  // namespace layeranat
