#include "ccmv/kernels.hpp"

namespace ccmv::kernels {

Eigen::VectorXd column_means(const Eigen::MatrixXd& values) {
  const Eigen::Index T = values.rows();
  Eigen::VectorXd means(values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) s += values(t, j);
    means(j) = s / static_cast<double>(T);
  }
  return means;
}

namespace {

inline double centered_dot(const Eigen::MatrixXd& values, const Eigen::VectorXd& means,
                           Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < values.rows(); ++t)
    s += (values(t, i) - means(i)) * (values(t, j) - means(j));
  return s;
}

}  // namespace

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& values, const Eigen::VectorXd& means,
                                  Exec exec) {
  const Eigen::Index n = values.cols();
  const double denom = static_cast<double>(values.rows() - 1);
  Eigen::MatrixXd cov(n, n);

  if (exec == Exec::Serial) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double c = centered_dot(values, means, i, j) / denom;
        cov(i, j) = c;
        cov(j, i) = c;
      }
    }
    return cov;
  }

  // Row i costs i+1 dot products; dynamic scheduling evens out the triangle.
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = centered_dot(values, means, i, j) / denom;
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

}  // namespace ccmv::kernels
