#pragma once

#include <Eigen/Dense>

#include "ccmv/exec.hpp"

namespace ccmv::kernels {

/// Column means of a T x n sample.
Eigen::VectorXd column_means(const Eigen::MatrixXd& values);

/// Sample covariance with denominator T-1. Each entry (i, j) is accumulated
/// in row order by exactly one thread, so the serial and parallel paths agree
/// bit for bit and the result is exactly symmetric.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& values, const Eigen::VectorXd& means,
                                  Exec exec = Exec::Serial);

}  // namespace ccmv::kernels
