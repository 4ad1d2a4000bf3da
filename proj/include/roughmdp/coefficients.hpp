#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "roughmdp/errors.hpp"

namespace roughmdp::rde {

/// Drift/diffusion evaluators with the derivatives the solvers and the
/// limit-law computations consume.
///
/// Conventions (d = driver dim, e = state dim):
///   b(y)            : e
///   grad_b(y)       : e x e, (i,k) = d b_i / d y_k
///   hess_b(y)       : e matrices e x e, [i](k,l) = d^2 b_i / d y_k d y_l
///   sigma(y)        : e x d
///   grad_sigma(y)   : e matrices e x d, [k] = d sigma / d y_k
///   hess_sigma(y)   : e*e matrices e x d, [k*e+l] = d^2 sigma / d y_k d y_l
///   third_sigma(y)  : e*e*e matrices e x d, [(k*e+l)*e+m]
///
/// Regularity of the supplied functions is the caller's contract; the
/// library only cross-checks derivative consistency on request.
struct CoefficientField {
  int dim_d = 1;
  int dim_e = 1;
  bool finite_difference_derivatives = false;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> b;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> grad_b;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> hess_b;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> sigma;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> grad_sigma;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> hess_sigma;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> third_sigma;
};

/// b(y) = A y + c, sigma constant.
CoefficientField make_linear_field(const Eigen::MatrixXd& a_matrix, const Eigen::VectorXd& c,
                                   const Eigen::MatrixXd& sigma0);

/// b(y) = A y + c, sigma affine in the state:
/// sigma_ij(y) = sigma0_ij + sum_k G[k](i,j) y_k.
CoefficientField make_bilinear_field(const Eigen::MatrixXd& a_matrix, const Eigen::VectorXd& c,
                                     const Eigen::MatrixXd& sigma0,
                                     const std::vector<Eigen::MatrixXd>& g);

/// Bounded smooth field: b(y) = A tanh.(y), sigma_ij(y) = sigma0_ij + D_ij tanh(y_i).
CoefficientField make_tanh_field(const Eigen::MatrixXd& a_matrix, const Eigen::MatrixXd& sigma0,
                                 const Eigen::MatrixXd& d_matrix);

/// Wrap plain (b, sigma) evaluators; all derivatives come from central
/// finite differences (step 1e-5 at first order, wider at higher orders to
/// stay above the rounding floor). The field is flagged so reports can
/// distinguish it from closed-form coefficients.
CoefficientField
with_finite_differences(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> b,
                        std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> sigma, int dim_d,
                        int dim_e);

/// Max relative inconsistency between each supplied derivative and a central
/// difference of the level below, over the probe points. Used by tests to
/// enforce the < 1e-4 consistency contract.
double derivative_consistency(const CoefficientField& f,
                              const std::vector<Eigen::VectorXd>& probes);

} // namespace roughmdp::rde
