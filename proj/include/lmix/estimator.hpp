#pragma once

#include <Eigen/Dense>

namespace lmix {

struct EstimatorConfig {
  double lambda = 1.0;  // ridge
  double delta = 0.1;   // failure probability
  double bound = 1.0;   // B, norm bound on theta_h
  int horizon = 1;
  int dim = 1;

  // Throws ContractViolation unless lambda > 0, 0 < delta < 1, B >= 1, H, d >= 1.
  void check() const;
};

// Confidence radii for episode k >= 1:
//   beta_hat   = 8 sqrt(d log(1+k/lambda) log(4k^2H/delta)) + 4 sqrt(d) log(4k^2H/delta) + sqrt(lambda) B
//   beta_bar   = 8 d sqrt(log(1+k/lambda) log(4k^2H/delta)) + 4 sqrt(d) log(4k^2H/delta) + sqrt(lambda) B
//   beta_tilde = 8 H^2 sqrt(d log(1+kH^4/(d lambda)) log(4k^2H/delta)) + 4 H^2 log(4k^2H/delta)
//                + sqrt(lambda) B
double beta_hat(const EstimatorConfig& cfg, int k);
double beta_bar(const EstimatorConfig& cfg, int k);
double beta_tilde(const EstimatorConfig& cfg, int k);

// [<phi_{V^2}, theta_tilde>]_[0,H^2] - ([<phi_V, theta_hat>]_[0,H])^2 for given parameters.
double clipped_variance_estimate(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_tilde,
                                 const Eigen::VectorXd& phi_v, const Eigen::VectorXd& phi_v2,
                                 int horizon);

// Weighted ridge regression state for one stage.
//
// The "hat" regression fits E[V(s')] from phi_V with weights 1/sigma_bar^2; the
// "tilde" regression fits E[V^2(s')] from phi_{V^2} without weights. Both
// Gram matrices start at lambda I and are refactored (Cholesky) after every
// update, so the fitted parameters always reflect the current data.
class StageEstimator {
 public:
  explicit StageEstimator(const EstimatorConfig& cfg);

  const EstimatorConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& gram_hat() const { return gram_hat_; }
  const Eigen::VectorXd& resp_hat() const { return resp_hat_; }
  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  const Eigen::MatrixXd& gram_tilde() const { return gram_tilde_; }
  const Eigen::VectorXd& resp_tilde() const { return resp_tilde_; }
  const Eigen::VectorXd& theta_tilde() const { return theta_tilde_; }
  int samples() const { return samples_; }

  // ||Sigma^{-1/2} x||_2 = sqrt(x' Sigma^{-1} x).
  double hat_inverse_norm(const Eigen::VectorXd& x) const;
  double tilde_inverse_norm(const Eigen::VectorXd& x) const;

  // [<phi_{V^2}, theta_tilde>]_[0,H^2] - ([<phi_V, theta_hat>]_[0,H])^2. May be negative.
  double estimated_variance(const Eigen::VectorXd& phi_v, const Eigen::VectorXd& phi_v2) const;

  // E = min(beta_tilde_k ||phi_{V^2}||_{Sigma_tilde^-1}, H^2)
  //   + min(2 H beta_bar_k ||phi_V||_{Sigma_hat^-1}, H^2), in [0, 2H^2].
  double bonus(int k, const Eigen::VectorXd& phi_v, const Eigen::VectorXd& phi_v2) const;

  // sqrt(max(H^2/d, estimated_var + bonus)).
  double sigma_bar(double estimated_var, double bonus) const;

  // beta_hat_k ||phi||_{Sigma_hat^-1}.
  double confidence_width(int k, const Eigen::VectorXd& phi) const;

  // ||Sigma_hat^{1/2} (theta - theta_hat)||_2; theta lies in the confidence
  // ellipsoid of episode k when this is at most beta_hat(k).
  double ellipsoid_distance(const Eigen::VectorXd& theta) const;

  // Sigma_hat += phi_v phi_v' / sigma^2, b_hat += phi_v target_v / sigma^2,
  // Sigma_tilde += phi_v2 phi_v2', b_tilde += phi_v2 target_v2. Requires
  // sigma >= H/sqrt(d), target_v in [0,H] and target_v2 in [0,H^2].
  void rank1_update(const Eigen::VectorXd& phi_v, double target_v, const Eigen::VectorXd& phi_v2,
                    double target_v2, double sigma);

  // Unit-weight update of the hat regression only; the tilde regression is left untouched.
  void unit_weight_update(const Eigen::VectorXd& phi_v, double target_v);

 private:
  void refresh_hat();
  void refresh_tilde();
  void check_vector(const Eigen::VectorXd& x) const;

  EstimatorConfig cfg_;
  Eigen::MatrixXd gram_hat_;
  Eigen::VectorXd resp_hat_;
  Eigen::VectorXd theta_hat_;
  Eigen::MatrixXd gram_tilde_;
  Eigen::VectorXd resp_tilde_;
  Eigen::VectorXd theta_tilde_;
  Eigen::LLT<Eigen::MatrixXd> hat_factor_;
  Eigen::LLT<Eigen::MatrixXd> tilde_factor_;
  int samples_ = 0;
};

}  // namespace lmix
