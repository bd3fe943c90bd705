#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

namespace mgems {

struct ForecastError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Gaussian-kernel ridge regression over lag windows plus a normalized
/// timestamp. Inputs are rows of `inputs`; dual weights solve (K + lambda I)
/// w = y.
class KrrModel {
  public:
    Eigen::MatrixXd inputs;  // N_sp x (lag + 1)
    Eigen::VectorXd dual_weights;
    double bandwidth = 1.0;
    double regularization = 0.0;
    int lag = 1;

    /// k(x)' w with x = [window; t_norm]. Window length must equal `lag`.
    double predict_increment(std::span<const double> window, double t_norm) const;

    double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// Fits dual weights for samples (rows of X) with labels y. Throws on a
/// singular system (lambda = 0 with duplicated inputs).
KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double sigma, double lambda,
                 int lag);

/// Builds KRR samples from daily profiles: windows of `lag` consecutive
/// values plus the normalized in-day timestamp, labeled with the next-step
/// increment.
void krr_samples_from_days(const std::vector<Eigen::VectorXd>& days, int lag, Eigen::MatrixXd& X,
                           Eigen::VectorXd& y);

/// Daily anchor profiles on the prediction grid, all values in [0, 1].
struct ProfileDictionary {
    Eigen::MatrixXd profiles;  // N_dict x steps_per_day

    int size() const { return static_cast<int>(profiles.rows()); }
    int steps() const { return static_cast<int>(profiles.cols()); }

    /// Index of the profile whose value at `step` is closest to `value`
    /// (lowest index on ties).
    int nearest(double value, int step) const;
};

/// Gaussian bells centered at solar noon with peak scalings i/n, i = 1..n.
/// Values below 1e-4 are clamped to zero so the night region is exactly flat.
ProfileDictionary bell_dictionary(int steps_per_day, int n_profiles = 8,
                                  double width_hours = 2.8);

/// One dictionary-assisted step: averages the KRR prediction for step n+1
/// with the anchor profile value there, then clips at zero. `step` is the
/// in-day index of the *current* value; indices wrap at the day boundary.
double solar_forecast_step(double krr_next, const ProfileDictionary& dict, double previous_value,
                           int step);

struct RolloutOptions {
    bool dictionary_assisted = false;
    const ProfileDictionary* dict = nullptr;
    bool clip_nonnegative = false;
};

/// Autoregressive rollout of `n_steps` values starting after the given
/// window. `start_step` is the in-day index of the last window element;
/// timestamps wrap daily.
std::vector<double> rollout(const KrrModel& model, std::span<const double> window, int start_step,
                            int n_steps, int steps_per_day, const RolloutOptions& opt = {});

/// Base (zero-incentive) load trajectory; plain rollout without clipping.
std::vector<double> base_load_rollout(const KrrModel& model, std::span<const double> window,
                                      int start_step, int n_pre, int steps_per_day);

/// alpha = elasticity * base_load / tariff. With negative elasticity and
/// negative-injection loads this is nonnegative (injection convention).
double price_sensitivity(double elasticity, double base_load_pu, double tariff);

struct DemandResponseParams {
    // Elasticity per tariff period, indexed by TariffSchedule period order
    // (valley, off-peak, peak); all entries <= 0.
    std::vector<std::array<double, 3>> elasticity_by_type;
    double k_adj = 0.0;
    double epsilon_cap = 0.0;  // pu-h
};

struct MsmsConfig {
    int folds = 3;       // N_v
    int starts = 4;      // N_s, evenly spaced over the test day
    int steps = 6;       // N_k rollout length
    double skip_below = 1e-6;  // relative-error terms with |x_k| below are skipped
};

struct MsmsResult {
    double sigma = 0.0;
    double lambda = 0.0;
    double score = 0.0;
};

/// Deterministic exhaustive search of the multi-start multi-step rollout
/// objective over the candidate grid. Ties keep the earliest grid entry.
MsmsResult msms_tune(const std::vector<Eigen::VectorXd>& days, std::span<const double> sigmas,
                     std::span<const double> lambdas, const MsmsConfig& cfg, int lag);

/// Score of one (sigma, lambda) candidate under the MSMS objective.
double msms_score(const std::vector<Eigen::VectorXd>& days, double sigma, double lambda,
                  const MsmsConfig& cfg, int lag);

/// Horizon forecasts for one optimization: per-source solar, per-load base
/// trajectories (negative injections), and per-load price sensitivities
/// (injection convention, >= 0).
struct ForecastBundle {
    Eigen::MatrixXd solar;      // n_sources x n_pre
    Eigen::MatrixXd base_load;  // n_loads x n_pre
    Eigen::MatrixXd alpha;      // n_loads x n_pre
};

}  // namespace mgems
