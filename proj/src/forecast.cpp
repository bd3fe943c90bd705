#include "mgems/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgems {

double KrrModel::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return std::exp(-(a - b).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

double KrrModel::predict_increment(std::span<const double> window, double t_norm) const {
    if (static_cast<int>(window.size()) != lag)
        throw ForecastError("window length " + std::to_string(window.size()) +
                            " does not match lag " + std::to_string(lag));
    Eigen::VectorXd x(lag + 1);
    for (int i = 0; i < lag; ++i) x[i] = window[i];
    x[lag] = t_norm;
    double acc = 0.0;
    for (int i = 0; i < inputs.rows(); ++i)
        acc += dual_weights[i] * kernel(inputs.row(i).transpose(), x);
    return acc;
}

KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double sigma, double lambda,
                 int lag) {
    if (X.rows() < 1) throw ForecastError("need at least one sample");
    if (X.rows() != y.size()) throw ForecastError("sample/label count mismatch");
    if (sigma <= 0) throw ForecastError("bandwidth must be positive");
    if (lambda < 0) throw ForecastError("regularization must be nonnegative");
    if (X.cols() != lag + 1) throw ForecastError("input width must be lag + 1");

    KrrModel m;
    m.bandwidth = sigma;
    m.regularization = lambda;
    m.lag = lag;

    // Exact duplicate samples (same window, timestamp, and label) carry no
    // information and make the Gram matrix singular at small lambda; keep the
    // first occurrence. Conflicting duplicates are left in and surface below
    // as a singular system when lambda = 0.
    std::vector<int> keep;
    for (int i = 0; i < X.rows(); ++i) {
        bool dup = false;
        for (int j : keep) {
            if ((X.row(i) - X.row(j)).cwiseAbs().maxCoeff() == 0.0 && y[i] == y[j]) {
                dup = true;
                break;
            }
        }
        if (!dup) keep.push_back(i);
    }
    m.inputs.resize(keep.size(), X.cols());
    Eigen::VectorXd labels(keep.size());
    for (size_t r = 0; r < keep.size(); ++r) {
        m.inputs.row(r) = X.row(keep[r]);
        labels[r] = y[keep[r]];
    }

    const int n = static_cast<int>(m.inputs.rows());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = m.kernel(m.inputs.row(i).transpose(), m.inputs.row(j).transpose());
            K(i, j) = v;
            K(j, i) = v;
        }
    K.diagonal().array() += lambda;

    m.dual_weights = K.ldlt().solve(labels);
    double resid = (K * m.dual_weights - labels).norm();
    if (!(resid <= 1e-10 * std::max(1.0, labels.norm()))) {
        // LDLT can lose accuracy on nearly singular Gram matrices; retry with
        // full pivoting before giving up.
        m.dual_weights = K.fullPivLu().solve(labels);
        resid = (K * m.dual_weights - labels).norm();
        if (!(resid <= 1e-8 * std::max(1.0, labels.norm())))
            throw ForecastError("singular kernel system (duplicate inputs with lambda = 0?)");
    }
    return m;
}

void krr_samples_from_days(const std::vector<Eigen::VectorXd>& days, int lag, Eigen::MatrixXd& X,
                           Eigen::VectorXd& y) {
    if (days.empty()) throw ForecastError("no historical days");
    const int steps = static_cast<int>(days.front().size());
    int count = 0;
    for (const auto& d : days) {
        if (d.size() != steps) throw ForecastError("historical day length mismatch");
        count += std::max(0, steps - lag);
    }
    X.resize(count, lag + 1);
    y.resize(count);
    int r = 0;
    for (const auto& d : days) {
        for (int n = lag - 1; n + 1 < steps; ++n) {
            for (int i = 0; i < lag; ++i) X(r, i) = d[n - lag + 1 + i];
            X(r, lag) = static_cast<double>(n) / steps;
            y[r] = d[n + 1] - d[n];
            ++r;
        }
    }
}

int ProfileDictionary::nearest(double value, int step) const {
    int best = 0;
    double best_dist = std::abs(value - profiles(0, step));
    for (int i = 1; i < size(); ++i) {
        const double dist = std::abs(value - profiles(i, step));
        if (dist < best_dist) {
            best = i;
            best_dist = dist;
        }
    }
    return best;
}

ProfileDictionary bell_dictionary(int steps_per_day, int n_profiles, double width_hours) {
    ProfileDictionary dict;
    dict.profiles.resize(n_profiles, steps_per_day);
    const double hours_per_step = 24.0 / steps_per_day;
    for (int i = 0; i < n_profiles; ++i) {
        const double peak = static_cast<double>(i + 1) / n_profiles;
        for (int s = 0; s < steps_per_day; ++s) {
            const double h = s * hours_per_step;
            double v = peak * std::exp(-(h - 12.0) * (h - 12.0) / (2.0 * width_hours * width_hours));
            if (v < 1e-4) v = 0.0;
            dict.profiles(i, s) = v;
        }
    }
    return dict;
}

double solar_forecast_step(double krr_next, const ProfileDictionary& dict, double previous_value,
                           int step) {
    if (dict.size() < 1) throw ForecastError("empty dictionary");
    const int n = ((step % dict.steps()) + dict.steps()) % dict.steps();
    const int i_star = dict.nearest(previous_value, n);
    const int next = (n + 1) % dict.steps();
    const double out = 0.5 * (krr_next + dict.profiles(i_star, next));
    return std::max(out, 0.0);
}

std::vector<double> rollout(const KrrModel& model, std::span<const double> window, int start_step,
                            int n_steps, int steps_per_day, const RolloutOptions& opt) {
    if (static_cast<int>(window.size()) != model.lag)
        throw ForecastError("rollout window length must equal lag");
    std::vector<double> buf(window.begin(), window.end());
    std::vector<double> out;
    out.reserve(n_steps);
    double value = buf.back();
    int step = start_step;
    for (int k = 0; k < n_steps; ++k) {
        const double t_norm = static_cast<double>(((step % steps_per_day) + steps_per_day) %
                                                  steps_per_day) /
                              steps_per_day;
        const double inc = model.predict_increment(std::span<const double>(buf), t_norm);
        double next = value + inc;
        if (opt.dictionary_assisted) next = solar_forecast_step(next, *opt.dict, value, step);
        if (opt.clip_nonnegative) next = std::max(next, 0.0);
        out.push_back(next);
        buf.erase(buf.begin());
        buf.push_back(next);
        value = next;
        ++step;
    }
    return out;
}

std::vector<double> base_load_rollout(const KrrModel& model, std::span<const double> window,
                                      int start_step, int n_pre, int steps_per_day) {
    return rollout(model, window, start_step, n_pre, steps_per_day, {});
}

double price_sensitivity(double elasticity, double base_load_pu, double tariff) {
    if (tariff <= 0.0) throw ForecastError("tariff must be positive");
    return elasticity * base_load_pu / tariff;
}

double msms_score(const std::vector<Eigen::VectorXd>& days, double sigma, double lambda,
                  const MsmsConfig& cfg, int lag) {
    const int n_days = static_cast<int>(days.size());
    if (n_days < 2) throw ForecastError("need at least two historical days for MSMS folds");
    const int steps = static_cast<int>(days.front().size());

    double fold_sum = 0.0;
    for (int v = 0; v < cfg.folds; ++v) {
        const int test_day = v % n_days;
        std::vector<Eigen::VectorXd> train;
        for (int d = 0; d < n_days; ++d)
            if (d != test_day) train.push_back(days[d]);
        Eigen::MatrixXd X;
        Eigen::VectorXd y;
        krr_samples_from_days(train, lag, X, y);
        KrrModel model;
        try {
            model = fit_krr(X, y, sigma, lambda, lag);
        } catch (const ForecastError&) {
            // Unfittable candidate (singular at this lambda): infinitely bad.
            return std::numeric_limits<double>::infinity();
        }

        const Eigen::VectorXd& test = days[test_day];
        double start_sum = 0.0;
        int starts_used = 0;
        for (int s = 0; s < cfg.starts; ++s) {
            // Start positions evenly spaced, clamped so the window and the
            // rollout horizon stay inside the day.
            int pos = lag - 1 + (s * steps) / cfg.starts;
            pos = std::min(pos, steps - 1 - cfg.steps);
            if (pos < lag - 1) continue;
            std::vector<double> window(test.data() + pos - lag + 1, test.data() + pos + 1);
            const auto traj = rollout(model, window, pos, cfg.steps, steps);
            double err = 0.0;
            int used = 0;
            for (int k = 0; k < cfg.steps; ++k) {
                const double truth = test[pos + 1 + k];
                if (std::abs(truth) < cfg.skip_below) continue;
                const double rel = (truth - traj[k]) / truth;
                err += rel * rel;
                ++used;
            }
            if (used > 0) {
                start_sum += err / used;
                ++starts_used;
            }
        }
        if (starts_used > 0) fold_sum += start_sum / starts_used;
    }
    return fold_sum / cfg.folds;
}

MsmsResult msms_tune(const std::vector<Eigen::VectorXd>& days, std::span<const double> sigmas,
                     std::span<const double> lambdas, const MsmsConfig& cfg, int lag) {
    if (sigmas.empty() || lambdas.empty()) throw ForecastError("empty hyperparameter grid");
    MsmsResult best;
    bool first = true;
    for (double sigma : sigmas) {
        for (double lambda : lambdas) {
            const double score = msms_score(days, sigma, lambda, cfg, lag);
            if (first || score < best.score) {
                best = {sigma, lambda, score};
                first = false;
            }
        }
    }
    return best;
}

}  // namespace mgems
