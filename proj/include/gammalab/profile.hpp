#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gammalab {

enum class ProfileKind { indicator_step, saturating_power, compact_bump, tabulated };

std::string to_string(ProfileKind kind);

struct AdmissibilityReport {
    double alpha_measured = 0.0;      // smallest admissible growth constant found on [0,1]
    double beta_measured = 0.0;       // measured supremum of phi
    double normalization = 0.0;       // integral of phi(t) t^{-(p+1)}
    bool growth_ok = false;           // phi(t) <= alpha t^{p+1} on [0,1] for the declared alpha
    bool bounded_ok = false;          // phi <= beta for the declared beta
    bool normalized_ok = false;       // |normalization - 1/2| <= 1e-9
    std::optional<std::string> normalization_failure;

    bool passed() const { return growth_ok && bounded_ok && normalized_ok; }
    std::string format() const;
};

// Kernel profile phi: [0,inf) -> [0,inf), phi(0) = 0, bounded, continuous except at
// finitely many points where both one-sided limits exist. At a discontinuity eval()
// returns the left limit, which coincides with the pointwise value of every built-in
// shape (the step indicator is open at its threshold, the bump is closed at its edge).
class PhiProfile {
public:
    static PhiProfile indicator_step(double p, double scale = 1.0);
    static PhiProfile saturating_power(double p, double scale = 1.0);
    static PhiProfile compact_bump(double p, double scale = 1.0);
    // piecewise-linear samples; a discontinuity at t is declared by two consecutive
    // samples with equal t (left value first); constant beyond the last sample
    static PhiProfile tabulated(double p, std::vector<double> ts, std::vector<double> vs,
                                std::vector<double> declared_jumps, double scale = 1.0);
    static PhiProfile load_tabulated(const std::string& path, double p, double scale = 1.0);

    ProfileKind kind() const { return kind_; }
    double p() const { return p_; }
    double scale() const { return scale_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool normalized() const { return normalized_; }
    const std::vector<double>& jump_points() const { return jumps_; }

    double eval(double t) const;
    double operator()(double t) const { return eval(t); }
    // rescaled kernel delta^p phi(t/delta)
    double eval_delta(double t, double delta) const;

    // exact antiderivative A(w) = int_0^w phi
    double antiderivative(double w) const;
    // infimum of phi over [lo, hi] (one-sided limits included at discontinuities);
    // when puncture is given, the value exactly at that point is excluded
    double inf_on(double lo, double hi, std::optional<double> puncture = std::nullopt) const;
    // boundaries of the analytic pieces of phi (jumps and kinks), ascending
    const std::vector<double>& structure_points() const { return structure_; }
    // largest t0 with phi identically zero on [0, t0]
    double zero_threshold() const { return zero_threshold_; }
    // supremum of the support (infinity for kernels with a nonzero tail)
    double support_upper() const { return support_upper_; }
    // constant value of phi beyond the last structure point
    double tail_value() const { return scale_ * tail_; }

    PhiProfile with_scale(double scale) const;
    PhiProfile with_normalized_flag(bool value) const;
    // override the declared admissibility caps checked by verify_conditions
    PhiProfile with_declared_bounds(double alpha, double beta) const;
    std::string describe() const;

private:
    PhiProfile() = default;
    void finalize();
    double base_eval(double t) const;
    double base_antiderivative(double w) const;
    double base_left_limit(double t) const;
    double base_right_limit(double t) const;

    ProfileKind kind_ = ProfileKind::indicator_step;
    double p_ = 1.0;
    double scale_ = 1.0;
    double alpha_ = 1.0;
    double beta_ = 1.0;
    bool normalized_ = false;
    std::vector<double> jumps_;
    std::vector<double> structure_;
    double zero_threshold_ = 0.0;
    double support_upper_ = 0.0;
    double tail_ = 0.0;
    // tabulated data (base shape, before scale)
    std::vector<double> tab_t_;
    std::vector<double> tab_v_;
    std::vector<double> tab_cum_; // int_0^{tab_t_[i]} of the base shape
};

// integral of phi(t) t^{-(p+1)} dt over (0, inf); absolute error <= 1e-9 or throws
double normalization_integral(const PhiProfile& profile);

// rescale so the normalization integral equals 1/2 exactly (alpha, beta follow the scale)
PhiProfile normalize(const PhiProfile& profile);

AdmissibilityReport verify_conditions(const PhiProfile& profile);

} // namespace gammalab
