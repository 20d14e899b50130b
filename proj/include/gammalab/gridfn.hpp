#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace gammalab {

// Jumps below this magnitude are treated as floating-point noise and snapped to
// continuity wherever the finite/+inf classification depends on them.
inline constexpr double kJumpSnap = 1e-12;

struct Interval {
    double a = 0.0;
    double b = 1.0;
    bool truncation_of_line = false; // true when this window stands in for the whole line

    double length() const { return b - a; }
};

Interval make_interval(double a, double b, bool truncation_of_line = false);

// One-dimensional piecewise-linear function with optional jump discontinuities.
//
// Breakpoints x_0 < ... < x_N carry a left and a right value; the function is affine on
// each open segment (value right_[i] at the segment start, left_[i+1] at its end).
// Immutable after construction; every operation returns a new value.
class PiecewiseLinearFn {
public:
    PiecewiseLinearFn(std::vector<double> xs, std::vector<double> left, std::vector<double> right);

    // continuous function through the given (x, value) nodes
    static PiecewiseLinearFn continuous(std::vector<double> xs, std::vector<double> values);

    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& left_values() const { return left_; }
    const std::vector<double>& right_values() const { return right_; }

    std::size_t breakpoint_count() const { return xs_.size(); }
    std::size_t segment_count() const { return xs_.size() - 1; }
    double x_lo() const { return xs_.front(); }
    double x_hi() const { return xs_.back(); }
    Interval domain() const { return {xs_.front(), xs_.back(), false}; }

    // right-continuous at breakpoints; clamped to boundary values outside the domain
    double eval(double x) const;
    // limit from the left (equals eval(x) away from breakpoints)
    double eval_left(double x) const;

    double segment_start_value(std::size_t i) const { return right_[i]; }
    double segment_end_value(std::size_t i) const { return left_[i + 1]; }
    double segment_slope(std::size_t i) const;

    double jump(std::size_t i) const { return right_[i] - left_[i]; }
    // snapped jump: exact zero below the noise threshold
    double effective_jump(std::size_t i) const;
    bool is_continuous() const;

    PiecewiseLinearFn restricted(const Interval& window) const;
    PiecewiseLinearFn shift_values(double c) const;
    PiecewiseLinearFn scale_values(double s) const;
    PiecewiseLinearFn negate() const { return scale_values(-1.0); }
    // x -> a+b-x on the same domain
    PiecewiseLinearFn reflect() const;
    // x -> (x - c0)/c1, i.e. the new function lives on c0 + c1*[old domain]; c1 > 0
    PiecewiseLinearFn map_x(double c0, double c1) const;

private:
    std::vector<double> xs_;
    std::vector<double> left_;
    std::vector<double> right_;
};

// ---- constructions ----------------------------------------------------------------

PiecewiseLinearFn make_affine(const Interval& interval, double slope, double intercept);
PiecewiseLinearFn make_constant(const Interval& interval, double c);
// unit jump at c: 0 to the left, 1 to the right; requires a < c < b
PiecewiseLinearFn make_heaviside(const Interval& interval, double c);
// monotone staircase v(x) = h*floor(x/h) on (0,1); every pairwise difference is a multiple of h
PiecewiseLinearFn make_unit_staircase(double jump_size);

// Flattening spec: constant plateaus next to the two anchors, affine bridges to a
// boundary-matching target outside. Negative widths select the default thirds split
// (bridge and plateau each one third of the anchor-to-boundary distance).
struct FlattenSpec {
    double anchor_lo = 0.0;
    double anchor_hi = 0.0;
    double plateau_width_lo = -1.0;
    double plateau_width_hi = -1.0;
    double bridge_width_lo = -1.0;
    double bridge_width_hi = -1.0;
};

PiecewiseLinearFn flatten_near_points(const PiecewiseLinearFn& u, const FlattenSpec& spec,
                                      const PiecewiseLinearFn& boundary_target);

// periodized tiling: g(x) = (1/n) h(n(x - j/n)) + j/n on each cell (j/n, (j+1)/n)
PiecewiseLinearFn tile_rescale(const PiecewiseLinearFn& h, int n);

// g(x) = u(n x)/n maps a function on (0,n) to (0,1)
PiecewiseLinearFn spatial_block_rescale(const PiecewiseLinearFn& u, int n);

PiecewiseLinearFn glue(const std::vector<std::pair<Interval, PiecewiseLinearFn>>& pieces);

// ---- measurements -----------------------------------------------------------------

// exact per-segment integral of |A + Bx|^p
double lp_integral_affine(double a_coef, double b_coef, double x0, double x1, double p);

double lp_distance(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double p,
                   const Interval& interval);

// integral over {x in window : x+h in window} of |(u(x+h)-u(x))/h|^p
double difference_quotient_norm(const PiecewiseLinearFn& u, double h, double p,
                                const Interval& window);

double total_variation(const PiecewiseLinearFn& u);
// p=1: total variation; p>1: sum |slope|^p len, +inf when an effective jump is present
double sobolev_seminorm_p(const PiecewiseLinearFn& u, double p);

// ---- serialization ----------------------------------------------------------------

void write_fn(std::ostream& os, const PiecewiseLinearFn& fn, bool truncation_of_line = false);
void write_fn_file(const std::string& path, const PiecewiseLinearFn& fn,
                   bool truncation_of_line = false);
PiecewiseLinearFn read_fn(std::istream& is);
PiecewiseLinearFn read_fn_file(const std::string& path);
void write_samples_csv(std::ostream& os, const PiecewiseLinearFn& fn, int samples);

} // namespace gammalab
