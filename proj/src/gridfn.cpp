#include "gammalab/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gammalab/errors.hpp"

namespace gammalab {

namespace {

void format_g17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::string g17(double v) {
    std::string s;
    format_g17(s, v);
    return s;
}

} // namespace

Interval make_interval(double a, double b, bool truncation_of_line) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw InvalidParameter("interval endpoints must be finite with a < b");
    return {a, b, truncation_of_line};
}

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<double> xs, std::vector<double> left,
                                     std::vector<double> right)
    : xs_(std::move(xs)), left_(std::move(left)), right_(std::move(right)) {
    if (xs_.size() < 2 || left_.size() != xs_.size() || right_.size() != xs_.size())
        throw InvalidParameter("piecewise-linear function needs >= 2 breakpoints and matching value arrays");
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i)
        if (!(xs_[i] < xs_[i + 1]))
            throw InvalidParameter("breakpoints must be strictly increasing");
    for (double v : xs_)
        if (!std::isfinite(v)) throw InvalidParameter("breakpoints must be finite");
    for (std::size_t i = 0; i < xs_.size(); ++i)
        if (!std::isfinite(left_[i]) || !std::isfinite(right_[i]))
            throw InvalidParameter("function values must be finite");
    // the outer sides of the domain endpoints are not part of the function
    left_.front() = right_.front();
    right_.back() = left_.back();
}

PiecewiseLinearFn PiecewiseLinearFn::continuous(std::vector<double> xs, std::vector<double> values) {
    return PiecewiseLinearFn(std::move(xs), values, values);
}

double PiecewiseLinearFn::eval(double x) const {
    if (x <= xs_.front()) return right_.front();
    if (x >= xs_.back()) return left_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    if (x == xs_[i]) return right_[i];
    const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return right_[i] + t * (left_[i + 1] - right_[i]);
}

double PiecewiseLinearFn::eval_left(double x) const {
    if (x <= xs_.front()) return right_.front();
    if (x >= xs_.back()) return left_.back();
    const auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
    if (it != xs_.end() && *it == x) return left_[static_cast<std::size_t>(it - xs_.begin())];
    return eval(x);
}

double PiecewiseLinearFn::segment_slope(std::size_t i) const {
    return (left_[i + 1] - right_[i]) / (xs_[i + 1] - xs_[i]);
}

double PiecewiseLinearFn::effective_jump(std::size_t i) const {
    const double j = right_[i] - left_[i];
    return std::abs(j) <= kJumpSnap ? 0.0 : j;
}

bool PiecewiseLinearFn::is_continuous() const {
    for (std::size_t i = 1; i + 1 < xs_.size(); ++i)
        if (effective_jump(i) != 0.0) return false;
    return true;
}

PiecewiseLinearFn PiecewiseLinearFn::restricted(const Interval& window) const {
    const double a = window.a, b = window.b;
    const double tol = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
    if (a < xs_.front() - tol || b > xs_.back() + tol)
        throw InvalidParameter("restriction window exceeds the function domain");
    std::vector<double> xs{a};
    std::vector<double> lv{eval(a)};
    std::vector<double> rv{eval(a)};
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (xs_[i] > a && xs_[i] < b) {
            xs.push_back(xs_[i]);
            lv.push_back(left_[i]);
            rv.push_back(right_[i]);
        }
    }
    // value arriving at b from the left
    double vb;
    if (b >= xs_.back())
        vb = left_.back();
    else {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), b);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        if (b == xs_[i])
            vb = left_[i];
        else {
            const double t = (b - xs_[i]) / (xs_[i + 1] - xs_[i]);
            vb = right_[i] + t * (left_[i + 1] - right_[i]);
        }
    }
    xs.push_back(b);
    lv.push_back(vb);
    rv.push_back(vb);
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

PiecewiseLinearFn PiecewiseLinearFn::shift_values(double c) const {
    auto lv = left_, rv = right_;
    for (auto& v : lv) v += c;
    for (auto& v : rv) v += c;
    return PiecewiseLinearFn(xs_, std::move(lv), std::move(rv));
}

PiecewiseLinearFn PiecewiseLinearFn::scale_values(double s) const {
    auto lv = left_, rv = right_;
    for (auto& v : lv) v *= s;
    for (auto& v : rv) v *= s;
    return PiecewiseLinearFn(xs_, std::move(lv), std::move(rv));
}

PiecewiseLinearFn PiecewiseLinearFn::reflect() const {
    const double s = xs_.front() + xs_.back();
    const std::size_t n = xs_.size();
    std::vector<double> xs(n), lv(n), rv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - 1 - i;
        xs[i] = s - xs_[j];
        // left/right swap under reflection
        lv[i] = right_[j];
        rv[i] = left_[j];
    }
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

PiecewiseLinearFn PiecewiseLinearFn::map_x(double c0, double c1) const {
    if (!(c1 > 0.0)) throw InvalidParameter("map_x expects a positive x-scale");
    auto xs = xs_;
    for (auto& x : xs) x = c0 + c1 * x;
    return PiecewiseLinearFn(std::move(xs), left_, right_);
}

PiecewiseLinearFn make_affine(const Interval& interval, double slope, double intercept) {
    make_interval(interval.a, interval.b);
    return PiecewiseLinearFn::continuous({interval.a, interval.b},
                                         {slope * interval.a + intercept, slope * interval.b + intercept});
}

PiecewiseLinearFn make_constant(const Interval& interval, double c) {
    return make_affine(interval, 0.0, c);
}

PiecewiseLinearFn make_heaviside(const Interval& interval, double c) {
    if (!(interval.a < c && c < interval.b))
        throw InvalidParameter("heaviside jump location must lie strictly inside the interval");
    return PiecewiseLinearFn({interval.a, c, interval.b}, {0.0, 0.0, 1.0}, {0.0, 1.0, 1.0});
}

PiecewiseLinearFn make_unit_staircase(double jump_size) {
    if (!(jump_size > 0.0) || !(jump_size < 1.0))
        throw InvalidParameter("staircase jump size must lie in (0,1)");
    std::vector<double> xs{0.0};
    std::vector<double> lv{0.0};
    std::vector<double> rv{0.0};
    int k = 1;
    for (;; ++k) {
        const double x = k * jump_size;
        if (x >= 1.0 - 1e-15) break;
        xs.push_back(x);
        lv.push_back((k - 1) * jump_size);
        rv.push_back(k * jump_size);
    }
    xs.push_back(1.0);
    lv.push_back((k - 1) * jump_size);
    rv.push_back((k - 1) * jump_size);
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

PiecewiseLinearFn flatten_near_points(const PiecewiseLinearFn& u, const FlattenSpec& spec,
                                      const PiecewiseLinearFn& boundary_target) {
    const double a = u.x_lo(), b = u.x_hi();
    const double x1 = spec.anchor_lo, x2 = spec.anchor_hi;
    if (!(a < x1 && x1 < x2 && x2 < b))
        throw InvalidSpec("flatten anchors must satisfy a < x1 < x2 < b");

    const double third_lo = (x1 - a) / 3.0;
    const double third_hi = (b - x2) / 3.0;
    const double wp1 = spec.plateau_width_lo < 0.0 ? third_lo : spec.plateau_width_lo;
    const double wb1 = spec.bridge_width_lo < 0.0 ? third_lo : spec.bridge_width_lo;
    const double wp2 = spec.plateau_width_hi < 0.0 ? third_hi : spec.plateau_width_hi;
    const double wb2 = spec.bridge_width_hi < 0.0 ? third_hi : spec.bridge_width_hi;
    if (wp1 < 0 || wb1 < 0 || wp2 < 0 || wb2 < 0) throw InvalidSpec("flatten widths must be >= 0");
    const double b1 = x1 - wp1 - wb1; // bridge start
    const double p1 = x1 - wp1;       // plateau start
    const double p2 = x2 + wp2;       // plateau end
    const double b2 = x2 + wp2 + wb2; // bridge end
    if (b1 < a - 1e-15 || b2 > b + 1e-15)
        throw InvalidSpec("flatten plateau/bridge regions overlap the domain boundary");

    const double plateau_val_lo = u.eval(x1); // value carried from just inside [x1, x2]
    const double plateau_val_hi = [&] {
        // left-side limit of u at x2
        const auto& xs = u.xs();
        const auto it = std::lower_bound(xs.begin(), xs.end(), x2);
        if (it != xs.end() && *it == x2)
            return u.left_values()[static_cast<std::size_t>(it - xs.begin())];
        return u.eval(x2);
    }();

    std::vector<std::pair<Interval, PiecewiseLinearFn>> pieces;
    auto push = [&pieces](double lo, double hi, const PiecewiseLinearFn& f) {
        if (hi - lo > 0.0) pieces.emplace_back(Interval{lo, hi, false}, f.restricted({lo, hi, false}));
    };
    auto push_const = [&pieces](double lo, double hi, double v) {
        if (hi - lo > 0.0) pieces.emplace_back(Interval{lo, hi, false}, make_constant({lo, hi, false}, v));
    };
    auto push_bridge = [&pieces](double lo, double hi, double vlo, double vhi) {
        if (hi - lo > 0.0) {
            const double slope = (vhi - vlo) / (hi - lo);
            pieces.emplace_back(Interval{lo, hi, false},
                                make_affine({lo, hi, false}, slope, vlo - slope * lo));
        }
    };

    push(a, b1, boundary_target);
    push_bridge(b1, p1, boundary_target.eval(b1), plateau_val_lo);
    push_const(p1, x1, plateau_val_lo);
    push(x1, x2, u);
    push_const(x2, p2, plateau_val_hi);
    push_bridge(p2, b2, plateau_val_hi, boundary_target.eval(b2));
    push(b2, b, boundary_target);
    return glue(pieces);
}

PiecewiseLinearFn tile_rescale(const PiecewiseLinearFn& h, int n) {
    if (n <= 0) throw InvalidParameter("tile_rescale requires n >= 1");
    const double tol = 1e-12;
    if (std::abs(h.x_lo()) > tol || std::abs(h.x_hi() - 1.0) > tol)
        throw InvalidParameter("tile_rescale expects a function on (0,1)");
    if (n == 1) return h;
    const auto& xs = h.xs();
    const auto& lv = h.left_values();
    const auto& rv = h.right_values();
    std::vector<double> oxs, olv, orv;
    oxs.reserve(n * xs.size());
    for (int j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = (xs[i] + j) / n;
            const double l = (lv[i] + j) / n;
            const double r = (rv[i] + j) / n;
            if (i == 0) {
                if (j == 0) {
                    oxs.push_back(x);
                    olv.push_back(l);
                    orv.push_back(r);
                } else {
                    // shared cell boundary: left value comes from the previous cell's end
                    olv.back() = (lv.back() + (j - 1)) / static_cast<double>(n);
                    orv.back() = r;
                }
            } else {
                oxs.push_back(x);
                olv.push_back(l);
                orv.push_back(r);
            }
        }
    }
    return PiecewiseLinearFn(std::move(oxs), std::move(olv), std::move(orv));
}

PiecewiseLinearFn spatial_block_rescale(const PiecewiseLinearFn& u, int n) {
    if (n <= 0) throw InvalidParameter("spatial_block_rescale requires n >= 1");
    const double tol = 1e-12 * (1.0 + n);
    if (std::abs(u.x_lo()) > tol || std::abs(u.x_hi() - n) > tol)
        throw InvalidParameter("spatial_block_rescale expects a function on (0,n)");
    std::vector<double> xs = u.xs(), lv = u.left_values(), rv = u.right_values();
    for (auto& x : xs) x /= n;
    for (auto& v : lv) v /= n;
    for (auto& v : rv) v /= n;
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

PiecewiseLinearFn glue(const std::vector<std::pair<Interval, PiecewiseLinearFn>>& pieces) {
    if (pieces.empty()) throw InvalidSpec("glue needs at least one piece");
    auto sorted = pieces;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& l, const auto& r) { return l.first.a < r.first.a; });
    double span = sorted.back().first.b - sorted.front().first.a;
    const double tol = 1e-12 * (1.0 + std::abs(span));
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
        if (std::abs(sorted[k].first.b - sorted[k + 1].first.a) > tol)
            throw InvalidSpec("glue pieces must partition the target interval (no gaps or overlaps)");

    std::vector<double> xs, lv, rv;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto piece = sorted[k].second.restricted(sorted[k].first);
        const auto& pxs = piece.xs();
        const auto& plv = piece.left_values();
        const auto& prv = piece.right_values();
        for (std::size_t i = 0; i < pxs.size(); ++i) {
            if (i == 0 && k > 0) {
                // junction: previous piece supplies the left value
                rv.back() = prv[0];
            } else {
                xs.push_back(pxs[i]);
                lv.push_back(plv[i]);
                rv.push_back(prv[i]);
            }
        }
    }
    return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
}

double lp_integral_affine(double a_coef, double b_coef, double x0, double x1, double p) {
    if (x1 <= x0) return 0.0;
    if (b_coef == 0.0) return std::pow(std::abs(a_coef), p) * (x1 - x0);
    const double w0 = a_coef + b_coef * x0;
    const double w1 = a_coef + b_coef * x1;
    auto g = [p](double w) { // antiderivative of |w|^p up to the 1/B factor
        return std::copysign(std::pow(std::abs(w), p + 1.0), w);
    };
    return (g(w1) - g(w0)) / (b_coef * (p + 1.0));
}

namespace {

// merged breakpoints of u and v inside [a,b]
std::vector<double> merged_grid(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v,
                                double a, double b) {
    std::vector<double> xs{a, b};
    for (double x : u.xs())
        if (x > a && x < b) xs.push_back(x);
    for (double x : v.xs())
        if (x > a && x < b) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

} // namespace

double lp_distance(const PiecewiseLinearFn& u, const PiecewiseLinearFn& v, double p,
                   const Interval& interval) {
    if (!(p >= 1.0)) throw InvalidParameter("lp_distance requires p >= 1");
    const auto xs = merged_grid(u, v, interval.a, interval.b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x0 = xs[i], x1 = xs[i + 1];
        // difference is affine on this segment; endpoint one-sided values pin it down
        const double d0 = u.eval(x0) - v.eval(x0);
        const double d1 = u.eval_left(x1) - v.eval_left(x1);
        const double slope = (d1 - d0) / (x1 - x0);
        total += lp_integral_affine(d0 - slope * x0, slope, x0, x1, p);
    }
    return std::pow(std::max(total, 0.0), 1.0 / p);
}

double difference_quotient_norm(const PiecewiseLinearFn& u, double h, double p,
                                const Interval& window) {
    if (!(h > 0.0) || !(h < window.length()))
        throw InvalidParameter("difference quotient step must satisfy 0 < h < |window|");
    if (!(p >= 1.0)) throw InvalidParameter("difference_quotient_norm requires p >= 1");
    const double a = window.a, b = window.b - h;
    std::vector<double> xs{a, b};
    for (double x : u.xs()) {
        if (x > a && x < b) xs.push_back(x);
        if (x - h > a && x - h < b) xs.push_back(x - h);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x0 = xs[i], x1 = xs[i + 1];
        const double d0 = u.eval(x0 + h) - u.eval(x0);
        const double d1 = u.eval_left(x1 + h) - u.eval_left(x1);
        const double slope = (d1 - d0) / (x1 - x0);
        total += lp_integral_affine(d0 - slope * x0, slope, x0, x1, p);
    }
    return total / std::pow(h, p);
}

double total_variation(const PiecewiseLinearFn& u) {
    double tv = 0.0;
    for (std::size_t i = 0; i < u.segment_count(); ++i)
        tv += std::abs(u.segment_end_value(i) - u.segment_start_value(i));
    for (std::size_t i = 1; i + 1 < u.breakpoint_count(); ++i) tv += std::abs(u.effective_jump(i));
    return tv;
}

double sobolev_seminorm_p(const PiecewiseLinearFn& u, double p) {
    if (!(p >= 1.0)) throw InvalidParameter("sobolev_seminorm_p requires p >= 1");
    if (p == 1.0) return total_variation(u);
    for (std::size_t i = 1; i + 1 < u.breakpoint_count(); ++i)
        if (u.effective_jump(i) != 0.0) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < u.segment_count(); ++i) {
        const double len = u.xs()[i + 1] - u.xs()[i];
        total += std::pow(std::abs(u.segment_slope(i)), p) * len;
    }
    return total;
}

void write_fn(std::ostream& os, const PiecewiseLinearFn& fn, bool truncation_of_line) {
    os << "# gamma-lab piecewise-linear function v1\n";
    os << "interval " << g17(fn.x_lo()) << " " << g17(fn.x_hi()) << " "
       << (truncation_of_line ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < fn.breakpoint_count(); ++i)
        os << g17(fn.xs()[i]) << " " << g17(fn.left_values()[i]) << " "
           << g17(fn.right_values()[i]) << "\n";
}

void write_fn_file(const std::string& path, const PiecewiseLinearFn& fn, bool truncation_of_line) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_fn(os, fn, truncation_of_line);
}

PiecewiseLinearFn read_fn(std::istream& is) {
    std::string line;
    bool have_header = false;
    std::vector<double> xs, lv, rv;
    while (std::getline(is, line)) {
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ls(line);
        if (!have_header) {
            std::string kw;
            double a, b;
            int flag;
            if (!(ls >> kw >> a >> b >> flag) || kw != "interval")
                throw IoError("function file: expected 'interval <a> <b> <flag>' header");
            have_header = true;
            continue;
        }
        double x, l, r;
        if (!(ls >> x >> l >> r)) throw IoError("function file: expected 'x left right' row");
        xs.push_back(x);
        lv.push_back(l);
        rv.push_back(r);
    }
    if (!have_header) throw IoError("function file: missing header");
    try {
        return PiecewiseLinearFn(std::move(xs), std::move(lv), std::move(rv));
    } catch (const InvalidParameter& e) {
        throw IoError(std::string("function file: ") + e.what());
    }
}

PiecewiseLinearFn read_fn_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    return read_fn(is);
}

void write_samples_csv(std::ostream& os, const PiecewiseLinearFn& fn, int samples) {
    os << "x,value\n";
    const double a = fn.x_lo(), b = fn.x_hi();
    for (int i = 0; i <= samples; ++i) {
        const double x = a + (b - a) * i / samples;
        os << g17(x) << "," << g17(fn.eval(x)) << "\n";
    }
}

} // namespace gammalab
