#include "gammalab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gammalab/errors.hpp"
#include "gammalab/quadrature.hpp"

namespace gammalab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::indicator_step: return "indicator_step";
        case ProfileKind::saturating_power: return "saturating_power";
        case ProfileKind::compact_bump: return "compact_bump";
        case ProfileKind::tabulated: return "tabulated";
    }
    return "?";
}

PhiProfile PhiProfile::indicator_step(double p, double scale) {
    if (!(p >= 1.0) || !(scale > 0.0)) throw InvalidParameter("indicator_step: need p >= 1, scale > 0");
    PhiProfile phi;
    phi.kind_ = ProfileKind::indicator_step;
    phi.p_ = p;
    phi.scale_ = scale;
    phi.jumps_ = {1.0};
    phi.structure_ = {1.0};
    phi.zero_threshold_ = 1.0;
    phi.support_upper_ = kInf;
    phi.tail_ = 1.0;
    phi.alpha_ = scale; // phi vanishes on [0,1]; any positive constant works
    phi.beta_ = scale;
    return phi;
}

PhiProfile PhiProfile::saturating_power(double p, double scale) {
    if (!(p >= 1.0) || !(scale > 0.0)) throw InvalidParameter("saturating_power: need p >= 1, scale > 0");
    PhiProfile phi;
    phi.kind_ = ProfileKind::saturating_power;
    phi.p_ = p;
    phi.scale_ = scale;
    phi.structure_ = {1.0};
    phi.zero_threshold_ = 0.0;
    phi.support_upper_ = kInf;
    phi.tail_ = 1.0;
    phi.alpha_ = scale;
    phi.beta_ = scale;
    return phi;
}

PhiProfile PhiProfile::compact_bump(double p, double scale) {
    if (!(p >= 1.0) || !(scale > 0.0)) throw InvalidParameter("compact_bump: need p >= 1, scale > 0");
    PhiProfile phi;
    phi.kind_ = ProfileKind::compact_bump;
    phi.p_ = p;
    phi.scale_ = scale;
    phi.jumps_ = {1.0};
    phi.structure_ = {1.0};
    phi.zero_threshold_ = 0.0;
    phi.support_upper_ = 1.0;
    phi.tail_ = 0.0;
    phi.alpha_ = scale;
    phi.beta_ = scale;
    return phi;
}

PhiProfile PhiProfile::tabulated(double p, std::vector<double> ts, std::vector<double> vs,
                                 std::vector<double> declared_jumps, double scale) {
    if (!(p >= 1.0) || !(scale > 0.0)) throw InvalidParameter("tabulated: need p >= 1, scale > 0");
    if (ts.size() != vs.size() || ts.size() < 2)
        throw InvalidParameter("tabulated profile needs >= 2 samples");
    if (ts.front() != 0.0 || vs.front() != 0.0)
        throw InvalidParameter("tabulated profile must start with the sample (0, 0)");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!std::isfinite(ts[i]) || !std::isfinite(vs[i]) || vs[i] < 0.0)
            throw InvalidParameter("tabulated samples must be finite with phi >= 0");
        if (i > 0 && ts[i] < ts[i - 1])
            throw InvalidParameter("tabulated sample abscissae must be non-decreasing");
    }
    std::sort(declared_jumps.begin(), declared_jumps.end());
    // duplicated abscissae must match declared jumps one-to-one
    std::vector<double> dup;
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] == ts[i - 1]) {
            if (ts[i] <= 0.0) throw InvalidParameter("tabulated jump locations must be positive");
            dup.push_back(ts[i]);
        }
    if (dup != declared_jumps)
        throw InvalidParameter("tabulated jump directives must match duplicated sample abscissae");

    PhiProfile phi;
    phi.kind_ = ProfileKind::tabulated;
    phi.p_ = p;
    phi.scale_ = scale;
    phi.jumps_ = declared_jumps;
    phi.tab_t_ = std::move(ts);
    phi.tab_v_ = std::move(vs);
    phi.finalize();
    return phi;
}

void PhiProfile::finalize() {
    // structure points: all distinct knots (0 excluded)
    structure_.clear();
    for (double t : tab_t_)
        if (t > 0.0) structure_.push_back(t);
    structure_.erase(std::unique(structure_.begin(), structure_.end()), structure_.end());

    tab_cum_.assign(tab_t_.size(), 0.0);
    for (std::size_t i = 1; i < tab_t_.size(); ++i)
        tab_cum_[i] = tab_cum_[i - 1] +
                      0.5 * (tab_v_[i - 1] + tab_v_[i]) * (tab_t_[i] - tab_t_[i - 1]);

    tail_ = tab_v_.back();
    zero_threshold_ = 0.0;
    for (std::size_t i = 0; i < tab_t_.size(); ++i) {
        if (tab_v_[i] != 0.0) break;
        zero_threshold_ = tab_t_[i];
    }
    if (tail_ != 0.0) {
        support_upper_ = kInf;
    } else {
        support_upper_ = 0.0;
        for (std::size_t i = 0; i < tab_t_.size(); ++i)
            if (tab_v_[i] != 0.0) support_upper_ = tab_t_[i];
        // a jump down to zero keeps the support closed at the jump location
    }
    // measured bounds double as the declared constants for tabulated shapes
    double beta = 0.0;
    for (double v : tab_v_) beta = std::max(beta, v);
    beta_ = scale_ * beta;
    // exact sup of phi(t)/t^{p+1} over (0,1]: per segment the ratio (a+bt)/t^{p+1} peaks
    // either at an endpoint or at the interior critical point t* = -(p+1)a/(pb)
    double alpha = 0.0;
    for (std::size_t i = 0; i + 1 < tab_t_.size(); ++i) {
        const double t0 = tab_t_[i], t1 = tab_t_[i + 1];
        if (t1 <= t0 || t0 >= 1.0) continue;
        const double hi = std::min(t1, 1.0);
        const double b = (tab_v_[i + 1] - tab_v_[i]) / (t1 - t0);
        const double a = tab_v_[i] - b * t0;
        auto ratio = [&](double t) { return (a + b * t) / std::pow(t, p_ + 1.0); };
        if (t0 == 0.0) {
            if (tab_v_[i + 1] > 0.0) { // linear head: no finite growth constant exists
                alpha = std::numeric_limits<double>::infinity();
                break;
            }
            continue;
        }
        alpha = std::max(alpha, std::max(ratio(t0), ratio(hi)));
        if (b != 0.0) {
            const double tc = -(p_ + 1.0) * a / (p_ * b);
            if (tc > t0 && tc < hi) alpha = std::max(alpha, ratio(tc));
        }
    }
    alpha_ = scale_ * std::max(alpha, 1e-12);
    if (std::isinf(alpha)) alpha_ = alpha;
}

PhiProfile PhiProfile::with_declared_bounds(double alpha, double beta) const {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw InvalidParameter("declared admissibility bounds must be positive");
    PhiProfile out = *this;
    out.alpha_ = alpha;
    out.beta_ = beta;
    return out;
}

PhiProfile PhiProfile::load_tabulated(const std::string& path, double p, double scale) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open profile table: " + path);
    std::vector<double> ts, vs, jumps;
    std::string line;
    while (std::getline(is, line)) {
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') {
            std::istringstream ls(line.substr(pos + 1));
            std::string kw;
            if (ls >> kw && kw == "jump") {
                double t;
                if (!(ls >> t)) throw IoError("profile table: malformed '# jump <t>' directive");
                jumps.push_back(t);
            }
            continue;
        }
        std::istringstream ls(line);
        double t, v;
        if (!(ls >> t >> v)) throw IoError("profile table: expected 't value' rows");
        ts.push_back(t);
        vs.push_back(v);
    }
    try {
        return tabulated(p, std::move(ts), std::move(vs), std::move(jumps), scale);
    } catch (const InvalidParameter& e) {
        throw IoError("profile table " + path + ": " + e.what());
    }
}

double PhiProfile::base_eval(double t) const {
    switch (kind_) {
        case ProfileKind::indicator_step:
            return t > 1.0 ? 1.0 : 0.0;
        case ProfileKind::saturating_power:
            return t <= 1.0 ? std::pow(t, p_ + 1.0) : 1.0;
        case ProfileKind::compact_bump:
            return t <= 1.0 ? std::pow(t, p_ + 1.0) : 0.0;
        case ProfileKind::tabulated: {
            if (t <= 0.0) return 0.0;
            if (t >= tab_t_.back()) return tail_;
            // first index with tab_t_ >= t; equal abscissa returns the left sample
            const auto it = std::lower_bound(tab_t_.begin(), tab_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - tab_t_.begin());
            if (tab_t_[i] == t) return tab_v_[i];
            const double t0 = tab_t_[i - 1], t1 = tab_t_[i];
            const double w = (t - t0) / (t1 - t0);
            return tab_v_[i - 1] + w * (tab_v_[i] - tab_v_[i - 1]);
        }
    }
    return 0.0;
}

double PhiProfile::base_left_limit(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
        case ProfileKind::indicator_step:
            return t <= 1.0 ? 0.0 : 1.0;
        case ProfileKind::saturating_power:
            return t <= 1.0 ? std::pow(t, p_ + 1.0) : 1.0;
        case ProfileKind::compact_bump:
            return t <= 1.0 ? std::pow(t, p_ + 1.0) : 0.0;
        case ProfileKind::tabulated:
            return base_eval(t); // eval already takes the left sample at duplicated knots
    }
    return 0.0;
}

double PhiProfile::base_right_limit(double t) const {
    switch (kind_) {
        case ProfileKind::indicator_step:
            return t >= 1.0 ? 1.0 : 0.0;
        case ProfileKind::saturating_power:
            return t < 1.0 ? std::pow(std::max(t, 0.0), p_ + 1.0) : 1.0;
        case ProfileKind::compact_bump:
            return t < 1.0 ? std::pow(std::max(t, 0.0), p_ + 1.0) : 0.0;
        case ProfileKind::tabulated: {
            if (t < 0.0) return 0.0;
            if (t >= tab_t_.back()) return tail_;
            const auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - tab_t_.begin());
            // at a (possibly duplicated) knot the rightmost sample at t carries the limit
            if (i > 0 && tab_t_[i - 1] == t) return tab_v_[i - 1];
            return base_eval(t);
        }
    }
    return 0.0;
}

double PhiProfile::eval(double t) const {
    if (t < 0.0) throw InvalidParameter("phi is defined on t >= 0");
    return scale_ * base_eval(t);
}

double PhiProfile::eval_delta(double t, double delta) const {
    if (!(delta > 0.0)) throw InvalidParameter("eval_delta requires delta > 0");
    return std::pow(delta, p_) * eval(t / delta);
}

double PhiProfile::base_antiderivative(double w) const {
    if (w <= 0.0) return 0.0;
    switch (kind_) {
        case ProfileKind::indicator_step:
            return std::max(w - 1.0, 0.0);
        case ProfileKind::saturating_power:
            return w <= 1.0 ? std::pow(w, p_ + 2.0) / (p_ + 2.0)
                            : 1.0 / (p_ + 2.0) + (w - 1.0);
        case ProfileKind::compact_bump:
            return std::pow(std::min(w, 1.0), p_ + 2.0) / (p_ + 2.0);
        case ProfileKind::tabulated: {
            if (w >= tab_t_.back()) return tab_cum_.back() + tail_ * (w - tab_t_.back());
            const auto it = std::lower_bound(tab_t_.begin(), tab_t_.end(), w);
            std::size_t i = static_cast<std::size_t>(it - tab_t_.begin());
            if (tab_t_[i] == w) return tab_cum_[i];
            const double t0 = tab_t_[i - 1], t1 = tab_t_[i];
            const double frac = (w - t0) / (t1 - t0);
            const double vw = tab_v_[i - 1] + frac * (tab_v_[i] - tab_v_[i - 1]);
            return tab_cum_[i - 1] + 0.5 * (tab_v_[i - 1] + vw) * (w - t0);
        }
    }
    return 0.0;
}

double PhiProfile::antiderivative(double w) const {
    return scale_ * base_antiderivative(w);
}

double PhiProfile::inf_on(double lo, double hi, std::optional<double> puncture) const {
    lo = std::max(lo, 0.0);
    if (!(lo <= hi)) return kInf;
    double best = kInf;
    auto consider = [&](double v) { best = std::min(best, v); };
    auto value_at = [&](double t) {
        if (puncture && t == *puncture) {
            // exclude the pointwise value; the one-sided limits stand in for the
            // punctured neighborhood (also when rounding collapsed the band onto it)
            if (t > 0.0) consider(scale_ * base_left_limit(t));
            consider(scale_ * base_right_limit(t));
            return;
        }
        consider(scale_ * base_eval(t));
    };
    value_at(lo);
    value_at(hi);
    // piece endpoints inside; every piece of every shape here is monotone, so piece
    // endpoints (approached from both sides) determine the infimum
    for (double s : structure_) {
        if (s > lo && s < hi) {
            consider(scale_ * base_left_limit(s));
            consider(scale_ * base_right_limit(s));
            if (!(puncture && s == *puncture)) consider(scale_ * base_eval(s));
        }
    }
    if (puncture && *puncture > lo && *puncture < hi) {
        consider(scale_ * base_left_limit(*puncture));
        consider(scale_ * base_right_limit(*puncture));
    }
    return best;
}

PhiProfile PhiProfile::with_scale(double scale) const {
    if (!(scale > 0.0)) throw InvalidParameter("profile scale must be positive");
    PhiProfile out = *this;
    const double ratio = scale / scale_;
    out.scale_ = scale;
    out.alpha_ *= ratio;
    out.beta_ *= ratio;
    out.normalized_ = false;
    return out;
}

PhiProfile PhiProfile::with_normalized_flag(bool value) const {
    PhiProfile out = *this;
    out.normalized_ = value;
    return out;
}

std::string PhiProfile::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(p=" << p_ << ", scale=" << scale_
       << (normalized_ ? ", normalized" : "") << ")";
    return os.str();
}

double normalization_integral(const PhiProfile& profile) {
    const double p = profile.p();
    const auto& structure = profile.structure_points();
    const double head_end = std::max(profile.zero_threshold(), 0.0);
    const double t_last = structure.empty() ? 1.0 : structure.back();

    auto integrand = [&](double t) { return profile.eval(t) * std::pow(t, -(p + 1.0)); };

    double total = 0.0;
    double err = 0.0;
    bool ok = true;
    // piece boundaries on (0, t_last]; the head below zero_threshold contributes nothing
    std::vector<double> cuts;
    if (head_end == 0.0)
        cuts.push_back(1e-30); // the head is integrable only if phi decays fast enough
    else
        cuts.push_back(head_end);
    for (double s : structure)
        if (s > cuts.front() && s <= t_last) cuts.push_back(s);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto r = adaptive_gauss(integrand, cuts[i], cuts[i + 1], 1e-13, 1e-12, 7, 48);
        total += r.value;
        err += r.error;
        ok = ok && r.converged;
    }
    // exact constant tail beyond the last structure point
    const double tail = profile.tail_value();
    if (tail != 0.0) total += tail / (p * std::pow(t_last, p));
    if (!ok || err > 1e-9)
        throw QuadratureFailure("normalization integral did not converge to 1e-9 (head of phi too singular?)");
    return total;
}

PhiProfile normalize(const PhiProfile& profile) {
    const double integral = normalization_integral(profile);
    if (!(integral > 0.0)) throw DegenerateProfile("phi integrates to zero; cannot normalize");
    const double factor = 0.5 / integral;
    PhiProfile out = profile.with_scale(profile.scale() * factor);
    return out.with_normalized_flag(true);
}

AdmissibilityReport verify_conditions(const PhiProfile& profile) {
    AdmissibilityReport report;
    const double p = profile.p();
    const int grid = 4096;

    // smallest growth constant seen on a dense grid of (0,1], plus one-sided limits
    // at the discontinuities (checked from both sides)
    double alpha = 0.0;
    for (int i = 1; i <= grid; ++i) {
        const double t = static_cast<double>(i) / grid;
        alpha = std::max(alpha, profile.eval(t) / std::pow(t, p + 1.0));
    }
    for (double s : profile.jump_points()) {
        if (s > 0.0 && s <= 1.0) {
            const double denom = std::pow(s, p + 1.0);
            alpha = std::max(alpha, profile.eval(std::nextafter(s, 0.0)) / denom);
            alpha = std::max(alpha, profile.eval(s) / denom);
            if (s < 1.0) alpha = std::max(alpha, profile.eval(std::nextafter(s, 2.0)) / denom);
        }
    }
    report.alpha_measured = alpha;
    report.growth_ok = std::isfinite(profile.alpha()) && alpha <= profile.alpha() * (1.0 + 1e-9) + 1e-12;

    double beta = profile.tail_value();
    const double t_max = profile.structure_points().empty() ? 1.0 : profile.structure_points().back();
    for (int i = 0; i <= grid; ++i) {
        const double t = t_max * static_cast<double>(i) / grid;
        beta = std::max(beta, profile.eval(t));
    }
    for (double s : profile.jump_points()) {
        beta = std::max(beta, profile.eval(std::nextafter(s, 0.0)));
        beta = std::max(beta, profile.eval(std::nextafter(s, kInf)));
    }
    report.beta_measured = beta;
    report.bounded_ok = beta <= profile.beta() * (1.0 + 1e-9) + 1e-12;

    try {
        report.normalization = normalization_integral(profile);
        report.normalized_ok = std::abs(report.normalization - 0.5) <= 1e-9;
    } catch (const QuadratureFailure& e) {
        report.normalization = kInf;
        report.normalized_ok = false;
        report.normalization_failure = e.what();
    }
    return report;
}

std::string AdmissibilityReport::format() const {
    std::ostringstream os;
    os << "growth condition:    " << (growth_ok ? "pass" : "FAIL")
       << " (alpha measured = " << alpha_measured << ")\n";
    os << "boundedness:         " << (bounded_ok ? "pass" : "FAIL")
       << " (beta measured = " << beta_measured << ")\n";
    os << "normalization:       " << (normalized_ok ? "pass" : "FAIL")
       << " (integral = " << normalization << ")";
    if (normalization_failure) os << " [" << *normalization_failure << "]";
    os << "\n";
    return os.str();
}

} // namespace gammalab
