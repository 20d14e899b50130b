#include "gammalab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "gammalab/errors.hpp"

namespace gammalab {

namespace {

GaussRule compute_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n, symmetric roots
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

std::map<int, GaussRule> g_rules;
std::mutex g_rules_mutex;

double gauss_eval(const std::function<double(double)>& f, double a, double b,
                  const GaussRule& rule, long& evals) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    double comp = 0.0; // Neumaier compensation
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double term = rule.weights[k] * f(mid + half * rule.nodes[k]);
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    evals += static_cast<long>(rule.nodes.size());
    return (sum + comp) * half;
}

void adapt_gauss_rec(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, const GaussRule& coarse,
                     const GaussRule& fine, int depth_left, QuadResult& out) {
    const double i_coarse = gauss_eval(f, a, b, coarse, out.evals);
    const double i_fine = gauss_eval(f, a, b, fine, out.evals);
    const double err = std::abs(i_fine - i_coarse);
    if (err <= std::max(abs_tol, rel_tol * std::abs(i_fine)) || depth_left <= 0 ||
        b - a < 1e-15 * (std::abs(a) + std::abs(b) + 1.0)) {
        out.value += i_fine;
        out.error += err;
        if (depth_left <= 0 && err > std::max(abs_tol, rel_tol * std::abs(i_fine)))
            out.converged = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    adapt_gauss_rec(f, a, mid, 0.5 * abs_tol, rel_tol, coarse, fine, depth_left - 1, out);
    adapt_gauss_rec(f, mid, b, 0.5 * abs_tol, rel_tol, coarse, fine, depth_left - 1, out);
}

void adapt_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double abs_tol, double rel_tol,
                       int depth_left, QuadResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evals += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = std::abs(left + right - whole) / 15.0;
    if (err <= std::max(abs_tol, rel_tol * std::abs(left + right)) || depth_left <= 0 ||
        b - a < 1e-15 * (std::abs(a) + std::abs(b) + 1.0)) {
        out.value += left + right + (left + right - whole) / 15.0;
        out.error += err;
        if (depth_left <= 0 && err > std::max(abs_tol, rel_tol * std::abs(left + right)))
            out.converged = false;
        return;
    }
    adapt_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, rel_tol, depth_left - 1, out);
    adapt_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, rel_tol, depth_left - 1, out);
}

} // namespace

const GaussRule& gauss_rule(int order) {
    if (order < 2) throw InvalidParameter("gauss_rule: order must be >= 2");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(order);
    if (it == g_rules.end()) it = g_rules.emplace(order, compute_gauss_rule(order)).first;
    return it->second;
}

QuadResult adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int order, int max_depth) {
    QuadResult out;
    if (!(b > a)) return out;
    const GaussRule coarse = gauss_rule(order);
    const GaussRule fine = gauss_rule(2 * order + 1);
    adapt_gauss_rec(f, a, b, abs_tol, rel_tol, coarse, fine, max_depth, out);
    return out;
}

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, double rel_tol, int max_depth) {
    QuadResult out;
    if (!(b > a)) return out;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    out.evals += 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adapt_simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, max_depth, out);
    return out;
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double sum = 0.0, comp = 0.0;
        for (double v : values) {
            const double t = sum + v;
            if (std::abs(sum) >= std::abs(v))
                comp += (sum - t) + v;
            else
                comp += (v - t) + sum;
            sum = t;
        }
        return sum + comp;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

} // namespace gammalab
