#pragma once

#include <cmath>
#include <vector>

#include "restrictlab/common.hpp"

namespace restrictlab::quadrature {

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline GaussRule gauss_legendre(std::size_t n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline const GaussRule& gauss_legendre_64() {
    static const GaussRule rule = gauss_legendre(64);
    return rule;
}

/// Integrates f over [a, b] with 64-point Gauss-Legendre panels; the panel
/// count grows with `oscillations` so that each panel sees only a few cycles.
template <typename F>
auto integrate_panels(F&& f, double a, double b, double oscillations) {
    const GaussRule& rule = gauss_legendre_64();
    std::size_t panels = std::size_t(std::max(1.0, std::ceil(oscillations / 4.0)));
    using R = decltype(f(a));
    R total{};
    for (std::size_t p = 0; p < panels; ++p) {
        double lo = a + (b - a) * double(p) / double(panels);
        double hi = a + (b - a) * double(p + 1) / double(panels);
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        R acc{};
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * acc;
    }
    return total;
}

/// Chebyshev interpolant of a smooth function on [a, b].
class ChebyshevFit {
public:
    template <typename F>
    ChebyshevFit(F&& f, double a, double b, std::size_t degree) : a_(a), b_(b), coeff_(degree + 1) {
        const std::size_t m = degree + 1;
        std::vector<double> values(m);
        for (std::size_t j = 0; j < m; ++j) {
            double theta = M_PI * (double(j) + 0.5) / double(m);
            double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
            values[j] = f(x);
        }
        for (std::size_t k = 0; k < m; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                acc += values[j] * std::cos(M_PI * double(k) * (double(j) + 0.5) / double(m));
            coeff_[k] = 2.0 * acc / double(m);
        }
        coeff_[0] *= 0.5;
    }

    double operator()(double x) const {
        double u = (2.0 * x - a_ - b_) / (b_ - a_);
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = coeff_.size(); k-- > 1;) {
            double tmp = 2.0 * u * b1 - b2 + coeff_[k];
            b2 = b1;
            b1 = tmp;
        }
        return u * b1 - b2 + coeff_[0];
    }

private:
    double a_, b_;
    std::vector<double> coeff_;
};

} // namespace restrictlab::quadrature
