#include "fracheat/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace fracheat::quad {

namespace {

// Newton iteration on Legendre polynomials; standard construction.
GaussRule make_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
    return it->second;
}

double wynn_limit(const std::vector<double>& partial_sums) {
    const std::size_t n = partial_sums.size();
    if (n == 0) return 0.0;
    if (n == 1) return partial_sums[0];
    // eps[k] columns built in place; keep the last valid even column entry.
    std::vector<double> cur = partial_sums;
    std::vector<double> prev(n + 1, 0.0); // eps_{-1} = 0
    double best = partial_sums.back();
    bool even = true;
    while (cur.size() >= 2) {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            const double diff = cur[i + 1] - cur[i];
            if (diff == 0.0 || !std::isfinite(diff)) return best;
            next[i] = prev[i + 1] + 1.0 / diff;
        }
        prev = cur;
        cur = next;
        even = !even;
        if (even && !cur.empty() && std::isfinite(cur.back())) best = cur.back();
    }
    return best;
}

} // namespace fracheat::quad
